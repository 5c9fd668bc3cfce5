#include "test_support.hpp"

#include <json.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <set>

using namespace oneill;
using namespace oneill::testing;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

/// Runs the command-line tool with arguments; stdout is captured.
RunResult run_lab(const std::string& args)
{
    const char* lab = std::getenv("ONEILL_LAB");
    if (!lab) return {};
    const std::string cmd = std::string("\"") + lab + "\" " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return {};
    RunResult r;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    const int status = pclose(p);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

void expect_schema(const json& row)
{
    const std::set<std::string> keys{"case", "identity", "anchor", "samples", "max_residual", "mean_residual",
                                     "tol", "pass", "skipped"};
    std::set<std::string> got;
    for (const auto& [k, v] : row.items()) got.insert(k);
    EXPECT_EQ(got, keys);
    EXPECT_TRUE(row["case"].is_string());
    EXPECT_TRUE(row["identity"].is_string());
    EXPECT_TRUE(row["anchor"].is_string());
    EXPECT_TRUE(row["samples"].is_number_integer());
    EXPECT_TRUE(row["max_residual"].is_number());
    EXPECT_TRUE(row["mean_residual"].is_number());
    EXPECT_TRUE(row["tol"].is_number());
    EXPECT_TRUE(row["pass"].is_boolean());
    EXPECT_TRUE(row["skipped"].is_string() || row["skipped"].is_null());
    if (row["skipped"].is_string()) {
        EXPECT_EQ(row["samples"].get<long>(), 0);
        EXPECT_TRUE(row["pass"].get<bool>());
    }
}

#define REQUIRE_LAB()                                                                                                  \
    if (!std::getenv("ONEILL_LAB")) GTEST_SKIP() << "ONEILL_LAB not set"

} // namespace

TEST(ReportJson, SchemaOfSingleReport)
{
    IdentityReport r;
    r.case_id = "c";
    r.identity = "ranjan";
    r.anchor = "a \"quoted\"\nline";
    r.samples = 3;
    r.max_residual = 0.1;
    r.mean_residual = 1.0 / 3.0;
    r.tol = 1e-6;
    r.pass = false;
    r.extras = {{"not_in_json", 1.0}};
    const json j = json::parse(to_json(r));
    expect_schema(j);
    EXPECT_EQ(j["anchor"].get<std::string>(), r.anchor);
    EXPECT_TRUE(j["skipped"].is_null());
    // %.17g round-trips doubles exactly.
    EXPECT_EQ(j["mean_residual"].get<double>(), 1.0 / 3.0);
    EXPECT_EQ(j["max_residual"].get<double>(), 0.1);
}

TEST(ReportJson, SkippedReport)
{
    IdentityReport r = skipped_report("killing", "anchor", 1e-6, "fibres not totally umbilic");
    r.case_id = "x";
    const json j = json::parse(to_json(r));
    expect_schema(j);
    EXPECT_EQ(j["skipped"].get<std::string>(), "fibres not totally umbilic");
}

TEST(ReportJson, NonFiniteResidualStaysValidJson)
{
    IdentityReport r;
    r.max_residual = INFINITY;
    r.mean_residual = NAN;
    r.pass = false;
    const json j = json::parse(to_json(std::vector<IdentityReport>{r}));
    ASSERT_TRUE(j.is_array());
    EXPECT_TRUE(j[0]["mean_residual"].is_null());
    EXPECT_EQ(j[0]["max_residual"].get<double>(), std::numeric_limits<double>::max());
}

TEST(ReportText, VerdictLines)
{
    IdentityReport pass;
    pass.case_id = "c";
    pass.identity = "i";
    pass.tol = 1.0;
    EXPECT_EQ(to_text(pass).substr(0, 4), "PASS");
    pass.pass = false;
    EXPECT_EQ(to_text(pass).substr(0, 4), "FAIL");
    const IdentityReport skip = skipped_report("i", "a", 1.0, "why");
    EXPECT_EQ(to_text(skip).substr(0, 4), "SKIP");
    EXPECT_NE(to_text(skip).find("skipped: why"), std::string::npos);
}

TEST(ResidualStatsTest, NonFiniteFails)
{
    ResidualStats st;
    st.add(1e-9);
    st.add(NAN);
    const IdentityReport r = st.report("i", "a", 1e-6);
    EXPECT_FALSE(r.pass);
    EXPECT_EQ(r.samples, 2);
    EXPECT_FALSE(ResidualStats().report("i", "a", 1.0).pass);
}

TEST(Cli, CheckJsonMatchesSchema)
{
    REQUIRE_LAB();
    const RunResult r = run_lab("check --case warped-lorentz-t3 --identities all --seed 42 --format json");
    ASSERT_EQ(r.exit_code, 0) << r.out;
    const json j = json::parse(r.out);
    ASSERT_TRUE(j.is_array());
    EXPECT_EQ(j.size(), identity_names().size());
    for (const auto& row : j) {
        expect_schema(row);
        EXPECT_EQ(row["case"].get<std::string>(), "warped-lorentz-t3");
    }
}

TEST(Cli, CheckJsonIsDeterministic)
{
    REQUIRE_LAB();
    const RunResult a = run_lab("check --case hopf --identities ranjan,tts --seed 7 --format json");
    const RunResult b = run_lab("check --case hopf --identities ranjan,tts --seed 7 --format json");
    ASSERT_EQ(a.exit_code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_FALSE(a.out.empty());
}

TEST(Cli, SkipExitsZeroWithReason)
{
    REQUIRE_LAB();
    const RunResult r = run_lab("check --case perturbed-nonumbilic --identities ranjan --format json");
    ASSERT_EQ(r.exit_code, 0);
    const json j = json::parse(r.out);
    ASSERT_EQ(j.size(), 1u);
    expect_schema(j[0]);
    ASSERT_TRUE(j[0]["skipped"].is_string());
    EXPECT_NE(j[0]["skipped"].get<std::string>().find("umbilic"), std::string::npos);
}

TEST(Cli, IntegrateAndGeodesicJson)
{
    REQUIRE_LAB();
    const RunResult i =
        run_lab("integrate --case warped-lorentz-t2 --formula integral_ranjan,node_sign_ledger --grid 32 --format json");
    ASSERT_EQ(i.exit_code, 0) << i.out;
    const json ji = json::parse(i.out);
    ASSERT_EQ(ji.size(), 2u);
    for (const auto& row : ji) expect_schema(row);

    const RunResult g = run_lab(
        "geodesic --case clairaut-cosh --x0 0,0,0 --v0 0.2,0.9,0.3 --dt 1e-3 --steps 2000 --clairaut --format json");
    ASSERT_EQ(g.exit_code, 0) << g.out;
    const json jg = json::parse(g.out);
    ASSERT_EQ(jg.size(), 1u);
    expect_schema(jg[0]);
    EXPECT_EQ(jg[0]["identity"].get<std::string>(), "clairaut_drift");
    EXPECT_LE(jg[0]["max_residual"].get<double>(), 1e-5);
}

TEST(Cli, FailingCheckExitsOne)
{
    REQUIRE_LAB();
    const RunResult r = run_lab("check --case hopf --identities constant_curvature --curvature 2 --format json");
    EXPECT_EQ(r.exit_code, 1);
    const json j = json::parse(r.out);
    EXPECT_FALSE(j[0]["pass"].get<bool>());
}
