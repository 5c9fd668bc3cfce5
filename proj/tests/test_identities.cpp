#include "test_support.hpp"

#include <cmath>
#include <numbers>

using namespace oneill;
using namespace oneill::testing;

namespace {

double extra(const IdentityReport& r, const std::string& key)
{
    for (const auto& [k, v] : r.extras)
        if (k == key) return v;
    throw std::out_of_range("no extra " + key);
}

IdentityReport run_one(const std::string& id, const std::string& identity, const CheckConfig& cfg = {})
{
    const auto& sub = catalog_sub(id);
    return check_identity(sub, identity, sample_grid(*sub.total), cfg);
}

void expect_pass(const IdentityReport& r, const std::string& what)
{
    EXPECT_FALSE(r.skipped.has_value()) << what << ": " << r.skipped.value_or("");
    EXPECT_TRUE(r.pass) << what << " max residual " << r.max_residual;
    EXPECT_GT(r.samples, 0) << what;
}

const char* kSphere = R"(manifold S2 { dim 2 signature 0 coords theta phi
  domain theta in [0, pi] periodic phi 2*pi
  metric { g[0][0] = 1 g[1][1] = sin(theta)^2 } })";

const char* kPlane = R"(manifold C { dim 2 signature 0 coords x y
  domain x in [-1, 1] domain y in [-1, 1]
  metric { g[0][0] = 1 g[1][1] = 1 } })";

Mat sphere_J(const Vec& x)
{
    Mat J(2, 2);
    J(0, 1) = -std::sin(x[0]);
    J(1, 0) = 1.0 / std::sin(x[0]);
    return J;
}

} // namespace

// Every catalog entry against its recorded expectations at default resolution.
TEST(Regression, CatalogExpectedOutcomes)
{
    for (const auto& entry : catalog()) {
        const LoadedCase lc = load_case(entry.id);
        SuiteContext ctx(*lc.submersion, sample_grid(*lc.submersion->total));
        for (const IdentityReport& r : run_suite(ctx)) {
            const std::string what = entry.id + "/" + r.identity;
            if (entry.expected_outcome(r.identity) == Outcome::Skip) {
                EXPECT_TRUE(r.skipped.has_value()) << what << " expected skip, max residual " << r.max_residual;
            } else {
                expect_pass(r, what);
            }
        }
    }
}

TEST(Reports, SkipAndPassInvariants)
{
    const auto& sub = catalog_sub("perturbed-nonumbilic");
    SuiteContext ctx(sub, sample_grid(*sub.total));
    for (const IdentityReport& r : run_suite(ctx)) {
        EXPECT_EQ(r.skipped.has_value(), r.samples == 0) << r.identity;
        if (!r.skipped) {
            EXPECT_EQ(r.pass, r.max_residual <= r.tol) << r.identity;
        }
        EXPECT_LE(r.mean_residual, r.max_residual) << r.identity;
        EXPECT_FALSE(r.anchor.empty());
    }
}

TEST(Reports, DeterministicForFixedGridAndSeed)
{
    const auto& sub = catalog_sub("warped-lorentz-t3");
    SuiteContext a(sub, sample_grid(*sub.total));
    SuiteContext b(sub, sample_grid(*sub.total));
    EXPECT_EQ(to_json(run_suite(a)), to_json(run_suite(b)));
}

TEST(Reports, UnknownIdentityRejected)
{
    const auto& sub = catalog_sub("hopf");
    SuiteContext ctx(sub, sample_grid(*sub.total));
    EXPECT_THROW(run_suite(ctx, {"no_such_identity"}), std::invalid_argument);
    EXPECT_THROW(run_identity(ctx, "no_such_identity"), std::invalid_argument);
}

TEST(GaussFibre, Examples)
{
    const IdentityReport flat = run_one("lorentz-flat-torus", "gauss_fibre");
    ASSERT_TRUE(flat.skipped.has_value());
    EXPECT_NE(flat.skipped->find("r < 2"), std::string::npos);
    const IdentityReport warped = run_one("warped-lorentz-t3", "gauss_fibre");
    expect_pass(warped, "warped");
    EXPECT_LE(warped.max_residual, 1e-7);
    EXPECT_TRUE(run_one("perturbed-nonumbilic", "gauss_fibre").skipped.has_value());
}

TEST(Lemma13, MixedAndHorizontalExamples)
{
    for (const char* id : {"lorentz-flat-torus", "warped-lorentz-t3", "hopf"}) {
        for (const char* identity : {"mixed_b", "mixed_c", "killing", "closed_one_form", "hRXYZ", "rho_mixed", "rhoV"}) {
            const IdentityReport r = run_one(id, identity);
            expect_pass(r, std::string(id) + "/" + identity);
            EXPECT_LE(r.max_residual, 1e-7) << id << "/" << identity;
        }
    }
}

TEST(Ranjan, HopfBothSidesEqualTwo)
{
    const auto& sub = catalog_sub("hopf");
    SuiteContext ctx(sub, sample_grid(*sub.total));
    for (std::size_t i = 0; i < ctx.size(); ++i) {
        EXPECT_NEAR(ctx.tau_HV(i), 2.0, 1e-10);
        EXPECT_NEAR(ctx.kit(i).normA2(), 2.0, 1e-10);
        EXPECT_NEAR(ctx.curvature(i).scalar(), 6.0, 1e-9);
        EXPECT_NEAR(ctx.base_curvature(i).scalar(), 8.0, 1e-9);
        EXPECT_NEAR(ctx.sH(i) - 8.0, -2.0 * ctx.kit(i).normA2(), 1e-9);
    }
    const IdentityReport r = run_identity(ctx, "ranjan");
    expect_pass(r, "hopf ranjan");
    EXPECT_EQ(r.samples, static_cast<long>(ctx.size()));
}

TEST(Ranjan, PassesOnUmbilicCompactEntriesAndSkipsOtherwise)
{
    for (const char* id : {"lorentz-flat-torus", "warped-lorentz-t3", "warped-lorentz-t2", "hopf"}) {
        const IdentityReport r = run_one(id, "ranjan");
        expect_pass(r, id);
        EXPECT_LE(r.max_residual, 1e-6) << id;
    }
    const IdentityReport p = run_one("perturbed-nonumbilic", "ranjan");
    ASSERT_TRUE(p.skipped.has_value());
    EXPECT_NE(p.skipped->find("umbilic"), std::string::npos);
    EXPECT_EQ(p.samples, 0);
}

TEST(ScalarDecomposition, WarpedAndHopf)
{
    for (const char* id : {"warped-lorentz-t3", "hopf", "lorentz-flat-torus"}) {
        for (const char* identity : {"scalar_decomposition", "sH"}) {
            const IdentityReport r = run_one(id, identity);
            expect_pass(r, std::string(id) + "/" + identity);
            EXPECT_LE(r.max_residual, 1e-7);
        }
    }
}

namespace {

// Conformally flat fibres whose warp depends on a fibre coordinate: still
// umbilic, but H varies along the fibres.
const char* kNonBasicH = R"(manifold T3v { dim 3 signature 2 coords theta phi1 phi2
  periodic theta 2*pi periodic phi1 2*pi periodic phi2 2*pi
  metric { g[0][0] = 1 g[1][1] = -(2 + cos(theta) + 0.5*sin(phi1))^2 g[2][2] = -(2 + cos(theta) + 0.5*sin(phi1))^2 } }
manifold S1 { dim 1 signature 0 coords theta periodic theta 2*pi metric { g[0][0] = 1 } }
submersion nonbasic { total T3v; base S1; map { theta = theta } aligned true }
)";

} // namespace

TEST(RhoMixed, NegativeControlDetectsNonBasicH)
{
    const auto sub = parse_submersion(kNonBasicH);
    SuiteContext ctx(*sub, sample_grid(*sub->total));
    ASSERT_TRUE(ctx.umbilic().ok) << ctx.umbilic().reason;
    EXPECT_FALSE(ctx.h_basic().ok);
    double worst = 0.0;
    for (std::size_t i = 0; i < ctx.size(); ++i) {
        const SubmersionPoint& k = ctx.kit(i);
        const Vec& X = k.leg(ctx.r());
        for (int a = 0; a < ctx.r(); ++a) worst = std::max(worst, std::abs(directional(k.gHX_basic(X), k.leg(a))));
    }
    EXPECT_GT(worst, 1e-3);
    // The relation itself holds with a nonzero right side; basicness of H fails.
    expect_pass(run_identity(ctx, "rho_mixed"), "nonbasic rho_mixed");
    EXPECT_FALSE(run_identity(ctx, "tts").pass);
    EXPECT_TRUE(run_identity(ctx, "gradient_equation").skipped.has_value());
}

TEST(RhoV, ConstantCurvatureEntryGivesMultipleOfIdentity)
{
    const auto& sub = catalog_sub("critical-exp");
    SuiteContext ctx(sub, sample_grid(*sub.total));
    const double c = -1.0;
    for (std::size_t i = 0; i < ctx.size(); ++i) {
        SampleRng rng = ctx.rng("rhoV_model", i);
        const Vec U = ctx.random_vertical(rng, i);
        const Vec rv = ctx.rhoV(i, U);
        for (int a = 0; a < ctx.m(); ++a) EXPECT_NEAR(rv[a], c * (ctx.r() - 1) * U[a], 1e-9);
    }
    expect_pass(run_identity(ctx, "rhoV"), "critical-exp rhoV");
}

TEST(RhoV, OneDimensionalFibresHaveVanishingLeftSide)
{
    const auto& sub = catalog_sub("warped-lorentz-t2");
    SuiteContext ctx(sub, sample_grid(*sub.total));
    for (std::size_t i = 0; i < ctx.size(); ++i) {
        const SubmersionPoint& k = ctx.kit(i);
        for (int a = ctx.r(); a < ctx.m(); ++a) EXPECT_NEAR(k.g(ctx.rhoV(i, k.leg(0)), k.leg(a)), 0.0, 1e-10);
    }
}

TEST(TTS, BothResidualsVanish)
{
    for (const char* id : {"warped-lorentz-t3", "hopf", "critical-exp"}) {
        const IdentityReport r = run_one(id, "tts");
        expect_pass(r, id);
        EXPECT_LE(extra(r, "residual_hR_basic"), 1e-7) << id;
        EXPECT_LE(extra(r, "residual_H_basic"), 1e-7) << id;
        EXPECT_EQ(r.max_residual, std::max(extra(r, "residual_hR_basic"), extra(r, "residual_H_basic")));
    }
}

TEST(ConstantCurvature, FittedValues)
{
    const IdentityReport flat = run_one("lorentz-flat-torus", "constant_curvature");
    expect_pass(flat, "flat");
    EXPECT_NEAR(extra(flat, "c_fit"), 0.0, 1e-12);
    const IdentityReport hopf = run_one("hopf", "constant_curvature");
    expect_pass(hopf, "hopf");
    EXPECT_NEAR(extra(hopf, "c_fit"), 1.0, 1e-9);
    EXPECT_LE(hopf.max_residual, 1e-7);
    const IdentityReport crit = run_one("critical-exp", "constant_curvature");
    expect_pass(crit, "critical-exp");
    EXPECT_NEAR(extra(crit, "c_fit"), -1.0, 1e-9);
}

TEST(ConstantCurvature, StrictConstantFailsWhenWrong)
{
    CheckConfig cfg;
    cfg.c = 1.0;
    expect_pass(run_one("hopf", "constant_curvature", cfg), "hopf c = 1");
    cfg.c = 2.0;
    const IdentityReport r = run_one("hopf", "constant_curvature", cfg);
    EXPECT_FALSE(r.skipped.has_value());
    EXPECT_FALSE(r.pass);
    EXPECT_EQ(extra(r, "c"), 2.0);
}

TEST(ConstantCurvature, NonConstantFitIsASkip)
{
    const IdentityReport r = run_one("warped-lorentz-t3", "constant_curvature");
    ASSERT_TRUE(r.skipped.has_value());
    EXPECT_NE(r.skipped->find("not constant"), std::string::npos);
}

TEST(GCSF, RoundSphereWithStandardJ)
{
    const auto& spec = parse_manifold(kSphere, "S2");
    const IdentityReport r = check_gcsf(spec, 1.0, 1.0, sphere_J, sample_grid(spec));
    expect_pass(r, "sphere");
    EXPECT_LE(r.max_residual, 1e-7);
    // μ ≠ α changes the model, so the same sphere must now fail.
    EXPECT_FALSE(check_gcsf(spec, 4.0, 0.0, sphere_J, sample_grid(spec)).pass);
}

TEST(GCSF, FlatPlaneWithStandardJ)
{
    const auto& spec = parse_manifold(kPlane, "C");
    const EndomorphismField J = [](const Vec&) {
        Mat j(2, 2);
        j(0, 1) = -1.0;
        j(1, 0) = 1.0;
        return j;
    };
    const IdentityReport r = check_gcsf(spec, 0.0, 0.0, J, sample_grid(spec));
    expect_pass(r, "plane");
    EXPECT_LE(r.max_residual, 1e-12);
}

TEST(GCSF, EqualParametersReduceToConstantModel)
{
    const auto gc = model_curvature_gcsf(0.7, 0.7);
    const auto cc = model_curvature_constant(0.7);
    const auto& spec = parse_manifold(kSphere, "S2");
    SampleRng rng(40, "gcsf_reduce", 0);
    for (int k = 0; k < 50; ++k) {
        const Vec x = random_point(spec, rng);
        const Mat g = metric_at(spec, x).g;
        const Vec E = rng.vector(2), F = rng.vector(2), G = rng.vector(2), G2 = rng.vector(2);
        EXPECT_NEAR(gc(g, sphere_J(x), E, F, G, G2), cc(g, E, F, G, G2), 1e-12);
    }
}

TEST(GCSF, NonHermitianJRejected)
{
    const auto& spec = parse_manifold(kSphere, "S2");
    const EndomorphismField J = [](const Vec&) {
        Mat j(2, 2);
        j(0, 1) = -1.0;
        j(1, 0) = 1.0; // J² = −I but not g-orthogonal off the equator
        return j;
    };
    EXPECT_THROW(check_gcsf(spec, 1.0, 1.0, J, sample_grid(spec)), AlmostHermitianError);
}

TEST(GradientEquation, ClairautCoshFitsMinusOne)
{
    const IdentityReport r = run_one("clairaut-cosh", "gradient_equation");
    expect_pass(r, "clairaut-cosh");
    EXPECT_NEAR(extra(r, "c_fit"), -1.0, 1e-6);
    EXPECT_LE(r.max_residual, 1e-6);
    EXPECT_GT(extra(r, "max_lhs"), 1e-2);
}

TEST(GradientEquation, CriticalCaseBothSidesVanish)
{
    const IdentityReport r = run_one("critical-exp", "gradient_equation");
    expect_pass(r, "critical-exp");
    EXPECT_LE(r.max_residual, 1e-9);
    EXPECT_LE(extra(r, "max_lhs"), 1e-9);
    EXPECT_LE(extra(r, "max_rhs"), 1e-9);
}

TEST(GradientEquation, FlatTorusTrivial)
{
    const IdentityReport r = run_one("lorentz-flat-torus", "gradient_equation");
    expect_pass(r, "flat");
    EXPECT_EQ(r.max_residual, 0.0);
}

TEST(SignLedger, ForcedSignsHold)
{
    for (const auto& entry : catalog()) {
        const IdentityReport r = run_one(entry.id, "sign_ledger");
        EXPECT_TRUE(r.skipped_or_passed()) << entry.id;
    }
    const IdentityReport hopf = run_one("hopf", "sign_ledger");
    EXPECT_GE(extra(hopf, "min_gAA"), 0.0);
    const IdentityReport t3 = run_one("warped-lorentz-t3", "sign_ledger");
    EXPECT_LE(extra(t3, "max_gAA"), 1e-12);
    EXPECT_GE(extra(t3, "min_gHH"), -1e-12);
}
