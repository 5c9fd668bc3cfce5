// oneill_lab: command-line driver for the submersion verification toolkit.
//
// Exit codes: 0 when every requested check passes or is skipped, 1 when a
// check fails, 2 on invalid input.

#include "oneill/oneill.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace oneill;

constexpr int kExitFail = 1;
constexpr int kExitInvalid = 2;

struct InvalidInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string case_id;
    std::string file;
    std::string name;
    std::vector<std::string> identities{"all"};
    std::vector<int> grid;
    std::vector<int> base_grid;
    std::optional<double> tol;
    std::uint64_t seed = 42;
    std::string format = "text";
    std::string out;
    std::optional<double> curvature;
    double fd_step = 1e-3;
    std::vector<double> x0, v0;
    double dt = 1e-3;
    long steps = 1000;
    bool clairaut = false;
    std::string girth;
    bool mixed_ode = false;
    std::string trajectory;
};

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const Options& o, const std::string& text)
{
    if (o.out.empty() || o.out == "-") {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return;
    }
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw InvalidInput("cannot write '" + o.out + "'");
    f << text;
}

/// The geometry a command runs on: a catalog entry or a DSL file.
struct Target {
    std::shared_ptr<const ManifoldSpec> total;
    std::shared_ptr<const SubmersionSpec> submersion;
    std::optional<std::string> girth;
};

Target resolve(const Options& o, bool need_submersion)
{
    if (o.case_id.empty() == o.file.empty()) throw InvalidInput("give exactly one of --case or --file");
    Target t;
    if (!o.case_id.empty()) {
        try {
            const LoadedCase lc = load_case(o.case_id);
            t.total = lc.total;
            t.submersion = lc.submersion;
            t.girth = lc.entry.girth;
        } catch (const CatalogError& e) {
            throw InvalidInput(e.what());
        }
        return t;
    }
    const ParseResult pr = parse_source(read_file(o.file));
    if (!pr.ok()) {
        std::string msg = o.file + ":";
        for (const auto& d : pr.diagnostics) msg += "\n  " + d.to_string();
        throw InvalidInput(msg);
    }
    if (!o.name.empty()) {
        t.submersion = pr.submersion(o.name);
        if (t.submersion) {
            t.total = t.submersion->total;
        } else {
            t.total = pr.manifold(o.name);
            if (!t.total) throw InvalidInput("no manifold or submersion named '" + o.name + "' in " + o.file);
        }
    } else if (!pr.submersions.empty()) {
        if (pr.submersions.size() > 1) throw InvalidInput(o.file + " declares several submersions; pick one with --name");
        t.submersion = pr.submersions.front();
        t.total = t.submersion->total;
    } else if (pr.manifolds.size() == 1) {
        t.total = pr.manifolds.front();
    } else {
        throw InvalidInput(o.file + " declares no submersion; pick a manifold with --name");
    }
    if (need_submersion && !t.submersion) throw InvalidInput("this command needs a submersion");
    return t;
}

void check_grid(const std::vector<int>& grid, int dim, const char* what)
{
    if (grid.empty()) return;
    if (grid.size() != 1 && static_cast<int>(grid.size()) != dim)
        throw InvalidInput(std::string(what) + " needs 1 or " + std::to_string(dim) + " values");
    for (int g : grid)
        if (g < 4) throw InvalidInput(std::string(what) + " resolution must be at least 4 per axis");
}

double tolerance(const Options& o, double fallback)
{
    const double t = o.tol.value_or(fallback);
    if (!(t > 0.0)) throw InvalidInput("--tol must be positive");
    return t;
}

std::vector<std::string> split_names(const std::vector<std::string>& in)
{
    std::vector<std::string> out;
    for (const auto& s : in) {
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) out.push_back(item);
    }
    if (out.empty()) out.push_back("all");
    return out;
}

int emit(const Options& o, std::vector<IdentityReport> reports)
{
    if (!o.case_id.empty())
        for (auto& r : reports) r.case_id = o.case_id;
    write_output(o, o.format == "json" ? to_json(reports) : to_text(reports));
    for (const auto& r : reports)
        if (!r.skipped_or_passed()) return kExitFail;
    return 0;
}

int cmd_list(const Options& o)
{
    std::string s;
    for (const auto& e : catalog()) {
        std::string tags;
        for (const auto& t : e.tags) tags += (tags.empty() ? "" : ",") + t;
        char line[256];
        std::snprintf(line, sizeof line, "%-22s %s\n", e.id.c_str(), e.summary.c_str());
        s += line;
        s += std::string(23, ' ') + "tags: " + tags + "\n";
    }
    write_output(o, s);
    return 0;
}

int cmd_dump(const Options& o)
{
    std::string s;
    if (!o.case_id.empty()) {
        try {
            s = catalog_entry(o.case_id).dsl_source;
        } catch (const CatalogError& e) {
            throw InvalidInput(e.what());
        }
    } else {
        for (const auto& e : catalog()) s += "# " + e.id + "\n" + e.dsl_source + "\n";
    }
    write_output(o, s);
    return 0;
}

int cmd_validate(const Options& o)
{
    if (!o.case_id.empty() && !o.file.empty()) throw InvalidInput("give either a file or --case");
    std::vector<std::shared_ptr<const ManifoldSpec>> manifolds;
    std::vector<std::shared_ptr<const SubmersionSpec>> subs;
    if (!o.case_id.empty()) {
        try {
            const LoadedCase lc = parse_case(catalog_entry(o.case_id));
            subs.push_back(lc.submersion);
            manifolds = {lc.submersion->total, lc.submersion->base};
        } catch (const CatalogError& e) {
            throw InvalidInput(e.what());
        }
    } else {
        if (o.file.empty()) throw InvalidInput("validate needs a file or --case");
        const ParseResult pr = parse_source(read_file(o.file));
        if (!pr.ok()) {
            std::string msg;
            for (const auto& d : pr.diagnostics) msg += o.file + ":" + d.to_string() + "\n";
            write_output(o, msg);
            return kExitInvalid;
        }
        manifolds = pr.manifolds;
        subs = pr.submersions;
    }
    std::string s;
    bool ok = true;
    auto describe = [&](const ValidationReport& r, const std::string& kind) {
        s += (r.ok() ? "OK    " : "FAIL  ") + kind + " " + r.name + "  (" + std::to_string(r.points) + " points";
        if (kind == "submersion")
            s += ", axiom residual " + format_number(r.axiom_residual) + ", frame residual " +
                 format_number(r.frame_residual);
        s += ")\n";
        for (const auto& p : r.problems) s += "      " + p + "\n";
        ok = ok && r.ok();
    };
    for (const auto& m : manifolds) describe(validate(*m), "manifold");
    for (const auto& sub : subs) describe(validate(*sub), "submersion");
    write_output(o, s);
    return ok ? 0 : kExitFail;
}

int cmd_check(const Options& o)
{
    const Target t = resolve(o, true);
    check_grid(o.grid, t.total->dim, "--grid");
    CheckConfig cfg;
    cfg.tol = tolerance(o, 1e-6);
    cfg.seed = o.seed;
    cfg.c = o.curvature;
    SuiteContext ctx(*t.submersion, sample_grid(*t.total, o.grid), cfg);
    std::vector<IdentityReport> reports;
    try {
        reports = run_suite(ctx, split_names(o.identities));
    } catch (const std::invalid_argument& e) {
        throw InvalidInput(e.what());
    }
    return emit(o, reports);
}

int cmd_integrate(const Options& o)
{
    const Target t = resolve(o, true);
    check_grid(o.grid, t.total->dim, "--grid");
    check_grid(o.base_grid, t.submersion->base->dim, "--base-grid");
    if (!(o.fd_step > 0.0)) throw InvalidInput("--fd-step must be positive");
    IntegralConfig cfg;
    cfg.tol = tolerance(o, 1e-6);
    cfg.seed = o.seed;
    cfg.counts = o.grid;
    cfg.base_counts = o.base_grid.empty() && o.grid.size() == 1 ? o.grid : o.base_grid;
    cfg.fd_step = o.fd_step;
    IntegralContext ctx(*t.submersion, cfg);
    std::vector<IdentityReport> reports;
    try {
        reports = run_integrals(ctx, split_names(o.identities));
    } catch (const std::invalid_argument& e) {
        throw InvalidInput(e.what());
    }
    return emit(o, reports);
}

IdentityReport geodesic_report(const std::string& case_id, const std::string& id, std::string anchor)
{
    IdentityReport r;
    r.case_id = case_id;
    r.identity = id;
    r.anchor = std::move(anchor);
    return r;
}

int cmd_geodesic(const Options& o)
{
    const Target t = resolve(o, false);
    const ManifoldSpec& M = *t.total;
    if (static_cast<int>(o.x0.size()) != M.dim || static_cast<int>(o.v0.size()) != M.dim)
        throw InvalidInput("--x0 and --v0 need " + std::to_string(M.dim) + " components");
    if (!(o.dt > 0.0)) throw InvalidInput("--dt must be positive");
    if (o.steps < 1) throw InvalidInput("--steps must be positive");
    Vec x0(M.dim), v0(M.dim);
    for (int a = 0; a < M.dim; ++a) {
        x0[a] = o.x0[a];
        v0[a] = o.v0[a];
    }
    if (!M.inside(x0)) throw InvalidInput("--x0 lies outside the chart");
    const std::string case_id = t.submersion ? t.submersion->name : M.name;
    std::vector<IdentityReport> reports;
    bool halted = false;

    const bool clairaut = o.clairaut || !o.girth.empty();
    if (clairaut) {
        if (!t.submersion) throw InvalidInput("--clairaut needs a submersion");
        const std::string girth = !o.girth.empty() ? o.girth : t.girth.value_or("");
        if (girth.empty()) throw InvalidInput("no girth known for this case; give --clairaut-girth");
        ExprPtr f;
        try {
            f = parse_expression(girth, M.coords);
        } catch (const std::exception& e) {
            throw InvalidInput(std::string("--clairaut-girth: ") + e.what());
        }
        const ClairautRun run = clairaut_drift(*t.submersion, *f, x0, v0, o.dt, o.steps);
        IdentityReport r = geodesic_report(case_id, "clairaut_drift", "w cosh φ is constant along timelike geodesics");
        r.tol = tolerance(o, 1e-5);
        if (!run.gate.ok) {
            r.skipped = run.gate.reason;
        } else {
            r.samples = static_cast<long>(run.samples.size()) - run.skipped_samples;
            r.max_residual = r.mean_residual = run.drift;
            r.pass = run.drift <= r.tol && r.samples > 0 && !run.geodesic.halted;
            if (r.samples == 0) r.skipped = "no timelike samples along the trajectory";
            r.extras = {{"energy_drift", run.geodesic.energy_drift},
                        {"skipped_samples", double(run.skipped_samples)},
                        {"min_cosh_phi", run.min_cosh_phi}};
            halted = run.geodesic.halted.has_value();
            if (halted) std::cerr << "geodesic halted: " << *run.geodesic.halted << "\n";
            if (!o.trajectory.empty()) {
                Options to = o;
                to.out = o.trajectory;
                write_output(to, trajectory_csv(M, run.geodesic, &run.samples));
            }
        }
        reports.push_back(r);
    } else if (o.mixed_ode) {
        if (!t.submersion) throw InvalidInput("--mixed-ode needs a submersion");
        MixedOdeResult res;
        try {
            res = mixed_ode_residual(*t.submersion, x0, v0, o.dt, o.steps, tolerance(o, 1e-4));
        } catch (const std::invalid_argument& e) {
            throw InvalidInput(e.what());
        }
        IdentityReport r = geodesic_report(case_id, "mixed_ode", "dh/dt = h², h = g(H/r, γ')");
        r.tol = tolerance(o, 1e-4);
        r.skipped = res.skipped;
        r.samples = res.samples;
        r.max_residual = r.mean_residual = res.residual;
        r.pass = res.residual <= r.tol && !res.geodesic.halted;
        r.extras = {{"max_abs_h", res.max_abs_h}, {"energy_drift", res.geodesic.energy_drift}};
        halted = res.geodesic.halted.has_value();
        if (halted) std::cerr << "geodesic halted: " << *res.geodesic.halted << "\n";
        if (!o.trajectory.empty()) {
            Options to = o;
            to.out = o.trajectory;
            write_output(to, trajectory_csv(M, res.geodesic));
        }
        reports.push_back(r);
    } else {
        const GeodesicRun run = integrate_geodesic(M, x0, v0, o.dt, o.steps);
        IdentityReport r = geodesic_report(case_id, "geodesic_energy", "g(γ', γ') is constant along geodesics");
        const double g0 = run.states.front().gvv;
        r.tol = tolerance(o, 1e-6) * (1.0 + std::abs(g0));
        r.samples = static_cast<long>(run.states.size());
        r.max_residual = r.mean_residual = run.energy_drift;
        r.pass = run.energy_drift <= r.tol && !run.halted;
        const GeodesicState& last = run.states.back();
        r.extras.push_back({"t_end", last.t});
        for (int a = 0; a < M.dim; ++a) r.extras.push_back({"x_" + M.coords[a], last.x[a]});
        halted = run.halted.has_value();
        if (halted) std::cerr << "geodesic halted: " << *run.halted << "\n";
        if (!o.trajectory.empty()) {
            Options to = o;
            to.out = o.trajectory;
            write_output(to, trajectory_csv(M, run));
        }
        reports.push_back(r);
    }
    const int code = emit(o, reports);
    return halted ? kExitFail : code;
}

void add_target_options(CLI::App* cmd, Options& o)
{
    cmd->add_option("--case", o.case_id, "Catalog case id");
    cmd->add_option("--file", o.file, "DSL file");
    cmd->add_option("--name", o.name, "Submersion or manifold to use from the file");
}

void add_report_options(CLI::App* cmd, Options& o)
{
    cmd->add_option("--tol", o.tol, "Residual tolerance");
    cmd->add_option("--seed", o.seed, "Sampling seed");
    cmd->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"text", "json"}));
    cmd->add_option("--out", o.out, "Output path (default stdout)");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Verification toolkit for semi-Riemannian submersions with totally umbilic fibres"};
    app.require_subcommand(1);
    Options o;

    auto* list = app.add_subcommand("list", "List catalog cases");
    list->add_option("--out", o.out, "Output path (default stdout)");

    auto* dump = app.add_subcommand("dump", "Print the DSL source of catalog cases");
    dump->add_option("--case", o.case_id, "Catalog case id (default: all)");
    dump->add_option("--out", o.out, "Output path (default stdout)");

    auto* val = app.add_subcommand("validate", "Parse and validate a DSL file or catalog case");
    val->add_option("file", o.file, "DSL file");
    val->add_option("--case", o.case_id, "Catalog case id");
    val->add_option("--out", o.out, "Output path (default stdout)");

    auto* check = app.add_subcommand("check", "Run pointwise identity checks");
    add_target_options(check, o);
    add_report_options(check, o);
    check->add_option("--identities", o.identities, "Comma-separated identity names, or all")->delimiter(',');
    check->add_option("--grid", o.grid, "Sample resolution per axis (one value or one per axis)")->delimiter(',');
    check->add_option("--curvature", o.curvature, "Constant c for the constant-curvature model (default: fitted)");

    auto* integ = app.add_subcommand("integrate", "Run global integral formulas");
    add_target_options(integ, o);
    add_report_options(integ, o);
    integ->add_option("--formula,--identities", o.identities, "Comma-separated formula names, or all")
        ->delimiter(',');
    integ->add_option("--grid", o.grid, "Quadrature nodes per axis of the total space")->delimiter(',');
    integ->add_option("--base-grid", o.base_grid, "Quadrature nodes per axis of the base")->delimiter(',');
    integ->add_option("--fd-step", o.fd_step, "Finite-difference step of the base Laplacian");

    auto* geo = app.add_subcommand("geodesic", "Integrate a geodesic, optionally with Clairaut or mixed ODE diagnostics");
    add_target_options(geo, o);
    add_report_options(geo, o);
    geo->add_option("--x0", o.x0, "Initial point, comma-separated")->delimiter(',')->required();
    geo->add_option("--v0", o.v0, "Initial velocity, comma-separated")->delimiter(',')->required();
    geo->add_option("--dt", o.dt, "Step size");
    geo->add_option("--steps", o.steps, "Number of steps");
    geo->add_flag("--clairaut", o.clairaut, "Report the drift of w cosh φ");
    geo->add_option("--clairaut-girth", o.girth, "log w as an expression in the total coordinates");
    geo->add_flag("--mixed-ode", o.mixed_ode, "Report the residual of dh/dt = h² (horizontal v0)");
    geo->add_option("--trajectory", o.trajectory, "Write the trajectory as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalid;
    }

    try {
        if (*list) return cmd_list(o);
        if (*dump) return cmd_dump(o);
        if (*val) return cmd_validate(o);
        if (*check) return cmd_check(o);
        if (*integ) return cmd_integrate(o);
        if (*geo) return cmd_geodesic(o);
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFail;
    }
    return kExitInvalid;
}
