#pragma once

/// \file
/// Built-in example geometries. Each entry is DSL text plus tags; the tags
/// are confirmed numerically when an entry is loaded.

#include "oneill/dsl.hpp"
#include "oneill/identities.hpp"
#include "oneill/sampling.hpp"
#include "oneill/validate.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace oneill {

/// Expected identity outcome on the default grid.
enum class Outcome { Pass, Skip };

struct ExpectedOutcome {
    std::string identity;
    Outcome outcome = Outcome::Pass;
    std::string note;
};

struct CatalogEntry {
    std::string id;
    std::string summary;
    std::string dsl_source;
    std::vector<std::string> tags;           // umbilic, totally_geodesic, warped, constant_curvature, ...
    std::optional<double> curvature;         // expected constant curvature, confirmed at load
    std::optional<std::string> girth;        // log of the Clairaut girth w, in total coordinates
    std::vector<ExpectedOutcome> expected;   // identities expected to skip; all others pass
    std::string notes;

    bool has_tag(std::string_view t) const
    {
        for (const auto& x : tags)
            if (x == t) return true;
        return false;
    }
    Outcome expected_outcome(const std::string& identity) const
    {
        for (const auto& e : expected)
            if (e.identity == identity) return e.outcome;
        return Outcome::Pass;
    }
};

struct LoadedCase {
    CatalogEntry entry;
    std::shared_ptr<const ManifoldSpec> total;
    std::shared_ptr<const SubmersionSpec> submersion;
    double fitted_curvature = 0.0; // meaningful when entry.curvature is set
};

class CatalogError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline ExpectedOutcome skip(std::string id, std::string note) { return {std::move(id), Outcome::Skip, std::move(note)}; }

inline std::vector<CatalogEntry> build_catalog()
{
    std::vector<CatalogEntry> c;

    c.push_back({"lorentz-flat-torus",
                 "flat Lorentz torus T², g = dθ² − dφ², projected onto θ",
                 R"(manifold T2 {
  dim 2
  signature 1
  coords theta phi
  periodic theta 2*pi
  periodic phi 2*pi
  metric {
    g[0][0] = 1
    g[1][1] = -1
  }
}
manifold S1 {
  dim 1
  signature 0
  coords theta
  periodic theta 2*pi
  metric {
    g[0][0] = 1
  }
}
submersion lorentz_flat_torus {
  total T2; base S1
  map { theta = theta }
  aligned true
}
)",
                 {"umbilic", "totally_geodesic", "warped", "constant_curvature", "lorentz", "compact", "aligned"},
                 0.0,
                 std::nullopt,
                 {skip("gauss_fibre", "one-dimensional fibres")},
                 "flat product"});

    c.push_back({"warped-lorentz-t3",
                 "T³ with g = dθ² − f²(dφ₁² + dφ₂²), f = 2 + cos θ, projected onto θ; index r = 2",
                 R"(manifold T3 {
  dim 3
  signature 2
  coords theta phi1 phi2
  periodic theta 2*pi
  periodic phi1 2*pi
  periodic phi2 2*pi
  metric {
    g[0][0] = 1
    g[1][1] = -(2 + cos(theta))^2
    g[2][2] = -(2 + cos(theta))^2
  }
}
manifold S1 {
  dim 1
  signature 0
  coords theta
  periodic theta 2*pi
  metric {
    g[0][0] = 1
  }
}
submersion warped_lorentz_t3 {
  total T3; base S1
  map { theta = theta }
  aligned true
}
)",
                 {"umbilic", "warped", "lorentz", "compact", "aligned"},
                 std::nullopt,
                 std::nullopt,
                 {skip("constant_curvature", "curvature varies with θ"),
                  skip("gradient_equation", "g(ρ^V(H/r),X) is not a constant multiple of g(H,X)")},
                 "warped product with flat torus fibres; Riemannian base, fibres of index 2"});

    c.push_back({"warped-lorentz-t2",
                 "T² with g = dθ² − (2 + cos θ)² dφ², projected onto θ; r = 1",
                 R"(manifold T2w {
  dim 2
  signature 1
  coords theta phi
  periodic theta 2*pi
  periodic phi 2*pi
  metric {
    g[0][0] = 1
    g[1][1] = -(2 + cos(theta))^2
  }
}
manifold S1 {
  dim 1
  signature 0
  coords theta
  periodic theta 2*pi
  metric {
    g[0][0] = 1
  }
}
submersion warped_lorentz_t2 {
  total T2w; base S1
  map { theta = theta }
  aligned true
}
)",
                 {"umbilic", "warped", "lorentz", "compact", "aligned"},
                 std::nullopt,
                 std::nullopt,
                 {skip("gauss_fibre", "one-dimensional fibres"), skip("constant_curvature", "curvature varies with θ"),
                  skip("gradient_equation", "g(ρ^V(H/r),X) is not a constant multiple of g(H,X)")},
                 "one-dimensional fibres: the (1 − 1/r) terms vanish"});

    c.push_back({"hopf",
                 "Hopf fibration S³ → S²(½) in Hopf coordinates, g = dη² + cos²η dξ₁² + sin²η dξ₂²",
                 R"(manifold S3 {
  dim 3
  signature 0
  coords eta xi1 xi2
  domain eta in [0, pi/2]
  periodic xi1 2*pi
  periodic xi2 2*pi
  metric {
    g[0][0] = 1
    g[1][1] = cos(eta)^2
    g[2][2] = sin(eta)^2
  }
}
manifold S2half {
  dim 2
  signature 0
  coords eta phi
  domain eta in [0, pi/2]
  periodic phi 2*pi
  metric {
    g[0][0] = 1
    g[1][1] = sin(eta)^2 * cos(eta)^2
  }
}
submersion hopf {
  total S3; base S2half
  map {
    eta = eta
    phi = xi1 - xi2
  }
}
)",
                 {"umbilic", "totally_geodesic", "constant_curvature", "riemannian", "compact"},
                 1.0,
                 std::nullopt,
                 {skip("gauss_fibre", "one-dimensional fibres")},
                 "fibres are the orbits of ∂ξ₁ + ∂ξ₂; the base is the round sphere of radius ½ with φ = ξ₁ − ξ₂. "
                 "η stays 5% away from the coordinate singularities when sampling."});

    c.push_back({"clairaut-cosh",
                 "g = dt² − cosh²t (dx² + dy²) on a bounded t-window, projected onto t",
                 R"(manifold Wcosh {
  dim 3
  signature 2
  coords t x y
  domain t in [-2, 2]
  periodic x 2*pi
  periodic y 2*pi
  metric {
    g[0][0] = 1
    g[1][1] = -cosh(t)^2
    g[2][2] = -cosh(t)^2
  }
}
manifold Iline {
  dim 1
  signature 0
  coords t
  domain t in [-2, 2]
  metric {
    g[0][0] = 1
  }
}
submersion clairaut_cosh {
  total Wcosh; base Iline
  map { t = t }
  aligned true
}
)",
                 {"umbilic", "warped", "lorentz", "clairaut", "aligned"},
                 std::nullopt,
                 std::string("log(cosh(t))"),
                 {skip("constant_curvature", "flat fibres warped by cosh t: fibre planes have curvature −tanh²t")},
                 "umbilic fibres with H/r = −tanh t ∂t; the vertical Ricci relation holds with c = −1 although the "
                 "total space is not of constant curvature (mixed planes have curvature −1, fibre planes −tanh²t). "
                 "Not compact, so the global integral formulas do not apply."});

    c.push_back({"critical-exp",
                 "g = dt² − e^{2t} (dx² + dy²), projected onto t; g(H/r,H/r) + c ≡ 0",
                 R"(manifold Wexp {
  dim 3
  signature 2
  coords t x y
  domain t in [-1, 1]
  periodic x 2*pi
  periodic y 2*pi
  metric {
    g[0][0] = 1
    g[1][1] = -exp(2*t)
    g[2][2] = -exp(2*t)
  }
}
manifold Iline {
  dim 1
  signature 0
  coords t
  domain t in [-1, 1]
  metric {
    g[0][0] = 1
  }
}
submersion critical_exp {
  total Wexp; base Iline
  map { t = t }
  aligned true
}
)",
                 {"umbilic", "warped", "constant_curvature", "lorentz", "aligned"},
                 -1.0,
                 std::string("t"),
                 {},
                 "the critical case of the gradient equation: both sides vanish"});

    c.push_back({"perturbed-nonumbilic",
                 "warped-lorentz-t3 with g[1][2] = 0.05 sin θ f²; fibres are not umbilic",
                 R"(manifold T3p {
  dim 3
  signature 2
  coords theta phi1 phi2
  periodic theta 2*pi
  periodic phi1 2*pi
  periodic phi2 2*pi
  metric {
    g[0][0] = 1
    g[1][1] = -(2 + cos(theta))^2
    g[2][2] = -(2 + cos(theta))^2
    g[1][2] = 0.05 * sin(theta) * (2 + cos(theta))^2
  }
}
manifold S1 {
  dim 1
  signature 0
  coords theta
  periodic theta 2*pi
  metric {
    g[0][0] = 1
  }
}
submersion perturbed_nonumbilic {
  total T3p; base S1
  map { theta = theta }
  aligned true
}
)",
                 {"lorentz", "compact", "aligned"},
                 std::nullopt,
                 std::nullopt,
                 {skip("gauss_fibre", "umbilicity gate"), skip("mixed_b", "umbilicity gate"),
                  skip("killing", "umbilicity gate"), skip("closed_one_form", "umbilicity gate"),
                  skip("ranjan", "umbilicity gate"), skip("scalar_decomposition", "umbilicity gate"),
                  skip("sH", "umbilicity gate"), skip("rho_mixed", "umbilicity gate"), skip("rhoV", "umbilicity gate"),
                  skip("tts", "umbilicity gate"), skip("constant_curvature", "curvature varies"),
                  skip("gradient_equation", "umbilicity gate")},
                 "negative control for the umbilicity gate"});

    c.push_back({"milne-wedge",
                 "flat Milne wedge g = dt² − t² dx², projected onto t",
                 R"(manifold Milne {
  dim 2
  signature 1
  coords t x
  domain t in [1, 3]
  periodic x 2*pi
  metric {
    g[0][0] = 1
    g[1][1] = -t^2
  }
}
manifold Iline {
  dim 1
  signature 0
  coords t
  domain t in [1, 3]
  metric {
    g[0][0] = 1
  }
}
submersion milne_wedge {
  total Milne; base Iline
  map { t = t }
  aligned true
}
)",
                 {"umbilic", "warped", "constant_curvature", "lorentz", "aligned"},
                 0.0,
                 std::string("log(t)"),
                 {skip("gauss_fibre", "one-dimensional fibres")},
                 "flat, A ≡ 0, H ≠ 0: along horizontal geodesics h = g(H/r, γ') solves dh/dt = h²"});

    c.push_back({"round-s2",
                 "unit round sphere g = dθ² + sin²θ dφ², projected onto θ",
                 R"(manifold S2 {
  dim 2
  signature 0
  coords theta phi
  domain theta in [0, pi]
  periodic phi 2*pi
  metric {
    g[0][0] = 1
    g[1][1] = sin(theta)^2
  }
}
manifold Itheta {
  dim 1
  signature 0
  coords theta
  domain theta in [0, pi]
  metric {
    g[0][0] = 1
  }
}
submersion round_s2 {
  total S2; base Itheta
  map { theta = theta }
  aligned true
}
)",
                 {"umbilic", "warped", "constant_curvature", "riemannian", "compact", "aligned"},
                 1.0,
                 std::nullopt,
                 {skip("gauss_fibre", "one-dimensional fibres")},
                 "calibration sphere; its standard complex structure is the witness for the complex space form model"});

    c.push_back({"flat-plane",
                 "Euclidean square g = dx² + dy², projected onto x",
                 R"(manifold R2 {
  dim 2
  signature 0
  coords x y
  domain x in [-1, 1]
  domain y in [-1, 1]
  metric {
    g[0][0] = 1
    g[1][1] = 1
  }
}
manifold Ix {
  dim 1
  signature 0
  coords x
  domain x in [-1, 1]
  metric {
    g[0][0] = 1
  }
}
submersion flat_plane {
  total R2; base Ix
  map { x = x }
  aligned true
}
)",
                 {"umbilic", "totally_geodesic", "warped", "constant_curvature", "riemannian", "aligned"},
                 0.0,
                 std::nullopt,
                 {skip("gauss_fibre", "one-dimensional fibres")},
                 "flat complex line chart for the complex space form model"});

    return c;
}

} // namespace detail

inline const std::vector<CatalogEntry>& catalog()
{
    static const std::vector<CatalogEntry> entries = detail::build_catalog();
    return entries;
}

inline const CatalogEntry& catalog_entry(std::string_view id)
{
    for (const auto& e : catalog())
        if (e.id == id) return e;
    throw CatalogError("unknown catalog case '" + std::string(id) + "'");
}

/// Parse an entry without numerical tag validation.
inline LoadedCase parse_case(const CatalogEntry& entry)
{
    const ParseResult pr = parse_source(entry.dsl_source);
    if (!pr.ok()) throw CatalogError(entry.id + ": " + pr.diagnostics.front().to_string());
    if (pr.submersions.size() != 1) throw CatalogError(entry.id + ": expected exactly one submersion");
    LoadedCase lc;
    lc.entry = entry;
    lc.submersion = pr.submersions.front();
    lc.total = lc.submersion->total;
    return lc;
}

/// Residuals backing each tag on the default grid; an empty string means confirmed.
inline std::string confirm_tags(LoadedCase& lc)
{
    const SubmersionSpec& sub = *lc.submersion;
    const CatalogEntry& e = lc.entry;
    const ValidationReport vr = validate(sub);
    if (!vr.ok()) return vr.problems.front();
    const std::vector<Vec> grid = sample_grid(*sub.total);
    CheckConfig cfg;
    cfg.tol = 1e-8;
    SuiteContext ctx(sub, grid, cfg);
    if (e.has_tag("umbilic") && !ctx.umbilic().ok) return "tag umbilic: " + ctx.umbilic().reason;
    if (e.has_tag("totally_geodesic")) {
        double worst = 0.0;
        for (std::size_t i = 0; i < ctx.size(); ++i) worst = std::max(worst, std::sqrt(std::abs(ctx.kit(i).normT2_mixed())) +
                                                                              ctx.kit(i).frame_norm(ctx.kit(i).H()));
        if (worst > 1e-8) return "tag totally_geodesic: T residual " + format_number(worst);
    }
    if (e.has_tag("warped")) {
        double worst = 0.0;
        for (std::size_t i = 0; i < ctx.size(); ++i)
            for (int a = ctx.r(); a < ctx.m(); ++a)
                for (int b = ctx.r(); b < ctx.m(); ++b)
                    worst = std::max(worst, ctx.kit(i).frame_norm(values(ctx.kit(i).A_leg(a, b))));
        if (worst > 1e-8) return "tag warped: A residual " + format_number(worst);
        if (!ctx.h_basic().ok) return "tag warped: " + ctx.h_basic().reason;
    }
    if (e.has_tag("constant_curvature")) {
        const CurvatureFit fit = fit_constant_curvature(*sub.total, grid, cfg);
        lc.fitted_curvature = fit.c;
        if (fit.residual > 1e-7) return "tag constant_curvature: fit residual " + format_number(fit.residual);
        if (e.curvature && std::abs(fit.c - *e.curvature) > 1e-7)
            return "tag constant_curvature: fitted c = " + format_number(fit.c) + ", expected " +
                   format_number(*e.curvature);
    }
    if (e.has_tag("lorentz") && (sub.total->signature == 0 || sub.base->signature != 0))
        return "tag lorentz: total space is not of index r over a Riemannian base";
    if (e.has_tag("riemannian") && sub.total->signature != 0) return "tag riemannian: nonzero index";
    if (e.has_tag("compact")) {
        const Gate closed = closed_chart(*sub.total);
        if (!closed.ok) return "tag compact: " + closed.reason;
    }
    if (e.has_tag("aligned") && !sub.coordinate_aligned) return "tag aligned: chart is not coordinate-aligned";
    return {};
}

/// Load and validate an entry. Validation runs once per process.
inline LoadedCase load_case(std::string_view id)
{
    static std::mutex mu;
    static std::map<std::string, LoadedCase, std::less<>> cache;
    std::lock_guard<std::mutex> lock(mu);
    if (const auto it = cache.find(id); it != cache.end()) return it->second;
    LoadedCase lc = parse_case(catalog_entry(id));
    const std::string problem = confirm_tags(lc);
    if (!problem.empty()) throw CatalogError(lc.entry.id + ": " + problem);
    cache.emplace(std::string(id), lc);
    return lc;
}

} // namespace oneill
