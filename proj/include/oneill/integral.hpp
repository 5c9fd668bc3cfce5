#pragma once

/// \file
/// Quadrature over compact charts with the density sqrt|det g|, and the
/// global integral formulas of umbilic submersions as residual checks.
/// Periodic coordinates use the trapezoid rule; bounded ones Gauss–Legendre.

#include "oneill/geometry.hpp"
#include "oneill/identities.hpp"
#include "oneill/parallel.hpp"
#include "oneill/report.hpp"
#include "oneill/sampling.hpp"
#include "oneill/submersion.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace oneill {

class NonCompactError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kDefaultPeriodicNodes = 64;
inline constexpr int kDefaultBoundedNodes = 32;

/// Gauss–Legendre nodes and weights on [-1, 1] (Newton on P_n).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n)
{
    if (n < 1) throw std::invalid_argument("Gauss–Legendre needs at least one node");
    std::vector<double> x(n), w(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= n; ++k) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return {x, w};
}

struct QuadratureGrid {
    int dim = 0;
    std::vector<int> counts;
    std::vector<std::vector<double>> axis_nodes, axis_weights;
    std::vector<Vec> nodes;
    std::vector<double> weights; // product of axis weights
    std::vector<double> density; // sqrt|det g| per node

    std::size_t size() const { return nodes.size(); }
};

/// Per-axis node counts: 64 periodic, 32 bounded unless given.
inline std::vector<int> default_node_counts(const ManifoldSpec& spec)
{
    std::vector<int> c;
    for (int a = 0; a < spec.dim; ++a) c.push_back(spec.is_periodic(a) ? kDefaultPeriodicNodes : kDefaultBoundedNodes);
    return c;
}

inline QuadratureGrid make_quadrature(const ManifoldSpec& spec, std::vector<int> counts = {})
{
    if (!spec.compact()) {
        for (int a = 0; a < spec.dim; ++a)
            if (!spec.is_periodic(a) && !spec.domain[a])
                throw NonCompactError("'" + spec.name + "' is not compact in its chart: coordinate '" + spec.coords[a] +
                                      "' is unbounded");
    }
    if (counts.empty()) counts = default_node_counts(spec);
    if (counts.size() == 1 && spec.dim > 1) counts.assign(spec.dim, counts[0]);
    if (static_cast<int>(counts.size()) != spec.dim)
        throw std::invalid_argument("quadrature needs one node count per coordinate");
    QuadratureGrid q;
    q.dim = spec.dim;
    q.counts = counts;
    for (int a = 0; a < spec.dim; ++a) {
        const int N = counts[a];
        if (N < 1) throw std::invalid_argument("node counts must be positive");
        const Interval r = spec.range(a);
        std::vector<double> xs, ws;
        if (spec.is_periodic(a)) {
            for (int j = 0; j < N; ++j) {
                xs.push_back(r.lo + r.length() * j / N);
                ws.push_back(r.length() / N);
            }
        } else {
            const auto [gx, gw] = gauss_legendre(N);
            for (int j = 0; j < N; ++j) {
                xs.push_back(r.lo + 0.5 * r.length() * (gx[j] + 1.0));
                ws.push_back(0.5 * r.length() * gw[j]);
            }
        }
        q.axis_nodes.push_back(xs);
        q.axis_weights.push_back(ws);
    }
    std::vector<int> idx(spec.dim, 0);
    while (true) {
        Vec p(spec.dim);
        double w = 1.0;
        for (int a = 0; a < spec.dim; ++a) {
            p[a] = q.axis_nodes[a][idx[a]];
            w *= q.axis_weights[a][idx[a]];
        }
        q.nodes.push_back(p);
        q.weights.push_back(w);
        int a = spec.dim - 1;
        while (a >= 0 && ++idx[a] == counts[a]) idx[a--] = 0;
        if (a < 0) break;
    }
    q.density = parallel_map<double>(q.size(), [&](std::size_t i) {
        const Mat g = eval_matrix(spec.metric, spec.dim, spec.dim, q.nodes[i]);
        return std::sqrt(std::abs(determinant(g)));
    });
    return q;
}

/// Σ weight · value · density in fixed pairwise order.
inline double integrate_values(const QuadratureGrid& q, const std::vector<double>& values)
{
    std::vector<double> terms(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) terms[i] = q.weights[i] * values[i] * q.density[i];
    return pairwise_sum(terms);
}

inline double integrate(const ManifoldSpec& spec, const std::function<double(const Vec&)>& f, const QuadratureGrid& q)
{
    (void)spec;
    const auto vals = parallel_map<double>(q.size(), [&](std::size_t i) { return f(q.nodes[i]); });
    return integrate_values(q, vals);
}

inline double integrate(const ManifoldSpec& spec, const std::function<double(const Vec&)>& f)
{
    return integrate(spec, f, make_quadrature(spec));
}

/// Pointwise quantities at a total-space node.
struct NodeTerms {
    double tau = 0.0, div_H = 0.0, gHH = 0.0, gAA = 0.0;
    double s = 0.0, s_base = 0.0, s_fibre = 0.0, s_H = 0.0;
    double umbilicity = 0.0;
};

inline NodeTerms node_terms(const SubmersionSpec& sub, const Vec& x)
{
    const SubmersionPoint k(sub, x);
    const Curvature K = curvature_at(*sub.total, k.point());
    const Curvature Kb = curvature_at(*sub.base, k.base_point());
    NodeTerms t;
    t.tau = tau_HV(k, K);
    t.div_H = k.div_H();
    t.gHH = k.g(k.H(), k.H());
    t.gAA = k.normA2();
    t.s = K.scalar();
    t.s_base = Kb.scalar();
    t.s_fibre = sub.coordinate_aligned ? fibre_scalar(K, sub.base->dim) : 0.0;
    t.s_H = horizontal_scalar(k, K);
    t.umbilicity = k.umbilicity_residual();
    return t;
}

/// Pushed-down quantities at a base node (evaluated at a lifted point).
struct BaseTerms {
    double tau = 0.0, div_piH = 0.0, gHH = 0.0, gAA = 0.0, umbilicity = 0.0;
};

inline BaseTerms base_terms(const SubmersionSpec& sub, const Vec& y)
{
    const Vec x = lift_point(sub, y);
    const SubmersionPoint k(sub, x);
    const Curvature K = curvature_at(*sub.total, k.point());
    const Curvature Kb = curvature_at(*sub.base, y);
    const int n = sub.base->dim, m = sub.total->dim;
    BaseTerms b;
    b.tau = tau_HV(k, K);
    b.gHH = k.g(k.H(), k.H());
    b.gAA = k.normA2();
    b.umbilicity = k.umbilicity_residual();
    // div'(π_*H) = ∂_k V^k + Γ'^k_kj V^j with V = dπ H; ∂_k taken along the lift X_k.
    std::vector<Jet2> V(n);
    for (int q = 0; q < n; ++q) {
        Jet2 acc(0.0);
        for (int a = 0; a < m; ++a) acc += k.dpi_jet()(q, a) * k.H_jet()[a];
        V[q] = acc;
    }
    double div = 0.0;
    for (int q = 0; q < n; ++q) {
        div += directional(V[q], values(k.lift_jet(q)));
        for (int j = 0; j < n; ++j) div += Kb.christoffel(q, q, j) * V[j].value;
    }
    b.div_piH = div;
    return b;
}

struct IntegralConfig {
    std::vector<int> counts;      // total-space node counts (empty: defaults)
    std::vector<int> base_counts; // base node counts (empty: defaults)
    double tol = 1e-6;
    double flow_tol = 1e-4;
    std::uint64_t seed = 42;
    int divergence_fields = 5;
    double fd_step = 1e-3; // finite-difference step of the base Laplacian
};

/// |L − R| / max(1, |terms|): relative to the largest integral involved.
inline double relative_residual(double lhs, double rhs, std::initializer_list<double> terms)
{
    double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
    for (double t : terms) scale = std::max(scale, std::abs(t));
    return std::abs(lhs - rhs) / scale;
}

inline const std::vector<std::string>& integral_names()
{
    static const std::vector<std::string> names{"integral_ranjan", "total_scalar", "sH_integral",
                                                "base_integral", "constant_curvature_integral",
                                                "laplacian_identity", "divergence_theorem", "node_sign_ledger"};
    return names;
}

inline const std::map<std::string, std::string>& integral_anchors()
{
    static const std::map<std::string, std::string> a{
        {"integral_ranjan", "∫_M τ^HV dv = (1 − 1/r) ∫_M g(H,H) dv + ∫_M g(A,A) dv"},
        {"total_scalar", "S − (S′∘π + Ŝ) = (1 − 1/r) ∫_M g(H,H) dv − ∫_M g(A,A) dv"},
        {"sH_integral", "∫_M (s^H − s′∘π) dv = (1 − 1/r) ∫_M g(H,H) dv − 2 ∫_M g(A,A) dv"},
        {"base_integral", "τ^HV = [div′(π_*H) − (1/r) g′(π_*H,π_*H) + g(A,A)]∘π; ∫_B τ′^HV = −(1/r) ∫_B "
                          "g′(π_*H,π_*H) + ∫_B g(A,A)"},
        {"constant_curvature_integral", "r n c vol(B) = −(1/r) ∫_B g′(π_*H,π_*H) dv′ + ∫_B g(A,A) dv′"},
        {"laplacian_identity", "½ Δ_B f = f (3(f − c) + n c − (1/r) g(A,A)), f = g′(π_*H/r, π_*H/r) + c"},
        {"divergence_theorem", "∫_M div(E) dv = 0"},
        {"node_sign_ledger", "index r over a Riemannian base: g(H,H) ≥ 0 and g(A,A) ≤ 0 at every node; "
                             "Riemannian: both ≥ 0"},
    };
    return a;
}

/// Node data for one submersion, computed on first use and shared by the checks.
class IntegralContext {
public:
    IntegralContext(const SubmersionSpec& sub, IntegralConfig cfg = {}) : sub_(&sub), cfg_(std::move(cfg)) {}

    const SubmersionSpec& sub() const { return *sub_; }
    const IntegralConfig& config() const { return cfg_; }
    int r() const { return sub_->fibre_dim; }
    int n() const { return sub_->base->dim; }

    const Gate& total_closed()
    {
        if (!total_closed_) total_closed_ = closed_chart(*sub_->total);
        return *total_closed_;
    }
    const Gate& base_closed()
    {
        if (!base_closed_) base_closed_ = closed_chart(*sub_->base);
        return *base_closed_;
    }

    const QuadratureGrid& grid()
    {
        if (!grid_) grid_ = make_quadrature(*sub_->total, cfg_.counts);
        return *grid_;
    }
    const QuadratureGrid& base_grid()
    {
        if (!base_grid_) base_grid_ = make_quadrature(*sub_->base, cfg_.base_counts);
        return *base_grid_;
    }

    const std::vector<NodeTerms>& terms()
    {
        if (!terms_) {
            const auto& q = grid();
            terms_ = parallel_map<NodeTerms>(q.size(), [&](std::size_t i) { return node_terms(*sub_, q.nodes[i]); });
        }
        return *terms_;
    }
    const std::vector<BaseTerms>& base_terms_all()
    {
        if (!base_terms_) {
            const auto& q = base_grid();
            base_terms_ =
                parallel_map<BaseTerms>(q.size(), [&](std::size_t i) { return base_terms(*sub_, q.nodes[i]); });
        }
        return *base_terms_;
    }

    /// ∫ over M of a projection of the node terms.
    template <class F>
    double total_integral(F f)
    {
        const auto& t = terms();
        std::vector<double> v(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) v[i] = f(t[i]);
        return integrate_values(grid(), v);
    }
    template <class F>
    double base_integral(F f)
    {
        const auto& t = base_terms_all();
        std::vector<double> v(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) v[i] = f(t[i]);
        return integrate_values(base_grid(), v);
    }

    double max_umbilicity()
    {
        double u = 0.0;
        for (const auto& t : terms()) u = std::max(u, t.umbilicity);
        return u;
    }

private:
    const SubmersionSpec* sub_;
    IntegralConfig cfg_;
    std::optional<Gate> total_closed_, base_closed_;
    std::optional<QuadratureGrid> grid_, base_grid_;
    std::optional<std::vector<NodeTerms>> terms_;
    std::optional<std::vector<BaseTerms>> base_terms_;
};

namespace detail {

inline IdentityReport integral_skip(IntegralContext& ctx, const std::string& id, std::string reason)
{
    IdentityReport r = skipped_report(id, integral_anchors().at(id), ctx.config().tol, std::move(reason));
    r.case_id = ctx.sub().name;
    return r;
}

inline IdentityReport integral_report(IntegralContext& ctx, const std::string& id, double residual, long samples,
                                      std::vector<std::pair<std::string, double>> extras)
{
    IdentityReport r;
    r.case_id = ctx.sub().name;
    r.identity = id;
    r.anchor = integral_anchors().at(id);
    r.samples = samples;
    r.max_residual = residual;
    r.mean_residual = residual;
    r.tol = ctx.config().tol;
    r.pass = std::isfinite(residual) && residual <= r.tol;
    r.extras = std::move(extras);
    return r;
}

/// Common gates of the total-space integral formulas.
inline std::optional<std::string> total_gates(IntegralContext& ctx)
{
    if (!ctx.sub().total->compact()) return "total space is not compact in its chart";
    if (!ctx.total_closed().ok) return ctx.total_closed().reason;
    // A boundary face of the base means π does not extend to a submersion of a closed manifold.
    if (!ctx.base_closed().ok) return "base " + ctx.base_closed().reason;
    const double u = ctx.max_umbilicity();
    if (u > ctx.config().tol) return "fibres not totally umbilic (umbilicity residual " + format_number(u) + ")";
    return std::nullopt;
}

} // namespace detail

inline IdentityReport check_integral_ranjan(IntegralContext& ctx)
{
    const std::string id = "integral_ranjan";
    if (auto why = detail::total_gates(ctx)) return detail::integral_skip(ctx, id, *why);
    const double rr = ctx.r();
    const double tau = ctx.total_integral([](const NodeTerms& t) { return t.tau; });
    const double hh = ctx.total_integral([](const NodeTerms& t) { return t.gHH; });
    const double aa = ctx.total_integral([](const NodeTerms& t) { return t.gAA; });
    const double rhs = (1.0 - 1.0 / rr) * hh + aa;
    return detail::integral_report(ctx, id, relative_residual(tau, rhs, {hh, aa}), long(ctx.grid().size()),
                                   {{"int_tau_HV", tau}, {"int_gHH", hh}, {"int_gAA", aa}, {"rhs", rhs}});
}

inline IdentityReport check_total_scalar(IntegralContext& ctx)
{
    const std::string id = "total_scalar";
    if (auto why = detail::total_gates(ctx)) return detail::integral_skip(ctx, id, *why);
    if (ctx.r() >= 2 && !ctx.sub().coordinate_aligned)
        return detail::integral_skip(ctx, id, "fibre scalar curvature needs a coordinate-aligned chart");
    const double rr = ctx.r();
    const double S = ctx.total_integral([](const NodeTerms& t) { return t.s; });
    const double Sb = ctx.total_integral([](const NodeTerms& t) { return t.s_base; });
    const double Sf = ctx.total_integral([](const NodeTerms& t) { return t.s_fibre; });
    const double hh = ctx.total_integral([](const NodeTerms& t) { return t.gHH; });
    const double aa = ctx.total_integral([](const NodeTerms& t) { return t.gAA; });
    const double lhs = S - (Sb + Sf), rhs = (1.0 - 1.0 / rr) * hh - aa;
    return detail::integral_report(ctx, id, relative_residual(lhs, rhs, {S, Sb, Sf, hh, aa}), long(ctx.grid().size()),
                                   {{"S", S}, {"S_base", Sb}, {"S_fibre", Sf}, {"int_gHH", hh}, {"int_gAA", aa}});
}

inline IdentityReport check_sH_integral(IntegralContext& ctx)
{
    const std::string id = "sH_integral";
    if (auto why = detail::total_gates(ctx)) return detail::integral_skip(ctx, id, *why);
    const double rr = ctx.r();
    const double lhs = ctx.total_integral([](const NodeTerms& t) { return t.s_H - t.s_base; });
    const double hh = ctx.total_integral([](const NodeTerms& t) { return t.gHH; });
    const double aa = ctx.total_integral([](const NodeTerms& t) { return t.gAA; });
    const double rhs = (1.0 - 1.0 / rr) * hh - 2.0 * aa;
    return detail::integral_report(ctx, id, relative_residual(lhs, rhs, {hh, aa}), long(ctx.grid().size()),
                                   {{"int_sH_minus_sbase", lhs}, {"int_gHH", hh}, {"int_gAA", aa}});
}

namespace detail {

/// max variation of τ^HV along fibres through a few base nodes.
inline double tau_fibre_variation(IntegralContext& ctx)
{
    const SubmersionSpec& sub = ctx.sub();
    const std::vector<Vec> ys = sample_grid(*sub.base);
    const auto per = parallel_map<double>(ys.size(), [&](std::size_t i) {
        const Vec x = lift_point(sub, ys[i]);
        double t0 = 0.0, worst = 0.0;
        bool first = true;
        for (const Vec& p : fibre_samples(sub, x, 8)) {
            const SubmersionPoint k(sub, p);
            const double t = tau_HV(k, curvature_at(*sub.total, k.point()));
            if (first) {
                t0 = t;
                first = false;
            }
            worst = std::max(worst, std::abs(t - t0));
        }
        return worst;
    });
    double w = 0.0;
    for (double v : per) w = std::max(w, v);
    return w;
}

} // namespace detail

inline IdentityReport check_base_integral(IntegralContext& ctx)
{
    const std::string id = "base_integral";
    const SubmersionSpec& sub = ctx.sub();
    if (!sub.base->compact()) return detail::integral_skip(ctx, id, "base is not compact in its chart");
    if (!ctx.base_closed().ok) return detail::integral_skip(ctx, id, "base " + ctx.base_closed().reason);
    const double ftol = sub.coordinate_aligned ? ctx.config().tol : ctx.config().flow_tol;
    const double var = detail::tau_fibre_variation(ctx);
    if (var > ftol)
        return detail::integral_skip(ctx, id, "τ^HV is not constant along fibres (variation " + format_number(var) + ")");
    const auto& bt = ctx.base_terms_all();
    double umb = 0.0, pw = 0.0;
    for (const auto& b : bt) umb = std::max(umb, b.umbilicity);
    if (umb > ctx.config().tol)
        return detail::integral_skip(ctx, id, "fibres not totally umbilic (umbilicity residual " + format_number(umb) + ")");
    const double rr = ctx.r();
    for (const auto& b : bt) pw = std::max(pw, std::abs(b.tau - (b.div_piH - b.gHH / rr + b.gAA)));
    const double tau = ctx.base_integral([](const BaseTerms& b) { return b.tau; });
    const double hh = ctx.base_integral([](const BaseTerms& b) { return b.gHH; });
    const double aa = ctx.base_integral([](const BaseTerms& b) { return b.gAA; });
    const double rhs = -hh / rr + aa;
    const double rel = relative_residual(tau, rhs, {hh, aa});
    IdentityReport r = detail::integral_report(ctx, id, std::max(pw, rel), long(bt.size()),
                                               {{"pointwise_residual", pw},
                                                {"integral_residual", rel},
                                                {"int_B_tau", tau},
                                                {"int_B_gHH", hh},
                                                {"int_B_gAA", aa},
                                                {"fibre_variation_tau", var}});
    if (!sub.coordinate_aligned) r.tol = std::max(r.tol, ctx.config().flow_tol * 0.1);
    r.pass = r.max_residual <= r.tol;
    return r;
}

inline IdentityReport check_constant_curvature_integral(IntegralContext& ctx)
{
    const std::string id = "constant_curvature_integral";
    const SubmersionSpec& sub = ctx.sub();
    if (!sub.base->compact()) return detail::integral_skip(ctx, id, "base is not compact in its chart");
    if (!ctx.base_closed().ok) return detail::integral_skip(ctx, id, "base " + ctx.base_closed().reason);
    CheckConfig cc;
    cc.tol = ctx.config().tol;
    cc.seed = ctx.config().seed;
    const CurvatureFit fit = fit_constant_curvature(*sub.total, sample_grid(*sub.total), cc);
    if (fit.residual > ctx.config().tol)
        return detail::integral_skip(ctx, id, "total space is not of constant curvature (fit residual " +
                                                  format_number(fit.residual) + ")");
    const auto& bt = ctx.base_terms_all();
    double umb = 0.0;
    for (const auto& b : bt) umb = std::max(umb, b.umbilicity);
    if (umb > ctx.config().tol)
        return detail::integral_skip(ctx, id, "fibres not totally umbilic (umbilicity residual " + format_number(umb) + ")");
    const double rr = ctx.r(), nn = ctx.n();
    const double vol = ctx.base_integral([](const BaseTerms&) { return 1.0; });
    const double hh = ctx.base_integral([](const BaseTerms& b) { return b.gHH; });
    const double aa = ctx.base_integral([](const BaseTerms& b) { return b.gAA; });
    const double lhs = rr * nn * fit.c * vol, rhs = -hh / rr + aa;
    return detail::integral_report(ctx, id, relative_residual(lhs, rhs, {hh, aa}), long(bt.size()),
                                   {{"c_fit", fit.c},
                                    {"rnc_volB", lhs},
                                    {"minus_int_B_gHH_over_r", -hh / rr},
                                    {"int_B_gAA", aa}});
}

/// Pointwise: ½ Δ_B f = f (3(f − c) + n c − (1/r) g(A,A)) with f = g(H/r,H/r) + c
/// and c from τ^HV = r n c. Δ_B by central differences of the jet gradient;
/// residuals are relative to max(1, |½ Δ_B f|, |rhs|).
inline IdentityReport check_laplacian_identity(IntegralContext& ctx)
{
    const std::string id = "laplacian_identity";
    const SubmersionSpec& sub = ctx.sub();
    const std::vector<Vec> ys = sample_grid(*sub.base);
    std::vector<Vec> xs;
    for (const Vec& y : ys) xs.push_back(lift_point(sub, y));
    CheckConfig cc;
    cc.tol = ctx.config().tol;
    cc.seed = ctx.config().seed;
    SuiteContext sc(sub, xs, cc);
    if (!sc.umbilic().ok) return detail::integral_skip(ctx, id, sc.umbilic().reason);
    if (!sc.h_basic().ok) return detail::integral_skip(ctx, id, sc.h_basic().reason);
    const CurvatureFit& mixed = sc.mixed_fit();
    if (mixed.residual > ctx.config().tol)
        return detail::integral_skip(ctx, id, "τ^HV is not r n c for a constant c (residual " +
                                                  format_number(mixed.residual) + ")");
    const double c = mixed.c, rr = ctx.r(), nn = ctx.n();
    const int n = ctx.n();
    // W^k = sqrt|g′| g′^{kl} ∂_l f at base point y, with ∂_l f along the lift X_l.
    auto W = [&](const Vec& y, const Vec& x_hint) {
        const Vec x = lift_point(sub, y, x_hint);
        const SubmersionPoint k(sub, x);
        const Jet2 f = k.gHH_over_r2();
        const Mat gb = eval_matrix(sub.base->metric, n, n, y);
        const Mat gi = inverse(gb);
        const double rho = std::sqrt(std::abs(determinant(gb)));
        Vec df(n), w(n);
        for (int l = 0; l < n; ++l) df[l] = directional(f, values(k.lift_jet(l)));
        for (int q = 0; q < n; ++q)
            for (int l = 0; l < n; ++l) w[q] += rho * gi(q, l) * df[l];
        return w;
    };
    const double h = ctx.config().fd_step;
    const auto per = parallel_map<double>(ys.size(), [&](std::size_t i) {
        const Vec& y = ys[i];
        const Mat gb = eval_matrix(sub.base->metric, n, n, y);
        const double rho = std::sqrt(std::abs(determinant(gb)));
        // Central differences at h and h/2, Richardson-extrapolated.
        auto central = [&](double step) {
            double acc = 0.0;
            for (int q = 0; q < n; ++q) {
                Vec yp = y, ym = y;
                yp[q] += step;
                ym[q] -= step;
                acc += (W(yp, xs[i])[q] - W(ym, xs[i])[q]) / (2.0 * step);
            }
            return acc;
        };
        const double lap = (4.0 * central(0.5 * h) - central(h)) / 3.0 / rho;
        const SubmersionPoint& k = sc.kit(i);
        const double f = k.gHH_over_r2().value + c;
        const double rhs = f * (3.0 * (f - c) + nn * c - k.normA2() / rr);
        return relative_residual(0.5 * lap, rhs, {});
    });
    ResidualStats st;
    for (double v : per) st.add(v);
    IdentityReport r = st.report(id, integral_anchors().at(id), ctx.config().tol);
    r.case_id = sub.name;
    r.extras = {{"c_mixed", c}};
    const CurvatureFit& rv = sc.rhoV_fit();
    r.extras.push_back({"c_rhoV", rv.c});
    return r;
}

/// Random smooth vector field: E^a = c₀ + Σ_b (c sin + c cos) of periodic coordinates,
/// plus linear terms in bounded ones.
inline std::vector<ExprPtr> random_field(const ManifoldSpec& spec, SampleRng& rng)
{
    std::vector<ExprPtr> comps;
    for (int a = 0; a < spec.dim; ++a) {
        ExprPtr e = expr::constant(rng.symmetric());
        for (int b = 0; b < spec.dim; ++b) {
            const ExprPtr xb = expr::coordinate(b, spec.coords[b]);
            if (spec.is_periodic(b)) {
                const ExprPtr arg = expr::mul(expr::constant(2.0 * std::numbers::pi / *spec.periodic[b]), xb);
                e = expr::add(e, expr::mul(expr::constant(rng.symmetric()), expr::call(Function::Sin, arg)));
                e = expr::add(e, expr::mul(expr::constant(rng.symmetric()), expr::call(Function::Cos, arg)));
            } else {
                e = expr::add(e, expr::mul(expr::constant(rng.symmetric()), xb));
            }
        }
        comps.push_back(e);
    }
    return comps;
}

/// ∫ div(E) dv for random fields E; residual is the largest |∫ div E|.
inline IdentityReport check_divergence_theorem(IntegralContext& ctx)
{
    const std::string id = "divergence_theorem";
    const ManifoldSpec& M = *ctx.sub().total;
    if (!M.compact()) return detail::integral_skip(ctx, id, "total space is not compact in its chart");
    if (!ctx.total_closed().ok) return detail::integral_skip(ctx, id, ctx.total_closed().reason);
    double worst = 0.0;
    std::vector<std::pair<std::string, double>> extras;
    const auto& q = ctx.grid();
    for (int f = 0; f < ctx.config().divergence_fields; ++f) {
        SampleRng rng(ctx.config().seed, id, static_cast<std::uint64_t>(f));
        const JetField E = expr_field(random_field(M, rng));
        const auto vals =
            parallel_map<double>(q.size(), [&](std::size_t i) { return divergence(M, E, q.nodes[i]); });
        const double v = integrate_values(q, vals);
        extras.push_back({"field_" + std::to_string(f), v});
        worst = std::max(worst, std::abs(v));
    }
    IdentityReport r = detail::integral_report(ctx, id, worst, long(q.size()), std::move(extras));
    r.tol = 1e-8;
    r.pass = worst <= r.tol;
    return r;
}

/// Signs of g(H,H) and g(A,A) at every quadrature node.
inline IdentityReport check_node_sign_ledger(IntegralContext& ctx)
{
    const std::string id = "node_sign_ledger";
    const SubmersionSpec& sub = ctx.sub();
    if (!sub.total->compact()) return detail::integral_skip(ctx, id, "total space is not compact in its chart");
    const bool riemannian = sub.total->signature == 0;
    const bool index_r = sub.total->signature == sub.fibre_dim && sub.base->signature == 0;
    if (!riemannian && !index_r)
        return detail::integral_skip(ctx, id, "signature is neither Riemannian nor index r over a Riemannian base");
    const double a_sign = riemannian ? 1.0 : -1.0;
    double worst = 0.0, min_hh = INFINITY, max_aa = -INFINITY, min_aa = INFINITY;
    const auto& terms = ctx.terms();
    for (const auto& t : terms) {
        worst = std::max({worst, -t.gHH, -a_sign * t.gAA});
        min_hh = std::min(min_hh, t.gHH);
        max_aa = std::max(max_aa, t.gAA);
        min_aa = std::min(min_aa, t.gAA);
    }
    return detail::integral_report(ctx, id, std::max(0.0, worst), long(terms.size()),
                                   {{"min_gHH", min_hh}, {"min_gAA", min_aa}, {"max_gAA", max_aa}});
}

inline IdentityReport run_integral(IntegralContext& ctx, const std::string& name)
{
    static const std::map<std::string, IdentityReport (*)(IntegralContext&)> table{
        {"integral_ranjan", check_integral_ranjan},
        {"total_scalar", check_total_scalar},
        {"sH_integral", check_sH_integral},
        {"base_integral", check_base_integral},
        {"constant_curvature_integral", check_constant_curvature_integral},
        {"laplacian_identity", check_laplacian_identity},
        {"divergence_theorem", check_divergence_theorem},
        {"node_sign_ledger", check_node_sign_ledger},
    };
    const auto it = table.find(name);
    if (it == table.end()) throw std::invalid_argument("unknown integral formula '" + name + "'");
    return it->second(ctx);
}

inline std::vector<IdentityReport> run_integrals(IntegralContext& ctx, std::vector<std::string> names = {"all"})
{
    std::vector<std::string> wanted;
    for (const auto& n : names) {
        if (n == "all") {
            wanted = integral_names();
            break;
        }
        if (!integral_anchors().count(n)) throw std::invalid_argument("unknown integral formula '" + n + "'");
        wanted.push_back(n);
    }
    std::vector<IdentityReport> out;
    for (const auto& n : integral_names())
        if (std::find(wanted.begin(), wanted.end(), n) != wanted.end()) out.push_back(run_integral(ctx, n));
    return out;
}

} // namespace oneill
