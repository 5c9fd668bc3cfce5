#pragma once

/// \file
/// Geodesics by fixed-step classical RK4, hyperbolic angles between a
/// timelike velocity and its vertical part, the Clairaut girth drift, and
/// the mixed-flat Riccati residual dh/dt = h² along horizontal geodesics.

#include "oneill/geometry.hpp"
#include "oneill/identities.hpp"
#include "oneill/sampling.hpp"
#include "oneill/submersion.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace oneill {

struct GeodesicState {
    double t = 0.0;
    Vec x;
    Vec v;
    double gvv = 0.0; // g(v,v)
};

struct GeodesicRun {
    std::vector<GeodesicState> states;
    double energy_drift = 0.0;       // max |g(v,v)(t) − g(v,v)(0)|
    double max_error_estimate = 0.0; // step-doubling estimate, when enabled
    std::optional<std::string> halted; // chart exit or step rejection; states hold the partial result
};

struct GeodesicOptions {
    bool step_doubling = false;
    double reject_ratio = 1e-3; // reject when the local error estimate exceeds this fraction of the state norm
    bool keep_states = true;    // false keeps only the first and last state
};

namespace detail {

/// Γ^c_ab at x from first metric derivatives only.
inline std::array<double, kMaxDim * kMaxDim * kMaxDim> christoffel_values(const ManifoldSpec& spec, const Vec& x)
{
    const int m = spec.dim;
    const Vec w = spec.wrap(x);
    const std::span<const double> pt(w.begin(), w.end());
    Mat g(m, m);
    std::array<double, kMaxDim * kMaxDim * kMaxDim> dg{};
    for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b) {
            const Jet2 j = eval_expr_jet(*spec.metric[a][b], pt);
            g(a, b) = g(b, a) = j.value;
            for (int c = 0; c < m; ++c) dg[(a * kMaxDim + b) * kMaxDim + c] = dg[(b * kMaxDim + a) * kMaxDim + c] = j.grad[c];
        }
    if (!(std::abs(determinant(g)) >= kDetTolerance)) throw DegenerateMetricError("degenerate metric along geodesic");
    const Mat gi = inverse(g, 0.0);
    auto d = [&](int a, int b, int c) { return dg[(a * kMaxDim + b) * kMaxDim + c]; };
    std::array<double, kMaxDim * kMaxDim * kMaxDim> gam{};
    for (int c = 0; c < m; ++c)
        for (int a = 0; a < m; ++a)
            for (int b = a; b < m; ++b) {
                double acc = 0.0;
                for (int e = 0; e < m; ++e) acc += gi(c, e) * (d(e, b, a) + d(e, a, b) - d(a, b, e));
                gam[(c * kMaxDim + a) * kMaxDim + b] = gam[(c * kMaxDim + b) * kMaxDim + a] = 0.5 * acc;
            }
    return gam;
}

/// (ẋ, v̇) for the geodesic equation.
inline std::pair<Vec, Vec> geodesic_rhs(const ManifoldSpec& spec, const Vec& x, const Vec& v)
{
    const int m = spec.dim;
    const auto gam = christoffel_values(spec, x);
    Vec acc(m);
    for (int c = 0; c < m; ++c) {
        double s = 0.0;
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) s += gam[(c * kMaxDim + a) * kMaxDim + b] * v[a] * v[b];
        acc[c] = -s;
    }
    return {v, acc};
}

inline void rk4_step(const ManifoldSpec& spec, Vec& x, Vec& v, double h)
{
    const int m = spec.dim;
    auto axpy = [m](const Vec& a, double s, const Vec& b) {
        Vec r(m);
        for (int i = 0; i < m; ++i) r[i] = a[i] + s * b[i];
        return r;
    };
    const auto [k1x, k1v] = geodesic_rhs(spec, x, v);
    const auto [k2x, k2v] = geodesic_rhs(spec, axpy(x, 0.5 * h, k1x), axpy(v, 0.5 * h, k1v));
    const auto [k3x, k3v] = geodesic_rhs(spec, axpy(x, 0.5 * h, k2x), axpy(v, 0.5 * h, k2v));
    const auto [k4x, k4v] = geodesic_rhs(spec, axpy(x, h, k3x), axpy(v, h, k3v));
    for (int i = 0; i < m; ++i) {
        x[i] += h / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
        v[i] += h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
    }
}

inline double metric_norm2(const ManifoldSpec& spec, const Vec& x, const Vec& v)
{
    const Vec w = spec.wrap(x);
    const std::span<const double> pt(w.begin(), w.end());
    double acc = 0.0;
    for (int a = 0; a < spec.dim; ++a)
        for (int b = 0; b < spec.dim; ++b) acc += eval_expr(*spec.metric[a][b], pt) * v[a] * v[b];
    return acc;
}

} // namespace detail

/// Integrate ẍ^c + Γ^c_ab ẋ^a ẋ^b = 0 with fixed-step RK4. Coordinates are kept
/// unwrapped so trajectories stay continuous across periodic seams.
inline GeodesicRun integrate_geodesic(const ManifoldSpec& spec, const Vec& x0, const Vec& v0, double dt, long steps,
                                      const GeodesicOptions& opt = {})
{
    if (x0.size() != spec.dim || v0.size() != spec.dim)
        throw std::invalid_argument("x0 and v0 need " + std::to_string(spec.dim) + " components");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (steps < 0) throw std::invalid_argument("steps must be non-negative");
    if (!spec.inside(x0)) throw std::invalid_argument("x0 lies outside the chart");
    GeodesicRun run;
    Vec x = x0, v = v0;
    const double g0 = detail::metric_norm2(spec, x, v);
    run.states.push_back({0.0, x, v, g0});
    GeodesicState last = run.states.back();
    for (long s = 1; s <= steps; ++s) {
        try {
            if (opt.step_doubling) {
                Vec xh = x, vh = v;
                detail::rk4_step(spec, xh, vh, 0.5 * dt);
                detail::rk4_step(spec, xh, vh, 0.5 * dt);
                Vec xf = x, vf = v;
                detail::rk4_step(spec, xf, vf, dt);
                double err = 0.0, norm = 0.0;
                for (int i = 0; i < spec.dim; ++i) {
                    err = std::max({err, std::abs(xf[i] - xh[i]), std::abs(vf[i] - vh[i])});
                    norm = std::max({norm, std::abs(xf[i]), std::abs(vf[i])});
                }
                run.max_error_estimate = std::max(run.max_error_estimate, err);
                if (err > opt.reject_ratio * std::max(norm, 1e-300)) {
                    run.halted = "step rejected at t = " + format_number(last.t) + " (local error " +
                                 format_number(err) + ")";
                    break;
                }
                x = xf;
                v = vf;
            } else {
                detail::rk4_step(spec, x, v, dt);
            }
        } catch (const DegenerateMetricError& e) {
            run.halted = std::string(e.what()) + " at t = " + format_number(last.t);
            break;
        } catch (const EvalError& e) {
            run.halted = std::string(e.what()) + " at t = " + format_number(last.t);
            break;
        }
        if (!spec.inside(x)) {
            run.halted = "chart exit at t = " + format_number(s * dt);
            break;
        }
        last = {s * dt, x, v, detail::metric_norm2(spec, x, v)};
        run.energy_drift = std::max(run.energy_drift, std::abs(last.gvv - g0));
        if (opt.keep_states) run.states.push_back(last);
    }
    if (!opt.keep_states && run.states.back().t != last.t) run.states.push_back(last);
    return run;
}

// ---------------------------------------------------------------------------
// Clairaut diagnostics

class ClairautDomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ClairautSample {
    double t = 0.0;
    double cosh_phi = 1.0;
    double w = 1.0;
    double product = 1.0; // w cosh φ
};

/// cosh φ = −g(E,V)/(‖E‖‖V‖) with V the vertical part of E; both must be timelike.
inline double cosh_hyperbolic_angle(const SubmersionSpec& sub, const Vec& x, const Vec& E)
{
    const AdaptedFrame fr = adapted_frame(sub, x);
    const Mat g = eval_matrix(sub.total->metric, sub.total->dim, sub.total->dim, sub.total->wrap(x));
    Vec V(E.size());
    for (int i = 0; i < fr.r; ++i) {
        const double c = fr.eps[i] * inner(g, E, fr.legs[i]);
        for (int a = 0; a < V.size(); ++a) V[a] += c * fr.legs[i][a];
    }
    const double gee = inner(g, E, E), gvv = inner(g, V, V), gev = inner(g, E, V);
    double scale = 0.0;
    for (int a = 0; a < E.size(); ++a) scale = std::max(scale, std::abs(E[a]));
    const double eps = 1e-12 * (1.0 + scale * scale);
    if (!(gee < -eps)) throw ClairautDomainError("non-timelike velocity");
    if (!(gvv < -eps)) throw ClairautDomainError("non-timelike vertical part");
    return -gev / std::sqrt(gee * gvv);
}

inline ClairautSample hyperbolic_angle(const SubmersionSpec& sub, const Expr& girth_log, const GeodesicState& s)
{
    ClairautSample out;
    out.t = s.t;
    out.cosh_phi = cosh_hyperbolic_angle(sub, s.x, s.v);
    const Vec w = sub.total->wrap(s.x);
    out.w = std::exp(eval_expr(girth_log, std::span<const double>(w.begin(), w.end())));
    out.product = out.w * out.cosh_phi;
    return out;
}

/// The Clairaut hypothesis: umbilic fibres, H/r = −grad f, and f constant on fibres.
inline Gate clairaut_gate(const SubmersionSpec& sub, const Expr& girth_log, const std::vector<Vec>& grid,
                          double tol = 1e-6)
{
    Gate gate;
    double umb = 0.0, grad_res = 0.0, fibre_res = 0.0;
    for (const Vec& x : grid) {
        const SubmersionPoint k(sub, x);
        umb = std::max(umb, k.umbilicity_residual());
        const Vec gf = gradient(*sub.total, girth_log, k.point());
        Vec d = k.H_over_r();
        for (int a = 0; a < d.size(); ++a) d[a] += gf[a];
        grad_res = std::max(grad_res, k.frame_norm(d));
        const auto pts = fibre_samples(sub, x, 8);
        const double f0 = eval_expr(girth_log, std::span<const double>(pts[0].begin(), pts[0].end()));
        for (const Vec& p : pts)
            fibre_res = std::max(fibre_res, std::abs(eval_expr(girth_log, std::span<const double>(p.begin(), p.end())) - f0));
    }
    gate.residual = std::max({umb, grad_res, fibre_res});
    gate.ok = gate.residual <= tol;
    if (umb > tol)
        gate.reason = "not a Clairaut submersion: fibres not totally umbilic (residual " + format_number(umb) + ")";
    else if (grad_res > tol)
        gate.reason = "not a Clairaut submersion: H/r + grad f residual " + format_number(grad_res);
    else if (fibre_res > tol)
        gate.reason = "not a Clairaut submersion: f varies along fibres by " + format_number(fibre_res);
    return gate;
}

struct ClairautRun {
    Gate gate;
    GeodesicRun geodesic;
    std::vector<std::optional<ClairautSample>> samples; // one per state; empty where the angle is undefined
    long skipped_samples = 0;
    double drift = 0.0;        // max |w cosh φ(t) − w cosh φ(t₀)| over valid samples
    double min_cosh_phi = INFINITY;
};

inline ClairautRun clairaut_drift(const SubmersionSpec& sub, const Expr& girth_log, const Vec& x0, const Vec& v0,
                                  double dt, long steps, double gate_tol = 1e-6)
{
    ClairautRun out;
    out.gate = clairaut_gate(sub, girth_log, sample_grid(*sub.total), gate_tol);
    if (!out.gate.ok) return out;
    out.geodesic = integrate_geodesic(*sub.total, x0, v0, dt, steps);
    std::optional<double> first;
    for (const GeodesicState& s : out.geodesic.states) {
        try {
            const ClairautSample cs = hyperbolic_angle(sub, girth_log, s);
            out.samples.emplace_back(cs);
            out.min_cosh_phi = std::min(out.min_cosh_phi, cs.cosh_phi);
            if (!first) first = cs.product;
            out.drift = std::max(out.drift, std::abs(cs.product - *first));
        } catch (const ClairautDomainError&) {
            out.samples.emplace_back(std::nullopt);
            ++out.skipped_samples;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Mixed-flat Riccati equation

struct MixedOdeResult {
    std::optional<std::string> skipped;
    double residual = 0.0;       // max |dh/dt − h²|
    double a_residual = 0.0;     // max |A| along the trajectory
    double mixed_residual = 0.0; // max |R(γ', eᵢ, γ', eᵢ)|
    double max_abs_h = 0.0;
    long samples = 0;
    GeodesicRun geodesic;
};

/// Along a horizontal geodesic with A ≡ 0 and vanishing mixed curvature,
/// h = g(H/r, γ') satisfies dh/dt = h². dh/dt = g(∇_γ' H/r, γ') from jets.
inline MixedOdeResult mixed_ode_residual(const SubmersionSpec& sub, const Vec& x0, const Vec& v0, double dt,
                                         long steps, double tol = 1e-6)
{
    MixedOdeResult out;
    {
        const SubmersionPoint k0(sub, x0);
        const Vec vv = k0.vertical(v0);
        if (k0.frame_norm(vv) > 1e-9 * (1.0 + k0.frame_norm(v0)))
            throw std::invalid_argument("v0 must be horizontal");
    }
    out.geodesic = integrate_geodesic(*sub.total, x0, v0, dt, steps);
    for (const GeodesicState& s : out.geodesic.states) {
        const SubmersionPoint k(sub, s.x);
        const Curvature K = curvature_at(*sub.total, s.x);
        for (int a = k.fibre_dim(); a < k.total_dim(); ++a)
            for (int b = 0; b < k.total_dim(); ++b)
                out.a_residual = std::max(out.a_residual, k.frame_norm(k.A(k.leg(a), k.leg(b))));
        for (int i = 0; i < k.fibre_dim(); ++i)
            out.mixed_residual = std::max(out.mixed_residual, std::abs(K.riemann(s.v, k.leg(i), s.v, k.leg(i))));
        const Vec hr = k.H_over_r();
        const double h = k.g(hr, s.v);
        Vec nh = k.nabla_H(s.v);
        for (double& c : nh) c /= k.fibre_dim();
        const double dh = k.g(nh, s.v);
        out.residual = std::max(out.residual, std::abs(dh - h * h));
        out.max_abs_h = std::max(out.max_abs_h, std::abs(h));
        ++out.samples;
    }
    if (out.a_residual > tol) {
        out.skipped = "A does not vanish along the trajectory (residual " + format_number(out.a_residual) + ")";
        out.residual = 0.0;
        out.samples = 0;
    } else if (out.mixed_residual > tol) {
        out.skipped = "mixed curvature does not vanish along the trajectory (residual " +
                      format_number(out.mixed_residual) + ")";
        out.residual = 0.0;
        out.samples = 0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Trajectory dump

/// CSV with header: t, x_<coord>..., v_<coord>..., gvv[, cosh_phi, w_cosh_phi].
inline std::string trajectory_csv(const ManifoldSpec& spec, const GeodesicRun& run,
                                  const std::vector<std::optional<ClairautSample>>* clairaut = nullptr)
{
    std::string s = "t";
    for (const auto& c : spec.coords) s += ",x_" + c;
    for (const auto& c : spec.coords) s += ",v_" + c;
    s += ",gvv";
    if (clairaut) s += ",cosh_phi,w_cosh_phi";
    s += "\n";
    for (std::size_t i = 0; i < run.states.size(); ++i) {
        const GeodesicState& st = run.states[i];
        s += format_number(st.t);
        for (int a = 0; a < spec.dim; ++a) s += "," + format_number(st.x[a]);
        for (int a = 0; a < spec.dim; ++a) s += "," + format_number(st.v[a]);
        s += "," + format_number(st.gvv);
        if (clairaut) {
            const auto& cs = i < clairaut->size() ? (*clairaut)[i] : std::nullopt;
            s += cs ? "," + format_number(cs->cosh_phi) + "," + format_number(cs->product) : std::string(",,");
        }
        s += "\n";
    }
    return s;
}

} // namespace oneill
