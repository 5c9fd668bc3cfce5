#pragma once

/// \file
/// Levi-Civita connection and curvature of a chart metric at a point.
///
/// Conventions: R(E,F)G = ∇_E∇_F G − ∇_F∇_E G − ∇_[E,F] G and
/// R(E,F,G,G') = −g(R(E,F)G, G'), so the unit round sphere has K = +1.

#include "oneill/dsl.hpp"
#include "oneill/linalg.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace oneill {

class DegenerateMetricError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegeneratePlaneError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kDetTolerance = 1e-12;
inline constexpr double kPlaneTolerance = 1e-10;

struct MetricAtPoint {
    int m = 0;
    Mat g, g_inv;
    double det = 0.0;
    std::array<double, kMaxDim * kMaxDim * kMaxDim> dg_{};
    std::array<double, kMaxDim * kMaxDim * kMaxDim * kMaxDim> d2g_{};

    /// ∂_c g_ab
    double dg(int a, int b, int c) const { return dg_[(a * kMaxDim + b) * kMaxDim + c]; }
    double& dg(int a, int b, int c) { return dg_[(a * kMaxDim + b) * kMaxDim + c]; }
    /// ∂_c ∂_d g_ab
    double d2g(int a, int b, int c, int d) const { return d2g_[((a * kMaxDim + b) * kMaxDim + c) * kMaxDim + d]; }
    double& d2g(int a, int b, int c, int d) { return d2g_[((a * kMaxDim + b) * kMaxDim + c) * kMaxDim + d]; }
};

/// Metric components of `g_entries` (symmetric m x m) with first and second derivatives.
inline MetricAtPoint metric_from_exprs(const std::vector<std::vector<ExprPtr>>& g_entries, const Vec& x)
{
    MetricAtPoint mp;
    const int m = static_cast<int>(g_entries.size());
    mp.m = m;
    mp.g = Mat(m, m);
    const std::span<const double> pt(x.begin(), x.end());
    for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b) {
            const Jet2 j = eval_expr_jet(*g_entries[a][b], pt);
            mp.g(a, b) = mp.g(b, a) = j.value;
            for (int c = 0; c < m; ++c) {
                mp.dg(a, b, c) = mp.dg(b, a, c) = j.grad[c];
                for (int d = 0; d < m; ++d) mp.d2g(a, b, c, d) = mp.d2g(b, a, c, d) = j.hess[packed_index(c, d)];
            }
        }
    mp.det = determinant(mp.g);
    if (!(std::abs(mp.det) >= kDetTolerance))
        throw DegenerateMetricError("degenerate metric: |det g| = " + format_number(std::abs(mp.det)) + " at " +
                                    detail::format_point(pt));
    mp.g_inv = inverse(mp.g, 0.0);
    return mp;
}

inline MetricAtPoint metric_at(const ManifoldSpec& spec, const Vec& x)
{
    return metric_from_exprs(spec.metric, spec.wrap(x));
}

/// Metric induced on the coordinate slice spanned by `indices` (other coordinates frozen).
inline MetricAtPoint restrict(const MetricAtPoint& full, const std::vector<int>& indices)
{
    MetricAtPoint mp;
    const int k = static_cast<int>(indices.size());
    mp.m = k;
    mp.g = Mat(k, k);
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) {
            const int A = indices[a], B = indices[b];
            mp.g(a, b) = full.g(A, B);
            for (int c = 0; c < k; ++c) {
                mp.dg(a, b, c) = full.dg(A, B, indices[c]);
                for (int d = 0; d < k; ++d) mp.d2g(a, b, c, d) = full.d2g(A, B, indices[c], indices[d]);
            }
        }
    mp.det = determinant(mp.g);
    if (!(std::abs(mp.det) >= kDetTolerance)) throw DegenerateMetricError("degenerate restricted metric");
    mp.g_inv = inverse(mp.g, 0.0);
    return mp;
}

template <class S>
S inner(const SmallMat<S>& g, const SmallVec<S>& u, const SmallVec<S>& v)
{
    S acc(0.0);
    for (int a = 0; a < u.size(); ++a)
        for (int b = 0; b < v.size(); ++b) acc += g(a, b) * u[a] * v[b];
    return acc;
}

/// Signed orthonormal legs with ε_a = sign g(e_a, e_a).
template <class S>
struct SignedBasis {
    std::vector<SmallVec<S>> legs;
    std::vector<int> eps;
};

/// Signed Gram-Schmidt over candidate vectors. At each step the remaining
/// candidate with the largest |g(v,v)| after orthogonalization is taken (ties
/// go to the earliest candidate). Throws `what` if the best pivot is below tol.
template <class S, class Inner>
void signed_gram_schmidt(std::vector<SmallVec<S>> candidates, int count, const Inner& ip, SignedBasis<S>& out,
                         const std::string& what, double tol = 1e-10)
{
    std::vector<bool> used(candidates.size(), false);
    for (int step = 0; step < count; ++step) {
        int best = -1;
        double best_norm = 0.0;
        SmallVec<S> best_vec;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            if (used[c]) continue;
            SmallVec<S> v = candidates[c];
            for (std::size_t k = 0; k < out.legs.size(); ++k) {
                const S coeff = ip(v, out.legs[k]) * S(static_cast<double>(out.eps[k]));
                for (int a = 0; a < v.size(); ++a) v[a] = v[a] - coeff * out.legs[k][a];
            }
            const double nv = std::abs(value_of(ip(v, v)));
            if (best < 0 || nv > best_norm * (1.0 + 1e-9)) {
                best = static_cast<int>(c);
                best_norm = nv;
                best_vec = v;
            }
        }
        if (best < 0 || best_norm < tol) throw DegenerateMetricError(what);
        used[best] = true;
        const S q = ip(best_vec, best_vec);
        const int e = value_of(q) > 0.0 ? 1 : -1;
        using std::sqrt;
        const S scale = S(1.0) / sqrt(q * S(static_cast<double>(e)));
        for (int a = 0; a < best_vec.size(); ++a) best_vec[a] = best_vec[a] * scale;
        out.legs.push_back(best_vec);
        out.eps.push_back(e);
    }
}

/// Signed orthonormal frame of a constant metric, built from the coordinate basis.
inline SignedBasis<double> orthonormal_basis(const Mat& g)
{
    const int m = g.rows();
    std::vector<Vec> cand;
    for (int a = 0; a < m; ++a) {
        Vec e(m);
        e[a] = 1.0;
        cand.push_back(e);
    }
    SignedBasis<double> basis;
    signed_gram_schmidt(cand, m, [&](const Vec& u, const Vec& v) { return inner(g, u, v); }, basis,
                        "degenerate metric in frame construction");
    return basis;
}

/// Connection and curvature tensors at one point.
class Curvature {
public:
    explicit Curvature(MetricAtPoint mp) : mp_(std::move(mp)), m_(mp_.m)
    {
        const int m = m_;
        // S_eab = ∂_a g_eb + ∂_b g_ea − ∂_e g_ab and its derivatives.
        auto S = [&](int e, int a, int b) { return mp_.dg(e, b, a) + mp_.dg(e, a, b) - mp_.dg(a, b, e); };
        auto dS = [&](int e, int a, int b, int d) {
            return mp_.d2g(e, b, a, d) + mp_.d2g(e, a, b, d) - mp_.d2g(a, b, e, d);
        };
        for (int c = 0; c < m; ++c)
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) {
                    double acc = 0.0;
                    for (int e = 0; e < m; ++e) acc += mp_.g_inv(c, e) * S(e, a, b);
                    gamma(c, a, b) = 0.5 * acc;
                }
        // ∂_d g^{ce} = −g^{cf} ∂_d g_fh g^{he}
        std::array<double, kMaxDim * kMaxDim * kMaxDim> dginv{};
        auto dgi = [&](int c, int e, int d) -> double& { return dginv[(c * kMaxDim + e) * kMaxDim + d]; };
        for (int c = 0; c < m; ++c)
            for (int e = 0; e < m; ++e)
                for (int d = 0; d < m; ++d) {
                    double acc = 0.0;
                    for (int f = 0; f < m; ++f)
                        for (int h = 0; h < m; ++h) acc += mp_.g_inv(c, f) * mp_.dg(f, h, d) * mp_.g_inv(h, e);
                    dgi(c, e, d) = -acc;
                }
        for (int d = 0; d < m; ++d)
            for (int c = 0; c < m; ++c)
                for (int a = 0; a < m; ++a)
                    for (int b = 0; b < m; ++b) {
                        double acc = 0.0;
                        for (int e = 0; e < m; ++e)
                            acc += dgi(c, e, d) * S(e, a, b) + mp_.g_inv(c, e) * dS(e, a, b, d);
                        dgamma(d, c, a, b) = 0.5 * acc;
                    }
        // R^d_{cab} = ∂_aΓ^d_{bc} − ∂_bΓ^d_{ac} + Γ^d_{ae}Γ^e_{bc} − Γ^d_{be}Γ^e_{ac}
        for (int d = 0; d < m; ++d)
            for (int c = 0; c < m; ++c)
                for (int a = 0; a < m; ++a)
                    for (int b = 0; b < m; ++b) {
                        double acc = dgamma(a, d, b, c) - dgamma(b, d, a, c);
                        for (int e = 0; e < m; ++e)
                            acc += gamma(d, a, e) * gamma(e, b, c) - gamma(d, b, e) * gamma(e, a, c);
                        riem_[((d * kMaxDim + c) * kMaxDim + a) * kMaxDim + b] = acc;
                    }
    }

    int dim() const noexcept { return m_; }
    const MetricAtPoint& metric() const noexcept { return mp_; }
    double inner(const Vec& u, const Vec& v) const { return oneill::inner(mp_.g, u, v); }

    /// Γ^c_ab
    double christoffel(int c, int a, int b) const { return gamma_[(c * kMaxDim + a) * kMaxDim + b]; }
    /// ∂_d Γ^c_ab
    double christoffel_derivative(int d, int c, int a, int b) const
    {
        return dgamma_[((d * kMaxDim + c) * kMaxDim + a) * kMaxDim + b];
    }
    /// R^d_{cab}: R(∂_a, ∂_b)∂_c = R^d_{cab} ∂_d
    double riemann_component(int d, int c, int a, int b) const
    {
        return riem_[((d * kMaxDim + c) * kMaxDim + a) * kMaxDim + b];
    }

    /// The vector R(E,F)G.
    Vec riemann_vector(const Vec& E, const Vec& F, const Vec& G) const
    {
        Vec out(m_);
        for (int d = 0; d < m_; ++d) {
            double acc = 0.0;
            for (int c = 0; c < m_; ++c) {
                if (G[c] == 0.0) continue;
                for (int a = 0; a < m_; ++a) {
                    if (E[a] == 0.0) continue;
                    for (int b = 0; b < m_; ++b) acc += riemann_component(d, c, a, b) * E[a] * F[b] * G[c];
                }
            }
            out[d] = acc;
        }
        return out;
    }

    /// R(E,F,G,G2) = −g(R(E,F)G, G2)
    double riemann(const Vec& E, const Vec& F, const Vec& G, const Vec& G2) const
    {
        return -inner(riemann_vector(E, F, G), G2);
    }

    double sectional(const Vec& E, const Vec& F, double tol = kPlaneTolerance) const
    {
        const double gee = inner(E, E), gff = inner(F, F), gef = inner(E, F);
        const double den = gee * gff - gef * gef;
        if (std::abs(den) <= tol)
            throw DegeneratePlaneError("degenerate plane: g(E,E)g(F,F) - g(E,F)^2 = " + format_number(den));
        return riemann(E, F, E, F) / den;
    }

    const SignedBasis<double>& frame() const
    {
        if (frame_.legs.empty()) frame_ = orthonormal_basis(mp_.g);
        return frame_;
    }

    /// ρ(E,F) = Σ ε_a R(E, e_a, F, e_a) over a signed orthonormal frame.
    double ricci(const Vec& E, const Vec& F) const
    {
        const auto& fr = frame();
        double acc = 0.0;
        for (int a = 0; a < m_; ++a) acc += fr.eps[a] * riemann(E, fr.legs[a], F, fr.legs[a]);
        return acc;
    }

    /// ρ(E,F) as the coordinate contraction R^d_{bdc}... E^b F^c, independent of any frame.
    double ricci_coordinate(const Vec& E, const Vec& F) const
    {
        double acc = 0.0;
        for (int b = 0; b < m_; ++b)
            for (int c = 0; c < m_; ++c) {
                double rbc = 0.0;
                for (int d = 0; d < m_; ++d) rbc += riemann_component(d, c, d, b);
                acc += rbc * E[b] * F[c];
            }
        return acc;
    }

    double scalar() const
    {
        const auto& fr = frame();
        double acc = 0.0;
        for (int a = 0; a < m_; ++a) acc += fr.eps[a] * ricci(fr.legs[a], fr.legs[a]);
        return acc;
    }

    /// Scalar curvature by the coordinate trace g^{bc} ρ_bc.
    double scalar_coordinate() const
    {
        double acc = 0.0;
        for (int b = 0; b < m_; ++b)
            for (int c = 0; c < m_; ++c) {
                double rbc = 0.0;
                for (int d = 0; d < m_; ++d) rbc += riemann_component(d, c, d, b);
                acc += mp_.g_inv(b, c) * rbc;
            }
        return acc;
    }

private:
    double& gamma(int c, int a, int b) { return gamma_[(c * kMaxDim + a) * kMaxDim + b]; }
    double gamma(int c, int a, int b) const { return gamma_[(c * kMaxDim + a) * kMaxDim + b]; }
    double& dgamma(int d, int c, int a, int b) { return dgamma_[((d * kMaxDim + c) * kMaxDim + a) * kMaxDim + b]; }

    MetricAtPoint mp_;
    int m_;
    std::array<double, kMaxDim * kMaxDim * kMaxDim> gamma_{};
    std::array<double, kMaxDim * kMaxDim * kMaxDim * kMaxDim> dgamma_{};
    std::array<double, kMaxDim * kMaxDim * kMaxDim * kMaxDim> riem_{};
    mutable SignedBasis<double> frame_;
};

inline Curvature curvature_at(const ManifoldSpec& spec, const Vec& x) { return Curvature(metric_at(spec, x)); }

/// Christoffel symbols Γ^c_ab at x, indexed [c][a][b].
inline std::vector<std::vector<std::vector<double>>> christoffel(const ManifoldSpec& spec, const Vec& x)
{
    const Curvature K = curvature_at(spec, x);
    const int m = spec.dim;
    std::vector<std::vector<std::vector<double>>> out(m, std::vector<std::vector<double>>(m, std::vector<double>(m)));
    for (int c = 0; c < m; ++c)
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) out[c][a][b] = K.christoffel(c, a, b);
    return out;
}

/// grad f = g^{ab} ∂_b f ∂_a
inline Vec gradient(const ManifoldSpec& spec, const Expr& f, const Vec& x)
{
    const Vec w = spec.wrap(x);
    const Jet2 j = eval_expr_jet(f, std::span<const double>(w.begin(), w.end()));
    const MetricAtPoint mp = metric_at(spec, w);
    Vec out(spec.dim);
    for (int a = 0; a < spec.dim; ++a)
        for (int b = 0; b < spec.dim; ++b) out[a] += mp.g_inv(a, b) * j.grad[b];
    return out;
}

/// A vector field given as jets of its components at a point (order >= 1).
using JetField = std::function<JetVec(const Vec&)>;

/// Field whose components are expressions in the chart coordinates.
inline JetField expr_field(std::vector<ExprPtr> components)
{
    return [components = std::move(components)](const Vec& x) {
        JetVec v(static_cast<int>(components.size()));
        const std::span<const double> pt(x.begin(), x.end());
        for (int a = 0; a < v.size(); ++a) v[a] = eval_expr_jet(*components[a], pt);
        return v;
    };
}

/// ∇_b E^c = ∂_b E^c + Γ^c_bd E^d at the point of `K`.
inline Mat covariant_jacobian(const Curvature& K, const JetVec& E)
{
    const int m = K.dim();
    Mat out(m, m); // out(c, b)
    for (int c = 0; c < m; ++c)
        for (int b = 0; b < m; ++b) {
            double acc = E[c].g(b);
            for (int d = 0; d < m; ++d) acc += K.christoffel(c, b, d) * E[d].value;
            out(c, b) = acc;
        }
    return out;
}

/// div E = ∂_a E^a + Γ^a_ab E^b
inline double divergence_coordinate(const Curvature& K, const JetVec& E)
{
    const Mat J = covariant_jacobian(K, E);
    double acc = 0.0;
    for (int a = 0; a < K.dim(); ++a) acc += J(a, a);
    return acc;
}

/// div E = Σ ε_a g(∇_{e_a} E, e_a) over a signed orthonormal frame.
inline double divergence_frame(const Curvature& K, const JetVec& E)
{
    const Mat J = covariant_jacobian(K, E);
    const auto& fr = K.frame();
    double acc = 0.0;
    for (int a = 0; a < K.dim(); ++a) {
        const Vec& e = fr.legs[a];
        Vec nab(K.dim());
        for (int c = 0; c < K.dim(); ++c)
            for (int b = 0; b < K.dim(); ++b) nab[c] += J(c, b) * e[b];
        acc += fr.eps[a] * K.inner(nab, e);
    }
    return acc;
}

inline double divergence(const ManifoldSpec& spec, const JetField& E, const Vec& x)
{
    const Vec w = spec.wrap(x);
    return divergence_frame(curvature_at(spec, w), E(w));
}

} // namespace oneill
