#pragma once

/// \file
/// The O'Neill apparatus at a point of the total space: vertical/horizontal
/// splitting, adapted signed frames, the tensors T and A, the mean curvature
/// vector H and their covariant derivatives.
///
/// Everything that is later differentiated (frames, T, A, H) is computed in
/// Jet2 arithmetic from the metric jets, so covariant derivatives use exact
/// first derivatives of the fields. Jet order bookkeeping: metric and dπ are
/// order 2, Christoffel symbols and ∇(frame) order 1, ∇(T, A, H) order 0.

#include "oneill/geometry.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace oneill {

class FrameError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kFrameTolerance = 1e-10;

template <class S>
struct FrameBuild {
    SmallMat<S> lift; // m x n: column k is the horizontal lift of the base coordinate field ∂_k
    SignedBasis<S> basis;
};

/// Adapted frame from the metric g (m x m) and dπ (n x m). Vertical legs come
/// from the vertical projections of the coordinate fields, horizontal legs from
/// the horizontal lifts of the base coordinate fields; both are orthonormalized
/// by signed Gram-Schmidt.
template <class S>
FrameBuild<S> build_frame(const SmallMat<S>& g, const SmallMat<S>& dpi)
{
    const int m = g.rows(), n = dpi.rows(), r = m - n;
    const SmallMat<S> g_inv = inverse(g, 0.0);
    const SmallMat<S> W = multiply(g_inv, transpose(dpi)); // m x n
    const SmallMat<S> M = multiply(dpi, W);                // n x n, equals g' on the base
    SmallMat<S> M_inv;
    try {
        M_inv = inverse(M, 1e-14);
    } catch (const SingularMatrixError&) {
        throw FrameError("dπ is rank deficient or the horizontal metric is degenerate");
    }
    FrameBuild<S> out;
    out.lift = multiply(W, M_inv);
    const SmallMat<S> Ph = multiply(out.lift, dpi); // m x m horizontal projector

    auto ip = [&](const SmallVec<S>& u, const SmallVec<S>& v) { return inner(g, u, v); };

    std::vector<SmallVec<S>> vcand;
    for (int a = 0; a < m; ++a) {
        SmallVec<S> v(m);
        for (int c = 0; c < m; ++c) v[c] = (c == a ? S(1.0) : S(0.0)) - Ph(c, a);
        vcand.push_back(v);
    }
    try {
        signed_gram_schmidt(vcand, r, ip, out.basis, "degenerate vertical metric", kFrameTolerance);
    } catch (const DegenerateMetricError& e) {
        throw FrameError(e.what());
    }
    std::vector<SmallVec<S>> hcand;
    for (int k = 0; k < n; ++k) {
        SmallVec<S> v(m);
        for (int c = 0; c < m; ++c) v[c] = out.lift(c, k);
        hcand.push_back(v);
    }
    // Horizontal candidates are already orthogonal to the vertical legs.
    SignedBasis<S> hb;
    try {
        signed_gram_schmidt(hcand, n, ip, hb, "degenerate horizontal metric", kFrameTolerance);
    } catch (const DegenerateMetricError& e) {
        throw FrameError(e.what());
    }
    for (int k = 0; k < n; ++k) {
        out.basis.legs.push_back(hb.legs[k]);
        out.basis.eps.push_back(hb.eps[k]);
    }
    return out;
}

/// Signed orthonormal frame at a point: legs 0..r-1 vertical, r..m-1 horizontal.
struct AdaptedFrame {
    int r = 0;
    int n = 0;
    std::vector<Vec> legs;
    std::vector<int> eps;

    int dim() const { return r + n; }
};

inline Mat eval_matrix(const std::vector<std::vector<ExprPtr>>& entries, int rows, int cols, const Vec& x)
{
    Mat out(rows, cols);
    const std::span<const double> pt(x.begin(), x.end());
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) out(i, j) = eval_expr(*entries[i][j], pt);
    return out;
}

inline JetMat eval_matrix_jet(const std::vector<std::vector<ExprPtr>>& entries, int rows, int cols, const Vec& x)
{
    JetMat out(rows, cols);
    const std::span<const double> pt(x.begin(), x.end());
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            if (j < i && rows == cols && entries[i][j] == entries[j][i]) {
                out(i, j) = out(j, i);
                continue;
            }
            out(i, j) = eval_expr_jet(*entries[i][j], pt);
        }
    return out;
}

inline AdaptedFrame adapted_frame(const SubmersionSpec& sub, const Vec& x_raw)
{
    const Vec x = sub.total->wrap(x_raw);
    const int m = sub.total->dim, n = sub.base->dim;
    const Mat g = eval_matrix(sub.total->metric, m, m, x);
    const Mat dpi = eval_matrix(sub.jacobian, n, m, x);
    const FrameBuild<double> fb = build_frame(g, dpi);
    AdaptedFrame fr;
    fr.r = m - n;
    fr.n = n;
    fr.legs = fb.basis.legs;
    fr.eps = fb.basis.eps;
    return fr;
}

/// Frame invariants at x: orthonormality, verticality of the first r legs,
/// and isometry of dπ on the horizontal legs (axiom (c)).
struct FrameResiduals {
    double orthonormality = 0.0;
    double verticality = 0.0;
    double horizontal_isometry = 0.0;
};

inline FrameResiduals frame_residuals(const SubmersionSpec& sub, const Vec& x_raw, const AdaptedFrame& fr)
{
    const Vec x = sub.total->wrap(x_raw);
    const int m = sub.total->dim, n = sub.base->dim;
    const Mat g = eval_matrix(sub.total->metric, m, m, x);
    const Mat dpi = eval_matrix(sub.jacobian, n, m, x);
    const Vec y = sub.project(x);
    const Mat gb = eval_matrix(sub.base->metric, n, n, y);
    FrameResiduals res;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            const double target = a == b ? fr.eps[a] : 0.0;
            res.orthonormality = std::max(res.orthonormality, std::abs(inner(g, fr.legs[a], fr.legs[b]) - target));
        }
    std::vector<Vec> pushed;
    for (int a = 0; a < m; ++a) pushed.push_back(multiply(dpi, fr.legs[a]));
    for (int i = 0; i < fr.r; ++i) res.verticality = std::max(res.verticality, euclidean_norm(pushed[i]));
    for (int a = fr.r; a < m; ++a)
        for (int b = fr.r; b < m; ++b)
            res.horizontal_isometry = std::max(
                res.horizontal_isometry, std::abs(inner(gb, pushed[a], pushed[b]) - inner(g, fr.legs[a], fr.legs[b])));
    return res;
}

/// Directional derivative E(f) of a jet field.
inline double directional(const Jet2& f, const Vec& E)
{
    double acc = 0.0;
    for (int a = 0; a < E.size(); ++a)
        if (E[a] != 0.0) acc += E[a] * f.g(a);
    return acc;
}

/// Full submersion kit at one point of the total space.
class SubmersionPoint {
public:
    SubmersionPoint(const SubmersionSpec& sub, const Vec& x_raw)
        : sub_(&sub), m_(sub.total->dim), n_(sub.base->dim), r_(m_ - n_), x_(sub.total->wrap(x_raw))
    {
        g_ = eval_matrix_jet(sub.total->metric, m_, m_, x_);
        g_val_ = values(g_);
        g_inv_ = inverse(g_, 0.0);
        g_inv_val_ = values(g_inv_);
        dpi_ = eval_matrix_jet(sub.jacobian, n_, m_, x_);
        dpi_val_ = values(dpi_);

        // Γ^c_ab = ½ g^{ce}(∂_a g_eb + ∂_b g_ea − ∂_e g_ab), order 1
        std::array<Jet2, kMaxDim * kMaxDim * kMaxDim> dg;
        for (int a = 0; a < m_; ++a)
            for (int b = a; b < m_; ++b)
                for (int c = 0; c < m_; ++c) dg[(a * kMaxDim + b) * kMaxDim + c] = partial(g_(a, b), c);
        auto dgj = [&](int a, int b, int c) -> const Jet2& {
            return a <= b ? dg[(a * kMaxDim + b) * kMaxDim + c] : dg[(b * kMaxDim + a) * kMaxDim + c];
        };
        for (int a = 0; a < m_; ++a)
            for (int b = a; b < m_; ++b)
                for (int c = 0; c < m_; ++c) {
                    Jet2 acc(0.0);
                    for (int e = 0; e < m_; ++e)
                        acc += g_inv_(c, e) * (dgj(e, b, a) + dgj(e, a, b) - dgj(a, b, e));
                    gamma_[(c * kMaxDim + a) * kMaxDim + b] = gamma_[(c * kMaxDim + b) * kMaxDim + a] = 0.5 * acc;
                }

        FrameBuild<Jet2> fb = build_frame(g_, dpi_);
        lift_ = fb.lift;
        legs_ = fb.basis.legs;
        eps_ = fb.basis.eps;
        for (const auto& l : legs_) leg_val_.push_back(values(l));

        // D(a,b) = ∇_{e_a} e_b as fields; T and A follow by projection.
        for (int a = 0; a < m_; ++a)
            for (int b = 0; b < m_; ++b) D_[a * kMaxDim + b] = nabla(legs_[a], legs_[b]);
        for (int a = 0; a < m_; ++a)
            for (int b = 0; b < m_; ++b) {
                const JetVec& d = D_[a * kMaxDim + b];
                const bool av = a < r_, bv = b < r_;
                JetVec zero(m_);
                if (av) {
                    T_[a * kMaxDim + b] = bv ? horizontal_jet(d) : vertical_jet(d);
                    A_[a * kMaxDim + b] = zero;
                } else {
                    A_[a * kMaxDim + b] = bv ? horizontal_jet(d) : vertical_jet(d);
                    T_[a * kMaxDim + b] = zero;
                }
            }
        H_ = JetVec(m_);
        for (int i = 0; i < r_; ++i)
            for (int c = 0; c < m_; ++c) H_[c] += double(eps_[i]) * T_[i * kMaxDim + i][c];
    }

    const SubmersionSpec& spec() const noexcept { return *sub_; }
    int total_dim() const noexcept { return m_; }
    int base_dim() const noexcept { return n_; }
    int fibre_dim() const noexcept { return r_; }
    const Vec& point() const noexcept { return x_; }
    Vec base_point() const { return sub_->project(x_); }

    // Frame access.
    const Vec& leg(int a) const { return leg_val_[a]; }
    const JetVec& leg_jet(int a) const { return legs_[a]; }
    int eps(int a) const { return eps_[a]; }
    AdaptedFrame frame() const
    {
        AdaptedFrame f;
        f.r = r_;
        f.n = n_;
        f.legs = leg_val_;
        f.eps = eps_;
        return f;
    }

    // Metric-level helpers on values.
    const Mat& metric() const noexcept { return g_val_; }
    double g(const Vec& u, const Vec& v) const { return inner(g_val_, u, v); }
    Vec dpi(const Vec& E) const { return multiply(dpi_val_, E); }
    const JetMat& metric_jet() const noexcept { return g_; }
    const JetMat& dpi_jet() const noexcept { return dpi_; }

    /// Jets of the horizontal lift of the base coordinate field ∂_k (a basic field).
    JetVec lift_jet(int k) const
    {
        JetVec v(m_);
        for (int c = 0; c < m_; ++c) v[c] = lift_(c, k);
        return v;
    }
    /// Horizontal lift of a base tangent vector w at π(x).
    Vec lift(const Vec& w) const
    {
        Vec v(m_);
        for (int c = 0; c < m_; ++c)
            for (int k = 0; k < n_; ++k) v[c] += lift_(c, k).value * w[k];
        return v;
    }

    /// Frame components c_a with E = Σ c_a e_a.
    Vec components(const Vec& E) const
    {
        Vec c(m_);
        for (int a = 0; a < m_; ++a) c[a] = eps_[a] * g(E, leg_val_[a]);
        return c;
    }
    Vec from_components(const Vec& c) const
    {
        Vec v(m_);
        for (int a = 0; a < m_; ++a)
            for (int k = 0; k < m_; ++k) v[k] += c[a] * leg_val_[a][k];
        return v;
    }
    Vec vertical(const Vec& E) const
    {
        Vec c = components(E);
        for (int a = r_; a < m_; ++a) c[a] = 0.0;
        return from_components(c);
    }
    Vec horizontal(const Vec& E) const
    {
        Vec c = components(E);
        for (int a = 0; a < r_; ++a) c[a] = 0.0;
        return from_components(c);
    }
    /// Euclidean norm of the frame components: a positive-definite size for vectors of any causal type.
    double frame_norm(const Vec& E) const { return euclidean_norm(components(E)); }

    // Jet-level calculus.
    Jet2 inner_jet(const JetVec& u, const JetVec& v) const { return inner(g_, u, v); }

    const Jet2& christoffel(int c, int a, int b) const { return gamma_[(c * kMaxDim + a) * kMaxDim + b]; }

    /// ∇_E F as fields: (∇_E F)^c = E^a ∂_a F^c + Γ^c_ab E^a F^b.
    JetVec nabla(const JetVec& E, const JetVec& F) const
    {
        JetVec out(m_);
        for (int c = 0; c < m_; ++c) {
            Jet2 acc(0.0);
            for (int a = 0; a < m_; ++a) {
                if (E[a].value == 0.0 && E[a].dim == 0) continue;
                Jet2 term = partial(F[c], a);
                for (int b = 0; b < m_; ++b) term += christoffel(c, a, b) * F[b];
                acc += E[a] * term;
            }
            out[c] = acc;
        }
        return out;
    }

    /// ∇_E Z at the point for a vector E (no field extension needed).
    Vec nabla_value(const Vec& E, const JetVec& Z) const
    {
        Vec out(m_);
        for (int c = 0; c < m_; ++c) {
            double acc = 0.0;
            for (int a = 0; a < m_; ++a) {
                if (E[a] == 0.0) continue;
                double term = Z[c].g(a);
                for (int b = 0; b < m_; ++b) term += christoffel(c, a, b).value * Z[b].value;
                acc += E[a] * term;
            }
            out[c] = acc;
        }
        return out;
    }

    JetVec vertical_jet(const JetVec& Z) const
    {
        JetVec out(m_);
        for (int i = 0; i < r_; ++i) {
            const Jet2 coeff = double(eps_[i]) * inner_jet(Z, legs_[i]);
            for (int c = 0; c < m_; ++c) out[c] += coeff * legs_[i][c];
        }
        return out;
    }
    JetVec horizontal_jet(const JetVec& Z) const
    {
        const JetVec v = vertical_jet(Z);
        JetVec out(m_);
        for (int c = 0; c < m_; ++c) out[c] = Z[c] - v[c];
        return out;
    }

    /// T_E F = h∇_{vE}vF + v∇_{vE}hF directly from the definition for fields E, F.
    JetVec T_fields(const JetVec& E, const JetVec& F) const
    {
        const JetVec vE = vertical_jet(E), vF = vertical_jet(F), hF = horizontal_jet(F);
        const JetVec a = horizontal_jet(nabla(vE, vF)), b = vertical_jet(nabla(vE, hF));
        JetVec out(m_);
        for (int c = 0; c < m_; ++c) out[c] = a[c] + b[c];
        return out;
    }
    /// A_E F = h∇_{hE}vF + v∇_{hE}hF directly from the definition for fields E, F.
    JetVec A_fields(const JetVec& E, const JetVec& F) const
    {
        const JetVec hE = horizontal_jet(E), vF = vertical_jet(F), hF = horizontal_jet(F);
        const JetVec a = horizontal_jet(nabla(hE, vF)), b = vertical_jet(nabla(hE, hF));
        JetVec out(m_);
        for (int c = 0; c < m_; ++c) out[c] = a[c] + b[c];
        return out;
    }

    // Tensor tables on frame legs (jets of order 1).
    const JetVec& T_leg(int a, int b) const { return T_[a * kMaxDim + b]; }
    const JetVec& A_leg(int a, int b) const { return A_[a * kMaxDim + b]; }
    const JetVec& nabla_leg(int a, int b) const { return D_[a * kMaxDim + b]; }
    const JetVec& H_jet() const noexcept { return H_; }

    Vec T(const Vec& E, const Vec& F) const { return bilinear(T_, components(E), components(F)); }
    Vec A(const Vec& E, const Vec& F) const { return bilinear(A_, components(E), components(F)); }
    Vec H() const { return values(H_); }
    Vec H_over_r() const
    {
        Vec h = H();
        for (double& c : h) c /= r_;
        return h;
    }

    /// ∇_E H
    Vec nabla_H(const Vec& E) const { return nabla_value(E, H_); }

    /// div H = ∂_a H^a + Γ^a_ab H^b
    double div_H() const
    {
        double acc = 0.0;
        for (int a = 0; a < m_; ++a) {
            acc += H_[a].g(a);
            for (int b = 0; b < m_; ++b) acc += christoffel(a, a, b).value * H_[b].value;
        }
        return acc;
    }

    /// g(A,A) = Σ_{α,β} ε_α ε_β g(A_{e_α}e_β, A_{e_α}e_β)
    double normA2() const { return leg_sum(A_, r_, m_, r_, m_); }
    /// g(A,A) = Σ_{α,i} ε_α ε_i g(A_{e_α}e_i, A_{e_α}e_i)
    double normA2_mixed() const { return leg_sum(A_, r_, m_, 0, r_); }
    /// g(T,T) = Σ_{i,j} ε_i ε_j g(T_{e_i}e_j, T_{e_i}e_j)
    double normT2() const { return leg_sum(T_, 0, r_, 0, r_); }
    /// g(T,T) = Σ_{i,α} ε_i ε_α g(T_{e_i}e_α, T_{e_i}e_α)
    double normT2_mixed() const { return leg_sum(T_, 0, r_, r_, m_); }

    /// g(A_X, T_U) = Σ_α ε_α g(A_X e_α, T_U e_α)
    double crossAT(const Vec& X, const Vec& U) const
    {
        double acc = 0.0;
        for (int a = r_; a < m_; ++a) acc += eps_[a] * g(A(X, leg_val_[a]), T(U, leg_val_[a]));
        return acc;
    }

    /// (∇_E A)_F G, with F and G at the point (the result is tensorial in both).
    Vec nabla_A(const Vec& E, const Vec& F, const Vec& G) const { return nabla_tensor(A_, E, F, G); }
    /// (∇_E T)_F G
    Vec nabla_T(const Vec& E, const Vec& F, const Vec& G) const { return nabla_tensor(T_, E, F, G); }

    /// δ̃A(X) = −Σ_α ε_α (∇_{e_α}A)_{e_α} X
    Vec deltaA(const Vec& X) const
    {
        Vec out(m_);
        for (int a = r_; a < m_; ++a) {
            const Vec t = nabla_A(leg_val_[a], leg_val_[a], X);
            for (int c = 0; c < m_; ++c) out[c] -= eps_[a] * t[c];
        }
        return out;
    }
    /// δ̌T(U) = −Σ_i ε_i (∇_{e_i}T)_{e_i} U
    Vec deltaT(const Vec& U) const
    {
        Vec out(m_);
        for (int i = 0; i < r_; ++i) {
            const Vec t = nabla_T(leg_val_[i], leg_val_[i], U);
            for (int c = 0; c < m_; ++c) out[c] -= eps_[i] * t[c];
        }
        return out;
    }

    /// Jets of the function g(H, X) where X is extended as a constant
    /// combination of the basic frame legs (hence basic).
    Jet2 gHX_basic(const Vec& X) const
    {
        const Vec cx = components(X);
        Jet2 acc(0.0);
        for (int a = r_; a < m_; ++a)
            if (cx[a] != 0.0) acc += cx[a] * inner_jet(H_, legs_[a]);
        return acc;
    }

    /// Jets of A_X Y for X, Y extended as constant combinations of the basic legs.
    JetVec A_basic(const Vec& X, const Vec& Y) const
    {
        const Vec cx = components(X), cy = components(Y);
        JetVec out(m_);
        for (int a = r_; a < m_; ++a)
            for (int b = r_; b < m_; ++b) {
                const double k = cx[a] * cy[b];
                if (k == 0.0) continue;
                for (int c = 0; c < m_; ++c) out[c] += k * A_leg(a, b)[c];
            }
        return out;
    }

    /// max over vertical legs of |T_{e_i}e_j − (1/r) g(e_i,e_j) H| (frame norm).
    double umbilicity_residual() const
    {
        const Vec h = H();
        double worst = 0.0;
        for (int i = 0; i < r_; ++i)
            for (int j = 0; j < r_; ++j) {
                Vec d = values(T_leg(i, j));
                if (i == j)
                    for (int c = 0; c < m_; ++c) d[c] -= eps_[i] * h[c] / r_;
                worst = std::max(worst, frame_norm(d));
            }
        return worst;
    }

    /// Jets of g(H/r, H/r).
    Jet2 gHH_over_r2() const { return inner_jet(H_, H_) * (1.0 / (double(r_) * r_)); }

    /// Gradient (total space) of a jet scalar.
    Vec gradient_of(const Jet2& f) const
    {
        Vec out(m_);
        for (int a = 0; a < m_; ++a)
            for (int b = 0; b < m_; ++b) out[a] += g_inv_val_(a, b) * f.g(b);
        return out;
    }

private:
    Vec bilinear(const std::array<JetVec, kMaxDim * kMaxDim>& table, const Vec& ce, const Vec& cf) const
    {
        Vec out(m_);
        for (int a = 0; a < m_; ++a) {
            if (ce[a] == 0.0) continue;
            for (int b = 0; b < m_; ++b) {
                const double k = ce[a] * cf[b];
                if (k == 0.0) continue;
                const JetVec& t = table[a * kMaxDim + b];
                for (int c = 0; c < m_; ++c) out[c] += k * t[c].value;
            }
        }
        return out;
    }

    double leg_sum(const std::array<JetVec, kMaxDim * kMaxDim>& table, int a0, int a1, int b0, int b1) const
    {
        double acc = 0.0;
        for (int a = a0; a < a1; ++a)
            for (int b = b0; b < b1; ++b) {
                const Vec t = values(table[a * kMaxDim + b]);
                acc += eps_[a] * eps_[b] * g(t, t);
            }
        return acc;
    }

    /// (∇_E S)_F G = ∇_E(S_F G) − S_{∇_E F} G − S_F(∇_E G), with F and G extended
    /// as constant combinations of the frame legs.
    Vec nabla_tensor(const std::array<JetVec, kMaxDim * kMaxDim>& table, const Vec& E, const Vec& F,
                     const Vec& G) const
    {
        const Vec ce = components(E), cf = components(F), cg = components(G);
        Vec dF(m_), dG(m_);
        for (int a = 0; a < m_; ++a) {
            if (ce[a] == 0.0) continue;
            for (int b = 0; b < m_; ++b) {
                const Vec nab = values(D_[a * kMaxDim + b]);
                for (int c = 0; c < m_; ++c) {
                    dF[c] += ce[a] * cf[b] * nab[c];
                    dG[c] += ce[a] * cg[b] * nab[c];
                }
            }
        }
        Vec out(m_);
        for (int b = 0; b < m_; ++b)
            for (int c = 0; c < m_; ++c) {
                const double k = cf[b] * cg[c];
                if (k == 0.0) continue;
                const Vec d = nabla_value(E, table[b * kMaxDim + c]);
                for (int q = 0; q < m_; ++q) out[q] += k * d[q];
            }
        const Vec s1 = bilinear(table, components(dF), cg);
        const Vec s2 = bilinear(table, cf, components(dG));
        for (int q = 0; q < m_; ++q) out[q] -= s1[q] + s2[q];
        return out;
    }

    const SubmersionSpec* sub_;
    int m_, n_, r_;
    Vec x_;
    JetMat g_, g_inv_, dpi_, lift_;
    Mat g_val_, g_inv_val_, dpi_val_;
    std::array<Jet2, kMaxDim * kMaxDim * kMaxDim> gamma_{};
    std::vector<JetVec> legs_;
    std::vector<Vec> leg_val_;
    std::vector<int> eps_;
    std::array<JetVec, kMaxDim * kMaxDim> D_{}, T_{}, A_{};
    JetVec H_;
};

/// A point of the total space over base point y. Aligned specs keep the chart
/// centre's fibre coordinates; otherwise a minimum-norm Newton iteration from
/// the chart centre solves π(x) = y.
inline Vec lift_point(const SubmersionSpec& sub, const Vec& y, std::optional<Vec> start = std::nullopt)
{
    const ManifoldSpec& M = *sub.total;
    const int m = M.dim, n = sub.base->dim;
    Vec x = start ? *start : M.center();
    if (sub.coordinate_aligned) {
        for (int k = 0; k < n; ++k) x[k] = y[k];
        return M.wrap(x);
    }
    for (int it = 0; it < 60; ++it) {
        const Vec d = sub.base->difference(y, sub.project(x));
        if (max_abs(d) < 1e-14) break;
        const Mat J = eval_matrix(sub.jacobian, n, m, M.wrap(x));
        const Mat JJt = multiply(J, transpose(J));
        const Vec z = multiply(inverse(JJt), d);
        const Vec step = multiply(transpose(J), z);
        for (int a = 0; a < m; ++a) x[a] += step[a];
        if (it == 59) throw FrameError("lift_point did not converge");
    }
    return M.wrap(x);
}

/// Points on the fibre through x (x first). Aligned specs walk the fibre
/// coordinates; others follow the vertical frame legs by RK4.
inline std::vector<Vec> fibre_samples(const SubmersionSpec& sub, const Vec& x_raw, int k = 8)
{
    const ManifoldSpec& M = *sub.total;
    const Vec x = M.wrap(x_raw);
    const int m = M.dim, n = sub.base->dim, r = m - n;
    std::vector<Vec> pts{x};
    if (sub.coordinate_aligned) {
        for (int j = 1; j < k; ++j) {
            Vec p = x;
            for (int q = 0; q < r; ++q) {
                const int a = n + q;
                const Interval range = M.sample_range(a);
                double u = (j + 0.5) / k + 0.3819660112501051 * q;
                u -= std::floor(u);
                p[a] = range.lo + u * range.length();
            }
            pts.push_back(M.wrap(p));
        }
        return pts;
    }
    const double leg_length = 0.35;
    const int substeps = 8;
    Vec cur = x;
    for (int j = 1; j < k; ++j) {
        const int leg = (j - 1) % r;
        const double h = leg_length / substeps;
        bool ok = true;
        for (int s = 0; s < substeps && ok; ++s) {
            auto f = [&](const Vec& p) { return adapted_frame(sub, p).legs[leg]; };
            const Vec k1 = f(cur);
            Vec p2 = cur, p3 = cur, p4 = cur;
            for (int a = 0; a < m; ++a) p2[a] += 0.5 * h * k1[a];
            const Vec k2 = f(p2);
            for (int a = 0; a < m; ++a) p3[a] += 0.5 * h * k2[a];
            const Vec k3 = f(p3);
            for (int a = 0; a < m; ++a) p4[a] += h * k3[a];
            const Vec k4 = f(p4);
            for (int a = 0; a < m; ++a) cur[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
            ok = M.inside(cur);
        }
        if (!ok) break;
        pts.push_back(M.wrap(cur));
    }
    return pts;
}

/// max over sample pairs and basic test fields Z (lifts of base coordinate
/// fields) of |g_p(X,Z) − g_p'(X,Z)|.
inline double basicness_residual(const SubmersionSpec& sub, const std::function<Vec(const Vec&)>& X,
                                 const std::vector<Vec>& samples)
{
    if (samples.empty()) return 0.0;
    const Vec y0 = sub.project(samples.front());
    std::vector<std::vector<double>> prods;
    for (const Vec& p : samples) {
        if (max_abs(sub.base->difference(sub.project(p), y0)) > 1e-8)
            throw std::invalid_argument("basicness_residual: samples are not on a common fibre");
        const int m = sub.total->dim, n = sub.base->dim;
        const Mat g = eval_matrix(sub.total->metric, m, m, sub.total->wrap(p));
        const Mat dpi = eval_matrix(sub.jacobian, n, m, sub.total->wrap(p));
        const FrameBuild<double> fb = build_frame(g, dpi);
        const Vec Xp = X(p);
        std::vector<double> row;
        for (int k = 0; k < n; ++k) {
            Vec Z(m);
            for (int c = 0; c < m; ++c) Z[c] = fb.lift(c, k);
            row.push_back(inner(g, Xp, Z));
        }
        prods.push_back(row);
    }
    double worst = 0.0;
    for (std::size_t i = 1; i < prods.size(); ++i)
        for (std::size_t k = 0; k < prods[i].size(); ++k)
            worst = std::max(worst, std::abs(prods[i][k] - prods[0][k]));
    return worst;
}

} // namespace oneill
