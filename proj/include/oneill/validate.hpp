#pragma once

/// \file
/// Numerical validation of specifications at sample points: metric
/// nondegeneracy and index, rank of dπ, nondegenerate fibres, and the
/// horizontal isometry axiom.

#include "oneill/dsl.hpp"
#include "oneill/geometry.hpp"
#include "oneill/sampling.hpp"
#include "oneill/submersion.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace oneill {

inline constexpr double kAxiomTolerance = 1e-8;

struct ValidationReport {
    std::string name;
    std::vector<std::string> problems;
    long points = 0;
    double axiom_residual = 0.0;    // max |g'(dπE,dπF) − g(E,F)| on horizontal legs
    double frame_residual = 0.0;    // max orthonormality / verticality residual
    double min_abs_det = INFINITY;  // smallest |det g| seen
    bool ok() const { return problems.empty(); }
};

/// Number of negative eigenvalues of a symmetric matrix.
inline int negative_eigenvalues(const Mat& g, double tol = 1e-12)
{
    const int m = g.rows();
    Eigen::MatrixXd a(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) a(i, j) = g(i, j);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    int neg = 0;
    for (int i = 0; i < m; ++i)
        if (es.eigenvalues()[i] < -tol) ++neg;
    return neg;
}

/// Numerical rank via singular values.
inline int numerical_rank(const Mat& a, double tol = 1e-10)
{
    Eigen::MatrixXd e(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) e(i, j) = a(i, j);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(e);
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > tol) ++rank;
    return rank;
}

namespace detail {

inline std::string at_point(const Vec& x) { return " at " + format_point(std::span<const double>(x.begin(), x.end())); }

inline void add_problem(ValidationReport& rep, std::string msg)
{
    if (rep.problems.size() < 12) rep.problems.push_back(std::move(msg));
}

} // namespace detail

inline ValidationReport validate(const ManifoldSpec& spec, const std::vector<Vec>& points)
{
    ValidationReport rep;
    rep.name = spec.name;
    for (const Vec& x : points) {
        ++rep.points;
        try {
            const MetricAtPoint mp = metric_at(spec, x);
            rep.min_abs_det = std::min(rep.min_abs_det, std::abs(mp.det));
            const int neg = negative_eigenvalues(mp.g);
            if (neg != spec.signature)
                detail::add_problem(rep, spec.name + ": metric has index " + std::to_string(neg) + ", declared " +
                                             std::to_string(spec.signature) + detail::at_point(x));
        } catch (const std::exception& e) {
            detail::add_problem(rep, spec.name + ": " + e.what() + detail::at_point(x));
        }
    }
    return rep;
}

inline ValidationReport validate(const ManifoldSpec& spec) { return validate(spec, sample_grid(spec)); }

inline ValidationReport validate(const SubmersionSpec& sub, const std::vector<Vec>& points)
{
    ValidationReport rep = validate(*sub.total, points);
    rep.name = sub.name;
    const int m = sub.total->dim, n = sub.base->dim;
    const ValidationReport base_rep = validate(*sub.base, [&] {
        std::vector<Vec> ys;
        for (const Vec& x : points) ys.push_back(sub.project(x));
        return ys;
    }());
    for (const auto& p : base_rep.problems) detail::add_problem(rep, p);
    for (const Vec& x : points) {
        try {
            const Vec y = sub.project(x);
            if (!sub.base->inside(y))
                detail::add_problem(rep, sub.name + ": image outside the base chart" + detail::at_point(x));
            const Mat dpi = eval_matrix(sub.jacobian, n, m, sub.total->wrap(x));
            const int rank = numerical_rank(dpi);
            if (rank != n)
                detail::add_problem(rep, sub.name + ": dπ has rank " + std::to_string(rank) + " < " +
                                             std::to_string(n) + detail::at_point(x));
            const AdaptedFrame fr = adapted_frame(sub, x);
            const FrameResiduals res = frame_residuals(sub, x, fr);
            rep.axiom_residual = std::max(rep.axiom_residual, res.horizontal_isometry);
            rep.frame_residual = std::max({rep.frame_residual, res.orthonormality, res.verticality});
            if (res.horizontal_isometry > kAxiomTolerance)
                detail::add_problem(rep, sub.name + ": dπ is not isometric on horizontal vectors (residual " +
                                             format_number(res.horizontal_isometry) + ")" + detail::at_point(x));
        } catch (const std::exception& e) {
            detail::add_problem(rep, sub.name + ": " + e.what() + detail::at_point(x));
        }
    }
    return rep;
}

inline ValidationReport validate(const SubmersionSpec& sub) { return validate(sub, sample_grid(*sub.total)); }

} // namespace oneill
