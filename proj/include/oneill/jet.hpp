#pragma once

/// \file
/// Second-order forward-mode jets over chart coordinates.
///
/// A Jet2 carries the value, gradient and (packed, symmetric) Hessian of a
/// scalar field at one point of a chart of dimension d <= kMaxDim. Jets also
/// track how many derivative orders are still trustworthy: taking a partial
/// derivative of a jet shifts its Hessian into the gradient and leaves the new
/// Hessian unknown. Reading an order that is no longer valid throws.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>

namespace oneill {

inline constexpr int kMaxDim = 6;
inline constexpr int kPackedHess = kMaxDim * (kMaxDim + 1) / 2;

/// Index of (i, j) in the packed upper triangle.
constexpr int packed_index(int i, int j) noexcept
{
    if (i > j) {
        const int t = i;
        i = j;
        j = t;
    }
    return j * (j + 1) / 2 + i;
}

/// Raised when an elementary function leaves its domain (log of <= 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

enum class ElementaryFn { Sin, Cos, Sinh, Cosh, Exp, Log, Sqrt, Neg, Recip };

inline const char* to_string(ElementaryFn fn) noexcept
{
    switch (fn) {
    case ElementaryFn::Sin: return "sin";
    case ElementaryFn::Cos: return "cos";
    case ElementaryFn::Sinh: return "sinh";
    case ElementaryFn::Cosh: return "cosh";
    case ElementaryFn::Exp: return "exp";
    case ElementaryFn::Log: return "log";
    case ElementaryFn::Sqrt: return "sqrt";
    case ElementaryFn::Neg: return "neg";
    case ElementaryFn::Recip: return "recip";
    }
    return "?";
}

struct Jet2 {
    double value = 0.0;
    std::array<double, kMaxDim> grad{};
    std::array<double, kPackedHess> hess{};
    int dim = 0;   // 0 means "constant, broadcasts to any dimension"
    int order = 2; // highest derivative order still valid

    Jet2() = default;
    Jet2(double v) : value(v) {} // NOLINT(google-explicit-constructor): constants mix freely

    /// Coordinate jet x_index at `point_value` in a chart of dimension `d`.
    static Jet2 variable(int index, int d, double point_value)
    {
        if (d < 1 || d > kMaxDim)
            throw std::out_of_range("jet dimension " + std::to_string(d) + " outside [1, " +
                                    std::to_string(kMaxDim) + "]");
        if (index < 0 || index >= d)
            throw std::out_of_range("coordinate index " + std::to_string(index) +
                                    " outside chart of dimension " + std::to_string(d));
        Jet2 j(point_value);
        j.dim = d;
        j.grad[index] = 1.0;
        return j;
    }

    double h(int i, int j) const
    {
        require_order(2);
        return hess[packed_index(i, j)];
    }
    double g(int i) const
    {
        require_order(1);
        return grad[i];
    }

    void require_order(int k) const
    {
        if (order < k)
            throw std::logic_error("jet derivative of order " + std::to_string(k) +
                                   " requested but only order " + std::to_string(order) +
                                   " is available");
    }
};

namespace detail {

inline int joint_dim(const Jet2& a, const Jet2& b)
{
    if (a.dim == b.dim || b.dim == 0) return a.dim;
    if (a.dim == 0) return b.dim;
    throw std::invalid_argument("jet dimension mismatch: " + std::to_string(a.dim) + " vs " +
                                std::to_string(b.dim));
}

inline int packed_count(int d) noexcept { return d * (d + 1) / 2; }

/// Univariate chain rule: f(a) given f(a.value), f', f''.
inline Jet2 chain(const Jet2& a, double f0, double f1, double f2)
{
    Jet2 r(f0);
    r.dim = a.dim;
    r.order = a.order;
    for (int i = 0; i < a.dim; ++i) r.grad[i] = f1 * a.grad[i];
    for (int j = 0; j < a.dim; ++j)
        for (int i = 0; i <= j; ++i) {
            const int p = packed_index(i, j);
            r.hess[p] = f1 * a.hess[p] + f2 * a.grad[i] * a.grad[j];
        }
    return r;
}

/// Integer power with 0^0 = 1, used for derivative coefficients.
inline double ipow(double base, int e) noexcept
{
    double r = 1.0;
    for (int k = 0; k < e; ++k) r *= base;
    return r;
}

} // namespace detail

inline Jet2 operator+(const Jet2& a, const Jet2& b)
{
    Jet2 r(a.value + b.value);
    r.dim = detail::joint_dim(a, b);
    r.order = std::min(a.order, b.order);
    for (int i = 0; i < r.dim; ++i) r.grad[i] = a.grad[i] + b.grad[i];
    for (int p = 0; p < detail::packed_count(r.dim); ++p) r.hess[p] = a.hess[p] + b.hess[p];
    return r;
}

inline Jet2 operator-(const Jet2& a)
{
    Jet2 r(-a.value);
    r.dim = a.dim;
    r.order = a.order;
    for (int i = 0; i < r.dim; ++i) r.grad[i] = -a.grad[i];
    for (int p = 0; p < detail::packed_count(r.dim); ++p) r.hess[p] = -a.hess[p];
    return r;
}

inline Jet2 operator-(const Jet2& a, const Jet2& b)
{
    Jet2 r(a.value - b.value);
    r.dim = detail::joint_dim(a, b);
    r.order = std::min(a.order, b.order);
    for (int i = 0; i < r.dim; ++i) r.grad[i] = a.grad[i] - b.grad[i];
    for (int p = 0; p < detail::packed_count(r.dim); ++p) r.hess[p] = a.hess[p] - b.hess[p];
    return r;
}

inline Jet2 operator*(const Jet2& a, const Jet2& b)
{
    Jet2 r(a.value * b.value);
    r.dim = detail::joint_dim(a, b);
    r.order = std::min(a.order, b.order);
    for (int i = 0; i < r.dim; ++i) r.grad[i] = a.grad[i] * b.value + a.value * b.grad[i];
    for (int j = 0; j < r.dim; ++j)
        for (int i = 0; i <= j; ++i) {
            const int p = packed_index(i, j);
            r.hess[p] = a.hess[p] * b.value + a.value * b.hess[p] + a.grad[i] * b.grad[j] +
                        a.grad[j] * b.grad[i];
        }
    return r;
}

inline Jet2 recip(const Jet2& a)
{
    if (a.value == 0.0) throw DomainError("recip of zero");
    const double inv = 1.0 / a.value;
    return detail::chain(a, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline Jet2 operator/(const Jet2& a, const Jet2& b)
{
    if (b.value == 0.0) throw DomainError("division by zero");
    // Value computed as a/b so that real and jet evaluation agree bitwise.
    Jet2 r = a * recip(b);
    r.value = a.value / b.value;
    return r;
}

inline Jet2& operator+=(Jet2& a, const Jet2& b) { return a = a + b; }
inline Jet2& operator-=(Jet2& a, const Jet2& b) { return a = a - b; }
inline Jet2& operator*=(Jet2& a, const Jet2& b) { return a = a * b; }
inline Jet2& operator/=(Jet2& a, const Jet2& b) { return a = a / b; }

inline Jet2 sin(const Jet2& a)
{
    const double s = std::sin(a.value), c = std::cos(a.value);
    return detail::chain(a, s, c, -s);
}
inline Jet2 cos(const Jet2& a)
{
    const double s = std::sin(a.value), c = std::cos(a.value);
    return detail::chain(a, c, -s, -c);
}
inline Jet2 sinh(const Jet2& a)
{
    const double s = std::sinh(a.value), c = std::cosh(a.value);
    return detail::chain(a, s, c, s);
}
inline Jet2 cosh(const Jet2& a)
{
    const double s = std::sinh(a.value), c = std::cosh(a.value);
    return detail::chain(a, c, s, c);
}
inline Jet2 exp(const Jet2& a)
{
    const double e = std::exp(a.value);
    return detail::chain(a, e, e, e);
}
inline Jet2 log(const Jet2& a)
{
    if (!(a.value > 0.0)) throw DomainError("log of non-positive argument");
    const double inv = 1.0 / a.value;
    return detail::chain(a, std::log(a.value), inv, -inv * inv);
}
inline Jet2 sqrt(const Jet2& a)
{
    if (a.value < 0.0) throw DomainError("sqrt of negative argument");
    const double s = std::sqrt(a.value);
    if (s == 0.0) {
        // Derivatives blow up at 0; only a constant zero is acceptable.
        Jet2 r(0.0);
        r.dim = a.dim;
        r.order = a.order;
        for (int i = 0; i < a.dim; ++i)
            if (a.grad[i] != 0.0) throw DomainError("sqrt not differentiable at 0");
        return r;
    }
    return detail::chain(a, s, 0.5 / s, -0.25 / (s * s * s));
}

/// a^p for a constant exponent p.
inline Jet2 pow(const Jet2& a, double p)
{
    const double v = a.value;
    const bool integral = std::floor(p) == p && std::abs(p) < 1e9;
    if (!integral && v < 0.0) throw DomainError("non-integer power of negative argument");
    const double f0 = std::pow(v, p);
    if (integral && p >= 0.0) {
        const int e = static_cast<int>(p);
        const double f1 = e == 0 ? 0.0 : p * detail::ipow(v, e - 1);
        const double f2 = e <= 1 ? 0.0 : p * (p - 1.0) * detail::ipow(v, e - 2);
        return detail::chain(a, f0, f1, f2);
    }
    if (v == 0.0) throw DomainError("power with negative or fractional exponent at 0");
    return detail::chain(a, f0, p * std::pow(v, p - 1.0), p * (p - 1.0) * std::pow(v, p - 2.0));
}

/// Univariate elementary function applied through the second-order chain rule.
inline Jet2 jet_apply(ElementaryFn fn, const Jet2& a)
{
    switch (fn) {
    case ElementaryFn::Sin: return sin(a);
    case ElementaryFn::Cos: return cos(a);
    case ElementaryFn::Sinh: return sinh(a);
    case ElementaryFn::Cosh: return cosh(a);
    case ElementaryFn::Exp: return exp(a);
    case ElementaryFn::Log: return log(a);
    case ElementaryFn::Sqrt: return sqrt(a);
    case ElementaryFn::Neg: return -a;
    case ElementaryFn::Recip: return recip(a);
    }
    throw std::invalid_argument("unknown elementary function");
}

/// Coordinate jet: x_index at `point`.
template <class Range>
Jet2 jet_lift(int coordinate_index, const Range& point)
{
    const int d = static_cast<int>(std::size(point));
    if (coordinate_index < 0 || coordinate_index >= d)
        throw std::out_of_range("coordinate index " + std::to_string(coordinate_index) +
                                " outside chart of dimension " + std::to_string(d));
    return Jet2::variable(coordinate_index, d, point[coordinate_index]);
}

/// The partial derivative d/dx_k as a field: one derivative order is consumed.
inline Jet2 partial(const Jet2& a, int k)
{
    a.require_order(1);
    Jet2 r(a.dim == 0 ? 0.0 : a.grad[k]);
    r.dim = a.dim;
    r.order = a.order - 1;
    if (r.order >= 1)
        for (int i = 0; i < a.dim; ++i) r.grad[i] = a.hess[packed_index(k, i)];
    return r;
}

// Uniform accessors so generic code can run over double or Jet2.
inline double value_of(double x) noexcept { return x; }
inline double value_of(const Jet2& x) noexcept { return x.value; }

inline std::string describe(const Jet2& j)
{
    std::ostringstream os;
    os.precision(17);
    os << "Jet2{value=" << j.value << ", grad=(";
    for (int i = 0; i < j.dim; ++i) os << (i ? "," : "") << j.grad[i];
    os << "), order=" << j.order << "}";
    return os.str();
}

} // namespace oneill
