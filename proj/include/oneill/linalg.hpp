#pragma once

/// \file
/// Fixed-capacity vectors and matrices generic over the scalar (double or
/// Jet2). Sizes never exceed kMaxDim, so nothing here allocates.

#include "oneill/jet.hpp"

#include <array>
#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace oneill {

template <class S>
class SmallVec {
public:
    SmallVec() = default;
    explicit SmallVec(int n, S fill = S(0.0)) : size_(check(n))
    {
        for (int i = 0; i < n; ++i) data_[i] = fill;
    }
    SmallVec(std::initializer_list<S> xs) : size_(check(static_cast<int>(xs.size())))
    {
        int i = 0;
        for (const S& x : xs) data_[i++] = x;
    }

    int size() const noexcept { return size_; }
    S& operator[](int i) noexcept { return data_[i]; }
    const S& operator[](int i) const noexcept { return data_[i]; }
    S* begin() noexcept { return data_.data(); }
    S* end() noexcept { return data_.data() + size_; }
    const S* begin() const noexcept { return data_.data(); }
    const S* end() const noexcept { return data_.data() + size_; }
    void push_back(const S& x)
    {
        check(size_ + 1);
        data_[size_++] = x;
    }

private:
    static int check(int n)
    {
        if (n < 0 || n > kMaxDim)
            throw std::out_of_range("small vector size " + std::to_string(n) + " exceeds capacity");
        return n;
    }
    std::array<S, kMaxDim> data_{};
    int size_ = 0;
};

template <class S>
class SmallMat {
public:
    SmallMat() = default;
    SmallMat(int rows, int cols, S fill = S(0.0)) : rows_(rows), cols_(cols)
    {
        if (rows < 0 || cols < 0 || rows > kMaxDim || cols > kMaxDim)
            throw std::out_of_range("small matrix shape exceeds capacity");
        for (auto& x : data_) x = fill;
    }
    static SmallMat identity(int n)
    {
        SmallMat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = S(1.0);
        return m;
    }

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    S& operator()(int i, int j) noexcept { return data_[i * kMaxDim + j]; }
    const S& operator()(int i, int j) const noexcept { return data_[i * kMaxDim + j]; }

private:
    std::array<S, kMaxDim * kMaxDim> data_{};
    int rows_ = 0;
    int cols_ = 0;
};

using Vec = SmallVec<double>;
using Mat = SmallMat<double>;
using JetVec = SmallVec<Jet2>;
using JetMat = SmallMat<Jet2>;

class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <class S>
SmallMat<S> multiply(const SmallMat<S>& a, const SmallMat<S>& b)
{
    SmallMat<S> r(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < b.cols(); ++j) {
            S acc(0.0);
            for (int k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
            r(i, j) = acc;
        }
    return r;
}

template <class S>
SmallVec<S> multiply(const SmallMat<S>& a, const SmallVec<S>& x)
{
    SmallVec<S> r(a.rows());
    for (int i = 0; i < a.rows(); ++i) {
        S acc(0.0);
        for (int k = 0; k < a.cols(); ++k) acc += a(i, k) * x[k];
        r[i] = acc;
    }
    return r;
}

template <class S>
SmallMat<S> transpose(const SmallMat<S>& a)
{
    SmallMat<S> r(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r(j, i) = a(i, j);
    return r;
}

/// Gauss-Jordan inverse with partial pivoting on the values. The pivot
/// sequence is chosen from values only, so jets differentiate the smooth
/// branch of the inverse at this point.
template <class S>
SmallMat<S> inverse(const SmallMat<S>& a, double singular_tol = 1e-14)
{
    const int n = a.rows();
    if (n != a.cols()) throw std::invalid_argument("inverse of non-square matrix");
    SmallMat<S> m = a;
    SmallMat<S> inv = SmallMat<S>::identity(n);
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(value_of(m(r, col))) > std::abs(value_of(m(piv, col)))) piv = r;
        if (std::abs(value_of(m(piv, col))) < singular_tol)
            throw SingularMatrixError("matrix is numerically singular");
        if (piv != col)
            for (int j = 0; j < n; ++j) {
                std::swap(m(piv, j), m(col, j));
                std::swap(inv(piv, j), inv(col, j));
            }
        const S p = m(col, col);
        for (int j = 0; j < n; ++j) {
            m(col, j) = m(col, j) / p;
            inv(col, j) = inv(col, j) / p;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const S f = m(r, col);
            if (value_of(f) == 0.0 && !std::is_same_v<S, Jet2>) continue;
            for (int j = 0; j < n; ++j) {
                m(r, j) = m(r, j) - f * m(col, j);
                inv(r, j) = inv(r, j) - f * inv(col, j);
            }
        }
    }
    return inv;
}

/// Determinant by elimination with partial pivoting.
template <class S>
S determinant(const SmallMat<S>& a)
{
    const int n = a.rows();
    SmallMat<S> m = a;
    S det(1.0);
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(value_of(m(r, col))) > std::abs(value_of(m(piv, col)))) piv = r;
        if (value_of(m(piv, col)) == 0.0) return S(0.0);
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(m(piv, j), m(col, j));
            det = -det;
        }
        det = det * m(col, col);
        for (int r = col + 1; r < n; ++r) {
            const S f = m(r, col) / m(col, col);
            for (int j = col; j < n; ++j) m(r, j) = m(r, j) - f * m(col, j);
        }
    }
    return det;
}

inline Vec values(const JetVec& v)
{
    Vec r(v.size());
    for (int i = 0; i < v.size(); ++i) r[i] = v[i].value;
    return r;
}

inline Mat values(const JetMat& m)
{
    Mat r(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) r(i, j) = m(i, j).value;
    return r;
}

/// Constant jets carrying no derivative information, promoted for mixing.
inline JetVec constant_jets(const Vec& v)
{
    JetVec r(v.size());
    for (int i = 0; i < v.size(); ++i) r[i] = Jet2(v[i]);
    return r;
}

inline double max_abs(const Vec& v)
{
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double euclidean_norm(const Vec& v)
{
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

} // namespace oneill
