#pragma once

/// \file
/// Expression trees over chart coordinates, evaluable over double or Jet2,
/// with symbolic differentiation and a re-parseable printer.

#include "oneill/jet.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace oneill {

enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Function { Sin, Cos, Sinh, Cosh, Exp, Log, Sqrt };

inline const char* to_string(BinaryOp op) noexcept
{
    switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Pow: return "^";
    }
    return "?";
}

inline const char* to_string(Function fn) noexcept
{
    switch (fn) {
    case Function::Sin: return "sin";
    case Function::Cos: return "cos";
    case Function::Sinh: return "sinh";
    case Function::Cosh: return "cosh";
    case Function::Exp: return "exp";
    case Function::Log: return "log";
    case Function::Sqrt: return "sqrt";
    }
    return "?";
}

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    struct Constant {
        double value;
        std::string keyword; // "pi", "e" or empty for a literal
    };
    struct Coordinate {
        int index;
        std::string name;
    };
    struct Binary {
        BinaryOp op;
        ExprPtr lhs, rhs;
    };
    struct Negate {
        ExprPtr arg;
    };
    struct Call {
        Function fn;
        ExprPtr arg;
    };

    std::variant<Constant, Coordinate, Binary, Negate, Call> node;
};

/// Evaluation failure (domain violation) annotated with the offending
/// sub-expression and sample point.
class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace expr {

inline ExprPtr constant(double v, std::string keyword = {})
{
    return std::make_shared<const Expr>(Expr{Expr::Constant{v, std::move(keyword)}});
}
inline ExprPtr coordinate(int index, std::string name)
{
    return std::make_shared<const Expr>(Expr{Expr::Coordinate{index, std::move(name)}});
}
inline ExprPtr binary(BinaryOp op, ExprPtr a, ExprPtr b)
{
    return std::make_shared<const Expr>(Expr{Expr::Binary{op, std::move(a), std::move(b)}});
}
inline ExprPtr negate(ExprPtr a) { return std::make_shared<const Expr>(Expr{Expr::Negate{std::move(a)}}); }
inline ExprPtr call(Function fn, ExprPtr a)
{
    return std::make_shared<const Expr>(Expr{Expr::Call{fn, std::move(a)}});
}

inline const Expr::Constant* as_constant(const ExprPtr& e) { return std::get_if<Expr::Constant>(&e->node); }

/// True when no coordinate occurs in the tree.
inline bool is_constant(const Expr& e)
{
    return std::visit(
        [](const auto& n) -> bool {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, Expr::Constant>) return true;
            else if constexpr (std::is_same_v<N, Expr::Coordinate>) return false;
            else if constexpr (std::is_same_v<N, Expr::Binary>) return is_constant(*n.lhs) && is_constant(*n.rhs);
            else return is_constant(*n.arg);
        },
        e.node);
}

// Builders with light folding, used by differentiate().
inline bool is_zero(const ExprPtr& e)
{
    const auto* c = as_constant(e);
    return c && c->value == 0.0;
}
inline bool is_one(const ExprPtr& e)
{
    const auto* c = as_constant(e);
    return c && c->value == 1.0;
}
inline ExprPtr add(ExprPtr a, ExprPtr b)
{
    if (is_zero(a)) return b;
    if (is_zero(b)) return a;
    return binary(BinaryOp::Add, std::move(a), std::move(b));
}
inline ExprPtr sub(ExprPtr a, ExprPtr b)
{
    if (is_zero(b)) return a;
    if (is_zero(a)) return negate(std::move(b));
    return binary(BinaryOp::Sub, std::move(a), std::move(b));
}
inline ExprPtr mul(ExprPtr a, ExprPtr b)
{
    if (is_zero(a) || is_zero(b)) return constant(0.0);
    if (is_one(a)) return b;
    if (is_one(b)) return a;
    return binary(BinaryOp::Mul, std::move(a), std::move(b));
}
inline ExprPtr div(ExprPtr a, ExprPtr b)
{
    if (is_zero(a)) return constant(0.0);
    if (is_one(b)) return a;
    return binary(BinaryOp::Div, std::move(a), std::move(b));
}

} // namespace expr

namespace detail {

inline std::string format_point(std::span<const double> p)
{
    std::ostringstream os;
    os.precision(17);
    os << "(";
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
    os << ")";
    return os.str();
}

template <class S>
S apply_function(Function fn, const S& a)
{
    using std::cos;
    using std::cosh;
    using std::exp;
    using std::log;
    using std::sin;
    using std::sinh;
    using std::sqrt;
    const double v = value_of(a);
    switch (fn) {
    case Function::Sin: return sin(a);
    case Function::Cos: return cos(a);
    case Function::Sinh: return sinh(a);
    case Function::Cosh: return cosh(a);
    case Function::Exp: return exp(a);
    case Function::Log:
        if (!(v > 0.0)) throw DomainError("log of non-positive argument " + std::to_string(v));
        return log(a);
    case Function::Sqrt:
        if (v < 0.0) throw DomainError("sqrt of negative argument " + std::to_string(v));
        return sqrt(a);
    }
    throw std::invalid_argument("unknown function");
}

template <class S>
S power(const S& base, double exponent)
{
    using std::pow;
    const double v = value_of(base);
    const bool integral = std::floor(exponent) == exponent;
    if (!integral && v < 0.0) throw DomainError("fractional power of negative argument");
    if (v == 0.0 && exponent < 0.0) throw DomainError("negative power of zero");
    return pow(base, exponent);
}

/// Domain violation carrying the path from the failing node up to the root.
struct PathedDomainError {
    std::string message;
    std::string path;
};

template <class S>
S eval_node(const Expr& e, std::span<const S> coords);

template <class S>
S eval_child(const ExprPtr& e, std::span<const S> coords, const char* step)
{
    try {
        return eval_node(*e, coords);
    } catch (PathedDomainError& err) {
        err.path = step + err.path;
        throw;
    }
}

template <class S>
S eval_node(const Expr& e, std::span<const S> coords)
{
    return std::visit(
        [&](const auto& n) -> S {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, Expr::Constant>) {
                return S(n.value);
            } else if constexpr (std::is_same_v<N, Expr::Coordinate>) {
                if (n.index < 0 || static_cast<std::size_t>(n.index) >= coords.size())
                    throw EvalError("coordinate '" + n.name + "' has no value");
                return coords[n.index];
            } else if constexpr (std::is_same_v<N, Expr::Binary>) {
                S a = eval_child(n.lhs, coords, "/lhs");
                if (n.op == BinaryOp::Pow) {
                    const double p = eval_node<double>(*n.rhs, std::span<const double>());
                    try {
                        return power(a, p);
                    } catch (const DomainError& err) {
                        throw PathedDomainError{err.what(), "/^"};
                    }
                }
                S b = eval_child(n.rhs, coords, "/rhs");
                switch (n.op) {
                case BinaryOp::Add: return a + b;
                case BinaryOp::Sub: return a - b;
                case BinaryOp::Mul: return a * b;
                case BinaryOp::Div:
                    if (value_of(b) == 0.0) throw PathedDomainError{"division by zero", "/div"};
                    return a / b;
                default: break;
                }
                throw std::logic_error("unhandled binary operator");
            } else if constexpr (std::is_same_v<N, Expr::Negate>) {
                return -eval_child(n.arg, coords, "/neg");
            } else {
                S a = eval_child(n.arg, coords, "/arg");
                try {
                    return apply_function(n.fn, a);
                } catch (const DomainError& err) {
                    throw PathedDomainError{err.what(), std::string("/") + to_string(n.fn)};
                }
            }
        },
        e.node);
}

} // namespace detail

/// Evaluate over any scalar (double or Jet2) given per-coordinate values.
template <class S>
S evaluate(const Expr& e, std::span<const S> coords)
{
    try {
        return detail::eval_node<S>(e, coords);
    } catch (const detail::PathedDomainError& err) {
        std::vector<double> p;
        for (const S& c : coords) p.push_back(value_of(c));
        throw EvalError(err.message + " (expression path '" + err.path + "', point " +
                        detail::format_point(p) + ")");
    }
}

/// Real value at a point.
inline double eval_expr(const Expr& e, std::span<const double> point) { return evaluate<double>(e, point); }

/// Jet (value, gradient, Hessian) at a point, in the chart of dimension point.size().
inline Jet2 eval_expr_jet(const Expr& e, std::span<const double> point)
{
    std::vector<Jet2> vars;
    vars.reserve(point.size());
    for (std::size_t i = 0; i < point.size(); ++i)
        vars.push_back(Jet2::variable(static_cast<int>(i), static_cast<int>(point.size()), point[i]));
    return evaluate<Jet2>(e, std::span<const Jet2>(vars));
}

/// Constant-fold an expression that references no coordinate.
inline double constant_value(const Expr& e)
{
    std::vector<double> none;
    return eval_expr(e, none);
}

/// d e / d x_k as a new tree.
inline ExprPtr differentiate(const ExprPtr& e, int k)
{
    using namespace expr;
    return std::visit(
        [&](const auto& n) -> ExprPtr {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, Expr::Constant>) {
                return constant(0.0);
            } else if constexpr (std::is_same_v<N, Expr::Coordinate>) {
                return constant(n.index == k ? 1.0 : 0.0);
            } else if constexpr (std::is_same_v<N, Expr::Binary>) {
                ExprPtr da = differentiate(n.lhs, k);
                switch (n.op) {
                case BinaryOp::Add: return add(da, differentiate(n.rhs, k));
                case BinaryOp::Sub: return sub(da, differentiate(n.rhs, k));
                case BinaryOp::Mul: return add(mul(da, n.rhs), mul(n.lhs, differentiate(n.rhs, k)));
                case BinaryOp::Div: {
                    ExprPtr db = differentiate(n.rhs, k);
                    if (is_zero(db)) return div(da, n.rhs);
                    return sub(div(da, n.rhs),
                               div(mul(n.lhs, db), binary(BinaryOp::Pow, n.rhs, constant(2.0))));
                }
                case BinaryOp::Pow: {
                    if (is_zero(da)) return constant(0.0);
                    const double p = constant_value(*n.rhs);
                    if (p == 0.0) return constant(0.0);
                    ExprPtr dpow = p == 1.0 ? constant(1.0)
                                            : mul(constant(p), binary(BinaryOp::Pow, n.lhs, constant(p - 1.0)));
                    return mul(dpow, da);
                }
                }
                throw std::logic_error("unhandled binary operator");
            } else if constexpr (std::is_same_v<N, Expr::Negate>) {
                ExprPtr da = differentiate(n.arg, k);
                return is_zero(da) ? constant(0.0) : negate(da);
            } else {
                ExprPtr da = differentiate(n.arg, k);
                if (is_zero(da)) return constant(0.0);
                const ExprPtr& a = n.arg;
                ExprPtr outer;
                switch (n.fn) {
                case Function::Sin: outer = call(Function::Cos, a); break;
                case Function::Cos: outer = negate(call(Function::Sin, a)); break;
                case Function::Sinh: outer = call(Function::Cosh, a); break;
                case Function::Cosh: outer = call(Function::Sinh, a); break;
                case Function::Exp: outer = call(Function::Exp, a); break;
                case Function::Log: return div(da, a);
                case Function::Sqrt: return div(da, mul(constant(2.0), call(Function::Sqrt, a)));
                }
                return mul(outer, da);
            }
        },
        e->node);
}

inline std::string format_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Fully parenthesized text that parses back to the same tree.
inline std::string to_string(const Expr& e)
{
    return std::visit(
        [](const auto& n) -> std::string {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, Expr::Constant>) {
                if (!n.keyword.empty()) return n.keyword;
                if (n.value < 0.0) return "(-" + format_number(-n.value) + ")";
                return format_number(n.value);
            } else if constexpr (std::is_same_v<N, Expr::Coordinate>) {
                return n.name;
            } else if constexpr (std::is_same_v<N, Expr::Binary>) {
                return "(" + to_string(*n.lhs) + " " + oneill::to_string(n.op) + " " + to_string(*n.rhs) + ")";
            } else if constexpr (std::is_same_v<N, Expr::Negate>) {
                return "(-" + to_string(*n.arg) + ")";
            } else {
                return std::string(oneill::to_string(n.fn)) + "(" + to_string(*n.arg) + ")";
            }
        },
        e.node);
}

inline bool structurally_equal(const Expr& a, const Expr& b)
{
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        [&](const auto& na) -> bool {
            using N = std::decay_t<decltype(na)>;
            const auto& nb = std::get<N>(b.node);
            if constexpr (std::is_same_v<N, Expr::Constant>) return na.value == nb.value;
            else if constexpr (std::is_same_v<N, Expr::Coordinate>) return na.index == nb.index;
            else if constexpr (std::is_same_v<N, Expr::Binary>)
                return na.op == nb.op && structurally_equal(*na.lhs, *nb.lhs) &&
                       structurally_equal(*na.rhs, *nb.rhs);
            else if constexpr (std::is_same_v<N, Expr::Negate>) return structurally_equal(*na.arg, *nb.arg);
            else return na.fn == nb.fn && structurally_equal(*na.arg, *nb.arg);
        },
        a.node);
}

} // namespace oneill
