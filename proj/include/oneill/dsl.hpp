#pragma once

/// \file
/// Textual manifold and submersion definitions.
///
///   manifold NAME { dim INT signature INT coords NAME+
///                   (periodic NAME NUMBER)* (domain NAME in [NUMBER, NUMBER])*
///                   metric { (g[INT][INT] = expr)* } }
///   submersion NAME { total NAME; base NAME; map { (NAME = expr)* } (aligned BOOL)? }
///
/// Expressions are infix with precedence ^ > unary - > * / > + -. Statements
/// are separated by newlines or semicolons; a newline ends an expression
/// unless it occurs inside parentheses. '#' starts a comment.

#include "oneill/expr.hpp"
#include "oneill/linalg.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace oneill {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const noexcept { return hi - lo; }
};

/// Fraction of a non-periodic coordinate range excluded at each end when sampling.
inline constexpr double kChartMargin = 0.05;

struct ManifoldSpec {
    std::string name;
    int dim = 0;
    int signature = 0; // number of negative eigenvalues (the index)
    std::vector<std::string> coords;
    std::vector<std::optional<double>> periodic;
    std::vector<std::optional<Interval>> domain;
    std::vector<std::vector<ExprPtr>> metric; // full symmetric dim x dim

    bool is_periodic(int a) const { return periodic[a].has_value(); }

    /// Coordinate range as a circle [0, period) or the declared interval.
    /// Undeclared non-periodic coordinates default to [-1, 1].
    Interval range(int a) const
    {
        if (periodic[a]) return {0.0, *periodic[a]};
        if (domain[a]) return *domain[a];
        return {-1.0, 1.0};
    }

    /// Range used for sampling: full circle for periodic coordinates, the open
    /// interior minus a margin at each end otherwise.
    Interval sample_range(int a) const
    {
        const Interval r = range(a);
        if (periodic[a]) return r;
        const double m = kChartMargin * r.length();
        return {r.lo + m, r.hi - m};
    }

    /// Every coordinate is either periodic or has a declared bounded domain.
    bool compact() const
    {
        for (int a = 0; a < dim; ++a)
            if (!periodic[a] && !domain[a]) return false;
        return true;
    }

    bool fully_periodic() const
    {
        for (int a = 0; a < dim; ++a)
            if (!periodic[a]) return false;
        return true;
    }

    /// Periodic coordinates reduced to [0, period).
    Vec wrap(const Vec& x) const
    {
        Vec r = x;
        for (int a = 0; a < dim; ++a)
            if (periodic[a]) {
                const double p = *periodic[a];
                r[a] = x[a] - p * std::floor(x[a] / p);
            }
        return r;
    }

    /// True when every non-periodic coordinate lies in its declared interval.
    bool inside(const Vec& x) const
    {
        for (int a = 0; a < dim; ++a)
            if (!periodic[a] && domain[a] && (x[a] < domain[a]->lo || x[a] > domain[a]->hi)) return false;
        return true;
    }

    /// Difference y - x with periodic coordinates taken to the nearest image.
    Vec difference(const Vec& y, const Vec& x) const
    {
        Vec d(dim);
        for (int a = 0; a < dim; ++a) {
            d[a] = y[a] - x[a];
            if (periodic[a]) {
                const double p = *periodic[a];
                d[a] -= p * std::round(d[a] / p);
            }
        }
        return d;
    }

    Vec center() const
    {
        Vec c(dim);
        for (int a = 0; a < dim; ++a) {
            const Interval r = range(a);
            c[a] = 0.5 * (r.lo + r.hi);
        }
        return c;
    }
};

struct SubmersionSpec {
    std::string name;
    std::shared_ptr<const ManifoldSpec> total;
    std::shared_ptr<const ManifoldSpec> base;
    std::vector<ExprPtr> map;                   // one per base coordinate, in total coordinates
    std::vector<std::vector<ExprPtr>> jacobian; // d map[k] / d x[a]
    int fibre_dim = 0;
    bool coordinate_aligned = false;

    /// Base point of x (periodic base coordinates reduced).
    Vec project(const Vec& x) const
    {
        const Vec w = total->wrap(x);
        Vec y(base->dim);
        for (int k = 0; k < base->dim; ++k)
            y[k] = eval_expr(*map[k], std::span<const double>(w.begin(), w.end()));
        return base->wrap(y);
    }
};

struct Diagnostic {
    int line = 0;
    int column = 0;
    std::string message;

    std::string to_string() const
    {
        return std::to_string(line) + ":" + std::to_string(column) + ": " + message;
    }
};

struct ParseResult {
    std::vector<std::shared_ptr<const ManifoldSpec>> manifolds;
    std::vector<std::shared_ptr<const SubmersionSpec>> submersions;
    std::vector<Diagnostic> diagnostics;

    bool ok() const noexcept { return diagnostics.empty(); }

    std::shared_ptr<const ManifoldSpec> manifold(std::string_view name) const
    {
        for (const auto& m : manifolds)
            if (m->name == name) return m;
        return nullptr;
    }
    std::shared_ptr<const SubmersionSpec> submersion(std::string_view name) const
    {
        for (const auto& s : submersions)
            if (s->name == name) return s;
        return nullptr;
    }
};

namespace dsl {

enum class Tok { Ident, Number, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    double number = 0.0;
    int line = 1;
    int column = 1;
    bool newline_before = false;
};

struct SyntaxError {
    Diagnostic diag;
};

inline std::vector<Token> lex(std::string_view src)
{
    std::vector<Token> out;
    int line = 1, col = 1;
    bool nl = false;
    std::size_t i = 0;
    auto advance = [&](std::size_t k = 1) {
        for (std::size_t j = 0; j < k && i < src.size(); ++j, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < src.size()) {
        const char c = src[i];
        if (c == '\n') {
            nl = true;
            advance();
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance();
            continue;
        }
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') advance();
            continue;
        }
        Token t;
        t.line = line;
        t.column = col;
        t.newline_before = nl;
        nl = false;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            t.kind = Tok::Ident;
            t.text = std::string(src.substr(i, j - i));
            advance(j - i);
        } else if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < src.size() &&
                                                                     std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            if (j < src.size() && src[j] == '.') {
                ++j;
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            }
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
                    while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
                    j = k;
                }
            }
            t.kind = Tok::Number;
            t.text = std::string(src.substr(i, j - i));
            t.number = std::stod(t.text);
            advance(j - i);
        } else if (std::string_view("{}[]()=,;+-*/^").find(c) != std::string_view::npos) {
            t.kind = Tok::Punct;
            t.text = std::string(1, c);
            advance();
        } else {
            throw SyntaxError{{line, col, std::string("unexpected character '") + c + "'"}};
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.kind = Tok::End;
    end.line = line;
    end.column = col;
    end.newline_before = true;
    out.push_back(end);
    return out;
}

inline const std::set<std::string, std::less<>>& reserved_words()
{
    static const std::set<std::string, std::less<>> words = {
        "manifold", "submersion", "dim", "signature", "coords", "periodic", "domain", "in",
        "metric", "total", "base", "map", "aligned", "true", "false", "g", "pi", "e",
        "sin", "cos", "sinh", "cosh", "exp", "log", "sqrt"};
    return words;
}

inline std::optional<Function> function_named(std::string_view s)
{
    if (s == "sin") return Function::Sin;
    if (s == "cos") return Function::Cos;
    if (s == "sinh") return Function::Sinh;
    if (s == "cosh") return Function::Cosh;
    if (s == "exp") return Function::Exp;
    if (s == "log") return Function::Log;
    if (s == "sqrt") return Function::Sqrt;
    return std::nullopt;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    ParseResult run()
    {
        ParseResult res;
        try {
            while (peek().kind != Tok::End) {
                if (accept_punct(";")) continue;
                const Token& t = peek();
                if (is_word("manifold")) {
                    auto m = parse_manifold(res);
                    if (m) res.manifolds.push_back(std::move(m));
                } else if (is_word("submersion")) {
                    auto s = parse_submersion(res);
                    if (s) res.submersions.push_back(std::move(s));
                } else {
                    fail(t, "expected 'manifold' or 'submersion', found '" + t.text + "'");
                }
            }
        } catch (const SyntaxError& e) {
            res.diagnostics.push_back(e.diag);
        }
        return res;
    }

    /// Parse a standalone expression over the given coordinate names.
    ExprPtr parse_standalone_expr(const std::vector<std::string>& coords)
    {
        coords_ = &coords;
        ExprPtr e = parse_expr();
        if (peek().kind != Tok::End) fail(peek(), "unexpected '" + peek().text + "' after expression");
        return e;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    int paren_depth_ = 0;
    const std::vector<std::string>* coords_ = nullptr;

    const Token& peek() const { return toks_[pos_]; }
    const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    [[noreturn]] static void fail(const Token& t, std::string msg) { throw SyntaxError{{t.line, t.column, std::move(msg)}}; }

    bool is_word(std::string_view w) const { return peek().kind == Tok::Ident && peek().text == w; }
    bool is_punct(std::string_view p) const { return peek().kind == Tok::Punct && peek().text == p; }
    bool accept_punct(std::string_view p)
    {
        if (!is_punct(p)) return false;
        next();
        return true;
    }
    void expect_punct(std::string_view p)
    {
        if (!accept_punct(p)) fail(peek(), "expected '" + std::string(p) + "', found '" + describe(peek()) + "'");
    }
    void expect_word(std::string_view w)
    {
        if (!is_word(w)) fail(peek(), "expected '" + std::string(w) + "', found '" + describe(peek()) + "'");
        next();
    }
    static std::string describe(const Token& t) { return t.kind == Tok::End ? "end of input" : t.text; }

    std::string expect_name(const char* what)
    {
        const Token& t = peek();
        if (t.kind != Tok::Ident) fail(t, std::string("expected ") + what + ", found '" + describe(t) + "'");
        if (reserved_words().count(t.text)) fail(t, "'" + t.text + "' is reserved and cannot name a " + what);
        return next().text;
    }

    int expect_int(const char* what)
    {
        const Token& t = peek();
        if (t.kind != Tok::Number || std::floor(t.number) != t.number)
            fail(t, std::string("expected integer ") + what + ", found '" + describe(t) + "'");
        return static_cast<int>(next().number);
    }

    /// NUMBER positions also accept constant expressions such as 2*pi.
    double expect_constant(const char* what)
    {
        const Token& start = peek();
        static const std::vector<std::string> none;
        const auto* saved = coords_;
        coords_ = &none;
        ExprPtr e;
        try {
            e = parse_expr();
        } catch (const SyntaxError&) {
            coords_ = saved;
            fail(start, std::string("expected numeric ") + what);
        }
        coords_ = saved;
        return constant_value(*e);
    }

    int coordinate_index(const std::vector<std::string>& coords, const Token& t) const
    {
        for (std::size_t i = 0; i < coords.size(); ++i)
            if (coords[i] == t.text) return static_cast<int>(i);
        fail(t, "unknown coordinate '" + t.text + "'");
    }

    std::shared_ptr<const ManifoldSpec> parse_manifold(ParseResult& res)
    {
        expect_word("manifold");
        const Token name_tok = peek();
        auto m = std::make_shared<ManifoldSpec>();
        m->name = expect_name("manifold name");
        if (res.manifold(m->name)) fail(name_tok, "duplicate manifold '" + m->name + "'");
        expect_punct("{");
        bool have_dim = false, have_sig = false, have_coords = false, have_metric = false;
        Token sig_tok;
        std::map<std::pair<int, int>, std::pair<ExprPtr, Token>> entries;
        while (!accept_punct("}")) {
            if (accept_punct(";")) continue;
            const Token t = peek();
            if (is_word("dim")) {
                next();
                m->dim = expect_int("dimension");
                if (m->dim < 1 || m->dim > kMaxDim)
                    fail(t, "dimension " + std::to_string(m->dim) + " outside [1, " + std::to_string(kMaxDim) + "]");
                have_dim = true;
            } else if (is_word("signature")) {
                next();
                sig_tok = peek();
                m->signature = expect_int("signature");
                have_sig = true;
            } else if (is_word("coords")) {
                next();
                if (!have_dim) fail(t, "'dim' must precede 'coords'");
                while (peek().kind == Tok::Ident && !reserved_words().count(peek().text)) {
                    const Token& c = peek();
                    for (const auto& existing : m->coords)
                        if (existing == c.text) fail(c, "duplicate coordinate '" + c.text + "'");
                    m->coords.push_back(next().text);
                }
                if (static_cast<int>(m->coords.size()) != m->dim)
                    fail(t, "coordinate count " + std::to_string(m->coords.size()) + " ≠ dim " +
                                std::to_string(m->dim));
                m->periodic.assign(m->dim, std::nullopt);
                m->domain.assign(m->dim, std::nullopt);
                have_coords = true;
            } else if (is_word("periodic")) {
                next();
                if (!have_coords) fail(t, "'coords' must precede 'periodic'");
                const int a = coordinate_index(m->coords, next());
                const Token vt = peek();
                const double p = expect_constant("period");
                if (!(p > 0.0)) fail(vt, "period must be positive");
                m->periodic[a] = p;
            } else if (is_word("domain")) {
                next();
                if (!have_coords) fail(t, "'coords' must precede 'domain'");
                const int a = coordinate_index(m->coords, next());
                expect_word("in");
                expect_punct("[");
                const double lo = expect_constant("lower bound");
                expect_punct(",");
                const double hi = expect_constant("upper bound");
                expect_punct("]");
                if (!(lo < hi)) fail(t, "empty domain for '" + m->coords[a] + "'");
                m->domain[a] = Interval{lo, hi};
            } else if (is_word("metric")) {
                next();
                if (!have_coords) fail(t, "'coords' must precede 'metric'");
                expect_punct("{");
                coords_ = &m->coords;
                while (!accept_punct("}")) {
                    if (accept_punct(";")) continue;
                    const Token gt = peek();
                    expect_word("g");
                    expect_punct("[");
                    const Token it = peek();
                    const int i = expect_int("row index");
                    expect_punct("]");
                    expect_punct("[");
                    const int j = expect_int("column index");
                    expect_punct("]");
                    if (i < 0 || j < 0 || i >= m->dim || j >= m->dim)
                        fail(it, "metric index (" + std::to_string(i) + "," + std::to_string(j) + ") outside dim " +
                                     std::to_string(m->dim));
                    expect_punct("=");
                    ExprPtr e = parse_expr();
                    if (entries.count({i, j})) fail(gt, "duplicate metric entry g[" + std::to_string(i) + "][" +
                                                            std::to_string(j) + "]");
                    entries[{i, j}] = {e, gt};
                }
                coords_ = nullptr;
                have_metric = true;
            } else {
                fail(t, "unexpected '" + describe(t) + "' in manifold body");
            }
        }
        if (!have_dim) fail(name_tok, "manifold '" + m->name + "' lacks 'dim'");
        if (!have_coords) fail(name_tok, "manifold '" + m->name + "' lacks 'coords'");
        if (!have_metric) fail(name_tok, "manifold '" + m->name + "' lacks 'metric'");
        if (!have_sig) fail(name_tok, "manifold '" + m->name + "' lacks 'signature'");
        if (m->signature < 0 || m->signature > m->dim)
            fail(sig_tok, "signature " + std::to_string(m->signature) + " out of range [0, " +
                              std::to_string(m->dim) + "]");

        m->metric.assign(m->dim, std::vector<ExprPtr>(m->dim, expr::constant(0.0)));
        for (const auto& [ij, val] : entries) {
            const auto [i, j] = ij;
            if (i != j) {
                const auto mirror = entries.find({j, i});
                if (mirror != entries.end() && !structurally_equal(*mirror->second.first, *val.first)) {
                    const auto& tok = i < j ? val.second : mirror->second.second;
                    fail(tok, "symmetry conflict at (" + std::to_string(std::min(i, j)) + "," +
                                  std::to_string(std::max(i, j)) + ")");
                }
            }
            m->metric[i][j] = val.first;
            m->metric[j][i] = val.first;
        }
        return m;
    }

    std::shared_ptr<const SubmersionSpec> parse_submersion(ParseResult& res)
    {
        expect_word("submersion");
        const Token name_tok = peek();
        auto s = std::make_shared<SubmersionSpec>();
        s->name = expect_name("submersion name");
        if (res.submersion(s->name)) fail(name_tok, "duplicate submersion '" + s->name + "'");
        expect_punct("{");
        std::vector<std::pair<Token, ExprPtr>> map_entries;
        Token map_tok;
        bool have_map = false;
        bool aligned_given = false;
        Token aligned_tok;
        while (!accept_punct("}")) {
            if (accept_punct(";")) continue;
            const Token t = peek();
            if (is_word("total") || is_word("base")) {
                const bool total = is_word("total");
                next();
                const Token nt = peek();
                const std::string n = expect_name("manifold name");
                auto m = res.manifold(n);
                if (!m) fail(nt, "unknown manifold '" + n + "'");
                (total ? s->total : s->base) = m;
            } else if (is_word("map")) {
                map_tok = t;
                next();
                if (!s->total) fail(t, "'total' must precede 'map'");
                expect_punct("{");
                coords_ = &s->total->coords;
                while (!accept_punct("}")) {
                    if (accept_punct(";")) continue;
                    const Token lhs = peek();
                    expect_name("base coordinate");
                    expect_punct("=");
                    map_entries.emplace_back(lhs, parse_expr());
                }
                coords_ = nullptr;
                have_map = true;
            } else if (is_word("aligned")) {
                aligned_tok = t;
                next();
                if (is_word("true")) s->coordinate_aligned = true;
                else if (is_word("false")) s->coordinate_aligned = false;
                else fail(peek(), "expected 'true' or 'false'");
                next();
                aligned_given = true;
            } else {
                fail(t, "unexpected '" + describe(t) + "' in submersion body");
            }
        }
        if (!s->total) fail(name_tok, "submersion '" + s->name + "' lacks 'total'");
        if (!s->base) fail(name_tok, "submersion '" + s->name + "' lacks 'base'");
        if (!have_map) fail(name_tok, "submersion '" + s->name + "' lacks 'map'");
        const int n = s->base->dim;
        if (static_cast<int>(map_entries.size()) != n)
            fail(map_tok, "map arity " + std::to_string(map_entries.size()) + " ≠ base dim " + std::to_string(n));
        s->map.assign(n, nullptr);
        for (const auto& [tok, e] : map_entries) {
            const int k = coordinate_index(s->base->coords, tok);
            if (s->map[k]) fail(tok, "base coordinate '" + tok.text + "' mapped twice");
            s->map[k] = e;
        }
        s->fibre_dim = s->total->dim - n;
        if (s->fibre_dim < 1)
            fail(name_tok, "fibre dimension " + std::to_string(s->fibre_dim) + " must be positive");
        if (s->base->signature > s->total->signature)
            fail(name_tok, "base index " + std::to_string(s->base->signature) + " exceeds total index " +
                               std::to_string(s->total->signature));
        if (aligned_given && s->coordinate_aligned) {
            for (int k = 0; k < n; ++k) {
                const auto* c = std::get_if<Expr::Coordinate>(&s->map[k]->node);
                if (!c || c->index != k)
                    fail(aligned_tok, "aligned submersions must project onto the first " + std::to_string(n) +
                                          " total coordinates");
            }
        }
        s->jacobian.assign(n, std::vector<ExprPtr>(s->total->dim));
        for (int k = 0; k < n; ++k)
            for (int a = 0; a < s->total->dim; ++a) s->jacobian[k][a] = differentiate(s->map[k], a);
        return s;
    }

    // Expression grammar.
    bool binary_continues(std::string_view op) const
    {
        return is_punct(op) && (paren_depth_ > 0 || !peek().newline_before);
    }

    ExprPtr parse_expr()
    {
        ExprPtr lhs = parse_term();
        while (binary_continues("+") || binary_continues("-")) {
            const BinaryOp op = next().text == "+" ? BinaryOp::Add : BinaryOp::Sub;
            lhs = expr::binary(op, lhs, parse_term());
        }
        return lhs;
    }

    ExprPtr parse_term()
    {
        ExprPtr lhs = parse_unary();
        while (binary_continues("*") || binary_continues("/")) {
            const BinaryOp op = next().text == "*" ? BinaryOp::Mul : BinaryOp::Div;
            lhs = expr::binary(op, lhs, parse_unary());
        }
        return lhs;
    }

    ExprPtr parse_unary()
    {
        if (accept_punct("-")) return expr::negate(parse_unary());
        return parse_power();
    }

    ExprPtr parse_power()
    {
        ExprPtr base = parse_primary();
        if (binary_continues("^")) {
            const Token op = next();
            ExprPtr exponent = is_punct("-") ? (next(), expr::negate(parse_power())) : parse_power();
            if (!expr::is_constant(*exponent)) fail(op, "exponent must be constant");
            return expr::binary(BinaryOp::Pow, base, exponent);
        }
        return base;
    }

    ExprPtr parse_primary()
    {
        const Token t = peek();
        if (t.kind == Tok::Number) {
            next();
            return expr::constant(t.number);
        }
        if (accept_punct("(")) {
            ++paren_depth_;
            ExprPtr e = parse_expr();
            --paren_depth_;
            expect_punct(")");
            return e;
        }
        if (t.kind == Tok::Ident) {
            next();
            if (t.text == "pi") return expr::constant(std::numbers::pi, "pi");
            if (t.text == "e") return expr::constant(std::numbers::e, "e");
            if (auto fn = function_named(t.text)) {
                expect_punct("(");
                ++paren_depth_;
                ExprPtr arg = parse_expr();
                --paren_depth_;
                expect_punct(")");
                return expr::call(*fn, arg);
            }
            if (!coords_) fail(t, "unknown coordinate '" + t.text + "'");
            return expr::coordinate(coordinate_index(*coords_, t), t.text);
        }
        fail(t, "expected expression, found '" + describe(t) + "'");
    }
};

} // namespace dsl

/// Parse without numeric validation: syntax, names, arity, symmetry and
/// signature range only.
inline ParseResult parse_source(std::string_view text)
{
    try {
        dsl::Parser p(dsl::lex(text));
        return p.run();
    } catch (const dsl::SyntaxError& e) {
        ParseResult r;
        r.diagnostics.push_back(e.diag);
        return r;
    }
}

/// Parse one expression over the named coordinates; throws std::invalid_argument.
inline ExprPtr parse_expression(std::string_view text, const std::vector<std::string>& coords)
{
    try {
        dsl::Parser p(dsl::lex(text));
        return p.parse_standalone_expr(coords);
    } catch (const dsl::SyntaxError& e) {
        throw std::invalid_argument("expression '" + std::string(text) + "': " + e.diag.to_string());
    }
}

/// Text form of a manifold that parses back to the same specification.
inline std::string to_source(const ManifoldSpec& m)
{
    std::string s = "manifold " + m.name + " {\n  dim " + std::to_string(m.dim) + "\n  signature " +
                    std::to_string(m.signature) + "\n  coords";
    for (const auto& c : m.coords) s += " " + c;
    s += "\n";
    for (int a = 0; a < m.dim; ++a)
        if (m.periodic[a]) s += "  periodic " + m.coords[a] + " " + format_number(*m.periodic[a]) + "\n";
    for (int a = 0; a < m.dim; ++a)
        if (m.domain[a])
            s += "  domain " + m.coords[a] + " in [" + format_number(m.domain[a]->lo) + ", " +
                 format_number(m.domain[a]->hi) + "]\n";
    s += "  metric {\n";
    for (int i = 0; i < m.dim; ++i)
        for (int j = i; j < m.dim; ++j) {
            const auto* c = std::get_if<Expr::Constant>(&m.metric[i][j]->node);
            if (c && c->value == 0.0 && c->keyword.empty()) continue;
            s += "    g[" + std::to_string(i) + "][" + std::to_string(j) + "] = " + to_string(*m.metric[i][j]) + "\n";
        }
    s += "  }\n}\n";
    return s;
}

inline std::string to_source(const SubmersionSpec& s)
{
    std::string out = "submersion " + s.name + " {\n  total " + s.total->name + ";\n  base " + s.base->name +
                      ";\n  map {\n";
    for (int k = 0; k < s.base->dim; ++k) out += "    " + s.base->coords[k] + " = " + to_string(*s.map[k]) + "\n";
    out += "  }\n";
    if (s.coordinate_aligned) out += "  aligned true\n";
    out += "}\n";
    return out;
}

} // namespace oneill
