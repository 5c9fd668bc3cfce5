#pragma once

/// \file
/// Identity reports and their text / JSON serialization. Floating-point
/// values are printed with 17 significant digits so reports diff cleanly.

#include "oneill/expr.hpp"

#include <cmath>
#include <limits>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

namespace oneill {

struct IdentityReport {
    std::string case_id;
    std::string identity;
    std::string anchor; // the formula being checked
    long samples = 0;
    double max_residual = 0.0;
    double mean_residual = 0.0;
    double tol = 0.0;
    bool pass = true;
    std::optional<std::string> skipped;
    std::vector<std::pair<std::string, double>> extras; // auxiliary values shown in text reports

    bool skipped_or_passed() const { return skipped.has_value() || pass; }
};

/// Accumulates residuals and produces the verdict.
class ResidualStats {
public:
    void add(double r)
    {
        if (!std::isfinite(r)) r = INFINITY;
        max_ = std::max(max_, std::abs(r));
        sum_ += std::abs(r);
        ++n_;
    }
    void merge(const ResidualStats& o)
    {
        max_ = std::max(max_, o.max_);
        sum_ += o.sum_;
        n_ += o.n_;
    }
    long count() const { return n_; }
    double max() const { return max_; }
    double mean() const { return n_ ? sum_ / double(n_) : 0.0; }

    IdentityReport report(std::string identity, std::string anchor, double tol) const
    {
        IdentityReport r;
        r.identity = std::move(identity);
        r.anchor = std::move(anchor);
        r.samples = n_;
        r.max_residual = max_;
        r.mean_residual = mean();
        r.tol = tol;
        r.pass = n_ > 0 && max_ <= tol;
        if (n_ == 0) r.skipped = "no samples";
        return r;
    }

private:
    double max_ = 0.0;
    double sum_ = 0.0;
    long n_ = 0;
};

inline IdentityReport skipped_report(std::string identity, std::string anchor, double tol, std::string reason)
{
    IdentityReport r;
    r.identity = std::move(identity);
    r.anchor = std::move(anchor);
    r.tol = tol;
    r.pass = true;
    r.samples = 0;
    r.skipped = std::move(reason);
    return r;
}

namespace detail {

inline std::string json_escape(const std::string& s)
{
    std::string out = "\"";
    for (const unsigned char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default:
            if (c < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "\\u%04x", c);
                out += buf;
            } else {
                out += static_cast<char>(c);
            }
        }
    }
    return out + "\"";
}

inline std::string json_number(double v)
{
    if (std::isnan(v)) return "null";
    // Infinite residuals print as ±DBL_MAX so strict parsers still read a number.
    if (std::isinf(v)) return format_number(v > 0 ? std::numeric_limits<double>::max() : -std::numeric_limits<double>::max());
    return format_number(v);
}

} // namespace detail

inline std::string to_json(const IdentityReport& r)
{
    std::string s = "{\"case\": " + detail::json_escape(r.case_id) + ", \"identity\": " +
                     detail::json_escape(r.identity) + ", \"anchor\": " + detail::json_escape(r.anchor) +
                     ", \"samples\": " + std::to_string(r.samples) +
                     ", \"max_residual\": " + detail::json_number(r.max_residual) +
                     ", \"mean_residual\": " + detail::json_number(r.mean_residual) +
                     ", \"tol\": " + detail::json_number(r.tol) + ", \"pass\": " + (r.pass ? "true" : "false") +
                     ", \"skipped\": " + (r.skipped ? detail::json_escape(*r.skipped) : std::string("null"));
    return s + "}";
}

inline std::string to_json(const std::vector<IdentityReport>& reports)
{
    std::string s = "[\n";
    for (std::size_t i = 0; i < reports.size(); ++i) s += "  " + to_json(reports[i]) + (i + 1 < reports.size() ? ",\n" : "\n");
    return s + "]\n";
}

inline std::string to_text(const IdentityReport& r)
{
    std::string verdict = r.skipped ? "SKIP" : (r.pass ? "PASS" : "FAIL");
    std::string s = verdict + "  " + r.case_id + " / " + r.identity + "\n    " + r.anchor + "\n";
    if (r.skipped) {
        s += "    skipped: " + *r.skipped + "\n";
    } else {
        s += "    samples " + std::to_string(r.samples) + "  max " + format_number(r.max_residual) + "  mean " +
             format_number(r.mean_residual) + "  tol " + format_number(r.tol) + "\n";
    }
    for (const auto& [k, v] : r.extras) s += "    " + k + " = " + format_number(v) + "\n";
    return s;
}

inline std::string to_text(const std::vector<IdentityReport>& reports)
{
    std::string s;
    for (const auto& r : reports) s += to_text(r);
    return s;
}

} // namespace oneill
