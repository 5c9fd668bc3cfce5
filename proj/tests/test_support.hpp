#pragma once

// Helpers shared by the test binaries.

#include "oneill/oneill.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace oneill::testing {

/// Random interior point of a chart (sampling ranges, so 5% away from boundaries).
inline Vec random_point(const ManifoldSpec& spec, SampleRng& rng)
{
    Vec x(spec.dim);
    for (int a = 0; a < spec.dim; ++a) {
        const Interval r = spec.sample_range(a);
        x[a] = rng.uniform(r.lo, r.hi);
    }
    return x;
}

inline const ManifoldSpec& parse_manifold(const std::string& src, const std::string& name)
{
    static std::vector<ParseResult> keep;
    keep.push_back(parse_source(src));
    const ParseResult& pr = keep.back();
    if (!pr.ok()) throw std::runtime_error(pr.diagnostics.front().to_string());
    const auto m = pr.manifold(name);
    if (!m) throw std::runtime_error("no manifold " + name);
    return *m;
}

inline std::shared_ptr<const SubmersionSpec> parse_submersion(const std::string& src)
{
    const ParseResult pr = parse_source(src);
    if (!pr.ok()) throw std::runtime_error(pr.diagnostics.front().to_string());
    if (pr.submersions.size() != 1) throw std::runtime_error("expected one submersion");
    return pr.submersions.front();
}

inline const SubmersionSpec& catalog_sub(const std::string& id) { return *load_case(id).submersion; }

inline Vec vec(std::initializer_list<double> xs) { return Vec(xs); }

/// Timelike launch (x0, v0) on the cosh-warped model g = dt² − cosh²t(dx² + dy²).
/// With |ṫ| ≤ 0.6 cosh t₀ |u| for vertical speed u the turning point satisfies
/// cosh t ≤ cosh t₀ / 0.8, so the geodesic stays well inside t ∈ [−2, 2].
inline std::pair<Vec, Vec> clairaut_launch(SampleRng& rng)
{
    const double t0 = rng.uniform(-0.5, 0.5);
    const Vec x0 = vec({t0, rng.uniform(0.0, 6.283), rng.uniform(0.0, 6.283)});
    const double speed = rng.uniform(0.5, 1.5);
    const double angle = rng.uniform(0.0, 6.283);
    const double tdot = rng.uniform(-0.6, 0.6) * speed * std::cosh(t0);
    return {x0, vec({tdot, speed * std::cos(angle), speed * std::sin(angle)})};
}

} // namespace oneill::testing
