#pragma once

/// \file
/// Sample grids over a chart and deterministic random test vectors.

#include "oneill/dsl.hpp"
#include "oneill/linalg.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace oneill {

/// Default per-axis resolution: the smallest N with N^m >= 64.
inline int default_resolution(int m)
{
    int n = 1;
    while (std::pow(double(n), m) < 64.0 - 1e-9) ++n;
    return std::max(n, 2);
}

/// Offset of periodic grid nodes, as a fraction of a cell. An irrational
/// offset keeps coarse grids off the symmetry points of trigonometric metrics.
inline constexpr double kPeriodicOffset = 0.3819660112501051;

/// Tensor grid over the sample box. Periodic axes use (j + offset)·p/N;
/// bounded axes use cell midpoints of the margin-reduced interval.
inline std::vector<Vec> sample_grid(const ManifoldSpec& spec, std::vector<int> resolution = {})
{
    const int m = spec.dim;
    if (resolution.empty()) resolution.assign(m, default_resolution(m));
    if (resolution.size() == 1 && m > 1) resolution.assign(m, resolution[0]);
    if (static_cast<int>(resolution.size()) != m)
        throw std::invalid_argument("grid resolution needs one entry per coordinate");
    std::vector<std::vector<double>> axes(m);
    for (int a = 0; a < m; ++a) {
        const int N = resolution[a];
        if (N < 1) throw std::invalid_argument("grid resolution must be positive");
        const Interval r = spec.sample_range(a);
        for (int j = 0; j < N; ++j)
            axes[a].push_back(spec.is_periodic(a) ? r.lo + r.length() * (j + kPeriodicOffset) / N : r.lo + r.length() * (j + 0.5) / N);
    }
    std::vector<Vec> pts;
    std::vector<int> idx(m, 0);
    while (true) {
        Vec p(m);
        for (int a = 0; a < m; ++a) p[a] = axes[a][idx[a]];
        pts.push_back(p);
        int a = m - 1;
        while (a >= 0 && ++idx[a] == resolution[a]) idx[a--] = 0;
        if (a < 0) break;
    }
    return pts;
}

/// mt19937_64 keyed by (seed, label, index). Uniform variates are built from
/// raw engine bits, so streams are identical across standard libraries.
class SampleRng {
public:
    SampleRng(std::uint64_t seed, std::string_view label, std::uint64_t index)
    {
        std::uint64_t h = 1469598103934665603ull; // FNV-1a
        for (const char c : label) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                          static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
        engine_.seed(seq);
    }

    /// Uniform in [-1, 1].
    double symmetric()
    {
        const double u = double(engine_() >> 11) * 0x1.0p-53;
        return 2.0 * u - 1.0;
    }
    /// Uniform in [lo, hi].
    double uniform(double lo, double hi)
    {
        const double u = double(engine_() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }
    Vec vector(int n)
    {
        Vec v(n);
        for (double& x : v) x = symmetric();
        return v;
    }

private:
    std::mt19937_64 engine_;
};

/// Σ c_k legs[k] over legs[first..last) with random c_k in [-1, 1].
inline Vec random_combination(SampleRng& rng, const std::vector<Vec>& legs, int first, int last)
{
    Vec v(legs.front().size());
    for (int k = first; k < last; ++k) {
        const double c = rng.symmetric();
        for (int a = 0; a < v.size(); ++a) v[a] += c * legs[k][a];
    }
    return v;
}

} // namespace oneill
