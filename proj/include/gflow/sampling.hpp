#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gflow/config.hpp"

namespace gflow {

// Deterministic low-discrepancy points: Halton sequence, one prime base per
// dimension, with a seed-dependent start offset. Identical across platforms.
class HaltonSequence {
public:
    explicit HaltonSequence(std::size_t dimensions, std::uint64_t seed = 0)
        : dims_(dimensions), index_(17 + seed % 1024) {}

    std::vector<double> next() {
        std::vector<double> point(dims_);
        for (std::size_t d = 0; d < dims_; ++d)
            point[d] = radical_inverse(index_, prime(d));
        ++index_;
        return point;
    }

private:
    static int prime(std::size_t d) {
        static constexpr int primes[] = {2,  3,  5,  7,  11, 13, 17, 19,
                                         23, 29, 31, 37, 41, 43, 47, 53};
        return primes[d % (sizeof(primes) / sizeof(primes[0]))];
    }

    static double radical_inverse(std::uint64_t n, int base) {
        double inv_base = 1.0 / base, factor = inv_base, value = 0.0;
        while (n > 0) {
            value += static_cast<double>(n % base) * factor;
            n /= base;
            factor *= inv_base;
        }
        return value;
    }

    std::size_t dims_;
    std::uint64_t index_;
};

using Assignment = std::map<std::string, double>;

// n assignments for the given variable names, spread over [lo, hi]^dims.
inline std::vector<Assignment> sample_assignments(
    const std::vector<std::string>& names, int n, const Config& cfg,
    std::uint64_t seed_offset = 0) {
    HaltonSequence seq(names.size(), cfg.seed + seed_offset);
    std::vector<Assignment> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto u = seq.next();
        Assignment a;
        for (std::size_t d = 0; d < names.size(); ++d)
            a[names[d]] = cfg.point_lo + (cfg.point_hi - cfg.point_lo) * u[d];
        out.push_back(std::move(a));
    }
    return out;
}

} // namespace gflow
