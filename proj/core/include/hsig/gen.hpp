#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "hsig/io.hpp"
#include "hsig/types.hpp"

namespace hsig {

/// Range-width distribution for generated workloads, expressed as a fraction
/// of the collection each query's attribute window should cover.
struct WidthSpec {
    enum class Kind { kFixed, kLogUniform, kUniform };

    Kind kind = Kind::kLogUniform;
    double a = 0.001;  ///< fixed value, or lower bound
    double b = 1.0;    ///< upper bound (unused for kFixed)

    /// Accepts "fixed:W", "log:A:B" or "uniform:A:B" with fractions in (0, 1].
    static WidthSpec parse(const std::string& text);

    std::string describe() const;
    double draw(std::mt19937_64& rng) const;
};

/// Uniform synthetic data: vector components in [0, 1), attributes uniform
/// in [attr_low, attr_high]. Identical (n, dim, bounds, seed) always produce
/// identical bytes.
Dataset gen_synthetic(size_t n, uint32_t dim, double attr_low, double attr_high, uint64_t seed);

/// Queries derived from the data itself: each query vector is a stored vector
/// with every component nudged by at most ±0.02, and its attribute window is
/// placed uniformly over the sorted attributes so that it covers a `widths`-
/// distributed fraction of the collection.
Workload gen_workload(const Dataset& data, uint32_t query_count, uint32_t k,
                      const WidthSpec& widths, uint64_t seed);

}  // namespace hsig
