#pragma once

#include <cstdint>
#include <span>

namespace hsig {

/// Squared Euclidean distance, accumulated in double. Used for every
/// internal ordering; the square root is taken only at API boundaries.
double distance_sq(std::span<const float> a, std::span<const float> b);
double distance_sq(const float* a, const float* b, uint32_t dim);

/// True Euclidean distance. Throws std::invalid_argument on dimension
/// mismatch (span overload only; the raw-pointer one trusts its caller).
double distance(std::span<const float> a, std::span<const float> b);

}  // namespace hsig
