#include "hsig/distance.hpp"

#include <cmath>
#include <stdexcept>

namespace hsig {

double distance_sq(const float* a, const float* b, uint32_t dim) {
    double acc = 0.0;
    for (uint32_t i = 0; i < dim; ++i) {
        const double d = double(a[i]) - double(b[i]);
        acc += d * d;
    }
    return acc;
}

double distance_sq(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("distance: dimension mismatch (" +
                                    std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    return distance_sq(a.data(), b.data(), uint32_t(a.size()));
}

double distance(std::span<const float> a, std::span<const float> b) {
    return std::sqrt(distance_sq(a, b));
}

}  // namespace hsig
