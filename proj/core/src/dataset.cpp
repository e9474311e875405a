#include "hsig/types.hpp"

#include <cmath>

namespace hsig {

Dataset::Dataset(uint32_t dim) : dim_(dim) {
    if (dim == 0) throw std::invalid_argument("Dataset: dimension must be >= 1");
}

void Dataset::add(std::span<const float> values, double attribute) {
    if (values.size() != dim_)
        throw std::invalid_argument("Dataset::add: vector has dimension " +
                                    std::to_string(values.size()) + ", expected " + std::to_string(dim_));
    if (!std::isfinite(attribute))
        throw std::invalid_argument("Dataset::add: attribute must be finite");
    values_.insert(values_.end(), values.begin(), values.end());
    attrs_.push_back(attribute);
}

void Dataset::add(const AttributedVector& v) {
    if (v.id != attrs_.size())
        throw std::invalid_argument("Dataset::add: id " + std::to_string(v.id) +
                                    " out of order, expected " + std::to_string(attrs_.size()));
    add(std::span<const float>(v.values), v.attribute);
}

RangeQuery::RangeQuery(std::vector<float> q, double lo_, double hi_, uint32_t k_)
    : vec(std::move(q)), lo(lo_), hi(hi_), k(k_) {
    if (std::isnan(lo) || std::isnan(hi))
        throw std::invalid_argument("RangeQuery: NaN range bound");
    if (lo > hi)
        throw std::invalid_argument("RangeQuery: lo > hi (" + std::to_string(lo) + " > " +
                                    std::to_string(hi) + ")");
    if (k == 0) throw std::invalid_argument("RangeQuery: k must be >= 1");
}

}  // namespace hsig
