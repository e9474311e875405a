#pragma once

#include "hsig/types.hpp"

namespace hsig {

/// Exact range-filtered k-NN by full scan: considers every object whose
/// attribute lies in [query.lo, query.hi] and returns the query.k nearest,
/// ties broken by smaller id. If fewer than k objects qualify, all of them
/// are returned. This is the ground-truth reference for every approximate
/// search path.
ResultSet brute_force_rfnns(const Dataset& data, const RangeQuery& query);

/// Fraction of the exact answer that the approximate answer recovered:
/// |approx ∩ exact| / min(k, |exact|), matched by id. When the denominator
/// is zero (empty range), both answers must be empty and the recall is 1.
double recall(const ResultSet& approx, const ResultSet& exact, uint32_t k);

}  // namespace hsig
