#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hsig/hsig.hpp"
#include "hsig/types.hpp"

namespace hsig {

enum class Strategy : uint8_t { kPre, kPost, kHybrid };

const char* strategy_name(Strategy s);

/// Range-cardinality thresholds steering strategy choice:
///   Y <= tau_a        -> attribute-first scan (pre)
///   Y >= tau_b        -> unfiltered graph search (post)
///   otherwise         -> segment-aware hybrid
/// Invariant: tau_a <= tau_b.
struct Thresholds {
    uint64_t tau_a = 0;
    uint64_t tau_b = 0;

    /// Uncalibrated rule of thumb: pre below 1% of the collection, post above
    /// half of it.
    static Thresholds defaults_for(size_t n) {
        return Thresholds{uint64_t(n) / 100, uint64_t(n) / 2};
    }
};

/// Pure dispatch on the exact number of in-range objects.
Strategy select_strategy(uint64_t in_range_count, const Thresholds& t);

struct RoutedResult {
    Strategy strategy = Strategy::kHybrid;
    ResultSet results;
};

/// Counts the objects in [q.lo, q.hi] exactly, picks a strategy, runs it.
RoutedResult search_auto(const HsigIndex& index, const RangeQuery& q, const SearchParams& params,
                         const Thresholds& t, VisitedSet* visited = nullptr,
                         SearchStats* stats = nullptr);

struct CalibrationOptions {
    uint32_t sample_queries = 200;  ///< probe queries drawn from the index's own data
    double recall_target = 0.9;
    SearchParams params{};          ///< ef/m used while probing hybrid and post
    uint32_t k = 10;
    uint64_t seed = 1;
    uint32_t buckets = 16;          ///< geometric cardinality buckets over [1, n]
    uint32_t repeats = 3;           ///< timings per probe; the median is kept
};

struct CalibrationReport {
    Thresholds thresholds;
    bool fell_back = false;   ///< true when measurements could not support a choice
    bool ef_doubled = false;  ///< true when the probe ef had to be doubled
    std::string note;

    struct Bucket {
        uint64_t y_lo = 0, y_hi = 0;  ///< cardinality range covered
        uint32_t queries = 0;
        double pre_us = 0, hybrid_us = 0, post_us = 0;  ///< median latencies
        double hybrid_recall = 0, post_recall = 0;      ///< mean recalls
    };
    std::vector<Bucket> rows;
};

/// Measures pre/hybrid/post across cardinality buckets on self-generated
/// probe queries and derives thresholds: tau_a at the first bucket where
/// hybrid is both accurate enough and no slower than the scan, tau_b at the
/// largest suffix where the unfiltered search is accurate enough and no
/// slower than hybrid. If the routed choice misses the recall target in some
/// bucket, the probe ef is doubled once; if that still fails, the defaults
/// are returned with fell_back set.
CalibrationReport calibrate(const HsigIndex& index, const CalibrationOptions& opt);

/// Three-line text sidecar: tau_a, tau_b, recall_target.
void save_thresholds(const std::string& path, const Thresholds& t, double recall_target);

/// Loads the sidecar; throws std::runtime_error naming the path and line on
/// malformed content. recall_target_out may be null.
Thresholds load_thresholds(const std::string& path, double* recall_target_out = nullptr);

}  // namespace hsig
