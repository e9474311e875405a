#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hsig/hsig.hpp"
#include "hsig/io.hpp"
#include "hsig/selector.hpp"

namespace hsig {

/// Exact answers for every query in the workload, in order.
std::vector<ResultSet> compute_oracle(const Dataset& data, const Workload& w);

struct BenchOptions {
    std::string strategy = "hybrid";      ///< pre | post | hybrid | auto
    std::vector<uint32_t> ef_sweep{150};  ///< one row per value (post/hybrid/auto)
    std::vector<uint32_t> m_sweep{16};    ///< one row per value (hybrid/auto)
    NeighborSelection selection = NeighborSelection::kPerChunkPrefix;
    uint32_t threads = 1;  ///< > 1 adds a sharded pass per parameter combination
    uint64_t seed = 0;     ///< echoed into the rows
};

struct BenchRow {
    size_t n = 0;
    uint32_t dim = 0, segments = 0, max_degree = 0, ef_construction = 0;
    std::string strategy;
    uint32_t selection = 0;  ///< NeighborSelection value (0 when unused)
    uint32_t ef = 0, m = 0, k = 0;
    uint32_t queries = 0;
    uint32_t threads = 1;
    double mean_recall = 0, median_recall = 0;
    double qps = 0;
    double mean_latency_us = 0, median_latency_us = 0;
    double mean_dist_evals = 0;
    uint32_t routed_pre = 0, routed_hybrid = 0, routed_post = 0;  ///< auto only
    uint64_t seed = 0;
};

struct BenchReport {
    std::vector<BenchRow> rows;

    static std::string csv_header();
    std::string to_csv() const;  ///< header plus one line per row
};

/// Times one strategy (or the auto selector) over a workload against
/// precomputed exact answers. One row per (ef, m) pair, plus a second,
/// sharded row per pair when options.threads > 1. `thresholds` steers the
/// auto strategy (defaults for the collection size when null).
BenchReport run_benchmark(const HsigIndex& index, const Workload& w,
                          const std::vector<ResultSet>& oracle, const BenchOptions& options,
                          const Thresholds* thresholds = nullptr);

struct ScalingOptions {
    std::vector<size_t> sizes{10000, 20000, 40000, 80000};
    uint32_t dim = 16;
    HsigParams params{};
    uint32_t queries = 100;
    uint32_t k = 10;
    double width = 0.25;  ///< fixed attribute-window fraction
    uint32_t ef = 200;
    uint32_t m = 16;
    uint64_t seed = 7;
};

struct ScalingRow {
    size_t n = 0;
    double build_seconds = 0;
    uint64_t index_bytes = 0;
    double mean_latency_us = 0;
    double mean_recall = 0;
};

struct ScalingReport {
    std::vector<ScalingRow> rows;
    double fit_a = 0, fit_b = 0;        ///< latency ≈ fit_a · ln(n) + fit_b
    std::vector<double> fit_residual;   ///< |observed − fit| / observed, per row

    static std::string csv_header();
    std::string to_csv() const;
};

/// Builds fresh synthetic indexes of increasing size and measures build time,
/// serialized size, and hybrid latency/recall, then fits latency against
/// ln(n) to expose the growth trend.
ScalingReport run_scaling(const ScalingOptions& options);

}  // namespace hsig
