#include "hsig/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "hsig/brute_force.hpp"
#include "hsig/gen.hpp"

namespace hsig {

std::vector<ResultSet> compute_oracle(const Dataset& data, const Workload& w) {
    std::vector<ResultSet> oracle;
    oracle.reserve(w.queries.size());
    for (const RangeQuery& q : w.queries) oracle.push_back(brute_force_rfnns(data, q));
    return oracle;
}

namespace {

using clock_type = std::chrono::steady_clock;

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

struct PassResult {
    std::vector<double> latencies_us;
    std::vector<double> recalls;
    uint64_t dist_evals = 0;
    double wall_seconds = 0;
    uint32_t routed_pre = 0, routed_hybrid = 0, routed_post = 0;
};

// One timed sweep over [begin, end) of the workload on the calling thread.
PassResult run_span(const HsigIndex& index, const Workload& w,
                    const std::vector<ResultSet>& oracle, const std::string& strategy,
                    const SearchParams& params, const Thresholds& thresholds, size_t begin,
                    size_t end) {
    PassResult r;
    r.latencies_us.reserve(end - begin);
    r.recalls.reserve(end - begin);
    VisitedSet vis;
    SearchStats stats;
    const auto wall0 = clock_type::now();
    for (size_t i = begin; i < end; ++i) {
        const RangeQuery& q = w.queries[i];
        ResultSet res;
        const auto t0 = clock_type::now();
        if (strategy == "pre") {
            res = index.search_pre(q);
        } else if (strategy == "post") {
            res = index.search_post(q, std::max(params.ef, q.k), &vis, &stats);
        } else if (strategy == "hybrid") {
            SearchParams p = params;
            p.ef = std::max(p.ef, q.k);
            res = index.search_hybrid(q, p, &vis, &stats);
        } else {  // auto
            RoutedResult routed = search_auto(index, q, params, thresholds, &vis, &stats);
            res = std::move(routed.results);
            if (routed.strategy == Strategy::kPre) ++r.routed_pre;
            if (routed.strategy == Strategy::kHybrid) ++r.routed_hybrid;
            if (routed.strategy == Strategy::kPost) ++r.routed_post;
        }
        const auto t1 = clock_type::now();
        r.latencies_us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
        r.recalls.push_back(recall(res, oracle[i], q.k));
    }
    r.wall_seconds = std::chrono::duration<double>(clock_type::now() - wall0).count();
    r.dist_evals = stats.dist_evals;
    return r;
}

BenchRow make_row(const HsigIndex& index, const Workload& w, const BenchOptions& options,
                  const std::string& strategy, const SearchParams& params, uint32_t threads,
                  const PassResult& pass) {
    BenchRow row;
    row.n = index.size();
    row.dim = index.dim();
    row.segments = index.segment_count();
    row.max_degree = index.params().max_degree;
    row.ef_construction = index.params().ef_construction;
    row.strategy = strategy;
    const bool uses_graph = strategy != "pre";
    row.selection = uses_graph ? uint32_t(params.selection) : 0;
    row.ef = uses_graph ? params.ef : 0;
    row.m = (strategy == "hybrid" || strategy == "auto") ? params.m : 0;
    row.k = w.queries.empty() ? 0 : w.queries.front().k;
    row.queries = uint32_t(w.queries.size());
    row.threads = threads;
    row.mean_recall = mean_of(pass.recalls);
    row.median_recall = median_of(pass.recalls);
    row.qps = pass.wall_seconds > 0 ? double(w.queries.size()) / pass.wall_seconds : 0.0;
    row.mean_latency_us = mean_of(pass.latencies_us);
    row.median_latency_us = median_of(pass.latencies_us);
    row.mean_dist_evals =
        w.queries.empty() ? 0.0 : double(pass.dist_evals) / double(w.queries.size());
    row.routed_pre = pass.routed_pre;
    row.routed_hybrid = pass.routed_hybrid;
    row.routed_post = pass.routed_post;
    row.seed = options.seed;
    return row;
}

}  // namespace

BenchReport run_benchmark(const HsigIndex& index, const Workload& w,
                          const std::vector<ResultSet>& oracle, const BenchOptions& options,
                          const Thresholds* thresholds) {
    if (oracle.size() != w.queries.size()) {
        throw std::invalid_argument("run_benchmark: one exact answer per query required");
    }
    if (w.dim != index.dim()) {
        throw std::invalid_argument("run_benchmark: workload dimension does not match the index");
    }
    const std::string& strategy = options.strategy;
    if (strategy != "pre" && strategy != "post" && strategy != "hybrid" && strategy != "auto") {
        throw std::invalid_argument("run_benchmark: unknown strategy '" + strategy + "'");
    }
    const Thresholds thr = thresholds ? *thresholds : Thresholds::defaults_for(index.size());

    // pre ignores ef and m; collapse its sweep to one combination
    std::vector<uint32_t> efs = options.ef_sweep.empty() ? std::vector<uint32_t>{150}
                                                         : options.ef_sweep;
    std::vector<uint32_t> ms = options.m_sweep.empty() ? std::vector<uint32_t>{16}
                                                       : options.m_sweep;
    const bool sweeps_m = strategy == "hybrid" || strategy == "auto";
    if (strategy == "pre") efs = {0};
    if (!sweeps_m) ms = {ms.front()};

    BenchReport report;
    for (uint32_t ef : efs) {
        for (uint32_t m : ms) {
            SearchParams params;
            params.ef = ef;
            params.m = m;
            params.selection = options.selection;

            PassResult pass = run_span(index, w, oracle, strategy, params, thr, 0,
                                       w.queries.size());
            report.rows.push_back(make_row(index, w, options, strategy, params, 1, pass));

            if (options.threads > 1 && !w.queries.empty()) {
                const uint32_t t_count =
                    uint32_t(std::min<size_t>(options.threads, w.queries.size()));
                std::vector<PassResult> parts(t_count);
                const auto wall0 = clock_type::now();
                {
                    std::vector<std::thread> pool;
                    pool.reserve(t_count);
                    const size_t per = (w.queries.size() + t_count - 1) / t_count;
                    for (uint32_t t = 0; t < t_count; ++t) {
                        const size_t begin = t * per;
                        const size_t end = std::min(w.queries.size(), begin + per);
                        pool.emplace_back([&, begin, end, t] {
                            parts[t] = run_span(index, w, oracle, strategy, params, thr, begin,
                                                end);
                        });
                    }
                    for (auto& th : pool) th.join();
                }
                PassResult merged;
                merged.wall_seconds =
                    std::chrono::duration<double>(clock_type::now() - wall0).count();
                for (const PassResult& part : parts) {
                    merged.latencies_us.insert(merged.latencies_us.end(),
                                               part.latencies_us.begin(),
                                               part.latencies_us.end());
                    merged.recalls.insert(merged.recalls.end(), part.recalls.begin(),
                                          part.recalls.end());
                    merged.dist_evals += part.dist_evals;
                    merged.routed_pre += part.routed_pre;
                    merged.routed_hybrid += part.routed_hybrid;
                    merged.routed_post += part.routed_post;
                }
                report.rows.push_back(
                    make_row(index, w, options, strategy, params, t_count, merged));
            }
        }
    }
    return report;
}

std::string BenchReport::csv_header() {
    return "n,dim,segments,max_degree,ef_construction,strategy,selection,ef,m,k,queries,threads,"
           "mean_recall,median_recall,qps,mean_latency_us,median_latency_us,mean_dist_evals,"
           "routed_pre,routed_hybrid,routed_post,seed";
}

std::string BenchReport::to_csv() const {
    std::ostringstream out;
    out << csv_header() << '\n';
    char buf[256];
    for (const BenchRow& r : rows) {
        std::snprintf(buf, sizeof buf,
                      "%zu,%u,%u,%u,%u,%s,%u,%u,%u,%u,%u,%u,%.6f,%.6f,%.1f,%.3f,%.3f,%.1f,%u,%u,"
                      "%u,%llu",
                      r.n, r.dim, r.segments, r.max_degree, r.ef_construction, r.strategy.c_str(),
                      r.selection, r.ef, r.m, r.k, r.queries, r.threads, r.mean_recall,
                      r.median_recall, r.qps, r.mean_latency_us, r.median_latency_us,
                      r.mean_dist_evals, r.routed_pre, r.routed_hybrid, r.routed_post,
                      (unsigned long long)r.seed);
        out << buf << '\n';
    }
    return out.str();
}

ScalingReport run_scaling(const ScalingOptions& options) {
    if (options.sizes.empty()) throw std::invalid_argument("run_scaling: no sizes given");
    ScalingReport report;
    const WidthSpec width{WidthSpec::Kind::kFixed, options.width, options.width};

    for (size_t i = 0; i < options.sizes.size(); ++i) {
        const size_t n = options.sizes[i];
        const uint64_t seed = options.seed + i;
        const Dataset data = gen_synthetic(n, options.dim, 0.0, 1.0, seed);

        const auto b0 = clock_type::now();
        const HsigIndex index = build_hsig(data, options.params);
        const double build_seconds =
            std::chrono::duration<double>(clock_type::now() - b0).count();

        std::ostringstream sink(std::ios::binary);
        index.serialize(sink);
        const uint64_t index_bytes = uint64_t(sink.str().size());

        const Workload w = gen_workload(data, options.queries, options.k, width, seed ^ 0x5ca1ab1eull);
        const std::vector<ResultSet> oracle = compute_oracle(data, w);

        SearchParams params;
        params.ef = std::max(options.ef, options.k);
        params.m = options.m;
        PassResult pass = run_span(index, w, oracle, "hybrid", params,
                                   Thresholds::defaults_for(n), 0, w.queries.size());

        report.rows.push_back(ScalingRow{n, build_seconds, index_bytes,
                                         mean_of(pass.latencies_us), mean_of(pass.recalls)});
    }

    // least-squares fit of latency against ln(n)
    const size_t m = report.rows.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const ScalingRow& r : report.rows) {
        const double x = std::log(double(r.n));
        sx += x;
        sy += r.mean_latency_us;
        sxx += x * x;
        sxy += x * r.mean_latency_us;
    }
    const double denom = double(m) * sxx - sx * sx;
    if (m >= 2 && std::abs(denom) > 1e-12) {
        report.fit_a = (double(m) * sxy - sx * sy) / denom;
        report.fit_b = (sy - report.fit_a * sx) / double(m);
    } else {
        report.fit_a = 0.0;
        report.fit_b = m == 0 ? 0.0 : sy / double(m);
    }
    for (const ScalingRow& r : report.rows) {
        const double fitted = report.fit_a * std::log(double(r.n)) + report.fit_b;
        report.fit_residual.push_back(
            r.mean_latency_us > 0 ? std::abs(r.mean_latency_us - fitted) / r.mean_latency_us : 0.0);
    }
    return report;
}

std::string ScalingReport::csv_header() {
    return "n,build_seconds,index_bytes,mean_latency_us,mean_recall";
}

std::string ScalingReport::to_csv() const {
    std::ostringstream out;
    out << csv_header() << '\n';
    char buf[160];
    for (const ScalingRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%zu,%.3f,%llu,%.3f,%.6f", r.n, r.build_seconds,
                      (unsigned long long)r.index_bytes, r.mean_latency_us, r.mean_recall);
        out << buf << '\n';
    }
    return out.str();
}

}  // namespace hsig
