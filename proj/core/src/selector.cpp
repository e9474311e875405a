#include "hsig/selector.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "hsig/brute_force.hpp"

namespace hsig {

const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::kPre: return "pre";
        case Strategy::kPost: return "post";
        case Strategy::kHybrid: return "hybrid";
    }
    return "?";
}

Strategy select_strategy(uint64_t in_range_count, const Thresholds& t) {
    if (in_range_count <= t.tau_a) return Strategy::kPre;
    if (in_range_count >= t.tau_b) return Strategy::kPost;
    return Strategy::kHybrid;
}

RoutedResult search_auto(const HsigIndex& index, const RangeQuery& q, const SearchParams& params,
                         const Thresholds& t, VisitedSet* visited, SearchStats* stats) {
    const uint64_t y = index.range_cardinality(q.lo, q.hi);
    RoutedResult out;
    out.strategy = select_strategy(y, t);
    switch (out.strategy) {
        case Strategy::kPre:
            out.results = index.search_pre(q);
            break;
        case Strategy::kPost:
            out.results = index.search_post(q, std::max(params.ef, q.k), visited, stats);
            break;
        case Strategy::kHybrid: {
            SearchParams p = params;
            p.ef = std::max(p.ef, q.k);
            out.results = index.search_hybrid(q, p, visited, stats);
            break;
        }
    }
    return out;
}

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const size_t mid = v.size() / 2;
    if (v.size() % 2 == 1) return v[mid];
    return 0.5 * (v[mid - 1] + v[mid]);
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0;
    for (double x : v) s += x;
    return s / double(v.size());
}

struct Probe {
    RangeQuery q;
    uint64_t y = 0;
    ResultSet exact;
    double pre_us = 0, hybrid_us = 0, post_us = 0;
    double hybrid_recall = 0, post_recall = 0;
};

}  // namespace

CalibrationReport calibrate(const HsigIndex& index, const CalibrationOptions& opt) {
    CalibrationReport rep;
    const size_t n = index.size();
    rep.thresholds = Thresholds::defaults_for(n);
    if (n < 2 || opt.sample_queries == 0 || opt.buckets == 0) {
        rep.fell_back = true;
        rep.note = "not enough data to calibrate";
        return rep;
    }

    std::mt19937_64 rng(opt.seed);
    auto u01 = [&rng] { return double(rng() >> 11) * 0x1.0p-53; };
    const auto order = index.attribute_order();
    const Dataset& data = index.data();

    // probe queries: vectors near the indexed points, attribute windows of
    // log-uniform cardinality placed over the attribute order
    std::vector<Probe> probes;
    probes.reserve(opt.sample_queries);
    const double ln_n = std::log(double(n));
    std::vector<float> vec(data.dim());
    for (uint32_t i = 0; i < opt.sample_queries; ++i) {
        const uint32_t base = uint32_t(rng() % n);
        const float* bv = data.vec(base);
        for (uint32_t d = 0; d < data.dim(); ++d) {
            vec[d] = bv[d] + float(u01() * 0.04 - 0.02);
        }
        const double frac = std::exp(-ln_n + u01() * ln_n);  // log-uniform in [1/n, 1]
        const uint64_t count = std::clamp<uint64_t>(uint64_t(std::llround(frac * double(n))), 1, n);
        const uint64_t start = (count == n) ? 0 : rng() % (n - count + 1);
        const double lo = order[start].first;
        const double hi = order[start + count - 1].first;
        Probe p{RangeQuery(vec, lo, hi, opt.k), 0, {}, 0, 0, 0, 0, 0};
        p.y = index.range_cardinality(lo, hi);
        p.exact = brute_force_rfnns(data, p.q);
        probes.push_back(std::move(p));
    }

    using clock = std::chrono::steady_clock;
    VisitedSet vis;
    auto timed = [&](uint32_t repeats, auto&& fn) {
        fn();  // warm caches so the first strategy measured pays no penalty
        std::vector<double> lat(repeats);
        for (uint32_t r = 0; r < repeats; ++r) {
            const auto t0 = clock::now();
            fn();
            const auto t1 = clock::now();
            lat[r] = std::chrono::duration<double, std::micro>(t1 - t0).count();
        }
        return median_of(std::move(lat));
    };

    const uint32_t buckets = opt.buckets;
    auto bucket_of = [&](uint64_t y) {
        if (y <= 1) return uint32_t(0);
        const uint32_t b = uint32_t(double(buckets) * std::log(double(y)) / ln_n);
        return std::min(b, buckets - 1);
    };
    auto edge_of = [&](uint32_t b) {  // lower cardinality edge of bucket b
        return std::pow(double(n), double(b) / double(buckets));
    };

    SearchParams probe_params = opt.params;
    probe_params.ef = std::max(probe_params.ef, opt.k);

    for (int attempt = 0; attempt < 2; ++attempt) {
        // measure every probe under the current ef
        for (Probe& p : probes) {
            ResultSet res;
            p.pre_us = timed(opt.repeats, [&] { res = index.search_pre(p.q); });
            p.hybrid_us =
                timed(opt.repeats, [&] { res = index.search_hybrid(p.q, probe_params, &vis); });
            p.hybrid_recall = recall(res, p.exact, p.q.k);
            p.post_us = timed(opt.repeats,
                              [&] { res = index.search_post(p.q, probe_params.ef, &vis); });
            p.post_recall = recall(res, p.exact, p.q.k);
        }

        // aggregate per cardinality bucket
        rep.rows.assign(buckets, {});
        std::vector<std::vector<double>> pre_l(buckets), hyb_l(buckets), post_l(buckets),
            hyb_r(buckets), post_r(buckets);
        for (const Probe& p : probes) {
            const uint32_t b = bucket_of(p.y);
            pre_l[b].push_back(p.pre_us);
            hyb_l[b].push_back(p.hybrid_us);
            post_l[b].push_back(p.post_us);
            hyb_r[b].push_back(p.hybrid_recall);
            post_r[b].push_back(p.post_recall);
        }
        for (uint32_t b = 0; b < buckets; ++b) {
            auto& row = rep.rows[b];
            row.y_lo = uint64_t(std::floor(edge_of(b)));
            row.y_hi = uint64_t(std::floor(edge_of(b + 1)));
            row.queries = uint32_t(pre_l[b].size());
            row.pre_us = median_of(pre_l[b]);
            row.hybrid_us = median_of(hyb_l[b]);
            row.post_us = median_of(post_l[b]);
            row.hybrid_recall = mean_of(hyb_r[b]);
            row.post_recall = mean_of(post_r[b]);
        }

        // tau_a: first bucket where hybrid is accurate and no slower than pre
        uint64_t tau_a = n;
        for (uint32_t b = 0; b < buckets; ++b) {
            const auto& row = rep.rows[b];
            if (row.queries == 0) continue;
            if (row.hybrid_recall >= opt.recall_target && row.hybrid_us <= row.pre_us) {
                tau_a = uint64_t(std::floor(edge_of(b)));
                break;
            }
        }
        // tau_b: largest suffix where post is accurate and no slower than hybrid
        uint64_t tau_b = n;
        for (int b = int(buckets) - 1; b >= 0; --b) {
            const auto& row = rep.rows[uint32_t(b)];
            if (row.queries == 0) continue;
            if (row.post_recall >= opt.recall_target && row.post_us <= row.hybrid_us) {
                tau_b = std::min<uint64_t>(n, uint64_t(std::ceil(edge_of(uint32_t(b)))));
            } else {
                break;
            }
        }
        Thresholds t{std::min(tau_a, tau_b), tau_b};

        // the routed choice must meet the target in every populated bucket
        std::vector<std::vector<double>> routed(buckets);
        for (const Probe& p : probes) {
            const Strategy s = select_strategy(p.y, t);
            const double r = s == Strategy::kPre      ? 1.0
                             : s == Strategy::kHybrid ? p.hybrid_recall
                                                      : p.post_recall;
            routed[bucket_of(p.y)].push_back(r);
        }
        bool covered = true;
        for (uint32_t b = 0; b < buckets; ++b) {
            if (!routed[b].empty() && mean_of(routed[b]) < opt.recall_target) covered = false;
        }

        if (covered) {
            rep.thresholds = t;
            rep.note = "calibrated";
            return rep;
        }
        if (attempt == 0) {
            probe_params.ef *= 2;
            rep.ef_doubled = true;
        }
    }

    rep.fell_back = true;
    rep.note = "measurements missed the recall target; using defaults";
    rep.thresholds = Thresholds::defaults_for(n);
    return rep;
}

void save_thresholds(const std::string& path, const Thresholds& t, double recall_target) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write thresholds file: " + path);
    out << "tau_a " << t.tau_a << "\n";
    out << "tau_b " << t.tau_b << "\n";
    out << "recall_target " << recall_target << "\n";
    if (!out.flush()) throw std::runtime_error("failed writing thresholds file: " + path);
}

Thresholds load_thresholds(const std::string& path, double* recall_target_out) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open thresholds file: " + path);
    Thresholds t;
    bool got_a = false, got_b = false;
    double target = 0.0;
    bool got_target = false;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "tau_a") {
            got_a = bool(ls >> t.tau_a);
        } else if (key == "tau_b") {
            got_b = bool(ls >> t.tau_b);
        } else if (key == "recall_target") {
            got_target = bool(ls >> target);
        } else {
            throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                     ": unknown key '" + key + "'");
        }
        if (!ls) {
            throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                     ": malformed value");
        }
    }
    if (!got_a || !got_b || !got_target) {
        throw std::runtime_error(path + ": missing tau_a, tau_b or recall_target");
    }
    if (t.tau_a > t.tau_b) {
        throw std::runtime_error(path + ": tau_a exceeds tau_b");
    }
    if (recall_target_out) *recall_target_out = target;
    return t;
}

}  // namespace hsig
