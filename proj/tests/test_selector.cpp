#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <random>
#include <string>

#include "hsig/brute_force.hpp"
#include "hsig/selector.hpp"
#include "support/helpers.hpp"
#include "support/naive_oracle.hpp"

using namespace hsig;
using testsupport::make_dataset;
using testsupport::TempDir;

namespace {

HsigIndex small_index(size_t n, uint32_t dim, uint64_t seed, uint32_t segments = 4,
                      uint32_t m = 8, uint32_t efc = 64) {
    const Dataset data = make_dataset(naive::random_vectors(n, dim, seed),
                                      naive::random_attrs(n, 0.0, 100.0, seed + 1), dim);
    HsigParams params;
    params.segments = segments;
    params.max_degree = m;
    params.ef_construction = efc;
    params.seed = seed;
    return build_hsig(data, params);
}

}  // namespace

TEST_SUITE_BEGIN("selector");

TEST_CASE("range cardinality counts exactly what a scan counts") {
    const size_t n = 400;
    const HsigIndex index = small_index(n, 4, 31);
    const auto& data = index.data();

    CHECK(index.range_cardinality(-1e300, 1e300) == n);

    // a gap between two adjacent attribute values holds nothing
    const auto order = index.attribute_order();
    const double a = order[n / 2].first;
    const double b = order[n / 2 + 1].first;
    if (std::nextafter(a, b) < b) {
        CHECK(index.range_cardinality(std::nextafter(a, b), std::nextafter(b, a)) == 0);
    }

    std::mt19937_64 rng(32);
    for (int t = 0; t < 200; ++t) {
        double lo = naive::u01(rng) * 100, hi = naive::u01(rng) * 100;
        if (lo > hi) std::swap(lo, hi);
        size_t scan = 0;
        for (uint32_t id = 0; id < n; ++id) {
            const double attr = data.attribute(id);
            if (attr >= lo && attr <= hi) ++scan;
        }
        CHECK(index.range_cardinality(lo, hi) == scan);
    }
}

TEST_CASE("dispatch follows the two thresholds") {
    const Thresholds t{100, 5000};
    CHECK(select_strategy(0, t) == Strategy::kPre);
    CHECK(select_strategy(100, t) == Strategy::kPre);
    CHECK(select_strategy(101, t) == Strategy::kHybrid);
    CHECK(select_strategy(2500, t) == Strategy::kHybrid);
    CHECK(select_strategy(4999, t) == Strategy::kHybrid);
    CHECK(select_strategy(5000, t) == Strategy::kPost);
    CHECK(select_strategy(1u << 30, t) == Strategy::kPost);
}

TEST_CASE("the worked example routes a quarter of the collection to hybrid") {
    const size_t n = 10000;
    const Thresholds t{uint64_t(0.01 * n), uint64_t(0.5 * n)};
    CHECK(select_strategy(uint64_t(0.25 * n), t) == Strategy::kHybrid);
    CHECK(select_strategy(0, t) == Strategy::kPre);
    CHECK(select_strategy(t.tau_b, t) == Strategy::kPost);
}

TEST_CASE("dispatch is total and ordered pre, hybrid, post") {
    for (const Thresholds t : {Thresholds{0, 0}, Thresholds{5, 5}, Thresholds{3, 17},
                               Thresholds{0, 40}, Thresholds{40, 40}}) {
        int phase = 0;  // 0 = pre, 1 = hybrid, 2 = post
        for (uint64_t y = 0; y <= 50; ++y) {
            const Strategy s = select_strategy(y, t);
            const int now = (s == Strategy::kPre) ? 0 : (s == Strategy::kHybrid) ? 1 : 2;
            CHECK(now >= phase);
            phase = now;
        }
        CHECK(phase == 2);  // large counts always fall through to post
    }
}

TEST_CASE("default thresholds are one percent and one half") {
    const Thresholds t = Thresholds::defaults_for(10000);
    CHECK(t.tau_a == 100);
    CHECK(t.tau_b == 5000);
    CHECK(Thresholds::defaults_for(50).tau_a == 0);
    CHECK(Thresholds::defaults_for(50).tau_b == 25);
}

TEST_CASE("strategy names are stable") {
    CHECK(std::strcmp(strategy_name(Strategy::kPre), "pre") == 0);
    CHECK(std::strcmp(strategy_name(Strategy::kPost), "post") == 0);
    CHECK(std::strcmp(strategy_name(Strategy::kHybrid), "hybrid") == 0);
}

TEST_CASE("the router runs the strategy it picked") {
    const size_t n = 600;
    const HsigIndex index = small_index(n, 8, 33);
    const auto order = index.attribute_order();
    const Thresholds t = Thresholds::defaults_for(n);  // {6, 300}
    SearchParams params;
    params.ef = 100;
    params.m = 16;

    SUBCASE("a tiny range goes to the exact scan") {
        const auto [lo, hi] = std::pair{order[10].first, order[13].first};
        const RangeQuery q(std::vector<float>(8, 0.25f), lo, hi, 5);
        const RoutedResult r = search_auto(index, q, params, t);
        CHECK(r.strategy == Strategy::kPre);
        const ResultSet exact = brute_force_rfnns(index.data(), q);
        REQUIRE(r.results.size() == exact.size());
        for (size_t i = 0; i < exact.size(); ++i) {
            CHECK(r.results.hits[i].id == exact.hits[i].id);
        }
    }
    SUBCASE("the full range goes to the unfiltered graph") {
        const RangeQuery q(std::vector<float>(8, 0.25f), -1e300, 1e300, 5);
        const RoutedResult r = search_auto(index, q, params, t);
        CHECK(r.strategy == Strategy::kPost);
        CHECK(r.results.size() == 5);
    }
    SUBCASE("a middling range goes to the hybrid path") {
        const auto [lo, hi] = std::pair{order[100].first, order[250].first};
        const RangeQuery q(std::vector<float>(8, 0.25f), lo, hi, 5);
        const RoutedResult r = search_auto(index, q, params, t);
        CHECK(r.strategy == Strategy::kHybrid);
        CHECK(r.results.size() == 5);
        for (const SearchHit& h : r.results.hits) {
            const double attr = index.data().attribute(h.id);
            CHECK(attr >= lo);
            CHECK(attr <= hi);
        }
    }
}

TEST_CASE("calibration survives a ten-object index") {
    const HsigIndex index = small_index(10, 4, 34, 2, 4, 16);
    CalibrationOptions opt;
    opt.sample_queries = 20;
    opt.k = 2;
    opt.params.ef = 16;
    opt.params.m = 4;
    opt.repeats = 1;
    const CalibrationReport report = calibrate(index, opt);
    CHECK(report.thresholds.tau_a <= report.thresholds.tau_b);
    CHECK(report.thresholds.tau_b <= index.size());
    // dispatch stays total whatever came out, ties allowed
    for (uint64_t y = 0; y <= index.size(); ++y) {
        (void)select_strategy(y, report.thresholds);
    }
}

TEST_CASE("calibration on a real index yields usable thresholds") {
    const size_t n = 1500;
    const HsigIndex index = small_index(n, 8, 35, 8, 16, 128);
    CalibrationOptions opt;
    opt.sample_queries = 60;
    opt.k = 10;
    opt.params.ef = 100;
    opt.params.m = 16;
    opt.repeats = 1;
    opt.seed = 36;
    const CalibrationReport report = calibrate(index, opt);

    CHECK(report.thresholds.tau_a <= report.thresholds.tau_b);
    CHECK(report.thresholds.tau_b <= n);
    REQUIRE_FALSE(report.rows.empty());
    for (size_t i = 0; i < report.rows.size(); ++i) {
        CHECK(report.rows[i].y_lo <= report.rows[i].y_hi);
        if (i > 0) CHECK(report.rows[i - 1].y_hi <= report.rows[i].y_lo);
    }
    // probed buckets carry measurements
    for (const auto& row : report.rows) {
        if (row.queries == 0) continue;
        CHECK(row.pre_us >= 0.0);
        CHECK(row.hybrid_recall >= 0.0);
        CHECK(row.hybrid_recall <= 1.0);
        CHECK(row.post_recall >= 0.0);
        CHECK(row.post_recall <= 1.0);
    }
}

TEST_CASE("the recall target defaults to nine tenths") {
    CHECK(CalibrationOptions{}.recall_target == 0.9);
}

TEST_CASE("threshold sidecars round-trip") {
    TempDir dir("thresholds");
    const std::string path = dir.file("model.thresholds");
    save_thresholds(path, Thresholds{42, 4242}, 0.9);
    double target = 0;
    const Thresholds t = load_thresholds(path, &target);
    CHECK(t.tau_a == 42);
    CHECK(t.tau_b == 4242);
    CHECK(target == 0.9);
    CHECK(load_thresholds(path).tau_b == 4242);  // target sink is optional
}

TEST_CASE("sidecar parsing rejects damaged files by path and line") {
    TempDir dir("thresholds-bad");
    auto write = [&](const std::string& name, const std::string& body) {
        std::ofstream out(dir.file(name));
        out << body;
        return dir.file(name);
    };

    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_thresholds(dir.file("nope")), std::runtime_error);
    }
    SUBCASE("unknown key") {
        const std::string p = write("a", "tau_a 1\ntau_b 2\nrecall_goal 0.9\n");
        CHECK_THROWS_WITH_AS(load_thresholds(p), doctest::Contains(p.c_str()),
                             std::runtime_error);
    }
    SUBCASE("malformed value") {
        const std::string p = write("b", "tau_a one\ntau_b 2\nrecall_target 0.9\n");
        CHECK_THROWS_WITH_AS(load_thresholds(p), doctest::Contains("line 1"),
                             std::runtime_error);
    }
    SUBCASE("missing key") {
        const std::string p = write("c", "tau_a 1\nrecall_target 0.9\n");
        CHECK_THROWS_AS(load_thresholds(p), std::runtime_error);
    }
    SUBCASE("inverted thresholds") {
        const std::string p = write("d", "tau_a 9\ntau_b 2\nrecall_target 0.9\n");
        CHECK_THROWS_AS(load_thresholds(p), std::runtime_error);
    }
}

TEST_CASE("cardinality stays exact while the index grows") {
    Dataset data(2);
    HsigParams params;
    params.segments = 2;
    params.max_degree = 4;
    params.ef_construction = 16;
    HsigIndex index(2, SegmentBoundaries(std::vector<double>{0.5}), params);
    std::mt19937_64 rng(37);
    for (uint32_t id = 0; id < 64; ++id) {
        AttributedVector v;
        v.id = id;
        v.values = {float(naive::u01(rng)), float(naive::u01(rng))};
        v.attribute = naive::u01(rng);
        index.insert(v);
        CHECK(index.range_cardinality(-1e300, 1e300) == id + 1);
    }
}

TEST_SUITE_END();
