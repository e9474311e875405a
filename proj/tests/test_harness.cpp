#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hsig/bench.hpp"
#include "hsig/brute_force.hpp"
#include "hsig/gen.hpp"
#include "hsig/io.hpp"
#include "hsig/segmentation.hpp"
#include "support/helpers.hpp"
#include "support/naive_oracle.hpp"

using namespace hsig;
using testsupport::TempDir;

namespace {

void write_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), std::streamsize(bytes.size()));
}

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string fvecs_record(const std::vector<float>& v) {
    std::string bytes;
    const int32_t d = int32_t(v.size());
    bytes.append(reinterpret_cast<const char*>(&d), 4);
    bytes.append(reinterpret_cast<const char*>(v.data()), v.size() * 4);
    return bytes;
}

size_t in_range_count(const Dataset& data, double lo, double hi) {
    size_t count = 0;
    for (uint32_t id = 0; id < data.size(); ++id) {
        const double a = data.attribute(id);
        if (a >= lo && a <= hi) ++count;
    }
    return count;
}

HsigIndex bench_index(const Dataset& data, uint32_t segments = 4, uint32_t m = 16,
                      uint32_t efc = 128) {
    HsigParams params;
    params.segments = segments;
    params.max_degree = m;
    params.ef_construction = efc;
    return build_hsig(data, params);
}

}  // namespace

TEST_SUITE_BEGIN("harness");

TEST_CASE("a hand-written single-record vector file loads back") {
    TempDir dir("fvecs");
    const std::string path = dir.file("one.fvecs");
    write_bytes(path, fvecs_record({1.0f, 2.0f}));
    const FvecsData got = load_fvecs(path);
    CHECK(got.dim == 2);
    CHECK(got.count() == 1);
    CHECK(got.values == std::vector<float>{1.0f, 2.0f});
}

TEST_CASE("vector files round-trip bitwise") {
    TempDir dir("fvecs-rt");
    const std::string path = dir.file("hundred.fvecs");
    const std::vector<float> values = naive::random_vectors(100, 12, 41);
    save_fvecs(path, values.data(), 100, 12);
    const FvecsData got = load_fvecs(path);
    CHECK(got.dim == 12);
    CHECK(got.count() == 100);
    REQUIRE(got.values.size() == values.size());
    CHECK(std::memcmp(got.values.data(), values.data(), values.size() * 4) == 0);
}

TEST_CASE("an empty vector file yields an empty collection") {
    TempDir dir("fvecs-empty");
    const std::string path = dir.file("nothing.fvecs");
    write_bytes(path, "");
    const FvecsData got = load_fvecs(path);
    CHECK(got.count() == 0);
}

TEST_CASE("damaged vector files are refused") {
    TempDir dir("fvecs-bad");
    SUBCASE("dimension changes mid-file") {
        const std::string path = dir.file("mixed.fvecs");
        write_bytes(path, fvecs_record({1.0f, 2.0f}) + fvecs_record({3.0f, 4.0f, 5.0f}));
        try {
            load_fvecs(path);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.kind() == ParseError::Kind::kCorrupt);
        }
    }
    SUBCASE("file ends inside a vector") {
        const std::string path = dir.file("cut.fvecs");
        const std::string whole = fvecs_record({1.0f, 2.0f, 3.0f});
        write_bytes(path, whole.substr(0, whole.size() - 2));
        try {
            load_fvecs(path);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.kind() == ParseError::Kind::kTruncated);
        }
    }
    SUBCASE("implausible dimension") {
        const std::string path = dir.file("zero.fvecs");
        const int32_t zero = 0;
        std::string bytes(reinterpret_cast<const char*>(&zero), 4);
        write_bytes(path, bytes);
        try {
            load_fvecs(path);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.kind() == ParseError::Kind::kCorrupt);
        }
    }
}

TEST_CASE("attribute text files parse one value per line") {
    TempDir dir("attrs");
    const std::string path = dir.file("col.txt");
    write_bytes(path, "1.5\n2.0\n3.25\n");
    CHECK(load_attributes(path) == std::vector<double>{1.5, 2.0, 3.25});
}

TEST_CASE("attribute parsing points at the offending line") {
    TempDir dir("attrs-bad");
    SUBCASE("trailing characters") {
        const std::string path = dir.file("trail.txt");
        write_bytes(path, "1.5\n2.0x\n");
        CHECK_THROWS_WITH_AS(load_attributes(path), doctest::Contains("line 2"),
                             std::runtime_error);
    }
    SUBCASE("not a number") {
        const std::string path = dir.file("word.txt");
        write_bytes(path, "pi\n");
        CHECK_THROWS_AS(load_attributes(path), std::runtime_error);
    }
}

TEST_CASE("attribute columns round-trip in both encodings") {
    TempDir dir("attrs-rt");
    const std::vector<double> attrs = naive::random_attrs(64, -3.5, 1e6, 42);
    save_attributes_text(dir.file("col.txt"), attrs);
    CHECK(load_attributes(dir.file("col.txt")) == attrs);
    save_attributes_f64(dir.file("col.f64"), attrs);
    CHECK(load_attributes(dir.file("col.f64")) == attrs);
}

TEST_CASE("pairing vectors with a short attribute column names both counts") {
    TempDir dir("pair");
    const std::vector<float> values = naive::random_vectors(3, 2, 43);
    save_fvecs(dir.file("v.fvecs"), values.data(), 3, 2);
    save_attributes_text(dir.file("a.txt"), std::vector<double>{1.0, 2.0});
    try {
        load_dataset(dir.file("v.fvecs"), dir.file("a.txt"));
        FAIL("expected a mismatch error");
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find('3') != std::string::npos);
        CHECK(msg.find('2') != std::string::npos);
    }
}

TEST_CASE("synthetic data is a pure function of its arguments") {
    const Dataset a = gen_synthetic(500, 8, 0.0, 10.0, 77);
    const Dataset b = gen_synthetic(500, 8, 0.0, 10.0, 77);
    const Dataset c = gen_synthetic(500, 8, 0.0, 10.0, 78);
    REQUIRE(a.size() == 500);
    CHECK(std::memcmp(a.vec(0), b.vec(0), size_t(500) * 8 * 4) == 0);
    CHECK(std::equal(a.attributes().begin(), a.attributes().end(), b.attributes().begin()));
    CHECK(std::memcmp(a.vec(0), c.vec(0), size_t(500) * 8 * 4) != 0);
    for (uint32_t id = 0; id < a.size(); ++id) {
        CHECK(a.attribute(id) >= 0.0);
        CHECK(a.attribute(id) <= 10.0);
        for (uint32_t d = 0; d < 8; ++d) {
            CHECK(a.vec(id)[d] >= 0.0f);
            CHECK(a.vec(id)[d] < 1.0f);
        }
    }
}

TEST_CASE("uniform attributes split into eight near-even segments") {
    const size_t n = 10000;
    const Dataset data = gen_synthetic(n, 4, 0.0, 1.0, 79);
    const SegmentBoundaries bounds = build_boundaries(data.attributes(), 8);
    REQUIRE(bounds.segment_count() == 8);
    std::vector<size_t> histogram(8, 0);
    for (uint32_t id = 0; id < n; ++id) ++histogram[bounds.segment_id(data.attribute(id))];
    for (size_t count : histogram) {
        CHECK(double(count) >= 0.95 * double(n) / 8.0);
        CHECK(double(count) <= 1.05 * double(n) / 8.0);
    }
}

TEST_CASE("width specifications parse, print and draw") {
    const WidthSpec fixed = WidthSpec::parse("fixed:0.25");
    CHECK(fixed.kind == WidthSpec::Kind::kFixed);
    CHECK(fixed.a == 0.25);
    const WidthSpec log = WidthSpec::parse("log:0.001:1");
    CHECK(log.kind == WidthSpec::Kind::kLogUniform);
    CHECK(log.a == 0.001);
    CHECK(log.b == 1.0);
    const WidthSpec uni = WidthSpec::parse("uniform:0.1:0.5");
    CHECK(uni.kind == WidthSpec::Kind::kUniform);

    CHECK(WidthSpec::parse(fixed.describe()).a == fixed.a);
    CHECK(WidthSpec::parse(log.describe()).b == log.b);

    std::mt19937_64 rng(80);
    for (int t = 0; t < 200; ++t) {
        CHECK(fixed.draw(rng) == 0.25);
        const double w = log.draw(rng);
        CHECK(w >= 0.001);
        CHECK(w <= 1.0);
        const double u = uni.draw(rng);
        CHECK(u >= 0.1);
        CHECK(u <= 0.5);
    }

    CHECK_THROWS_AS(WidthSpec::parse("triangle:0.5"), std::invalid_argument);
    CHECK_THROWS_AS(WidthSpec::parse("fixed:0"), std::invalid_argument);
    CHECK_THROWS_AS(WidthSpec::parse("fixed:1.5"), std::invalid_argument);
    CHECK_THROWS_AS(WidthSpec::parse("log:0.5:0.1"), std::invalid_argument);
    CHECK_THROWS_AS(WidthSpec::parse("log:0.5"), std::invalid_argument);
}

TEST_CASE("a full-width workload covers the whole collection") {
    const Dataset data = gen_synthetic(300, 4, 0.0, 5.0, 81);
    const Workload w = gen_workload(data, 20, 5, WidthSpec{WidthSpec::Kind::kFixed, 1.0, 1.0}, 82);
    REQUIRE(w.queries.size() == 20);
    CHECK(w.dim == 4);
    for (const RangeQuery& q : w.queries) {
        CHECK(q.k == 5);
        CHECK(in_range_count(data, q.lo, q.hi) == data.size());
    }
}

TEST_CASE("a quarter-width workload hits a quarter of the collection") {
    const size_t n = 10000;
    const Dataset data = gen_synthetic(n, 4, 0.0, 1.0, 83);
    const Workload w =
        gen_workload(data, 50, 10, WidthSpec{WidthSpec::Kind::kFixed, 0.25, 0.25}, 84);
    for (const RangeQuery& q : w.queries) {
        const size_t count = in_range_count(data, q.lo, q.hi);
        CHECK(count >= 2375);
        CHECK(count <= 2625);
    }
}

TEST_CASE("workload generation is reproducible and query vectors stay near the data") {
    const Dataset data = gen_synthetic(400, 6, 0.0, 9.0, 85);
    const WidthSpec widths = WidthSpec::parse("log:0.01:1");
    const Workload a = gen_workload(data, 30, 8, widths, 86);
    const Workload b = gen_workload(data, 30, 8, widths, 86);
    const Workload c = gen_workload(data, 30, 8, widths, 87);
    REQUIRE(a.queries.size() == b.queries.size());
    bool all_equal_to_c = true;
    for (size_t i = 0; i < a.queries.size(); ++i) {
        CHECK(a.queries[i].lo == b.queries[i].lo);
        CHECK(a.queries[i].hi == b.queries[i].hi);
        CHECK(a.queries[i].vec == b.queries[i].vec);
        if (a.queries[i].vec != c.queries[i].vec) all_equal_to_c = false;
        // every query vector sits within the nudge radius of some stored vector
        double best = 1e300;
        for (uint32_t id = 0; id < data.size(); ++id) {
            double worst_component = 0;
            for (uint32_t d = 0; d < data.dim(); ++d) {
                worst_component = std::max(
                    worst_component, std::abs(double(a.queries[i].vec[d]) - data.vec(id)[d]));
            }
            best = std::min(best, worst_component);
        }
        CHECK(best <= 0.02 + 1e-9);
    }
    CHECK_FALSE(all_equal_to_c);
}

TEST_CASE("workload files round-trip") {
    TempDir dir("workload");
    const Dataset data = gen_synthetic(200, 3, -2.0, 2.0, 88);
    Workload w = gen_workload(data, 25, 4, WidthSpec::parse("uniform:0.2:0.8"), 89);
    const std::string path = dir.file("w.txt");
    save_workload(path, w);
    const Workload got = load_workload(path);
    CHECK(got.dim == w.dim);
    CHECK(got.seed == w.seed);
    REQUIRE(got.queries.size() == w.queries.size());
    for (size_t i = 0; i < w.queries.size(); ++i) {
        CHECK(got.queries[i].lo == w.queries[i].lo);
        CHECK(got.queries[i].hi == w.queries[i].hi);
        CHECK(got.queries[i].k == w.queries[i].k);
        CHECK(got.queries[i].vec == w.queries[i].vec);
    }
}

TEST_CASE("workload parsing points at the offending line") {
    TempDir dir("workload-bad");
    auto write = [&](const std::string& name, const std::string& body) {
        write_bytes(dir.file(name), body);
        return dir.file(name);
    };
    SUBCASE("bad header") {
        const std::string p = write("h", "two 3 1\n");
        CHECK_THROWS_WITH_AS(load_workload(p), doctest::Contains("line 1"), std::runtime_error);
    }
    SUBCASE("count mismatch") {
        const std::string p = write("c", "2 2 1\n0 1 3 0.5 0.5\n");
        CHECK_THROWS_AS(load_workload(p), std::runtime_error);
    }
    SUBCASE("missing vector component") {
        const std::string p = write("m", "1 2 1\n0 1 3 0.5\n");
        CHECK_THROWS_WITH_AS(load_workload(p), doctest::Contains("line 2"), std::runtime_error);
    }
    SUBCASE("inverted range") {
        const std::string p = write("r", "1 2 1\n5 1 3 0.5 0.5\n");
        CHECK_THROWS_WITH_AS(load_workload(p), doctest::Contains("line 2"), std::runtime_error);
    }
}

TEST_CASE("the exact-answer cache only serves the workload it was built for") {
    TempDir dir("oracle");
    const Dataset data = gen_synthetic(300, 4, 0.0, 1.0, 90);
    const Workload w = gen_workload(data, 15, 6, WidthSpec::parse("uniform:0.3:0.9"), 91);
    const std::vector<ResultSet> answers = compute_oracle(data, w);
    const std::string path = dir.file("cache.bin");
    save_oracle_cache(path, data.size(), w, answers);

    std::vector<ResultSet> loaded;
    REQUIRE(load_oracle_cache(path, data.size(), w, loaded));
    REQUIRE(loaded.size() == answers.size());
    for (size_t i = 0; i < answers.size(); ++i) {
        REQUIRE(loaded[i].size() == answers[i].size());
        for (size_t j = 0; j < answers[i].size(); ++j) {
            CHECK(loaded[i].hits[j].id == answers[i].hits[j].id);
            CHECK(loaded[i].hits[j].distance == answers[i].hits[j].distance);
        }
    }

    SUBCASE("a different workload is rejected") {
        const Workload other = gen_workload(data, 15, 6, WidthSpec::parse("uniform:0.3:0.9"), 92);
        CHECK_FALSE(load_oracle_cache(path, data.size(), other, loaded));
    }
    SUBCASE("a different collection size is rejected") {
        CHECK_FALSE(load_oracle_cache(path, data.size() + 1, w, loaded));
    }
    SUBCASE("truncated bytes are rejected") {
        const std::string bytes = read_bytes(path);
        write_bytes(dir.file("cut.bin"), bytes.substr(0, bytes.size() - 3));
        CHECK_FALSE(load_oracle_cache(dir.file("cut.bin"), data.size(), w, loaded));
    }
    SUBCASE("trailing bytes are rejected") {
        write_bytes(dir.file("fat.bin"), read_bytes(path) + "x");
        CHECK_FALSE(load_oracle_cache(dir.file("fat.bin"), data.size(), w, loaded));
    }
    SUBCASE("a missing file is not an error, just a miss") {
        CHECK_FALSE(load_oracle_cache(dir.file("absent.bin"), data.size(), w, loaded));
    }
}

TEST_CASE("the cache writer insists on one answer per query") {
    TempDir dir("oracle-save");
    const Dataset data = gen_synthetic(50, 3, 0.0, 1.0, 93);
    const Workload w = gen_workload(data, 5, 3, WidthSpec::parse("fixed:0.5"), 94);
    std::vector<ResultSet> answers = compute_oracle(data, w);
    answers.pop_back();
    CHECK_THROWS_AS(save_oracle_cache(dir.file("c.bin"), data.size(), w, answers),
                    std::invalid_argument);
}

TEST_CASE("the oracle matches the naive scan") {
    const Dataset data = gen_synthetic(250, 5, 0.0, 2.0, 95);
    const Workload w = gen_workload(data, 20, 7, WidthSpec::parse("uniform:0.1:1"), 96);
    const std::vector<ResultSet> oracle = compute_oracle(data, w);
    REQUIRE(oracle.size() == w.queries.size());
    for (size_t i = 0; i < w.queries.size(); ++i) {
        const ResultSet want = brute_force_rfnns(data, w.queries[i]);
        REQUIRE(oracle[i].size() == want.size());
        for (size_t j = 0; j < want.size(); ++j) {
            CHECK(oracle[i].hits[j].id == want.hits[j].id);
            CHECK(oracle[i].hits[j].distance == want.hits[j].distance);
        }
    }
}

TEST_CASE("benchmarking the exact scan reports perfect recall") {
    const Dataset data = gen_synthetic(500, 8, 0.0, 1.0, 97);
    const HsigIndex index = bench_index(data);
    const Workload w = gen_workload(data, 40, 10, WidthSpec::parse("log:0.01:1"), 98);
    const std::vector<ResultSet> oracle = compute_oracle(data, w);
    BenchOptions opt;
    opt.strategy = "pre";
    const BenchReport report = run_benchmark(index, w, oracle, opt);
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].mean_recall == 1.0);
    CHECK(report.rows[0].median_recall == 1.0);
    CHECK(report.rows[0].qps > 0.0);
    CHECK(report.rows[0].mean_latency_us > 0.0);
    CHECK(report.rows[0].queries == 40);
    CHECK(report.rows[0].strategy == "pre");
}

TEST_CASE("recall reported over a beam sweep never drops meaningfully") {
    const Dataset data = gen_synthetic(1000, 8, 0.0, 1.0, 99);
    const HsigIndex index = bench_index(data, 4, 16, 160);
    const Workload w = gen_workload(data, 50, 10, WidthSpec::parse("uniform:0.3:0.9"), 100);
    const std::vector<ResultSet> oracle = compute_oracle(data, w);
    BenchOptions opt;
    opt.strategy = "hybrid";
    opt.ef_sweep = {50, 100, 200, 400};
    const BenchReport report = run_benchmark(index, w, oracle, opt);
    REQUIRE(report.rows.size() == 4);
    double prev = 0.0;
    for (const BenchRow& row : report.rows) {
        CHECK(row.mean_recall >= prev - 0.01);
        prev = std::max(prev, row.mean_recall);
    }
    CHECK(report.rows.back().mean_recall >= 0.9);
}

TEST_CASE("the routed benchmark accounts for every query") {
    const Dataset data = gen_synthetic(800, 8, 0.0, 1.0, 101);
    const HsigIndex index = bench_index(data);
    const Workload w = gen_workload(data, 60, 10, WidthSpec::parse("log:0.001:1"), 102);
    const std::vector<ResultSet> oracle = compute_oracle(data, w);
    BenchOptions opt;
    opt.strategy = "auto";
    const Thresholds t = Thresholds::defaults_for(data.size());
    const BenchReport report = run_benchmark(index, w, oracle, opt, &t);
    REQUIRE(report.rows.size() == 1);
    const BenchRow& row = report.rows[0];
    CHECK(row.routed_pre + row.routed_hybrid + row.routed_post == row.queries);
    CHECK(row.routed_pre > 0);  // log-uniform widths reach well below 1%
}

TEST_CASE("a second thread adds a sharded pass with the same answers") {
    const Dataset data = gen_synthetic(600, 8, 0.0, 1.0, 103);
    const HsigIndex index = bench_index(data);
    const Workload w = gen_workload(data, 40, 10, WidthSpec::parse("uniform:0.2:0.8"), 104);
    const std::vector<ResultSet> oracle = compute_oracle(data, w);
    BenchOptions opt;
    opt.strategy = "hybrid";
    opt.threads = 2;
    const BenchReport report = run_benchmark(index, w, oracle, opt);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].threads == 1);
    CHECK(report.rows[1].threads == 2);
    CHECK(report.rows[0].mean_recall == report.rows[1].mean_recall);
}

TEST_CASE("benchmark reports print as csv") {
    const Dataset data = gen_synthetic(200, 4, 0.0, 1.0, 105);
    const HsigIndex index = bench_index(data, 2, 8, 48);
    const Workload w = gen_workload(data, 10, 5, WidthSpec::parse("fixed:0.5"), 106);
    const std::vector<ResultSet> oracle = compute_oracle(data, w);
    const BenchReport report = run_benchmark(index, w, oracle, BenchOptions{});
    const std::string csv = report.to_csv();
    CHECK(csv.rfind(BenchReport::csv_header(), 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == std::ptrdiff_t(report.rows.size()) + 1);
}

TEST_CASE("the scaling sweep fills a row per size") {
    ScalingOptions opt;
    opt.sizes = {300, 600};
    opt.dim = 6;
    opt.params.segments = 4;
    opt.params.max_degree = 8;
    opt.params.ef_construction = 48;
    opt.queries = 20;
    opt.k = 5;
    opt.ef = 80;
    opt.m = 8;
    const ScalingReport report = run_scaling(opt);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].n == 300);
    CHECK(report.rows[1].n == 600);
    for (const ScalingRow& row : report.rows) {
        CHECK(row.build_seconds >= 0.0);
        CHECK(row.index_bytes > 0);
        CHECK(row.mean_latency_us > 0.0);
        CHECK(row.mean_recall >= 0.0);
        CHECK(row.mean_recall <= 1.0);
    }
    CHECK(report.rows[1].index_bytes > report.rows[0].index_bytes);
    CHECK(std::isfinite(report.fit_a));
    CHECK(std::isfinite(report.fit_b));
    REQUIRE(report.fit_residual.size() == 2);
    const std::string csv = report.to_csv();
    CHECK(csv.rfind(ScalingReport::csv_header(), 0) == 0);
}

TEST_SUITE_END();
