// Microbenchmarks for the hot paths: distance kernels, neighbor selection,
// the three search strategies and single-object insertion.
//
//   ./build/benchmarks/hsig_micro [--benchmark_filter=...]

#include <benchmark/benchmark.h>

#include <random>

#include "hsig/brute_force.hpp"
#include "hsig/distance.hpp"
#include "hsig/gen.hpp"
#include "hsig/hnsw.hpp"
#include "hsig/hsig.hpp"
#include "hsig/selector.hpp"

namespace {

constexpr size_t kObjects = 5000;
constexpr uint32_t kDim = 16;
constexpr uint64_t kSeed = 42;

const hsig::Dataset& shared_data() {
    static const hsig::Dataset data = hsig::gen_synthetic(kObjects, kDim, 0.0, 1.0, kSeed);
    return data;
}

const hsig::HsigIndex& shared_index() {
    static const hsig::HsigIndex index = [] {
        hsig::HsigParams params;
        params.segments = 8;
        params.max_degree = 16;
        params.ef_construction = 200;
        params.seed = kSeed;
        return hsig::build_hsig(shared_data(), params);
    }();
    return index;
}

hsig::RangeQuery make_query(std::mt19937_64& rng, double width) {
    const hsig::Dataset& data = shared_data();
    const uint32_t base = uint32_t(rng() % data.size());
    std::vector<float> vec(data.vec(base), data.vec(base) + data.dim());
    const double lo = std::min(1.0 - width, double(rng() % 1000) / 1000.0 * (1.0 - width));
    return hsig::RangeQuery(std::move(vec), lo, lo + width, 10);
}

void BM_distance(benchmark::State& state) {
    const hsig::Dataset& data = shared_data();
    uint32_t a = 1, b = 2;
    for (auto _ : state) {
        benchmark::DoNotOptimize(hsig::distance_sq(data.vec(a), data.vec(b), data.dim()));
        a = (a + 1) % uint32_t(data.size());
        b = (b + 7) % uint32_t(data.size());
    }
}
BENCHMARK(BM_distance);

void BM_prune(benchmark::State& state) {
    const hsig::Dataset& data = shared_data();
    std::vector<uint32_t> cand;
    for (uint32_t i = 1; i <= 64; ++i) cand.push_back(i * 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(hsig::prune(data, 0, cand, 16));
    }
}
BENCHMARK(BM_prune);

void BM_search_pre(benchmark::State& state) {
    const hsig::HsigIndex& index = shared_index();
    std::mt19937_64 rng(kSeed);
    const double width = double(state.range(0)) / 1000.0;
    for (auto _ : state) {
        const hsig::RangeQuery q = make_query(rng, width);
        benchmark::DoNotOptimize(index.search_pre(q));
    }
}
BENCHMARK(BM_search_pre)->Arg(10)->Arg(100)->Arg(500);

void BM_search_post(benchmark::State& state) {
    const hsig::HsigIndex& index = shared_index();
    std::mt19937_64 rng(kSeed);
    hsig::VisitedSet vis;
    const double width = double(state.range(0)) / 1000.0;
    for (auto _ : state) {
        const hsig::RangeQuery q = make_query(rng, width);
        benchmark::DoNotOptimize(index.search_post(q, 150, &vis));
    }
}
BENCHMARK(BM_search_post)->Arg(100)->Arg(500);

void BM_search_hybrid(benchmark::State& state) {
    const hsig::HsigIndex& index = shared_index();
    std::mt19937_64 rng(kSeed);
    hsig::VisitedSet vis;
    hsig::SearchParams params;
    params.ef = 150;
    params.selection = state.range(1) == 1 ? hsig::NeighborSelection::kTopAcrossChunks
                                           : hsig::NeighborSelection::kPerChunkPrefix;
    const double width = double(state.range(0)) / 1000.0;
    for (auto _ : state) {
        const hsig::RangeQuery q = make_query(rng, width);
        benchmark::DoNotOptimize(index.search_hybrid(q, params, &vis));
    }
}
BENCHMARK(BM_search_hybrid)->Args({100, 1})->Args({100, 2})->Args({500, 1})->Args({500, 2});

void BM_search_auto(benchmark::State& state) {
    const hsig::HsigIndex& index = shared_index();
    std::mt19937_64 rng(kSeed);
    hsig::VisitedSet vis;
    hsig::SearchParams params;
    params.ef = 150;
    const hsig::Thresholds t = hsig::Thresholds::defaults_for(index.size());
    const double width = double(state.range(0)) / 1000.0;
    for (auto _ : state) {
        const hsig::RangeQuery q = make_query(rng, width);
        benchmark::DoNotOptimize(hsig::search_auto(index, q, params, t, &vis));
    }
}
BENCHMARK(BM_search_auto)->Arg(10)->Arg(100)->Arg(500);

void BM_insert(benchmark::State& state) {
    const hsig::Dataset& data = shared_data();
    hsig::HsigParams params;
    params.segments = 8;
    params.seed = kSeed;
    const hsig::SegmentBoundaries bounds =
        hsig::build_boundaries_sampled(data.attributes(), params.segments);
    hsig::HsigIndex index(data.dim(), bounds, params);
    hsig::AttributedVector v;
    v.values.resize(data.dim());
    uint32_t next = 0;
    for (auto _ : state) {
        if (next == data.size()) {  // start over on a fresh index
            state.PauseTiming();
            index = hsig::HsigIndex(data.dim(), bounds, params);
            next = 0;
            state.ResumeTiming();
        }
        v.id = next;
        std::copy(data.vec(next), data.vec(next) + data.dim(), v.values.begin());
        v.attribute = data.attribute(next);
        index.insert(v);
        ++next;
    }
}
BENCHMARK(BM_insert);

}  // namespace

BENCHMARK_MAIN();
