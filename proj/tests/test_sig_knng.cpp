#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "hsig/sig_knng.hpp"
#include "support/helpers.hpp"
#include "support/naive_oracle.hpp"

using namespace hsig;
using testsupport::make_dataset;

namespace {

Dataset random_attributed(size_t n, uint32_t dim, uint64_t seed, double attr_hi = 100.0) {
    return make_dataset(naive::random_vectors(n, dim, seed),
                        naive::random_attrs(n, 0.0, attr_hi, seed + 1), dim);
}

std::vector<uint32_t> all_ids(size_t n) {
    std::vector<uint32_t> ids(n);
    for (uint32_t i = 0; i < n; ++i) ids[i] = i;
    return ids;
}

}  // namespace

TEST_SUITE_BEGIN("sig_knng");

TEST_CASE("two objects at k=1 point at each other") {
    Dataset data(2);
    data.add(std::vector<float>{0, 0}, 1.0);
    data.add(std::vector<float>{1, 0}, 2.0);
    const DirectedGraph g = build_knng(data, 1);
    REQUIRE(g.size() == 2);
    CHECK(g.at(0) == std::vector<uint32_t>{1});
    CHECK(g.at(1) == std::vector<uint32_t>{0});
}

TEST_CASE("k of n-1 yields the complete directed graph") {
    const size_t n = 7;
    const Dataset data = random_attributed(n, 3, 50);
    const DirectedGraph g = build_knng(data, uint32_t(n - 1));
    for (uint32_t v = 0; v < n; ++v) {
        REQUIRE(g.at(v).size() == n - 1);
        std::set<uint32_t> targets(g.at(v).begin(), g.at(v).end());
        CHECK(targets.size() == n - 1);
        CHECK(targets.count(v) == 0);
    }
}

TEST_CASE("every exact-graph neighborhood matches the independent oracle") {
    const size_t n = 100;
    const uint32_t dim = 4;
    const auto vecs = naive::random_vectors(n, dim, 51);
    const Dataset data = make_dataset(vecs, naive::random_attrs(n, 0, 1, 52), dim);
    const DirectedGraph g = build_knng(data, 3);
    const auto ids = all_ids(n);
    for (uint32_t v = 0; v < n; ++v) {
        const auto want = naive::knn_among(vecs.data(), dim, v, ids, 3);
        CHECK(g.at(v) == want);
    }
}

TEST_CASE("neighbor budgets outside (0, n) are rejected") {
    const Dataset data = random_attributed(5, 2, 53);
    CHECK_THROWS_AS(build_knng(data, 0), std::invalid_argument);
    CHECK_THROWS_AS(build_knng(data, 5), std::invalid_argument);
    CHECK_THROWS_AS(build_knng(data, 9), std::invalid_argument);
}

TEST_CASE("a single segment reduces the segmented graph to the plain one") {
    const size_t n = 40;
    const Dataset data = random_attributed(n, 4, 54);
    const SegmentBoundaries one;  // no cuts
    const SigKnng sig = build_sig_knng(data, one, 4);
    const DirectedGraph plain = build_knng(data, 4);
    REQUIRE(sig.segment_count == 1);
    for (uint32_t v = 0; v < n; ++v) {
        REQUIRE(sig.nodes[v].chunks.size() == 1);
        CHECK(sig.nodes[v].chunks[0] == plain.at(v));
    }
}

TEST_CASE("eight objects in two quartets link once into each segment") {
    // segment 0: attrs below 10, segment 1: attrs at or above 10
    Dataset data(2);
    data.add(std::vector<float>{0.0f, 0.0f}, 1);   // 0
    data.add(std::vector<float>{1.0f, 0.0f}, 2);   // 1
    data.add(std::vector<float>{0.0f, 1.0f}, 3);   // 2
    data.add(std::vector<float>{5.0f, 5.0f}, 4);   // 3
    data.add(std::vector<float>{9.0f, 9.0f}, 11);  // 4
    data.add(std::vector<float>{10.0f, 9.0f}, 12); // 5
    data.add(std::vector<float>{9.0f, 10.0f}, 13); // 6
    data.add(std::vector<float>{2.0f, 2.0f}, 14);  // 7: spatially near segment 0
    const SegmentBoundaries bounds(std::vector<double>{10.0});
    const SigKnng sig = build_sig_knng(data, bounds, 1);

    for (uint32_t v = 0; v < 8; ++v) {
        REQUIRE(sig.nodes[v].chunks.size() == 2);
        CHECK(sig.nodes[v].chunks[0].size() == 1);
        CHECK(sig.nodes[v].chunks[1].size() == 1);
    }
    // the plain nearest-neighbor edges over all eight are a subset of the
    // segmented edges: each target sits in the chunk of its own segment
    const DirectedGraph union_nng = build_knng(data, 1);
    for (const auto& [v, targets] : union_nng) {
        for (uint32_t o : targets) {
            const uint32_t seg = bounds.segment_id(data.attribute(o));
            const auto& chunk = sig.nodes[v].chunks[seg];
            CHECK(std::find(chunk.begin(), chunk.end(), o) != chunk.end());
        }
    }
}

TEST_CASE("every chunk equals the per-segment oracle on a random instance") {
    const size_t n = 200;
    const uint32_t dim = 6;
    const auto vecs = naive::random_vectors(n, dim, 55);
    const auto attrs = naive::random_attrs(n, 0.0, 100.0, 56);
    const Dataset data = make_dataset(vecs, attrs, dim);
    const SegmentBoundaries bounds = build_boundaries(attrs, 4);
    const SigKnng sig = build_sig_knng(data, bounds, 3);

    std::vector<std::vector<uint32_t>> members(bounds.segment_count());
    for (uint32_t id = 0; id < n; ++id) members[bounds.segment_id(attrs[id])].push_back(id);

    for (uint32_t v = 0; v < n; ++v) {
        for (uint32_t s = 0; s < bounds.segment_count(); ++s) {
            const auto want = naive::knn_among(vecs.data(), dim, v, members[s], 3);
            CHECK(sig.nodes[v].chunks[s] == want);
        }
    }
}

TEST_CASE("single-segment combinations are contained by construction") {
    const Dataset data = random_attributed(120, 4, 57);
    const SegmentBoundaries bounds = build_boundaries(data.attributes(), 4);
    const SigKnng sig = build_sig_knng(data, bounds, 3);
    for (uint32_t s = 0; s < bounds.segment_count(); ++s) {
        const uint32_t combo[] = {s};
        CHECK(check_inclusivity(sig, data, bounds, combo) == 1.0);
    }
}

TEST_CASE("exact kNN graphs over every segment combination are contained") {
    const size_t n = 200;
    const Dataset data = random_attributed(n, 8, 58);
    const SegmentBoundaries bounds = build_boundaries(data.attributes(), 4);
    REQUIRE(bounds.segment_count() == 4);
    const SigKnng sig = build_sig_knng(data, bounds, 3);
    int combos = 0;
    for (uint32_t mask = 1; mask < 16; ++mask) {
        std::vector<uint32_t> combo;
        for (uint32_t s = 0; s < 4; ++s) {
            if (mask & (1u << s)) combo.push_back(s);
        }
        CHECK(check_inclusivity(sig, data, bounds, combo) == 1.0);
        ++combos;
    }
    CHECK(combos == 15);
}

TEST_CASE("removing one edge breaks containment") {
    const Dataset data = random_attributed(80, 4, 59);
    const SegmentBoundaries bounds = build_boundaries(data.attributes(), 2);
    SigKnng sig = build_sig_knng(data, bounds, 2);
    // drop the first edge found anywhere
    for (auto& node : sig.nodes) {
        for (auto& chunk : node.chunks) {
            if (!chunk.empty()) {
                const uint32_t victim_seg = bounds.segment_id(data.attribute(chunk.front()));
                chunk.erase(chunk.begin());
                const uint32_t combo[] = {victim_seg};
                CHECK(check_inclusivity(sig, data, bounds, combo) < 1.0);
                return;
            }
        }
    }
    FAIL("graph had no edges");
}

TEST_CASE("nearest neighbors over a union come from the per-subset neighbor lists") {
    // for any disjoint subsets, each of the k nearest over the union is one
    // of the k nearest within its own subset
    std::mt19937_64 rng(60);
    const size_t n = 150;
    const uint32_t dim = 5;
    const auto vecs = naive::random_vectors(n, dim, 61);
    const uint32_t k = 4;
    int checks = 0;
    while (checks < 1000) {
        const uint32_t v = uint32_t(rng() % n);
        // deal every other id into one of up to three disjoint subsets (or none)
        std::vector<std::vector<uint32_t>> subsets(1 + rng() % 3);
        std::vector<uint32_t> unioned;
        for (uint32_t id = 0; id < n; ++id) {
            if (id == v) continue;
            const size_t pick = rng() % (subsets.size() + 1);
            if (pick < subsets.size()) {
                subsets[pick].push_back(id);
                unioned.push_back(id);
            }
        }
        if (unioned.empty()) continue;
        const auto over_union = naive::knn_among(vecs.data(), dim, v, unioned, k);
        std::set<uint32_t> allowed;
        for (const auto& sub : subsets) {
            for (uint32_t id : naive::knn_among(vecs.data(), dim, v, sub, k)) allowed.insert(id);
        }
        for (uint32_t id : over_union) CHECK(allowed.count(id) == 1);
        ++checks;
    }
}

TEST_CASE("the segmented graph spends exactly its edge budget") {
    const size_t n = 130;
    const uint32_t k = 5;
    const Dataset data = random_attributed(n, 4, 62);
    const SegmentBoundaries bounds = build_boundaries(data.attributes(), 3);
    const SigKnng sig = build_sig_knng(data, bounds, k);

    std::vector<size_t> seg_sizes(bounds.segment_count(), 0);
    for (uint32_t id = 0; id < n; ++id) ++seg_sizes[bounds.segment_id(data.attribute(id))];

    size_t want = 0;
    for (uint32_t v = 0; v < n; ++v) {
        const uint32_t vseg = bounds.segment_id(data.attribute(v));
        for (uint32_t s = 0; s < bounds.segment_count(); ++s) {
            const size_t pool = seg_sizes[s] - (s == vseg ? 1 : 0);
            want += std::min<size_t>(k, pool);
        }
    }
    CHECK(sig.edge_count() == want);
}

TEST_CASE("graph containment percentages count directed edges") {
    DirectedGraph reference;
    reference[0] = {1, 2};
    reference[1] = {0};
    reference[2] = {1};
    SUBCASE("a superset scores a full hundred") {
        DirectedGraph candidate = reference;
        candidate[0].push_back(3);
        candidate[3] = {0};
        CHECK(inclusiveness(candidate, reference) == 100.0);
    }
    SUBCASE("edge-disjoint graphs score zero") {
        DirectedGraph candidate;
        candidate[0] = {3};
        candidate[1] = {2};  // reverse of 2->1 must not count
        candidate[2] = {0};
        CHECK(inclusiveness(candidate, reference) == 0.0);
    }
    SUBCASE("half the edges present scores fifty") {
        DirectedGraph candidate;
        candidate[0] = {1};
        candidate[2] = {1};
        CHECK(inclusiveness(candidate, reference) == 50.0);
    }
}

TEST_SUITE_END();
