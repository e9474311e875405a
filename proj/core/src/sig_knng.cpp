#include "hsig/sig_knng.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>
#include <unordered_set>

#include "hsig/distance.hpp"

namespace hsig {

size_t SigKnng::edge_count() const {
    size_t total = 0;
    for (const auto& node : nodes) {
        for (const auto& chunk : node.chunks) total += chunk.size();
    }
    return total;
}

namespace {

// Exact kNN of `query_id` among `pool` (which must not contain query_id),
// ordered by (distance, id).
std::vector<uint32_t> exact_knn(const Dataset& data, uint32_t query_id,
                                std::span<const uint32_t> pool, uint32_t k) {
    const float* q = data.vec(query_id);
    std::vector<Scored> scored;
    scored.reserve(pool.size());
    for (uint32_t id : pool) {
        scored.push_back({distance_sq(q, data.vec(id), data.dim()), id});
    }
    const size_t keep = std::min<size_t>(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + keep, scored.end(), scored_less);
    std::vector<uint32_t> out;
    out.reserve(keep);
    for (size_t i = 0; i < keep; ++i) out.push_back(scored[i].id);
    return out;
}

}  // namespace

DirectedGraph build_knng(const Dataset& data, uint32_t k) {
    if (k == 0) throw std::invalid_argument("build_knng: k must be at least 1");
    if (k >= data.size()) {
        throw std::invalid_argument("build_knng: k must be smaller than the number of objects");
    }
    std::vector<uint32_t> all(data.size());
    for (uint32_t i = 0; i < data.size(); ++i) all[i] = i;

    DirectedGraph graph;
    graph.reserve(data.size());
    std::vector<uint32_t> pool;
    pool.reserve(data.size() - 1);
    for (uint32_t v = 0; v < data.size(); ++v) {
        pool.clear();
        for (uint32_t id : all) {
            if (id != v) pool.push_back(id);
        }
        graph.emplace(v, exact_knn(data, v, pool, k));
    }
    return graph;
}

DirectedGraph knng_over_members(const Dataset& data, std::span<const uint32_t> members,
                                uint32_t k) {
    if (k == 0) throw std::invalid_argument("knng_over_members: k must be at least 1");
    DirectedGraph graph;
    graph.reserve(members.size());
    std::vector<uint32_t> pool;
    pool.reserve(members.size());
    for (uint32_t v : members) {
        pool.clear();
        for (uint32_t id : members) {
            if (id != v) pool.push_back(id);
        }
        graph.emplace(v, exact_knn(data, v, pool, k));
    }
    return graph;
}

SigKnng build_sig_knng(const Dataset& data, const SegmentBoundaries& bounds, uint32_t k) {
    if (k == 0) throw std::invalid_argument("build_sig_knng: k must be at least 1");
    if (data.size() == 0) throw std::invalid_argument("build_sig_knng: dataset is empty");

    const uint32_t segments = bounds.segment_count();
    std::vector<std::vector<uint32_t>> members(segments);
    for (uint32_t id = 0; id < data.size(); ++id) {
        members[bounds.segment_id(data.attribute(id))].push_back(id);
    }

    bool warned = false;
    for (uint32_t s = 0; s < segments; ++s) {
        if (members[s].size() <= k && !warned) {
            std::fprintf(stderr,
                         "build_sig_knng: segment %u holds %zu objects (< k+1 = %u); "
                         "its chunks will be shorter than k\n",
                         s, members[s].size(), k + 1);
            warned = true;
        }
    }

    SigKnng g;
    g.k = k;
    g.segment_count = segments;
    g.nodes.resize(data.size());
    std::vector<uint32_t> pool;
    for (uint32_t v = 0; v < data.size(); ++v) {
        g.nodes[v].chunks.resize(segments);
        for (uint32_t s = 0; s < segments; ++s) {
            pool.clear();
            for (uint32_t id : members[s]) {
                if (id != v) pool.push_back(id);
            }
            g.nodes[v].chunks[s] = exact_knn(data, v, pool, k);
        }
    }
    return g;
}

double check_inclusivity(const SigKnng& sig, const Dataset& data, const SegmentBoundaries& bounds,
                         std::span<const uint32_t> segment_set) {
    if (segment_set.empty()) {
        throw std::invalid_argument("check_inclusivity: empty segment set");
    }
    std::vector<bool> selected(sig.segment_count, false);
    for (uint32_t s : segment_set) {
        if (s >= sig.segment_count) {
            throw std::invalid_argument("check_inclusivity: segment " + std::to_string(s) +
                                        " out of range");
        }
        selected[s] = true;
    }
    std::vector<uint32_t> members;
    for (uint32_t id = 0; id < data.size(); ++id) {
        if (selected[bounds.segment_id(data.attribute(id))]) members.push_back(id);
    }
    if (members.size() < 2) return 1.0;  // no edges to contain

    const DirectedGraph reference = knng_over_members(data, members, sig.k);

    size_t total = 0;
    size_t found = 0;
    for (const auto& [v, targets] : reference) {
        const SegmentedAdjacency& node = sig.nodes[v];
        for (uint32_t o : targets) {
            ++total;
            const uint32_t s = bounds.segment_id(data.attribute(o));
            const auto& chunk = node.chunks[s];
            if (std::find(chunk.begin(), chunk.end(), o) != chunk.end()) ++found;
        }
    }
    return total == 0 ? 1.0 : double(found) / double(total);
}

double inclusiveness(const DirectedGraph& candidate, const DirectedGraph& reference) {
    size_t total = 0;
    size_t found = 0;
    std::unordered_set<uint32_t> present;
    for (const auto& [v, targets] : reference) {
        total += targets.size();
        auto it = candidate.find(v);
        if (it == candidate.end()) continue;
        present.clear();
        present.insert(it->second.begin(), it->second.end());
        for (uint32_t o : targets) {
            if (present.count(o)) ++found;
        }
    }
    return total == 0 ? 100.0 : 100.0 * double(found) / double(total);
}

}  // namespace hsig
