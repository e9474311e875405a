#include "hsig/hnsw.hpp"

#include <algorithm>
#include <cmath>

#include "hsig/distance.hpp"
#include "search_detail.hpp"

namespace hsig {

double HnswParams::resolved_level_norm() const {
    if (level_norm > 0.0) return level_norm;
    return 1.0 / std::log(double(max_degree));
}

uint32_t level_from_uniform(double level_norm, double u) {
    if (!(u > 0.0) || u > 1.0) throw std::invalid_argument("level_from_uniform: u must be in (0, 1]");
    return uint32_t(std::floor(-std::log(u) * level_norm));
}

uint32_t draw_level(double level_norm, std::mt19937_64& rng) {
    // map 53 random bits into (0, 1]; u can never be 0, and u == 1 gives level 0
    const double u = double((rng() >> 11) + 1) * 0x1.0p-53;
    return level_from_uniform(level_norm, u);
}

namespace {

// adapter: enumerate a GraphLayer adjacency list, optionally edge-filtered
template <class Sink>
void for_each_edge(const GraphLayer& layer, uint32_t from, const EdgeFilter& filter, Sink&& sink) {
    auto it = layer.adj.find(from);
    if (it == layer.adj.end()) return;
    for (uint32_t to : it->second) {
        if (filter && !filter(from, to)) continue;
        sink(to);
    }
}

std::vector<Scored> search_layer_impl(const GraphLayer& layer, const Dataset& data,
                                      const float* query, uint32_t entry, size_t width,
                                      const EdgeFilter& filter, VisitedSet& visited,
                                      SearchStats* stats) {
    const uint32_t dim = data.dim();
    auto dist_to = [&](uint32_t id) {
        if (stats) ++stats->dist_evals;
        return distance_sq(query, data.vec(id), dim);
    };
    visited.reset(data.size());
    const Scored seed{dist_to(entry), entry};
    auto result = detail::best_first(
        std::span<const Scored>(&seed, 1), width, dist_to,
        [&](uint32_t from, auto&& sink) {
            if (stats) ++stats->hops;
            for_each_edge(layer, from, filter, sink);
        },
        [](uint32_t) { return true; }, visited);
    return std::move(result.found);
}

}  // namespace

std::vector<Scored> ann_search_layer(const GraphLayer& layer, const Dataset& data,
                                     const float* query, uint32_t entry, size_t width,
                                     const EdgeFilter& filter, VisitedSet* visited,
                                     SearchStats* stats) {
    if (!layer.contains(entry))
        throw std::invalid_argument("ann_search_layer: entry " + std::to_string(entry) +
                                    " absent from layer");
    if (width == 0) throw std::invalid_argument("ann_search_layer: width must be >= 1");
    VisitedSet& vis = visited ? *visited : thread_visited_scratch();
    return search_layer_impl(layer, data, query, entry, width, filter, vis, stats);
}

std::vector<uint32_t> prune(const Dataset& data, uint32_t v, std::span<const uint32_t> candidates,
                            size_t max_keep) {
    const uint32_t dim = data.dim();
    std::vector<Scored> scored;
    scored.reserve(candidates.size());
    for (uint32_t id : candidates) scored.push_back({distance_sq(data.vec(v), data.vec(id), dim), id});
    auto kept = detail::prune_scored(std::move(scored), v, max_keep, [&](uint32_t a, uint32_t b) {
        return distance_sq(data.vec(a), data.vec(b), dim);
    });
    std::vector<uint32_t> out;
    out.reserve(kept.size());
    for (const Scored& s : kept) out.push_back(s.id);
    return out;
}

uint32_t insert_layer(GraphLayer& layer, const Dataset& data, uint32_t v, uint32_t entry,
                      uint32_t max_degree, uint32_t ef_construction, uint32_t degree_cap) {
    if (degree_cap == 0) degree_cap = max_degree;
    if (layer.contains(v))
        throw std::invalid_argument("insert_layer: node " + std::to_string(v) + " already present");
    if (layer.adj.empty()) {
        layer.adj[v];  // first node of the layer: no edges yet
        return kInvalidId;
    }
    if (!layer.contains(entry))
        throw std::invalid_argument("insert_layer: entry " + std::to_string(entry) +
                                    " absent from layer");

    VisitedSet& visited = thread_visited_scratch();
    auto ann = search_layer_impl(layer, data, data.vec(v), entry, ef_construction, {}, visited, nullptr);
    const uint32_t dim = data.dim();
    auto pair_dist = [&](uint32_t a, uint32_t b) { return distance_sq(data.vec(a), data.vec(b), dim); };
    auto sel = detail::prune_scored(ann, v, max_degree, pair_dist);

    auto& vlist = layer.adj[v];
    vlist.reserve(sel.size());
    for (const Scored& s : sel) vlist.push_back(s.id);

    for (const Scored& s : sel) {
        auto& olist = layer.adj[s.id];
        olist.push_back(v);
        if (olist.size() > degree_cap) {
            std::vector<Scored> cand;
            cand.reserve(olist.size());
            for (uint32_t id : olist) cand.push_back({pair_dist(s.id, id), id});
            auto kept = detail::prune_scored(std::move(cand), s.id, degree_cap, pair_dist);
            olist.clear();
            for (const Scored& e : kept) olist.push_back(e.id);
        }
    }
    return ann.empty() ? entry : ann.front().id;
}

HnswIndex::HnswIndex(const Dataset& data, HnswParams params)
    : data_(&data), params_(params), level_norm_(params.resolved_level_norm()), rng_(params.seed) {
    if (params.max_degree == 0) throw std::invalid_argument("HnswIndex: max_degree must be >= 1");
    if (params.ef_construction == 0)
        throw std::invalid_argument("HnswIndex: ef_construction must be >= 1");
}

void HnswIndex::insert(uint32_t id) { insert(id, draw_level(level_norm_, rng_)); }

void HnswIndex::insert(uint32_t id, uint32_t level) {
    if (id >= data_->size())
        throw std::invalid_argument("HnswIndex::insert: id " + std::to_string(id) + " out of range");
    if (levels_.count(id))
        throw std::invalid_argument("HnswIndex::insert: id " + std::to_string(id) + " already present");

    if (layers_.size() < size_t(level) + 1) layers_.resize(size_t(level) + 1);
    levels_[id] = level;

    if (entry_ == kInvalidId) {
        for (uint32_t l = 0; l <= level; ++l) layers_[l].adj[id];
        entry_ = id;
        max_level_ = int(level);
        return;
    }

    uint32_t ep = entry_;
    VisitedSet& visited = thread_visited_scratch();
    for (int l = max_level_; l > int(level); --l) {
        auto best = search_layer_impl(layers_[l], *data_, data_->vec(id), ep, 1, {}, visited, nullptr);
        if (!best.empty()) ep = best.front().id;
    }
    for (int l = std::min(int(level), max_level_); l >= 0; --l) {
        const uint32_t cap = (l == 0) ? 2 * params_.max_degree : params_.max_degree;
        uint32_t nearest = insert_layer(layers_[l], *data_, id, ep, params_.max_degree,
                                        params_.ef_construction, cap);
        if (nearest != kInvalidId) ep = nearest;
    }
    if (int(level) > max_level_) {
        // the new node tops out above the old entry: it becomes the entry
        for (int l = max_level_ + 1; l <= int(level); ++l) layers_[l].adj[id];
        entry_ = id;
        max_level_ = int(level);
    }
}

uint32_t HnswIndex::level_of(uint32_t id) const {
    auto it = levels_.find(id);
    if (it == levels_.end())
        throw std::invalid_argument("HnswIndex::level_of: id " + std::to_string(id) + " not present");
    return it->second;
}

ResultSet HnswIndex::search(std::span<const float> query, uint32_t k, uint32_t ef,
                            VisitedSet* visited, SearchStats* stats) const {
    if (query.size() != data_->dim())
        throw std::invalid_argument("HnswIndex::search: query dimension mismatch");
    if (k == 0 || ef < k) throw std::invalid_argument("HnswIndex::search: require ef >= k >= 1");
    ResultSet rs;
    if (entry_ == kInvalidId) return rs;

    VisitedSet& vis = visited ? *visited : thread_visited_scratch();
    uint32_t ep = entry_;
    for (int l = max_level_; l >= 1; --l) {
        auto best = search_layer_impl(layers_[l], *data_, query.data(), ep, 1, {}, vis, stats);
        if (!best.empty()) ep = best.front().id;
    }
    auto found = search_layer_impl(layers_[0], *data_, query.data(), ep, ef, {}, vis, stats);
    const size_t take = std::min<size_t>(k, found.size());
    rs.hits.reserve(take);
    for (size_t i = 0; i < take; ++i) rs.hits.push_back({found[i].id, std::sqrt(found[i].dist_sq)});
    return rs;
}

}  // namespace hsig
