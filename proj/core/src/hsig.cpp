#include "hsig/hsig.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iterator>
#include <queue>
#include <stdexcept>
#include <unordered_set>

#include "hsig/distance.hpp"
#include "hsig/hnsw.hpp"
#include "search_detail.hpp"

namespace hsig {

// --- SlotBitmap -----------------------------------------------------------

size_t SlotBitmap::count() const {
    size_t c = 0;
    for (uint8_t b : bytes_) c += size_t(std::popcount(b));
    return c;
}

void SlotBitmap::insert_zero_bit(size_t pos) {
    if (pos > bits_) throw std::out_of_range("SlotBitmap::insert_zero_bit: position past end");
    bytes_.resize((bits_ + 1 + 7) / 8, 0);
    for (size_t i = bits_; i > pos; --i) set_to(i, test(i - 1));
    ++bits_;
    clear(pos);
}

void SlotBitmap::erase_bit(size_t pos) {
    if (pos >= bits_) throw std::out_of_range("SlotBitmap::erase_bit: position past end");
    for (size_t i = pos; i + 1 < bits_; ++i) set_to(i, test(i + 1));
    clear(bits_ - 1);
    --bits_;
    bytes_.resize((bits_ + 7) / 8);
}

void SlotBitmap::from_bytes(std::span<const uint8_t> bytes, size_t bits) {
    if (bytes.size() != (bits + 7) / 8) {
        throw std::invalid_argument("SlotBitmap::from_bytes: byte count does not match bit count");
    }
    bytes_.assign(bytes.begin(), bytes.end());
    bits_ = bits;
}

// --- params / layer helpers ------------------------------------------------

double HsigParams::resolved_level_norm() const {
    if (level_norm > 0.0) return level_norm;
    return 1.0 / std::log(double(max_degree));
}

HsigIndex::Node* HsigIndex::Layer::find(uint32_t id) {
    if (is_base) return id < base.size() ? &base[id] : nullptr;
    auto it = upper.find(id);
    return it == upper.end() ? nullptr : &it->second;
}

const HsigIndex::Node* HsigIndex::Layer::find(uint32_t id) const {
    if (is_base) return id < base.size() ? &base[id] : nullptr;
    auto it = upper.find(id);
    return it == upper.end() ? nullptr : &it->second;
}

HsigIndex::Node* HsigIndex::node_at(uint32_t layer, uint32_t id) {
    return layer < layers_.size() ? layers_[layer].find(id) : nullptr;
}

const HsigIndex::Node* HsigIndex::node_at(uint32_t layer, uint32_t id) const {
    return layer < layers_.size() ? layers_[layer].find(id) : nullptr;
}

double HsigIndex::dist_sq_between(uint32_t a, uint32_t b) const {
    return distance_sq(data_.vec(a), data_.vec(b), data_.dim());
}

size_t HsigIndex::total_slots(const Node& node) const {
    size_t slots = 0;
    for (const auto& chunk : node.chunks) slots += chunk.size();
    return slots;
}

// --- construction -----------------------------------------------------------

HsigIndex::HsigIndex(uint32_t dim, SegmentBoundaries bounds, HsigParams params)
    : data_(dim), bounds_(std::move(bounds)), params_(params), rng_(params.seed) {
    if (params_.max_degree < 2) {
        throw std::invalid_argument("HsigIndex: max_degree must be at least 2");
    }
    if (params_.ef_construction < 1) {
        throw std::invalid_argument("HsigIndex: ef_construction must be at least 1");
    }
    // the boundaries are authoritative for the segment count
    params_.segments = bounds_.segment_count();
    level_norm_ = params_.resolved_level_norm();
    segments_.resize(bounds_.segment_count());
}

void HsigIndex::insert(const AttributedVector& v) {
    if (v.id != data_.size()) {
        throw std::invalid_argument("HsigIndex::insert: ids must be appended in order (expected " +
                                    std::to_string(data_.size()) + ", got " + std::to_string(v.id) +
                                    ")");
    }
    if (data_.size() + 1 >= size_t(kInvalidId)) {
        throw std::length_error("HsigIndex::insert: id space exhausted");
    }
    data_.add(v);

    const uint32_t id = v.id;
    const double attr = v.attribute;
    const uint32_t seg = bounds_.segment_id(attr);
    const uint32_t segment_count = bounds_.segment_count();
    node_segment_.push_back(seg);
    const uint32_t level = draw_level(level_norm_, rng_);
    levels_.push_back(level);

    while (layers_.size() < size_t(level) + 1) {
        Layer layer;
        layer.is_base = layers_.empty();
        layers_.push_back(std::move(layer));
    }
    for (uint32_t l = 0; l <= level; ++l) {
        Node shell;
        shell.chunks.resize(segment_count);
        if (layers_[l].is_base) {
            layers_[l].base.push_back(std::move(shell));
        } else {
            layers_[l].upper.emplace(id, std::move(shell));
        }
    }

    // connect into every populated segment's chunk subgraph
    const float* q = data_.vec(id);
    VisitedSet& visited = thread_visited_scratch();
    auto pair_dist = [this](uint32_t a, uint32_t b) { return dist_sq_between(a, b); };
    for (uint32_t j = 0; j < segment_count; ++j) {
        const SegmentState& st = segments_[j];
        if (st.count == 0) continue;
        Scored ep{distance_sq(q, data_.vec(st.entry), data_.dim()), st.entry};
        for (int l = st.max_level; l > int(level); --l) {
            auto step = chunk_beam(uint32_t(l), j, q, ep, 1, visited);
            if (!step.empty()) ep = step.front();
        }
        for (int l = std::min(int(level), st.max_level); l >= 0; --l) {
            auto ann = chunk_beam(uint32_t(l), j, q, ep, params_.ef_construction, visited);
            auto sel = detail::prune_scored(ann, id, params_.max_degree, pair_dist);
            node_at(uint32_t(l), id)->chunks[j] = sel;
            for (const Scored& s : sel) {
                add_reverse_edge(uint32_t(l), s.id, Scored{s.dist_sq, id}, seg);
            }
            if (!ann.empty()) ep = ann.front();
        }
    }

    SegmentState& mine = segments_[seg];
    mine.count += 1;
    if (mine.entry == kInvalidId || int(level) > mine.max_level) {
        mine.entry = id;
        mine.max_level = int(level);
    }
    if (global_entry_ == kInvalidId || int(level) > global_max_level_) {
        global_entry_ = id;
        global_max_level_ = int(level);
    }

    splice_chains(id, attr, level);

    attr_order_tail_.insert(std::upper_bound(attr_order_tail_.begin(), attr_order_tail_.end(),
                                             std::make_pair(attr, id)),
                            {attr, id});
    if (attr_order_tail_.size() >= kAttrOrderTailCap) {
        const auto mid = attr_order_.insert(attr_order_.end(), attr_order_tail_.begin(),
                                            attr_order_tail_.end());
        std::inplace_merge(attr_order_.begin(), mid, attr_order_.end());
        attr_order_tail_.clear();
    }

    for (uint32_t l = 0; l <= level; ++l) apply_edge_masking(l, id);
}

void HsigIndex::add_reverse_edge(uint32_t layer, uint32_t owner, Scored arrival,
                                 uint32_t arrival_seg) {
    Node* node = node_at(layer, owner);
    auto& chunk = node->chunks[arrival_seg];
    const auto pos = std::lower_bound(chunk.begin(), chunk.end(), arrival, scored_less);
    const size_t pos_idx = size_t(pos - chunk.begin());
    chunk.insert(pos, arrival);

    const uint32_t cap = (layer == 0) ? 2 * params_.max_degree : params_.max_degree;
    if (chunk.size() > cap) {
        auto kept = detail::prune_scored(
            chunk, owner, cap, [this](uint32_t a, uint32_t b) { return dist_sq_between(a, b); });
        chunk = std::move(kept);
        rebuild_mask(layer, owner);
    } else {
        size_t slot = pos_idx;
        for (uint32_t s = 0; s < arrival_seg; ++s) slot += node->chunks[s].size();
        node->mask.insert_zero_bit(slot);
    }
}

void HsigIndex::set_mask_from_ids(Node& node, std::span<const uint32_t> selected) {
    node.mask.assign(total_slots(node));
    size_t slot = 0;
    for (const auto& chunk : node.chunks) {
        for (const Scored& e : chunk) {
            if (std::find(selected.begin(), selected.end(), e.id) != selected.end()) {
                node.mask.set(slot);
            }
            ++slot;
        }
    }
}

void HsigIndex::rebuild_mask(uint32_t layer, uint32_t id) {
    Node* node = node_at(layer, id);
    std::vector<Scored> cand;
    cand.reserve(total_slots(*node));
    for (const auto& chunk : node->chunks) cand.insert(cand.end(), chunk.begin(), chunk.end());
    auto sel = detail::prune_scored(std::move(cand), id, params_.max_degree,
                                    [this](uint32_t a, uint32_t b) { return dist_sq_between(a, b); });
    std::vector<uint32_t> ids(sel.size());
    for (size_t i = 0; i < sel.size(); ++i) ids[i] = sel[i].id;
    set_mask_from_ids(*node, ids);
}

void HsigIndex::apply_edge_masking(uint32_t layer, uint32_t v) {
    Node* node = node_at(layer, v);
    std::vector<Scored> cand;
    cand.reserve(total_slots(*node));
    for (const auto& chunk : node->chunks) cand.insert(cand.end(), chunk.begin(), chunk.end());
    auto sel = detail::prune_scored(std::move(cand), v, params_.max_degree,
                                    [this](uint32_t a, uint32_t b) { return dist_sq_between(a, b); });
    std::vector<uint32_t> ids(sel.size());
    for (size_t i = 0; i < sel.size(); ++i) ids[i] = sel[i].id;
    set_mask_from_ids(*node, ids);

    // mark the paired slot on each selected neighbor whose chunk kept v
    const uint32_t vseg = node_segment_[v];
    for (const Scored& s : sel) {
        Node* other = node_at(layer, s.id);
        const auto& chunk = other->chunks[vseg];
        size_t idx = chunk.size();
        for (size_t i = 0; i < chunk.size(); ++i) {
            if (chunk[i].id == v) {
                idx = i;
                break;
            }
        }
        if (idx == chunk.size()) continue;  // reverse edge was pruned away
        size_t slot = idx;
        for (uint32_t t = 0; t < vseg; ++t) slot += other->chunks[t].size();
        if (!other->mask.test(slot)) {
            other->mask.set(slot);
            if (other->mask.count() > params_.max_degree) rebuild_mask(layer, s.id);
        }
    }
}

void HsigIndex::splice_chains(uint32_t id, double attr, uint32_t level) {
    uint32_t cur = kInvalidId;  // "before the head"
    for (int l = int(layers_.size()) - 1; l >= 0; --l) {
        uint32_t nxt = (cur == kInvalidId) ? layers_[l].head : node_at(uint32_t(l), cur)->next;
        while (nxt != kInvalidId) {
            const double a = data_.attribute(nxt);
            if (a < attr || (a == attr && nxt < id)) {
                cur = nxt;
                nxt = node_at(uint32_t(l), cur)->next;
            } else {
                break;
            }
        }
        if (l <= int(level)) {
            node_at(uint32_t(l), id)->next = nxt;
            if (cur == kInvalidId) {
                layers_[l].head = id;
            } else {
                node_at(uint32_t(l), cur)->next = id;
            }
        }
    }
}

// --- traversal primitives ----------------------------------------------------

std::vector<Scored> HsigIndex::chunk_beam(uint32_t layer, uint32_t seg, const float* query,
                                          Scored entry, size_t width, VisitedSet& visited,
                                          SearchStats* stats) const {
    visited.reset(data_.size());
    auto dist_to = [&](uint32_t id) {
        if (stats) ++stats->dist_evals;
        return distance_sq(query, data_.vec(id), data_.dim());
    };
    auto result = detail::best_first(
        std::span<const Scored>(&entry, 1), width, dist_to,
        [&](uint32_t from, auto&& sink) {
            if (stats) ++stats->hops;
            const Node* n = node_at(layer, from);
            if (!n) return;
            for (const Scored& e : n->chunks[seg]) sink(e.id);
        },
        [](uint32_t) { return true; }, visited);
    return std::move(result.found);
}

std::vector<Scored> HsigIndex::masked_beam(uint32_t layer, const float* query, Scored entry,
                                           size_t width, VisitedSet& visited,
                                           SearchStats* stats) const {
    visited.reset(data_.size());
    auto dist_to = [&](uint32_t id) {
        if (stats) ++stats->dist_evals;
        return distance_sq(query, data_.vec(id), data_.dim());
    };
    auto result = detail::best_first(
        std::span<const Scored>(&entry, 1), width, dist_to,
        [&](uint32_t from, auto&& sink) {
            if (stats) ++stats->hops;
            const Node* n = node_at(layer, from);
            if (!n) return;
            size_t slot = 0;
            for (const auto& chunk : n->chunks) {
                for (const Scored& e : chunk) {
                    if (n->mask.test(slot)) sink(e.id);
                    ++slot;
                }
            }
        },
        [](uint32_t) { return true; }, visited);
    return std::move(result.found);
}

// --- search strategies --------------------------------------------------------

ResultSet HsigIndex::search_pre(const RangeQuery& q) const {
    if (q.vec.size() != data_.dim()) {
        throw std::invalid_argument("search_pre: query dimension mismatch");
    }
    ResultSet out;
    if (layers_.empty()) return out;

    // descend the chains to the last node with (attribute, id) below the range
    uint32_t cur = kInvalidId;
    for (int l = int(layers_.size()) - 1; l >= 0; --l) {
        uint32_t nxt = (cur == kInvalidId) ? layers_[l].head : node_at(uint32_t(l), cur)->next;
        while (nxt != kInvalidId && data_.attribute(nxt) < q.lo) {
            cur = nxt;
            nxt = node_at(uint32_t(l), cur)->next;
        }
    }

    const float* qv = q.vec.data();
    std::priority_queue<Scored, std::vector<Scored>, detail::MaxOrder> best;
    uint32_t walker = (cur == kInvalidId) ? layers_[0].head : node_at(0, cur)->next;
    while (walker != kInvalidId) {
        const double a = data_.attribute(walker);
        if (a > q.hi) break;
        const Scored s{distance_sq(qv, data_.vec(walker), data_.dim()), walker};
        if (best.size() < q.k) {
            best.push(s);
        } else if (scored_less(s, best.top())) {
            best.pop();
            best.push(s);
        }
        walker = node_at(0, walker)->next;
    }

    out.hits.resize(best.size());
    for (size_t i = out.hits.size(); i-- > 0;) {
        out.hits[i] = SearchHit{best.top().id, std::sqrt(best.top().dist_sq)};
        best.pop();
    }
    return out;
}

ResultSet HsigIndex::search_post(const RangeQuery& q, uint32_t ef, VisitedSet* visited,
                                 SearchStats* stats) const {
    if (q.vec.size() != data_.dim()) {
        throw std::invalid_argument("search_post: query dimension mismatch");
    }
    if (ef < q.k) throw std::invalid_argument("search_post: ef must be at least k");
    ResultSet out;
    if (global_entry_ == kInvalidId) return out;

    VisitedSet& vis = visited ? *visited : thread_visited_scratch();
    const float* qv = q.vec.data();
    if (stats) ++stats->dist_evals;
    Scored ep{distance_sq(qv, data_.vec(global_entry_), data_.dim()), global_entry_};
    for (int l = global_max_level_; l >= 1; --l) {
        auto step = masked_beam(uint32_t(l), qv, ep, 1, vis, stats);
        if (!step.empty()) ep = step.front();
    }
    auto found = masked_beam(0, qv, ep, ef, vis, stats);
    for (const Scored& s : found) {
        if (out.hits.size() >= q.k) break;
        const double a = data_.attribute(s.id);
        if (a >= q.lo && a <= q.hi) out.hits.push_back(SearchHit{s.id, std::sqrt(s.dist_sq)});
    }
    return out;
}

ResultSet HsigIndex::search_hybrid(const RangeQuery& q, const SearchParams& params,
                                   VisitedSet* visited, SearchStats* stats) const {
    if (q.vec.size() != data_.dim()) {
        throw std::invalid_argument("search_hybrid: query dimension mismatch");
    }
    if (params.ef < q.k) throw std::invalid_argument("search_hybrid: ef must be at least k");
    if (params.m == 0) throw std::invalid_argument("search_hybrid: m must be at least 1");
    ResultSet out;
    if (data_.size() == 0) return out;

    const auto [seg_lo, seg_hi] = bounds_.intersecting_segments(q.lo, q.hi);
    const float* qv = q.vec.data();

    // start from the tallest populated intersected segment; distance breaks ties
    uint32_t start = kInvalidId;
    int start_level = -1;
    double start_dist = 0.0;
    for (uint32_t s = seg_lo; s <= seg_hi; ++s) {
        const SegmentState& st = segments_[s];
        if (st.count == 0) continue;
        if (stats) ++stats->dist_evals;
        const double d = distance_sq(qv, data_.vec(st.entry), data_.dim());
        const bool better =
            st.max_level > start_level ||
            (st.max_level == start_level &&
             (d < start_dist || (d == start_dist && st.entry < start)));
        if (start == kInvalidId || better) {
            start = st.entry;
            start_level = st.max_level;
            start_dist = d;
        }
    }
    if (start == kInvalidId) return out;

    VisitedSet& vis = visited ? *visited : thread_visited_scratch();
    Scored ep{start_dist, start};
    for (int l = start_level; l >= 1; --l) {
        Scored nearest{0.0, kInvalidId};
        auto found = hybrid_filtering_layer(uint32_t(l), qv, q.lo, q.hi,
                                            std::span<const Scored>(&ep, 1), 1, params, vis, stats,
                                            &nearest);
        if (!found.empty()) {
            ep = found.front();
        } else if (nearest.id != kInvalidId) {
            ep = nearest;
        }
    }
    auto found = hybrid_filtering_layer(0, qv, q.lo, q.hi, std::span<const Scored>(&ep, 1),
                                        params.ef, params, vis, stats, nullptr);
    const size_t keep = std::min<size_t>(q.k, found.size());
    out.hits.reserve(keep);
    for (size_t i = 0; i < keep; ++i) {
        out.hits.push_back(SearchHit{found[i].id, std::sqrt(found[i].dist_sq)});
    }
    return out;
}

std::vector<Scored> HsigIndex::hybrid_filtering_layer(uint32_t layer, const float* query,
                                                      double lo, double hi,
                                                      std::span<const Scored> entries, size_t width,
                                                      const SearchParams& params,
                                                      VisitedSet& visited, SearchStats* stats,
                                                      Scored* nearest_seen) const {
    if (layer >= layers_.size()) {
        throw std::invalid_argument("hybrid_filtering_layer: no such layer");
    }
    if (params.m == 0) throw std::invalid_argument("hybrid_filtering_layer: m must be at least 1");
    const auto [seg_lo, seg_hi] = bounds_.intersecting_segments(lo, hi);
    const uint32_t span_count = seg_hi - seg_lo + 1;
    const size_t per_chunk = (params.m + span_count - 1) / span_count;

    visited.reset(data_.size());
    auto dist_to = [&](uint32_t id) {
        if (stats) ++stats->dist_evals;
        return distance_sq(query, data_.vec(id), data_.dim());
    };
    std::vector<Scored> ranked;
    auto result = detail::best_first(
        entries, width, dist_to,
        [&](uint32_t from, auto&& sink) {
            if (stats) ++stats->hops;
            const Node* n = node_at(layer, from);
            if (!n) return;
            if (params.selection == NeighborSelection::kPerChunkPrefix) {
                for (uint32_t s = seg_lo; s <= seg_hi; ++s) {
                    const auto& chunk = n->chunks[s];
                    const size_t take = std::min(per_chunk, chunk.size());
                    for (size_t i = 0; i < take; ++i) sink(chunk[i].id);
                }
            } else {
                ranked.clear();
                for (uint32_t s = seg_lo; s <= seg_hi; ++s) {
                    for (const Scored& e : n->chunks[s]) {
                        if (stats) ++stats->dist_evals;
                        ranked.push_back(Scored{dist_sq_between(from, e.id), e.id});
                    }
                }
                const size_t take = std::min<size_t>(params.m, ranked.size());
                std::partial_sort(ranked.begin(), ranked.begin() + ptrdiff_t(take), ranked.end(),
                                  scored_less);
                for (size_t i = 0; i < take; ++i) sink(ranked[i].id);
            }
        },
        [&](uint32_t id) {
            const double a = data_.attribute(id);
            return a >= lo && a <= hi;
        },
        visited);
    if (nearest_seen && result.has_nearest) *nearest_seen = result.nearest;
    return std::move(result.found);
}

// --- observers ----------------------------------------------------------------

uint32_t HsigIndex::level_of(uint32_t id) const {
    if (id >= levels_.size()) throw std::out_of_range("level_of: no such id");
    return levels_[id];
}

uint32_t HsigIndex::segment_of(uint32_t id) const {
    if (id >= node_segment_.size()) throw std::out_of_range("segment_of: no such id");
    return node_segment_[id];
}

uint32_t HsigIndex::segment_entry(uint32_t seg) const {
    if (seg >= segments_.size()) throw std::out_of_range("segment_entry: no such segment");
    return segments_[seg].entry;
}

int HsigIndex::segment_max_level(uint32_t seg) const {
    if (seg >= segments_.size()) throw std::out_of_range("segment_max_level: no such segment");
    return segments_[seg].max_level;
}

uint64_t HsigIndex::segment_size(uint32_t seg) const {
    if (seg >= segments_.size()) throw std::out_of_range("segment_size: no such segment");
    return segments_[seg].count;
}

uint32_t HsigIndex::head_of(uint32_t layer) const {
    if (layer >= layers_.size()) throw std::out_of_range("head_of: no such layer");
    return layers_[layer].head;
}

uint32_t HsigIndex::next_of(uint32_t layer, uint32_t id) const {
    const Node* n = node_at(layer, id);
    if (!n) throw std::out_of_range("next_of: node absent from layer");
    return n->next;
}

std::vector<uint32_t> HsigIndex::chunk_ids(uint32_t layer, uint32_t id, uint32_t seg) const {
    const Node* n = node_at(layer, id);
    if (!n) throw std::out_of_range("chunk_ids: node absent from layer");
    if (seg >= n->chunks.size()) throw std::out_of_range("chunk_ids: no such segment");
    std::vector<uint32_t> out;
    out.reserve(n->chunks[seg].size());
    for (const Scored& e : n->chunks[seg]) out.push_back(e.id);
    return out;
}

std::vector<uint32_t> HsigIndex::masked_neighbors(uint32_t layer, uint32_t id) const {
    const Node* n = node_at(layer, id);
    if (!n) throw std::out_of_range("masked_neighbors: node absent from layer");
    std::vector<uint32_t> out;
    size_t slot = 0;
    for (const auto& chunk : n->chunks) {
        for (const Scored& e : chunk) {
            if (n->mask.test(slot)) out.push_back(e.id);
            ++slot;
        }
    }
    return out;
}

size_t HsigIndex::range_cardinality(double lo, double hi) const {
    if (std::isnan(lo) || std::isnan(hi)) {
        throw std::invalid_argument("range_cardinality: bounds must not be NaN");
    }
    if (lo > hi) return 0;
    auto count_in = [&](const std::vector<std::pair<double, uint32_t>>& sorted) {
        const auto first =
            std::lower_bound(sorted.begin(), sorted.end(), std::make_pair(lo, uint32_t(0)));
        const auto last =
            std::upper_bound(sorted.begin(), sorted.end(), std::make_pair(hi, kInvalidId));
        return size_t(last - first);
    };
    return count_in(attr_order_) + count_in(attr_order_tail_);
}

std::vector<std::pair<double, uint32_t>> HsigIndex::attribute_order() const {
    std::vector<std::pair<double, uint32_t>> merged;
    merged.reserve(attr_order_.size() + attr_order_tail_.size());
    std::merge(attr_order_.begin(), attr_order_.end(), attr_order_tail_.begin(),
               attr_order_tail_.end(), std::back_inserter(merged));
    return merged;
}

DirectedGraph HsigIndex::chunk_union_graph(uint32_t layer, uint32_t seg_lo, uint32_t seg_hi) const {
    if (layer >= layers_.size()) throw std::out_of_range("chunk_union_graph: no such layer");
    if (seg_lo > seg_hi || seg_hi >= bounds_.segment_count()) {
        throw std::invalid_argument("chunk_union_graph: bad segment range");
    }
    DirectedGraph graph;
    auto collect = [&](uint32_t id, const Node& node) {
        if (node_segment_[id] < seg_lo || node_segment_[id] > seg_hi) return;
        std::vector<uint32_t>& edges = graph[id];
        for (uint32_t s = seg_lo; s <= seg_hi; ++s) {
            for (const Scored& e : node.chunks[s]) edges.push_back(e.id);
        }
    };
    const Layer& l = layers_[layer];
    if (l.is_base) {
        for (uint32_t id = 0; id < l.base.size(); ++id) collect(id, l.base[id]);
    } else {
        for (const auto& [id, node] : l.upper) collect(id, node);
    }
    return graph;
}

// --- structural validation -----------------------------------------------------

std::vector<std::string> HsigIndex::validate_structure() const {
    std::vector<std::string> bad;
    auto complain = [&](std::string msg) { bad.push_back(std::move(msg)); };

    const size_t n = data_.size();
    const uint32_t segment_count = bounds_.segment_count();
    if (levels_.size() != n) complain("levels table size mismatch");
    if (node_segment_.size() != n) complain("segment table size mismatch");
    if (attr_order_.size() + attr_order_tail_.size() != n) {
        complain("attribute order size mismatch");
    }
    if (!bad.empty()) return bad;

    if (n == 0) {
        if (!layers_.empty()) complain("layers exist with no data");
        return bad;
    }
    if (layers_.empty() || !layers_[0].is_base) {
        complain("bottom layer missing or not dense");
        return bad;
    }

    uint32_t top = 0;
    for (uint32_t l : levels_) top = std::max(top, l);
    if (layers_.size() != size_t(top) + 1) complain("layer count does not match max level");

    // per-node, per-layer structure
    for (uint32_t layer = 0; layer < layers_.size(); ++layer) {
        const uint32_t list_cap = (layer == 0) ? 2 * params_.max_degree : params_.max_degree;
        size_t member_count = 0;
        for (uint32_t id = 0; id < n; ++id) {
            const Node* node = node_at(layer, id);
            const bool should_exist = levels_[id] >= layer;
            if (should_exist != (node != nullptr)) {
                complain("layer " + std::to_string(layer) + " node " + std::to_string(id) +
                         ": presence does not match its level");
                continue;
            }
            if (!node) continue;
            ++member_count;
            if (node->chunks.size() != segment_count) {
                complain("layer " + std::to_string(layer) + " node " + std::to_string(id) +
                         ": wrong chunk count");
                continue;
            }
            std::unordered_set<uint32_t> seen;
            for (uint32_t s = 0; s < segment_count; ++s) {
                const auto& chunk = node->chunks[s];
                if (chunk.size() > list_cap) {
                    complain("layer " + std::to_string(layer) + " node " + std::to_string(id) +
                             " chunk " + std::to_string(s) + ": over the degree cap");
                }
                for (size_t i = 0; i < chunk.size(); ++i) {
                    const Scored& e = chunk[i];
                    if (e.id >= n || e.id == id) {
                        complain("layer " + std::to_string(layer) + " node " + std::to_string(id) +
                                 " chunk " + std::to_string(s) + ": bad edge target");
                        continue;
                    }
                    if (!seen.insert(e.id).second) {
                        complain("layer " + std::to_string(layer) + " node " + std::to_string(id) +
                                 ": duplicate edge to " + std::to_string(e.id));
                    }
                    if (node_segment_[e.id] != s) {
                        complain("layer " + std::to_string(layer) + " node " + std::to_string(id) +
                                 " chunk " + std::to_string(s) + ": edge to " +
                                 std::to_string(e.id) + " from another segment");
                    }
                    if (levels_[e.id] < layer) {
                        complain("layer " + std::to_string(layer) + " node " + std::to_string(id) +
                                 ": edge to " + std::to_string(e.id) + " absent from this layer");
                    }
                    if (e.dist_sq != dist_sq_between(id, e.id)) {
                        complain("layer " + std::to_string(layer) + " node " + std::to_string(id) +
                                 ": stored distance to " + std::to_string(e.id) + " is stale");
                    }
                    if (i > 0 && !scored_less(chunk[i - 1], e)) {
                        complain("layer " + std::to_string(layer) + " node " + std::to_string(id) +
                                 " chunk " + std::to_string(s) + ": not in (distance, id) order");
                    }
                }
            }
            if (node->mask.size() != total_slots(*node)) {
                complain("layer " + std::to_string(layer) + " node " + std::to_string(id) +
                         ": mask length does not match its slots");
            } else if (node->mask.count() > params_.max_degree) {
                complain("layer " + std::to_string(layer) + " node " + std::to_string(id) +
                         ": mask selects more than max_degree edges");
            }
        }

        // the attribute chain must enumerate exactly this layer's members in order
        size_t chained = 0;
        uint32_t prev = kInvalidId;
        uint32_t cur = layers_[layer].head;
        std::unordered_set<uint32_t> on_chain;
        while (cur != kInvalidId) {
            if (cur >= n || levels_[cur] < layer) {
                complain("layer " + std::to_string(layer) + ": chain visits absent node " +
                         std::to_string(cur));
                break;
            }
            if (!on_chain.insert(cur).second) {
                complain("layer " + std::to_string(layer) + ": chain loops at " +
                         std::to_string(cur));
                break;
            }
            if (prev != kInvalidId) {
                const double pa = data_.attribute(prev);
                const double ca = data_.attribute(cur);
                if (pa > ca || (pa == ca && prev >= cur)) {
                    complain("layer " + std::to_string(layer) + ": chain out of order at " +
                             std::to_string(cur));
                }
            }
            ++chained;
            prev = cur;
            cur = node_at(layer, cur)->next;
        }
        if (chained != member_count) {
            complain("layer " + std::to_string(layer) + ": chain covers " + std::to_string(chained) +
                     " of " + std::to_string(member_count) + " nodes");
        }
    }

    // segment bookkeeping and entry derivations
    std::vector<uint64_t> counts(segment_count, 0);
    std::vector<int> seg_top(segment_count, -1);
    for (uint32_t id = 0; id < n; ++id) {
        counts[node_segment_[id]] += 1;
        seg_top[node_segment_[id]] = std::max(seg_top[node_segment_[id]], int(levels_[id]));
    }
    for (uint32_t s = 0; s < segment_count; ++s) {
        const SegmentState& st = segments_[s];
        if (st.count != counts[s]) {
            complain("segment " + std::to_string(s) + ": population counter is off");
            continue;
        }
        if (st.count == 0) {
            if (st.entry != kInvalidId || st.max_level != -1) {
                complain("segment " + std::to_string(s) + ": empty segment has an entry");
            }
            continue;
        }
        if (st.max_level != seg_top[s]) {
            complain("segment " + std::to_string(s) + ": recorded top level is off");
            continue;
        }
        uint32_t expect = kInvalidId;
        for (uint32_t id = 0; id < n; ++id) {
            if (node_segment_[id] == s && int(levels_[id]) == seg_top[s]) {
                expect = id;
                break;
            }
        }
        if (st.entry != expect) {
            complain("segment " + std::to_string(s) + ": entry is not the first node at its top");
        }
    }
    {
        int expect_top = -1;
        for (uint32_t l : levels_) expect_top = std::max(expect_top, int(l));
        if (global_max_level_ != expect_top) complain("recorded global top level is off");
        uint32_t expect = kInvalidId;
        for (uint32_t id = 0; id < n; ++id) {
            if (int(levels_[id]) == expect_top) {
                expect = id;
                break;
            }
        }
        if (global_entry_ != expect) complain("global entry is not the first node at the top");
    }

    // attribute order: a permutation of all ids, strictly ascending
    {
        const auto order = attribute_order();
        std::unordered_set<uint32_t> seen;
        for (size_t i = 0; i < order.size(); ++i) {
            const auto& [a, id] = order[i];
            if (id >= n || !seen.insert(id).second) {
                complain("attribute order holds a bad or repeated id");
                break;
            }
            if (a != data_.attribute(id)) {
                complain("attribute order disagrees with stored attributes");
                break;
            }
            if (i > 0 && order[i - 1] >= order[i]) {
                complain("attribute order is not strictly ascending");
                break;
            }
        }
    }
    return bad;
}

// --- bulk build ------------------------------------------------------------------

HsigIndex build_hsig(const Dataset& data, const HsigParams& params, size_t boundary_sample_cap) {
    if (data.size() == 0) throw std::invalid_argument("build_hsig: dataset is empty");
    SegmentBoundaries bounds =
        build_boundaries_sampled(data.attributes(), params.segments, boundary_sample_cap,
                                 params.seed);
    HsigIndex index(data.dim(), std::move(bounds), params);
    AttributedVector v;
    v.values.resize(data.dim());
    for (uint32_t id = 0; id < data.size(); ++id) {
        v.id = id;
        std::copy(data.vec(id), data.vec(id) + data.dim(), v.values.begin());
        v.attribute = data.attribute(id);
        index.insert(v);
    }
    return index;
}

}  // namespace hsig
