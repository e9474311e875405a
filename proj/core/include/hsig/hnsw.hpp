#pragma once

#include <functional>
#include <random>
#include <unordered_map>

#include "hsig/types.hpp"

namespace hsig {

/// One navigable-graph layer: node id -> neighbor ids. Neighbor lists are
/// bounded by the layer's degree cap (selection keeps max_degree, reverse
/// edges may grow a list to the cap before it is re-pruned).
struct GraphLayer {
    std::unordered_map<uint32_t, std::vector<uint32_t>> adj;

    bool contains(uint32_t id) const { return adj.find(id) != adj.end(); }
    size_t size() const { return adj.size(); }
};

struct HnswParams {
    uint32_t max_degree = 16;       // selection bound M; bottom layer caps lists at 2M
    uint32_t ef_construction = 200; // beam width while inserting
    double level_norm = 0.0;        // m_L; <= 0 means 1/ln(max_degree)
    uint64_t seed = 1;

    double resolved_level_norm() const;
};

/// Pure form of the level draw: floor(-ln(u) * level_norm) for u in (0, 1].
uint32_t level_from_uniform(double level_norm, double u);

/// Geometric level draw used at insert time; deterministic per rng stream.
uint32_t draw_level(double level_norm, std::mt19937_64& rng);

/// Optional traversal restriction: return false to skip the edge from->to.
using EdgeFilter = std::function<bool(uint32_t from, uint32_t to)>;

/// Best-first beam search inside one layer from a single entry node.
/// Returns up to `width` nodes ranked by (distance, id); never mutates the
/// layer. Throws std::invalid_argument if the entry is absent.
std::vector<Scored> ann_search_layer(const GraphLayer& layer, const Dataset& data,
                                     const float* query, uint32_t entry, size_t width,
                                     const EdgeFilter& filter = {}, VisitedSet* visited = nullptr,
                                     SearchStats* stats = nullptr);

/// Diversified neighbor selection (id-level public form): candidates are
/// ranked by distance to v, and a candidate survives unless an already kept
/// neighbor is strictly closer to it than v is. Keeps at most max_keep.
std::vector<uint32_t> prune(const Dataset& data, uint32_t v, std::span<const uint32_t> candidates,
                            size_t max_keep);

/// Inserts v into one layer: beam search with ef_construction, prune to
/// max_degree forward edges, reverse edges appended and re-pruned to
/// degree_cap (0 means max_degree) on overflow. Returns the nearest node
/// found by the construction search (kInvalidId when the layer was empty),
/// which callers use as the entry for the next lower layer.
uint32_t insert_layer(GraphLayer& layer, const Dataset& data, uint32_t v, uint32_t entry,
                      uint32_t max_degree, uint32_t ef_construction, uint32_t degree_cap = 0);

/// Plain hierarchical navigable small-world index over (a subset of) a
/// dataset's vectors, ignoring attributes. Serves as the building block the
/// segmented index mirrors per chunk, and as the reference graph when
/// measuring how much of a conventionally built graph the segmented one
/// contains. Single writer; concurrent reads.
class HnswIndex {
public:
    HnswIndex(const Dataset& data, HnswParams params);

    /// Insert with an internally drawn level.
    void insert(uint32_t id);
    /// Insert with an externally pinned level (used to mirror another
    /// index's level draws exactly).
    void insert(uint32_t id, uint32_t level);

    /// Hierarchical search: greedy descent through upper layers, beam of
    /// width ef at the bottom, top k by (distance, id). Requires ef >= k.
    ResultSet search(std::span<const float> query, uint32_t k, uint32_t ef,
                     VisitedSet* visited = nullptr, SearchStats* stats = nullptr) const;

    size_t size() const { return levels_.size(); }
    int max_level() const { return max_level_; }
    uint32_t entry_point() const { return entry_; }
    uint32_t layer_count() const { return uint32_t(layers_.size()); }
    const GraphLayer& layer(uint32_t l) const { return layers_[l]; }
    uint32_t level_of(uint32_t id) const;
    const HnswParams& params() const { return params_; }
    const Dataset& data() const { return *data_; }

private:
    const Dataset* data_;
    HnswParams params_;
    double level_norm_;
    std::vector<GraphLayer> layers_;
    std::unordered_map<uint32_t, uint32_t> levels_;
    uint32_t entry_ = kInvalidId;
    int max_level_ = -1;
    std::mt19937_64 rng_;
};

}  // namespace hsig
