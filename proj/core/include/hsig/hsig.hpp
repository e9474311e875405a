#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hsig/segmentation.hpp"
#include "hsig/types.hpp"

namespace hsig {

/// Fixed-size bit set aligned with one node's concatenated chunk slots.
/// Bit i refers to the i-th edge when the node's chunks are laid out
/// back-to-back in segment order.
class SlotBitmap {
public:
    void assign(size_t bits) {
        bytes_.assign((bits + 7) / 8, 0);
        bits_ = bits;
    }
    size_t size() const { return bits_; }
    bool test(size_t i) const { return (bytes_[i >> 3] >> (i & 7)) & 1u; }
    void set(size_t i) { bytes_[i >> 3] |= uint8_t(1u << (i & 7)); }
    void clear(size_t i) { bytes_[i >> 3] &= uint8_t(~(1u << (i & 7))); }
    size_t count() const;

    /// Grows the bitmap by one unset bit at position `pos`, shifting the bits
    /// at and above `pos` up. Keeps existing marks aligned with their edges
    /// when an edge is spliced into the middle of a chunk.
    void insert_zero_bit(size_t pos);

    /// Drops the bit at `pos`, shifting higher bits down.
    void erase_bit(size_t pos);

    std::span<const uint8_t> bytes() const { return bytes_; }
    void from_bytes(std::span<const uint8_t> bytes, size_t bits);

private:
    void set_to(size_t i, bool v) {
        if (v) {
            set(i);
        } else {
            clear(i);
        }
    }

    std::vector<uint8_t> bytes_;
    size_t bits_ = 0;
};

/// How the hybrid search picks which chunk edges to expand at each hop.
enum class NeighborSelection : uint8_t {
    /// Re-rank every edge of the intersected chunks by its distance to the
    /// popped node and expand the closest m. More distance work per hop.
    kTopAcrossChunks = 1,
    /// Expand the first ceil(m / span) edges of each intersected chunk,
    /// relying on the chunks' stored ordering. Cheaper per hop.
    kPerChunkPrefix = 2,
};

/// Query-time knobs shared by the graph-traversal strategies.
struct SearchParams {
    uint32_t ef = 150;  ///< beam width at the bottom layer
    uint32_t m = 16;    ///< hybrid per-hop expansion budget
    NeighborSelection selection = NeighborSelection::kPerChunkPrefix;
};

/// Build-time parameters for HsigIndex.
struct HsigParams {
    uint32_t segments = 8;         ///< attribute segments (chunks per node)
    uint32_t max_degree = 16;      ///< per-chunk selection budget (M)
    uint32_t ef_construction = 200;///< beam width for construction searches
    double level_norm = 0.0;       ///< level scale; <= 0 means 1/ln(max_degree)
    uint64_t seed = 1;             ///< level-draw RNG seed

    double resolved_level_norm() const;
};

/// Hierarchical segmented inclusive graph over attributed vectors.
///
/// Every node keeps one neighbor chunk per attribute segment, so the union of
/// chunks for any run of segments is a traversable subgraph over exactly the
/// objects of those segments. A per-node bitmap masks the chunk edges down to
/// a conventional small-degree graph for unfiltered traversal, and per-layer
/// linked chains in attribute order support direct range scans. The three
/// search strategies (attribute-first, graph-first, and segment-aware hybrid)
/// share this one structure.
///
/// Objects are appended in id order: insert expects v.id == size().
class HsigIndex {
public:
    HsigIndex(uint32_t dim, SegmentBoundaries bounds, HsigParams params);

    /// Inserts one attributed vector. v.id must equal size().
    void insert(const AttributedVector& v);

    /// Attribute-first search: walks the bottom attribute chain across
    /// [q.lo, q.hi] and scans every qualifying object. Exact.
    ResultSet search_pre(const RangeQuery& q) const;

    /// Graph-first search: beam search over the masked graph ignoring the
    /// range, then drops out-of-range results. May return fewer than k hits.
    ResultSet search_post(const RangeQuery& q, uint32_t ef, VisitedSet* visited = nullptr,
                          SearchStats* stats = nullptr) const;

    /// Segment-aware search: descends the chunks of the segments intersecting
    /// [q.lo, q.hi], expanding out-of-range nodes but collecting only
    /// qualifying ones.
    ResultSet search_hybrid(const RangeQuery& q, const SearchParams& params,
                            VisitedSet* visited = nullptr, SearchStats* stats = nullptr) const;

    /// One beam-search pass of the hybrid strategy at `layer`, exposed for
    /// tests and instrumentation. Expands chunk edges of the segments
    /// intersecting [lo, hi]; only nodes with attribute in [lo, hi] enter the
    /// result beam. `nearest_seen`, when given, receives the closest node
    /// encountered regardless of range (for descent when the beam is empty).
    std::vector<Scored> hybrid_filtering_layer(uint32_t layer, const float* query, double lo,
                                               double hi, std::span<const Scored> entries,
                                               size_t width, const SearchParams& params,
                                               VisitedSet& visited, SearchStats* stats = nullptr,
                                               Scored* nearest_seen = nullptr) const;

    // --- observers -------------------------------------------------------

    size_t size() const { return data_.size(); }
    uint32_t dim() const { return data_.dim(); }
    const HsigParams& params() const { return params_; }
    const SegmentBoundaries& bounds() const { return bounds_; }
    uint32_t segment_count() const { return bounds_.segment_count(); }
    const Dataset& data() const { return data_; }

    uint32_t level_of(uint32_t id) const;
    uint32_t segment_of(uint32_t id) const;
    uint32_t layer_count() const { return uint32_t(layers_.size()); }
    int max_level() const { return global_max_level_; }
    uint32_t entry_point() const { return global_entry_; }
    uint32_t segment_entry(uint32_t seg) const;
    int segment_max_level(uint32_t seg) const;
    uint64_t segment_size(uint32_t seg) const;

    /// Skip-chain accessors: head_of is the first node of the layer in
    /// (attribute, id) order; next_of follows the chain (kInvalidId = end).
    uint32_t head_of(uint32_t layer) const;
    uint32_t next_of(uint32_t layer, uint32_t id) const;

    /// Edge ids of one chunk, in stored (distance, id) order.
    std::vector<uint32_t> chunk_ids(uint32_t layer, uint32_t id, uint32_t seg) const;

    /// Neighbor ids whose mask bit is set, in slot order.
    std::vector<uint32_t> masked_neighbors(uint32_t layer, uint32_t id) const;

    /// Exact number of objects with attribute in [lo, hi].
    size_t range_cardinality(double lo, double hi) const;

    /// All (attribute, id) pairs in ascending order.
    std::vector<std::pair<double, uint32_t>> attribute_order() const;

    /// Union of the chunks for segments [seg_lo, seg_hi] at `layer`,
    /// restricted to nodes of those segments. The candidate side of
    /// graph-containment comparisons.
    DirectedGraph chunk_union_graph(uint32_t layer, uint32_t seg_lo, uint32_t seg_hi) const;

    /// Full structural self-check: chunk membership and ordering, degree
    /// caps, mask alignment and budget, chain order and coverage, level
    /// nesting, entry derivations. Returns human-readable violations
    /// (empty means healthy).
    std::vector<std::string> validate_structure() const;

    void serialize(std::ostream& out) const;
    static HsigIndex deserialize(std::istream& in);

private:
    struct Node {
        std::vector<std::vector<Scored>> chunks;  // one per segment, (dist, id) ascending
        uint32_t next = kInvalidId;               // attribute-order chain successor
        SlotBitmap mask;                          // over concatenated chunk slots
    };
    struct Layer {
        bool is_base = false;
        std::vector<Node> base;                  // dense by id (layer 0)
        std::unordered_map<uint32_t, Node> upper;
        uint32_t head = kInvalidId;              // chain start

        Node* find(uint32_t id);
        const Node* find(uint32_t id) const;
    };
    struct SegmentState {
        uint32_t entry = kInvalidId;
        int max_level = -1;
        uint64_t count = 0;
    };

    Node* node_at(uint32_t layer, uint32_t id);
    const Node* node_at(uint32_t layer, uint32_t id) const;
    double dist_sq_between(uint32_t a, uint32_t b) const;

    /// Beam search restricted to one segment's chunk edges.
    std::vector<Scored> chunk_beam(uint32_t layer, uint32_t seg, const float* query, Scored entry,
                                   size_t width, VisitedSet& visited,
                                   SearchStats* stats = nullptr) const;

    /// Beam search over mask-selected edges (all segments, no range).
    std::vector<Scored> masked_beam(uint32_t layer, const float* query, Scored entry, size_t width,
                                    VisitedSet& visited, SearchStats* stats = nullptr) const;

    void add_reverse_edge(uint32_t layer, uint32_t owner, Scored arrival, uint32_t arrival_seg);
    void apply_edge_masking(uint32_t layer, uint32_t v);
    void rebuild_mask(uint32_t layer, uint32_t id);
    void set_mask_from_ids(Node& node, std::span<const uint32_t> selected);
    void splice_chains(uint32_t id, double attr, uint32_t level);
    size_t total_slots(const Node& node) const;

    friend struct HsigSerializer;

    Dataset data_;
    SegmentBoundaries bounds_;
    HsigParams params_;
    double level_norm_ = 0.0;

    std::vector<Layer> layers_;
    std::vector<uint32_t> levels_;        // by id
    std::vector<uint32_t> node_segment_;  // by id
    std::vector<SegmentState> segments_;
    uint32_t global_entry_ = kInvalidId;
    int global_max_level_ = -1;
    // Sorted (attribute, id) pairs, split into a bulk and a small tail so each
    // insert shifts at most kAttrOrderTailCap entries; the tail folds into the
    // bulk when full. Readers search both halves.
    static constexpr size_t kAttrOrderTailCap = 1024;
    std::vector<std::pair<double, uint32_t>> attr_order_;
    std::vector<std::pair<double, uint32_t>> attr_order_tail_;
    std::mt19937_64 rng_;
};

/// Freezes equal-population boundaries from the data's attributes (sampling
/// at most `boundary_sample_cap` of them), then inserts every object.
HsigIndex build_hsig(const Dataset& data, const HsigParams& params,
                     size_t boundary_sample_cap = 100000);

}  // namespace hsig
