#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace hsig {

/// Sentinel for "no node" in graph adjacency and linked-list pointers.
inline constexpr uint32_t kInvalidId = 0xFFFFFFFFu;

/// One object: a fixed-dimension float vector plus a scalar attribute used
/// for range filtering. Ids are dense ordinals assigned in insertion order.
struct AttributedVector {
    uint32_t id = 0;
    std::vector<float> values;
    double attribute = 0.0;
};

/// Flat, append-only store of attributed vectors. Ids are contiguous from 0
/// and equal the append order. Vectors are kept in one contiguous buffer.
class Dataset {
public:
    explicit Dataset(uint32_t dim);

    /// Appends one object; its id must equal size(). Throws
    /// std::invalid_argument on dimension mismatch or non-finite attribute.
    void add(std::span<const float> values, double attribute);
    void add(const AttributedVector& v);

    size_t size() const { return attrs_.size(); }
    uint32_t dim() const { return dim_; }
    const float* vec(uint32_t id) const { return values_.data() + size_t(id) * dim_; }
    std::span<const float> vec_span(uint32_t id) const { return {vec(id), dim_}; }
    double attribute(uint32_t id) const { return attrs_[id]; }
    std::span<const double> attributes() const { return attrs_; }

private:
    uint32_t dim_;
    std::vector<float> values_;
    std::vector<double> attrs_;
};

/// A range-filtered k-nearest-neighbor query: the k nearest objects among
/// those whose attribute lies in [lo, hi]. Construction rejects lo > hi and
/// k == 0 rather than silently repairing them.
struct RangeQuery {
    std::vector<float> vec;
    double lo = 0.0;
    double hi = 0.0;
    uint32_t k = 1;

    RangeQuery() = default;
    RangeQuery(std::vector<float> q, double lo_, double hi_, uint32_t k_);

    bool contains(double attribute) const { return attribute >= lo && attribute <= hi; }
};

/// One search answer: object id and its true (not squared) Euclidean
/// distance to the query vector.
struct SearchHit {
    uint32_t id = 0;
    double distance = 0.0;
};

/// Search results sorted by (distance, id) ascending; never longer than the
/// query's k; every id's attribute lies inside the originating range.
struct ResultSet {
    std::vector<SearchHit> hits;

    size_t size() const { return hits.size(); }
    bool empty() const { return hits.empty(); }
};

/// Internal currency of every graph routine: a node id scored by squared
/// Euclidean distance. All heaps and adjacency chunks order by (dist_sq, id).
struct Scored {
    double dist_sq = 0.0;
    uint32_t id = kInvalidId;
};

inline bool scored_less(const Scored& a, const Scored& b) {
    return a.dist_sq < b.dist_sq || (a.dist_sq == b.dist_sq && a.id < b.id);
}

/// Search-time instrumentation. dist_evals counts every vector-to-vector
/// distance computation made on behalf of one query.
struct SearchStats {
    uint64_t dist_evals = 0;
    uint64_t hops = 0;
};

/// Per-query scratch space for graph traversals. Reusable across queries;
/// never shared between concurrent searches.
class VisitedSet {
public:
    void reset(size_t n) {
        if (stamp_.size() < n) stamp_.resize(n, 0);
        if (++epoch_ == 0) {  // epoch wrapped: clear stamps and restart
            std::fill(stamp_.begin(), stamp_.end(), 0);
            epoch_ = 1;
        }
    }
    bool test_and_set(uint32_t id) {
        if (stamp_[id] == epoch_) return true;
        stamp_[id] = epoch_;
        return false;
    }
    bool test(uint32_t id) const { return stamp_[id] == epoch_; }

private:
    std::vector<uint32_t> stamp_;
    uint32_t epoch_ = 0;
};

/// Per-thread VisitedSet kept alive across calls. A freshly constructed set
/// pays an allocation and zero-fill proportional to the collection on its
/// first reset; reusing one per thread makes reset O(1), and the epoch keeps
/// interleaved uses (even across different indexes) from seeing stale marks.
inline VisitedSet& thread_visited_scratch() {
    static thread_local VisitedSet scratch;
    return scratch;
}

/// Adjacency lists keyed by node id. Used for exact neighborhood graphs and
/// for graph-containment comparisons.
using DirectedGraph = std::unordered_map<uint32_t, std::vector<uint32_t>>;

/// Error raised when a serialized index or data file cannot be decoded.
/// Carries the byte offset at which decoding failed.
class ParseError : public std::runtime_error {
public:
    enum class Kind {
        kBadMagic,
        kBadVersion,
        kTruncated,
        kCorrupt,
    };

    ParseError(Kind kind, uint64_t offset, const std::string& message)
        : std::runtime_error(message + " (byte offset " + std::to_string(offset) + ")"),
          kind_(kind),
          offset_(offset) {}

    Kind kind() const { return kind_; }
    uint64_t offset() const { return offset_; }

private:
    Kind kind_;
    uint64_t offset_;
};

}  // namespace hsig
