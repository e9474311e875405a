#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hsig/segmentation.hpp"
#include "hsig/types.hpp"

namespace hsig {

/// One node's neighbor lists, one chunk per segment. Chunk i holds the node's
/// exact k nearest neighbors among the objects of segment i (fewer if the
/// segment is smaller than k), ordered by (distance, id).
struct SegmentedAdjacency {
    std::vector<std::vector<uint32_t>> chunks;
};

/// Exact segmented k-nearest-neighbor graph: every node keeps a per-segment
/// chunk of its k nearest neighbors within that segment. The union of chunks
/// for any contiguous run of segments contains the exact kNN graph of the
/// objects in those segments, which is what makes chunk-restricted traversal
/// safe for range-filtered search.
struct SigKnng {
    uint32_t k = 0;
    uint32_t segment_count = 0;
    std::vector<SegmentedAdjacency> nodes;  // indexed by object id

    size_t edge_count() const;
};

/// Exact (brute-force) k-nearest-neighbor graph over all objects.
/// Throws std::invalid_argument if k == 0 or k >= |data|.
DirectedGraph build_knng(const Dataset& data, uint32_t k);

/// Exact kNN edges over the listed member ids only (queries and neighbors both
/// drawn from `members`). Per-node degree is min(k, |members| - 1).
DirectedGraph knng_over_members(const Dataset& data, std::span<const uint32_t> members,
                                uint32_t k);

/// Builds the exact segmented kNN graph for `data` under `bounds`. Segments
/// smaller than k+1 yield short chunks (the whole segment minus the node
/// itself); one warning is printed on stderr when that happens.
SigKnng build_sig_knng(const Dataset& data, const SegmentBoundaries& bounds, uint32_t k);

/// Fraction in [0, 1] of the exact kNN edges over the union of the listed
/// segments that are present in the segmented graph's chunks for those
/// segments. 1.0 means the segmented graph fully contains that kNN graph.
/// `segment_set` may be any non-empty subset of [0, segment_count), in any
/// order; duplicates are ignored.
double check_inclusivity(const SigKnng& sig, const Dataset& data, const SegmentBoundaries& bounds,
                         std::span<const uint32_t> segment_set);

/// Percentage (0..100) of reference edges that also appear in `candidate`.
/// Only nodes present in `reference` contribute to the denominator.
double inclusiveness(const DirectedGraph& candidate, const DirectedGraph& reference);

}  // namespace hsig
