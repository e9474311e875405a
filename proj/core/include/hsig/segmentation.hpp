#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace hsig {

/// Strictly increasing attribute cut points partitioning the attribute axis
/// into segment_count() left-closed right-open intervals:
///   segment 0      = (-inf, cut[0])
///   segment i      = [cut[i-1], cut[i])
///   segment S-1    = [cut[S-2], +inf)
/// Segments are indexed 0 .. S-1. Boundaries are frozen once built; inserts
/// never move them.
class SegmentBoundaries {
public:
    SegmentBoundaries() = default;  // single segment covering everything
    explicit SegmentBoundaries(std::vector<double> cuts);

    uint32_t segment_count() const { return uint32_t(cuts_.size()) + 1; }
    std::span<const double> cuts() const { return cuts_; }

    /// Segment index holding attribute a (total over all finite a).
    uint32_t segment_id(double a) const;

    /// Inclusive [first, last] contiguous run of segment indexes whose
    /// intervals intersect [lo, hi]. Requires lo <= hi.
    std::pair<uint32_t, uint32_t> intersecting_segments(double lo, double hi) const;

private:
    std::vector<double> cuts_;
};

/// Builds equi-depth boundaries from a sample of attribute values: cut i is
/// the (i*|sample|/S)-th order statistic of the sorted sample. Duplicate cut
/// values are nudged to the midpoint toward the next distinct sample value
/// so cuts stay strictly increasing. If S exceeds the number of distinct
/// sample values, the segment count silently shrinks to that number (the
/// caller can observe this via segment_count()).
SegmentBoundaries build_boundaries(std::span<const double> sample, uint32_t segments);

/// Convenience: boundaries from a dataset attribute column, sampling
/// uniformly (seeded) when the column exceeds sample_cap values.
SegmentBoundaries build_boundaries_sampled(std::span<const double> attrs, uint32_t segments,
                                           size_t sample_cap = 100000, uint64_t seed = 1);

}  // namespace hsig
