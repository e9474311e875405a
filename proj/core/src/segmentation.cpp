#include "hsig/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace hsig {

SegmentBoundaries::SegmentBoundaries(std::vector<double> cuts) : cuts_(std::move(cuts)) {
    for (size_t i = 0; i < cuts_.size(); ++i) {
        if (!std::isfinite(cuts_[i]))
            throw std::invalid_argument("SegmentBoundaries: cut values must be finite");
        if (i > 0 && cuts_[i] <= cuts_[i - 1])
            throw std::invalid_argument("SegmentBoundaries: cuts must be strictly increasing");
    }
}

uint32_t SegmentBoundaries::segment_id(double a) const {
    // number of cuts <= a; right-open convention puts a == cut[i] into segment i+1
    return uint32_t(std::upper_bound(cuts_.begin(), cuts_.end(), a) - cuts_.begin());
}

std::pair<uint32_t, uint32_t> SegmentBoundaries::intersecting_segments(double lo, double hi) const {
    if (lo > hi) throw std::invalid_argument("intersecting_segments: lo > hi");
    return {segment_id(lo), segment_id(hi)};
}

SegmentBoundaries build_boundaries(std::span<const double> sample, uint32_t segments) {
    if (segments == 0) throw std::invalid_argument("build_boundaries: segments must be >= 1");
    if (sample.empty()) throw std::invalid_argument("build_boundaries: empty sample");

    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());

    // Segment count can never exceed the number of distinct sample values.
    size_t distinct = 1;
    for (size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i] != sorted[i - 1]) ++distinct;
    uint32_t s = segments;
    if (s > distinct) {
        std::fprintf(stderr, "build_boundaries: only %zu distinct values; shrinking %u segments to %zu\n",
                     distinct, segments, distinct);
        s = uint32_t(distinct);
    }
    if (s == 1) return SegmentBoundaries{};

    const size_t n = sorted.size();
    std::vector<double> cuts;
    cuts.reserve(s - 1);
    for (uint32_t i = 1; i < s; ++i) {
        double cut = sorted[size_t(i) * n / s];
        if (!cuts.empty() && cut <= cuts.back()) {
            // duplicate order statistic: move to the midpoint toward the next
            // distinct sample value above the previous cut
            auto it = std::upper_bound(sorted.begin(), sorted.end(), cuts.back());
            if (it == sorted.end()) break;  // nothing above: drop remaining cuts
            cut = (cuts.back() + *it) / 2.0;
            if (cut <= cuts.back()) continue;  // no representable midpoint
        }
        cuts.push_back(cut);
    }
    return SegmentBoundaries{std::move(cuts)};
}

SegmentBoundaries build_boundaries_sampled(std::span<const double> attrs, uint32_t segments,
                                           size_t sample_cap, uint64_t seed) {
    if (attrs.size() <= sample_cap) return build_boundaries(attrs, segments);
    std::vector<double> sample;
    sample.reserve(sample_cap);
    std::mt19937_64 rng(seed);
    std::sample(attrs.begin(), attrs.end(), std::back_inserter(sample), sample_cap, rng);
    return build_boundaries(sample, segments);
}

}  // namespace hsig
