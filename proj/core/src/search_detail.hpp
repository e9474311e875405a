#pragma once

// Internal best-first expansion shared by every graph search in the library:
// plain layer search, bitmap-masked search, chunk-restricted construction
// search and the range-admitting hybrid layer all instantiate this template
// with different neighbor enumerators and admission predicates.

#include <queue>
#include <span>
#include <vector>

#include "hsig/types.hpp"

namespace hsig::detail {

struct MinOrder {
    bool operator()(const Scored& a, const Scored& b) const { return scored_less(b, a); }
};
struct MaxOrder {
    bool operator()(const Scored& a, const Scored& b) const { return scored_less(a, b); }
};

struct BeamResult {
    std::vector<Scored> found;  // admitted nodes, ascending (dist_sq, id)
    Scored nearest;             // nearest scored node regardless of admission
    bool has_nearest = false;
};

/// Width-bounded best-first search from pre-scored entry points.
///  DistFn:     double(uint32_t id) — squared distance to the query
///  NeighborFn: void(uint32_t node, Sink) — calls Sink(uint32_t) per out-edge
///  AdmitFn:    bool(uint32_t id) — may the node enter the result beam
/// Expansion continues while the beam is not yet full or the nearest open
/// candidate is at least as close as the beam's worst member; nodes failing
/// AdmitFn are still expanded (they navigate, they just don't score).
template <class DistFn, class NeighborFn, class AdmitFn>
BeamResult best_first(std::span<const Scored> entries, size_t width, DistFn&& dist_to,
                      NeighborFn&& neighbors, AdmitFn&& admit, VisitedSet& visited) {
    std::priority_queue<Scored, std::vector<Scored>, MinOrder> cand;
    std::priority_queue<Scored, std::vector<Scored>, MaxOrder> beam;
    BeamResult out;

    auto offer = [&](const Scored& s) {
        if (!out.has_nearest || scored_less(s, out.nearest)) {
            out.nearest = s;
            out.has_nearest = true;
        }
        if (beam.size() < width || s.dist_sq < beam.top().dist_sq) {
            cand.push(s);
            if (admit(s.id)) {
                beam.push(s);
                if (beam.size() > width) beam.pop();
            }
        }
    };

    for (const Scored& e : entries) {
        if (visited.test_and_set(e.id)) continue;
        offer(e);
    }
    while (!cand.empty()) {
        const Scored o = cand.top();
        if (beam.size() >= width && o.dist_sq > beam.top().dist_sq) break;
        cand.pop();
        neighbors(o.id, [&](uint32_t v) {
            if (visited.test_and_set(v)) return;
            offer(Scored{dist_to(v), v});
        });
    }

    out.found.resize(beam.size());
    for (size_t i = out.found.size(); i-- > 0;) {
        out.found[i] = beam.top();
        beam.pop();
    }
    return out;
}

/// Diversified neighbor selection over candidates scored against v: scanned
/// by ascending (dist_sq, id), a candidate r is kept unless some already
/// kept e is strictly closer to r than v is; stops at max_keep survivors.
template <class PairDistFn>
std::vector<Scored> prune_scored(std::vector<Scored> cand, uint32_t v, size_t max_keep,
                                 PairDistFn&& pair_dist_sq) {
    std::sort(cand.begin(), cand.end(), [](const Scored& a, const Scored& b) { return scored_less(a, b); });
    std::vector<Scored> kept;
    kept.reserve(std::min(max_keep, cand.size()));
    uint32_t prev = kInvalidId;
    for (const Scored& r : cand) {
        if (kept.size() >= max_keep) break;
        if (r.id == v || r.id == prev) continue;  // self loops / duplicates
        prev = r.id;
        bool dominated = false;
        for (const Scored& e : kept) {
            if (pair_dist_sq(e.id, r.id) < r.dist_sq) {
                dominated = true;
                break;
            }
        }
        if (!dominated) kept.push_back(r);
    }
    return kept;
}

}  // namespace hsig::detail
