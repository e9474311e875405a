#include "hsig/brute_force.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "hsig/distance.hpp"

namespace hsig {

ResultSet brute_force_rfnns(const Dataset& data, const RangeQuery& query) {
    if (query.vec.size() != data.dim())
        throw std::invalid_argument("brute_force_rfnns: query dimension mismatch");

    struct Entry {
        double dist_sq;
        uint32_t id;
    };
    std::vector<Entry> qualified;
    const float* q = query.vec.data();
    const uint32_t n = uint32_t(data.size());
    for (uint32_t id = 0; id < n; ++id) {
        const double a = data.attribute(id);
        if (a < query.lo || a > query.hi) continue;
        qualified.push_back({distance_sq(q, data.vec(id), data.dim()), id});
    }

    const size_t k = std::min<size_t>(query.k, qualified.size());
    auto by_dist_then_id = [](const Entry& a, const Entry& b) {
        return a.dist_sq < b.dist_sq || (a.dist_sq == b.dist_sq && a.id < b.id);
    };
    std::partial_sort(qualified.begin(), qualified.begin() + k, qualified.end(), by_dist_then_id);

    ResultSet rs;
    rs.hits.reserve(k);
    for (size_t i = 0; i < k; ++i)
        rs.hits.push_back({qualified[i].id, std::sqrt(qualified[i].dist_sq)});
    return rs;
}

double recall(const ResultSet& approx, const ResultSet& exact, uint32_t k) {
    const size_t denom = std::min<size_t>(k, exact.size());
    if (denom == 0) return approx.empty() ? 1.0 : 0.0;

    std::unordered_set<uint32_t> truth;
    truth.reserve(denom * 2);
    for (size_t i = 0; i < denom; ++i) truth.insert(exact.hits[i].id);

    size_t common = 0;
    for (const auto& h : approx.hits) common += truth.count(h.id);
    return double(common) / double(denom);
}

}  // namespace hsig
