#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hsig/hsig.hpp"
#include "hsig/types.hpp"

namespace hsig {

/// Vectors in the common .fvecs layout: per vector, a little-endian int32
/// dimension followed by that many float32 components. Every vector in a
/// file must share one dimension.
struct FvecsData {
    uint32_t dim = 0;
    std::vector<float> values;

    size_t count() const { return dim == 0 ? 0 : values.size() / dim; }
};

FvecsData load_fvecs(const std::string& path);
void save_fvecs(const std::string& path, const float* values, size_t count, uint32_t dim);

/// Attribute columns: files ending in .f64 or .bin hold raw little-endian
/// doubles; anything else is text with one value per line.
std::vector<double> load_attributes(const std::string& path);
void save_attributes_text(const std::string& path, std::span<const double> attrs);
void save_attributes_f64(const std::string& path, std::span<const double> attrs);

/// Pairs a vector file with an attribute column of the same length.
Dataset load_dataset(const std::string& fvecs_path, const std::string& attrs_path);

/// A reproducible batch of range queries. The text file starts with a header
/// line "count dim seed"; each further line holds "lo hi k" followed by dim
/// vector components. Numbers are printed with round-trip precision.
struct Workload {
    uint32_t dim = 0;
    uint64_t seed = 0;
    std::string width_desc;  ///< informational; not stored in the file
    std::vector<RangeQuery> queries;
};

void save_workload(const std::string& path, const Workload& w);
Workload load_workload(const std::string& path);

/// Index file convenience wrappers (binary; see HsigIndex::serialize).
void save_index(const std::string& path, const HsigIndex& index);
HsigIndex load_index(const std::string& path);

/// Cached exact answers for a workload against a dataset of `dataset_n`
/// objects. load returns false (never throws) when the cache is missing,
/// stale, or damaged — callers then recompute and save.
bool load_oracle_cache(const std::string& path, size_t dataset_n, const Workload& w,
                       std::vector<ResultSet>& out);
void save_oracle_cache(const std::string& path, size_t dataset_n, const Workload& w,
                       const std::vector<ResultSet>& answers);

}  // namespace hsig
