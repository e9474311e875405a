#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hsig/types.hpp"

namespace testsupport {

inline hsig::Dataset make_dataset(const std::vector<float>& values,
                                  const std::vector<double>& attrs, uint32_t dim) {
    hsig::Dataset data(dim);
    for (size_t i = 0; i < attrs.size(); ++i) {
        data.add(std::span<const float>(values.data() + i * dim, dim), attrs[i]);
    }
    return data;
}

inline std::vector<uint32_t> ids_of(const hsig::ResultSet& r) {
    std::vector<uint32_t> ids(r.hits.size());
    for (size_t i = 0; i < ids.size(); ++i) ids[i] = r.hits[i].id;
    return ids;
}

/// Scratch directory removed when the test scope ends.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                (tag + "-" + std::to_string(rd()) + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

}  // namespace testsupport
