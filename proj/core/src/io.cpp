#include "hsig/io.hpp"

#include <bit>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hsig {

namespace {

uint64_t file_offset(std::istream& in) { return uint64_t(in.tellg()); }

uint32_t read_le_u32(std::istream& in, uint64_t off, const std::string& path) {
    uint8_t b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (in.gcount() != 4) {
        throw ParseError(ParseError::Kind::kTruncated, off, path + ": file ends early");
    }
    return uint32_t(b[0]) | (uint32_t(b[1]) << 8) | (uint32_t(b[2]) << 16) | (uint32_t(b[3]) << 24);
}

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

[[noreturn]] void line_error(const std::string& path, size_t line_no, const std::string& what) {
    throw std::runtime_error(path + " line " + std::to_string(line_no) + ": " + what);
}

// FNV-1a over the workload's query payloads, so a cache can tell whether it
// matches the queries it was computed for.
uint64_t workload_fingerprint(const Workload& w) {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* p, size_t nbytes) {
        const auto* bytes = static_cast<const uint8_t*>(p);
        for (size_t i = 0; i < nbytes; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ull;
        }
    };
    mix(&w.dim, sizeof(w.dim));
    for (const RangeQuery& q : w.queries) {
        mix(&q.lo, sizeof(q.lo));
        mix(&q.hi, sizeof(q.hi));
        mix(&q.k, sizeof(q.k));
        mix(q.vec.data(), q.vec.size() * sizeof(float));
    }
    return h;
}

}  // namespace

FvecsData load_fvecs(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open vector file: " + path);
    FvecsData data;
    while (true) {
        const uint64_t at = file_offset(in);
        if (in.peek() == std::char_traits<char>::eof()) break;
        const uint32_t d = read_le_u32(in, at, path);
        if (d == 0 || d > (1u << 20)) {
            throw ParseError(ParseError::Kind::kCorrupt, at,
                             path + ": implausible vector dimension " + std::to_string(d));
        }
        if (data.dim == 0) {
            data.dim = d;
        } else if (d != data.dim) {
            throw ParseError(ParseError::Kind::kCorrupt, at,
                             path + ": vector dimension changes from " + std::to_string(data.dim) +
                                 " to " + std::to_string(d));
        }
        const size_t old = data.values.size();
        data.values.resize(old + d);
        const uint64_t vat = file_offset(in);
        in.read(reinterpret_cast<char*>(data.values.data() + old), std::streamsize(d * 4));
        if (size_t(in.gcount()) != size_t(d) * 4) {
            throw ParseError(ParseError::Kind::kTruncated, vat, path + ": file ends mid-vector");
        }
    }
    return data;
}

void save_fvecs(const std::string& path, const float* values, size_t count, uint32_t dim) {
    if (dim == 0) throw std::invalid_argument("save_fvecs: dimension must be positive");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write vector file: " + path);
    for (size_t i = 0; i < count; ++i) {
        const uint8_t b[4] = {uint8_t(dim), uint8_t(dim >> 8), uint8_t(dim >> 16),
                              uint8_t(dim >> 24)};
        out.write(reinterpret_cast<const char*>(b), 4);
        out.write(reinterpret_cast<const char*>(values + i * dim), std::streamsize(dim) * 4);
    }
    if (!out.flush()) throw std::runtime_error("failed writing vector file: " + path);
}

std::vector<double> load_attributes(const std::string& path) {
    std::vector<double> attrs;
    if (has_suffix(path, ".f64") || has_suffix(path, ".bin")) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open attribute file: " + path);
        in.seekg(0, std::ios::end);
        const uint64_t bytes = uint64_t(in.tellg());
        in.seekg(0);
        if (bytes % 8 != 0) {
            throw ParseError(ParseError::Kind::kTruncated, bytes - bytes % 8,
                             path + ": length is not a whole number of doubles");
        }
        attrs.resize(bytes / 8);
        in.read(reinterpret_cast<char*>(attrs.data()), std::streamsize(bytes));
        if (uint64_t(in.gcount()) != bytes) {
            throw std::runtime_error("failed reading attribute file: " + path);
        }
    } else {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open attribute file: " + path);
        std::string line;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            try {
                size_t used = 0;
                const double v = std::stod(line, &used);
                while (used < line.size() && std::isspace((unsigned char)line[used])) ++used;
                if (used != line.size()) line_error(path, line_no, "trailing characters");
                attrs.push_back(v);
            } catch (const std::invalid_argument&) {
                line_error(path, line_no, "not a number: '" + line + "'");
            } catch (const std::out_of_range&) {
                line_error(path, line_no, "value out of range: '" + line + "'");
            }
        }
    }
    return attrs;
}

void save_attributes_text(const std::string& path, std::span<const double> attrs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write attribute file: " + path);
    char buf[64];
    for (double a : attrs) {
        std::snprintf(buf, sizeof buf, "%.17g\n", a);
        out << buf;
    }
    if (!out.flush()) throw std::runtime_error("failed writing attribute file: " + path);
}

void save_attributes_f64(const std::string& path, std::span<const double> attrs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write attribute file: " + path);
    out.write(reinterpret_cast<const char*>(attrs.data()), std::streamsize(attrs.size() * 8));
    if (!out.flush()) throw std::runtime_error("failed writing attribute file: " + path);
}

Dataset load_dataset(const std::string& fvecs_path, const std::string& attrs_path) {
    FvecsData vecs = load_fvecs(fvecs_path);
    const std::vector<double> attrs = load_attributes(attrs_path);
    if (vecs.count() != attrs.size()) {
        throw std::runtime_error("vector/attribute count mismatch: " + fvecs_path + " holds " +
                                 std::to_string(vecs.count()) + " vectors but " + attrs_path +
                                 " holds " + std::to_string(attrs.size()) + " attributes");
    }
    if (vecs.dim == 0) throw std::runtime_error(fvecs_path + ": no vectors");
    Dataset data(vecs.dim);
    for (size_t i = 0; i < attrs.size(); ++i) {
        data.add(std::span<const float>(vecs.values.data() + i * vecs.dim, vecs.dim), attrs[i]);
    }
    return data;
}

void save_workload(const std::string& path, const Workload& w) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write workload file: " + path);
    out << w.queries.size() << ' ' << w.dim << ' ' << w.seed << '\n';
    char buf[64];
    for (const RangeQuery& q : w.queries) {
        if (q.vec.size() != w.dim) {
            throw std::invalid_argument("save_workload: query dimension mismatch");
        }
        std::snprintf(buf, sizeof buf, "%.17g %.17g %u", q.lo, q.hi, q.k);
        out << buf;
        for (float c : q.vec) {
            std::snprintf(buf, sizeof buf, " %.9g", double(c));
            out << buf;
        }
        out << '\n';
    }
    if (!out.flush()) throw std::runtime_error("failed writing workload file: " + path);
}

Workload load_workload(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open workload file: " + path);
    Workload w;
    std::string line;
    size_t line_no = 0;
    if (!std::getline(in, line)) line_error(path, 1, "missing header");
    ++line_no;
    uint64_t count = 0;
    {
        std::istringstream ls(line);
        if (!(ls >> count >> w.dim >> w.seed)) {
            line_error(path, line_no, "header must be 'count dim seed'");
        }
        std::string rest;
        if (ls >> rest) line_error(path, line_no, "trailing characters in header");
    }
    if (w.dim == 0) line_error(path, line_no, "dimension must be positive");
    w.queries.reserve(count);
    std::vector<float> vec(w.dim);
    for (uint64_t i = 0; i < count; ++i) {
        if (!std::getline(in, line)) line_error(path, line_no + 1, "fewer queries than the header says");
        ++line_no;
        std::istringstream ls(line);
        double lo = 0, hi = 0;
        uint32_t k = 0;
        if (!(ls >> lo >> hi >> k)) line_error(path, line_no, "expected 'lo hi k' prefix");
        for (uint32_t d = 0; d < w.dim; ++d) {
            if (!(ls >> vec[d])) line_error(path, line_no, "missing vector component");
        }
        std::string rest;
        if (ls >> rest) line_error(path, line_no, "trailing characters");
        try {
            w.queries.emplace_back(vec, lo, hi, k);
        } catch (const std::invalid_argument& e) {
            line_error(path, line_no, e.what());
        }
    }
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty()) line_error(path, line_no, "more queries than the header says");
    }
    return w;
}

void save_index(const std::string& path, const HsigIndex& index) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write index file: " + path);
    index.serialize(out);
    if (!out.flush()) throw std::runtime_error("failed writing index file: " + path);
}

HsigIndex load_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open index file: " + path);
    return HsigIndex::deserialize(in);
}

namespace {
constexpr char kCacheMagic[4] = {'H', 'S', 'O', 'C'};
constexpr uint32_t kCacheVersion = 1;
}  // namespace

bool load_oracle_cache(const std::string& path, size_t dataset_n, const Workload& w,
                       std::vector<ResultSet>& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    auto read_ok = [&in](void* p, size_t nbytes) {
        in.read(static_cast<char*>(p), std::streamsize(nbytes));
        return size_t(in.gcount()) == nbytes;
    };
    char magic[4];
    uint32_t version = 0;
    uint64_t n = 0, fingerprint = 0, q_count = 0;
    if (!read_ok(magic, 4) || std::memcmp(magic, kCacheMagic, 4) != 0) return false;
    if (!read_ok(&version, 4) || version != kCacheVersion) return false;
    if (!read_ok(&n, 8) || n != dataset_n) return false;
    if (!read_ok(&fingerprint, 8) || fingerprint != workload_fingerprint(w)) return false;
    if (!read_ok(&q_count, 8) || q_count != w.queries.size()) return false;

    std::vector<ResultSet> loaded(q_count);
    for (uint64_t i = 0; i < q_count; ++i) {
        uint32_t hits = 0;
        if (!read_ok(&hits, 4) || hits > w.queries[i].k) return false;
        loaded[i].hits.resize(hits);
        for (uint32_t h = 0; h < hits; ++h) {
            uint32_t id = 0;
            double dist = 0;
            if (!read_ok(&id, 4) || !read_ok(&dist, 8)) return false;
            if (id >= dataset_n || !std::isfinite(dist)) return false;
            loaded[i].hits[h] = SearchHit{id, dist};
        }
    }
    if (in.peek() != std::char_traits<char>::eof()) return false;
    out = std::move(loaded);
    return true;
}

void save_oracle_cache(const std::string& path, size_t dataset_n, const Workload& w,
                       const std::vector<ResultSet>& answers) {
    if (answers.size() != w.queries.size()) {
        throw std::invalid_argument("save_oracle_cache: one answer per query required");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write oracle cache: " + path);
    auto put = [&out](const void* p, size_t nbytes) {
        out.write(static_cast<const char*>(p), std::streamsize(nbytes));
    };
    put(kCacheMagic, 4);
    put(&kCacheVersion, 4);
    const uint64_t n = dataset_n;
    put(&n, 8);
    const uint64_t fingerprint = workload_fingerprint(w);
    put(&fingerprint, 8);
    const uint64_t q_count = w.queries.size();
    put(&q_count, 8);
    for (const ResultSet& rs : answers) {
        const uint32_t hits = uint32_t(rs.hits.size());
        put(&hits, 4);
        for (const SearchHit& h : rs.hits) {
            put(&h.id, 4);
            put(&h.distance, 8);
        }
    }
    if (!out.flush()) throw std::runtime_error("failed writing oracle cache: " + path);
}

}  // namespace hsig
