#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "hsig/distance.hpp"
#include "hsig/hsig.hpp"

// On-disk layout, version 1, all integers little-endian:
//   "HSIG" | u32 version | u32 dim | u64 n | u32 segments | u32 max_degree |
//   u32 ef_construction | f64 level_norm | u8 metric(0 = squared Euclidean) |
//   (segments-1) x f64 cut | n x (dim x f32, f64 attribute) | n x u32 level |
//   then for each layer 0..max_level, for each id ascending with level >= layer:
//     segments x u16 chunk length | chunk ids u32 (stored order) |
//     u32 next (0xFFFFFFFF = chain end) | ceil(slots/8) mask bytes (LSB first)
// Edge distances are not stored; they are recomputed on load from the same
// vectors, which reproduces the stored doubles exactly.

namespace hsig {

namespace {

constexpr char kMagic[4] = {'H', 'S', 'I', 'G'};
constexpr uint32_t kVersion = 1;
constexpr uint32_t kMaxLevel = 60;  // sanity bound; real levels stay far below

struct Writer {
    std::ostream& out;
    uint64_t off = 0;

    void bytes(const void* p, size_t n) {
        out.write(static_cast<const char*>(p), std::streamsize(n));
        if (!out) throw std::runtime_error("index serialization: write failed");
        off += n;
    }
    void u8(uint8_t v) { bytes(&v, 1); }
    void u16(uint16_t v) {
        uint8_t b[2] = {uint8_t(v), uint8_t(v >> 8)};
        bytes(b, 2);
    }
    void u32(uint32_t v) {
        uint8_t b[4] = {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16), uint8_t(v >> 24)};
        bytes(b, 4);
    }
    void u64(uint64_t v) {
        uint8_t b[8];
        for (int i = 0; i < 8; ++i) b[i] = uint8_t(v >> (8 * i));
        bytes(b, 8);
    }
    void f32(float v) { u32(std::bit_cast<uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }
};

struct Reader {
    std::istream& in;
    uint64_t off = 0;

    void bytes(void* p, size_t n) {
        in.read(static_cast<char*>(p), std::streamsize(n));
        if (size_t(in.gcount()) != n) {
            throw ParseError(ParseError::Kind::kTruncated, off, "index data ends early");
        }
        off += n;
    }
    uint8_t u8() {
        uint8_t v;
        bytes(&v, 1);
        return v;
    }
    uint16_t u16() {
        uint8_t b[2];
        bytes(b, 2);
        return uint16_t(b[0] | (uint16_t(b[1]) << 8));
    }
    uint32_t u32() {
        uint8_t b[4];
        bytes(b, 4);
        return uint32_t(b[0]) | (uint32_t(b[1]) << 8) | (uint32_t(b[2]) << 16) |
               (uint32_t(b[3]) << 24);
    }
    uint64_t u64() {
        uint8_t b[8];
        bytes(b, 8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }
};

[[noreturn]] void corrupt(uint64_t off, const std::string& what) {
    throw ParseError(ParseError::Kind::kCorrupt, off, what);
}

}  // namespace

struct HsigSerializer {
    static void save(const HsigIndex& x, std::ostream& out) {
        Writer w{out};
        const size_t n = x.data_.size();
        const uint32_t segment_count = x.bounds_.segment_count();

        w.bytes(kMagic, 4);
        w.u32(kVersion);
        w.u32(x.data_.dim());
        w.u64(n);
        w.u32(segment_count);
        w.u32(x.params_.max_degree);
        w.u32(x.params_.ef_construction);
        w.f64(x.level_norm_);
        w.u8(0);  // metric: squared Euclidean
        for (double c : x.bounds_.cuts()) w.f64(c);

        for (uint32_t id = 0; id < n; ++id) {
            const float* v = x.data_.vec(id);
            for (uint32_t i = 0; i < x.data_.dim(); ++i) w.f32(v[i]);
            w.f64(x.data_.attribute(id));
        }
        for (uint32_t id = 0; id < n; ++id) w.u32(x.levels_[id]);

        for (uint32_t layer = 0; layer < x.layers_.size(); ++layer) {
            for (uint32_t id = 0; id < n; ++id) {
                if (x.levels_[id] < layer) continue;
                const HsigIndex::Node* node = x.node_at(layer, id);
                for (uint32_t s = 0; s < segment_count; ++s) {
                    const size_t len = node->chunks[s].size();
                    if (len > 0xFFFF) {
                        throw std::runtime_error("index serialization: chunk too long");
                    }
                    w.u16(uint16_t(len));
                }
                for (uint32_t s = 0; s < segment_count; ++s) {
                    for (const Scored& e : node->chunks[s]) w.u32(e.id);
                }
                w.u32(node->next);
                const auto mask_bytes = node->mask.bytes();
                if (!mask_bytes.empty()) w.bytes(mask_bytes.data(), mask_bytes.size());
            }
        }
        out.flush();
    }

    static HsigIndex load(std::istream& in) {
        Reader r{in};

        {
            char magic[4];
            r.bytes(magic, 4);
            if (!std::equal(magic, magic + 4, kMagic)) {
                throw ParseError(ParseError::Kind::kBadMagic, 0, "not an index file");
            }
        }
        {
            const uint64_t at = r.off;
            const uint32_t version = r.u32();
            if (version != kVersion) {
                throw ParseError(ParseError::Kind::kBadVersion, at,
                                 "unsupported index version " + std::to_string(version));
            }
        }

        uint64_t at = r.off;
        const uint32_t dim = r.u32();
        if (dim == 0) corrupt(at, "dimension is zero");

        at = r.off;
        const uint64_t n = r.u64();
        if (n >= kInvalidId) corrupt(at, "object count overflows the id space");

        at = r.off;
        const uint32_t segment_count = r.u32();
        if (segment_count == 0) corrupt(at, "segment count is zero");

        at = r.off;
        const uint32_t max_degree = r.u32();
        if (max_degree < 2) corrupt(at, "max_degree below 2");

        at = r.off;
        const uint32_t ef_construction = r.u32();
        if (ef_construction == 0) corrupt(at, "ef_construction is zero");

        at = r.off;
        const double level_norm = r.f64();
        if (!std::isfinite(level_norm) || level_norm <= 0.0) corrupt(at, "bad level norm");

        at = r.off;
        const uint8_t metric = r.u8();
        if (metric != 0) corrupt(at, "unsupported metric tag " + std::to_string(metric));

        std::vector<double> cuts(segment_count - 1);
        for (uint32_t i = 0; i + 1 < segment_count; ++i) {
            at = r.off;
            cuts[i] = r.f64();
            if (!std::isfinite(cuts[i])) corrupt(at, "segment cut is not finite");
            if (i > 0 && cuts[i - 1] >= cuts[i]) corrupt(at, "segment cuts not increasing");
        }

        HsigParams params;
        params.segments = segment_count;
        params.max_degree = max_degree;
        params.ef_construction = ef_construction;
        params.level_norm = level_norm;
        HsigIndex x(dim, SegmentBoundaries(std::move(cuts)), params);

        std::vector<float> vec(dim);
        for (uint64_t id = 0; id < n; ++id) {
            for (uint32_t i = 0; i < dim; ++i) {
                at = r.off;
                vec[i] = r.f32();
                if (!std::isfinite(vec[i])) corrupt(at, "vector component is not finite");
            }
            at = r.off;
            const double attr = r.f64();
            if (!std::isfinite(attr)) corrupt(at, "attribute is not finite");
            x.data_.add(vec, attr);
            x.node_segment_.push_back(x.bounds_.segment_id(attr));
            x.attr_order_.emplace_back(attr, uint32_t(id));
        }
        std::sort(x.attr_order_.begin(), x.attr_order_.end());

        uint32_t top = 0;
        x.levels_.reserve(n);
        for (uint64_t id = 0; id < n; ++id) {
            at = r.off;
            const uint32_t level = r.u32();
            if (level > kMaxLevel) corrupt(at, "implausible node level");
            x.levels_.push_back(level);
            top = std::max(top, level);
        }

        if (n > 0) {
            for (uint32_t l = 0; l <= top; ++l) {
                HsigIndex::Layer layer;
                layer.is_base = (l == 0);
                x.layers_.push_back(std::move(layer));
            }
            for (uint64_t id = 0; id < n; ++id) {
                for (uint32_t l = 0; l <= x.levels_[id]; ++l) {
                    HsigIndex::Node shell;
                    shell.chunks.resize(segment_count);
                    if (l == 0) {
                        x.layers_[0].base.push_back(std::move(shell));
                    } else {
                        x.layers_[l].upper.emplace(uint32_t(id), std::move(shell));
                    }
                }
            }
        }

        std::vector<uint8_t> mask_bytes;
        for (uint32_t layer = 0; layer < x.layers_.size(); ++layer) {
            const uint32_t list_cap = (layer == 0) ? 2 * max_degree : max_degree;
            for (uint64_t id = 0; id < n; ++id) {
                if (x.levels_[id] < layer) continue;
                HsigIndex::Node* node = x.node_at(layer, uint32_t(id));

                std::vector<uint16_t> lens(segment_count);
                for (uint32_t s = 0; s < segment_count; ++s) {
                    at = r.off;
                    lens[s] = r.u16();
                    if (lens[s] > list_cap) corrupt(at, "chunk length over the degree cap");
                }
                size_t slots = 0;
                for (uint32_t s = 0; s < segment_count; ++s) {
                    auto& chunk = node->chunks[s];
                    chunk.reserve(lens[s]);
                    for (uint16_t i = 0; i < lens[s]; ++i) {
                        at = r.off;
                        const uint32_t nid = r.u32();
                        if (nid >= n) corrupt(at, "edge target out of range");
                        if (nid == id) corrupt(at, "self edge");
                        if (x.node_segment_[nid] != s) corrupt(at, "edge target in wrong segment");
                        if (x.levels_[nid] < layer) corrupt(at, "edge target absent from layer");
                        const Scored e{x.dist_sq_between(uint32_t(id), nid), nid};
                        if (!chunk.empty() && !scored_less(chunk.back(), e)) {
                            corrupt(at, "chunk not in (distance, id) order");
                        }
                        chunk.push_back(e);
                    }
                    slots += lens[s];
                }

                at = r.off;
                const uint32_t next = r.u32();
                if (next != kInvalidId && (next >= n || x.levels_[next] < layer)) {
                    corrupt(at, "chain successor absent from layer");
                }
                node->next = next;

                const size_t nbytes = (slots + 7) / 8;
                mask_bytes.resize(nbytes);
                at = r.off;
                if (nbytes > 0) r.bytes(mask_bytes.data(), nbytes);
                if (slots % 8 != 0 && nbytes > 0) {
                    const uint8_t tail = mask_bytes[nbytes - 1] >> (slots % 8);
                    if (tail != 0) corrupt(at, "mask has bits past its last slot");
                }
                node->mask.from_bytes(mask_bytes, slots);
                if (node->mask.count() > max_degree) {
                    corrupt(at, "mask selects more than max_degree edges");
                }
            }
        }

        if (in.peek() != std::char_traits<char>::eof()) {
            corrupt(r.off, "trailing bytes after the index");
        }

        // chain heads and entries are derived, not stored
        for (uint32_t layer = 0; layer < x.layers_.size(); ++layer) {
            uint32_t head = kInvalidId;
            double head_attr = 0.0;
            for (uint64_t id = 0; id < n; ++id) {
                if (x.levels_[id] < layer) continue;
                const double a = x.data_.attribute(uint32_t(id));
                if (head == kInvalidId || a < head_attr || (a == head_attr && id < head)) {
                    head = uint32_t(id);
                    head_attr = a;
                }
            }
            x.layers_[layer].head = head;
        }
        for (uint64_t id = 0; id < n; ++id) {
            const uint32_t seg = x.node_segment_[id];
            auto& st = x.segments_[seg];
            st.count += 1;
            if (st.entry == kInvalidId || int(x.levels_[id]) > st.max_level) {
                st.entry = uint32_t(id);
                st.max_level = int(x.levels_[id]);
            }
            if (x.global_entry_ == kInvalidId || int(x.levels_[id]) > x.global_max_level_) {
                x.global_entry_ = uint32_t(id);
                x.global_max_level_ = int(x.levels_[id]);
            }
        }

        const auto violations = x.validate_structure();
        if (!violations.empty()) {
            corrupt(r.off, "index fails validation: " + violations.front());
        }
        return x;
    }
};

void HsigIndex::serialize(std::ostream& out) const { HsigSerializer::save(*this, out); }

HsigIndex HsigIndex::deserialize(std::istream& in) { return HsigSerializer::load(in); }

}  // namespace hsig
