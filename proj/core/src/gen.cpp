#include "hsig/gen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace hsig {

namespace {

double u01(std::mt19937_64& rng) {
    return double(rng() >> 11) * 0x1.0p-53;  // 53-bit uniform in [0, 1)
}

}  // namespace

WidthSpec WidthSpec::parse(const std::string& text) {
    WidthSpec spec;
    const auto first = text.find(':');
    if (first == std::string::npos) {
        throw std::invalid_argument("width spec '" + text +
                                    "': expected fixed:W, log:A:B or uniform:A:B");
    }
    const std::string kind = text.substr(0, first);
    const std::string rest = text.substr(first + 1);
    auto parse_num = [&text](const std::string& s) {
        try {
            size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw std::invalid_argument("width spec '" + text + "': bad number '" + s + "'");
        }
    };
    if (kind == "fixed") {
        spec.kind = Kind::kFixed;
        spec.a = parse_num(rest);
        spec.b = spec.a;
    } else if (kind == "log" || kind == "uniform") {
        spec.kind = (kind == "log") ? Kind::kLogUniform : Kind::kUniform;
        const auto second = rest.find(':');
        if (second == std::string::npos) {
            throw std::invalid_argument("width spec '" + text + "': expected " + kind + ":A:B");
        }
        spec.a = parse_num(rest.substr(0, second));
        spec.b = parse_num(rest.substr(second + 1));
    } else {
        throw std::invalid_argument("width spec '" + text + "': unknown kind '" + kind + "'");
    }
    if (!(spec.a > 0.0) || spec.a > spec.b || spec.b > 1.0) {
        throw std::invalid_argument("width spec '" + text +
                                    "': fractions must satisfy 0 < A <= B <= 1");
    }
    return spec;
}

std::string WidthSpec::describe() const {
    char buf[96];
    switch (kind) {
        case Kind::kFixed:
            std::snprintf(buf, sizeof buf, "fixed:%g", a);
            break;
        case Kind::kLogUniform:
            std::snprintf(buf, sizeof buf, "log:%g:%g", a, b);
            break;
        case Kind::kUniform:
            std::snprintf(buf, sizeof buf, "uniform:%g:%g", a, b);
            break;
    }
    return buf;
}

double WidthSpec::draw(std::mt19937_64& rng) const {
    switch (kind) {
        case Kind::kFixed:
            return a;
        case Kind::kLogUniform:
            return std::exp(std::log(a) + u01(rng) * (std::log(b) - std::log(a)));
        case Kind::kUniform:
            return a + u01(rng) * (b - a);
    }
    return a;
}

Dataset gen_synthetic(size_t n, uint32_t dim, double attr_low, double attr_high, uint64_t seed) {
    if (n == 0) throw std::invalid_argument("gen_synthetic: n must be positive");
    if (!(attr_low <= attr_high)) {
        throw std::invalid_argument("gen_synthetic: attribute bounds out of order");
    }
    Dataset data(dim);
    std::mt19937_64 rng(seed);
    std::vector<float> vec(dim);
    for (size_t i = 0; i < n; ++i) {
        for (uint32_t d = 0; d < dim; ++d) vec[d] = float(u01(rng));
        const double attr = attr_low + u01(rng) * (attr_high - attr_low);
        data.add(vec, attr);
    }
    return data;
}

Workload gen_workload(const Dataset& data, uint32_t query_count, uint32_t k,
                      const WidthSpec& widths, uint64_t seed) {
    const size_t n = data.size();
    if (n == 0) throw std::invalid_argument("gen_workload: dataset is empty");
    if (k == 0) throw std::invalid_argument("gen_workload: k must be at least 1");

    std::vector<double> sorted(data.attributes().begin(), data.attributes().end());
    std::sort(sorted.begin(), sorted.end());

    Workload w;
    w.dim = data.dim();
    w.seed = seed;
    w.width_desc = widths.describe();
    w.queries.reserve(query_count);

    std::mt19937_64 rng(seed);
    std::vector<float> vec(data.dim());
    for (uint32_t i = 0; i < query_count; ++i) {
        const uint32_t base = uint32_t(rng() % n);
        const float* bv = data.vec(base);
        for (uint32_t d = 0; d < data.dim(); ++d) {
            vec[d] = bv[d] + float(u01(rng) * 0.04 - 0.02);
        }
        const double frac = widths.draw(rng);
        const uint64_t count = std::clamp<uint64_t>(uint64_t(std::llround(frac * double(n))), 1, n);
        const uint64_t start = (count == n) ? 0 : rng() % (n - count + 1);
        w.queries.emplace_back(vec, sorted[start], sorted[start + count - 1], k);
    }
    return w;
}

}  // namespace hsig
