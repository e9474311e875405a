// Command-line front end: data/workload generation, index build and insert,
// single queries, benchmarking, threshold calibration, structural checks and
// scaling runs. Run `hsig --help` or `hsig <verb> --help` for usage.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hsig/bench.hpp"
#include "hsig/brute_force.hpp"
#include "hsig/gen.hpp"
#include "hsig/hsig.hpp"
#include "hsig/io.hpp"
#include "hsig/selector.hpp"
#include "hsig/sig_knng.hpp"

namespace {

std::pair<double, double> parse_range(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw CLI::ValidationError("--range", "expected LO:HI, got '" + text + "'");
    }
    try {
        size_t used = 0;
        const double lo = std::stod(text.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument("");
        const std::string hi_text = text.substr(colon + 1);
        const double hi = std::stod(hi_text, &used);
        if (used != hi_text.size()) throw std::invalid_argument("");
        if (lo > hi) throw CLI::ValidationError("--range", "lower bound exceeds upper bound");
        return {lo, hi};
    } catch (const std::invalid_argument&) {
        throw CLI::ValidationError("--range", "expected LO:HI, got '" + text + "'");
    } catch (const std::out_of_range&) {
        throw CLI::ValidationError("--range", "bound out of range in '" + text + "'");
    }
}

std::vector<float> parse_query_vector(const std::string& text, uint32_t dim) {
    std::vector<float> vec;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) {
        try {
            vec.push_back(std::stof(field));
        } catch (const std::exception&) {
            throw CLI::ValidationError("--query", "bad component '" + field + "'");
        }
    }
    if (vec.size() != dim) {
        throw CLI::ValidationError("--query", "expected " + std::to_string(dim) +
                                                  " components, got " +
                                                  std::to_string(vec.size()));
    }
    return vec;
}

hsig::NeighborSelection parse_selection(uint32_t tag) {
    if (tag == 1) return hsig::NeighborSelection::kTopAcrossChunks;
    if (tag == 2) return hsig::NeighborSelection::kPerChunkPrefix;
    throw CLI::ValidationError("--selection", "must be 1 (re-ranked) or 2 (per-chunk prefix)");
}

void write_text(const std::string& path, const std::string& body) {
    if (path.empty() || path == "-") {
        std::fputs(body.c_str(), stdout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << body;
    if (!out.flush()) throw std::runtime_error("failed writing " + path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hierarchical segmented-graph index for range-filtered vector search"};
    app.require_subcommand(1);

    // ---- gen-data ----------------------------------------------------------
    struct {
        uint64_t n = 10000;
        uint32_t dim = 16;
        double attr_low = 0.0, attr_high = 1.0;
        uint64_t seed = 1;
        std::string out_vectors, out_attrs;
    } gd;
    {
        auto* cmd = app.add_subcommand("gen-data", "generate uniform synthetic vectors+attributes");
        cmd->add_option("--n", gd.n, "object count")->capture_default_str();
        cmd->add_option("--dim", gd.dim, "vector dimension")->capture_default_str();
        cmd->add_option("--attr-low", gd.attr_low, "attribute lower bound")->capture_default_str();
        cmd->add_option("--attr-high", gd.attr_high, "attribute upper bound")->capture_default_str();
        cmd->add_option("--seed", gd.seed, "rng seed")->capture_default_str();
        cmd->add_option("--out-vectors", gd.out_vectors, ".fvecs output path")->required();
        cmd->add_option("--out-attrs", gd.out_attrs,
                        "attribute output path (.f64/.bin binary, else text)")
            ->required();
    }

    // ---- gen-workload ------------------------------------------------------
    struct {
        std::string vectors, attrs, out;
        uint32_t queries = 100;
        uint32_t k = 10;
        std::string widths = "log:0.001:1";
        uint64_t seed = 1;
    } gw;
    {
        auto* cmd = app.add_subcommand("gen-workload", "derive range queries from a dataset");
        cmd->add_option("--vectors", gw.vectors, "dataset .fvecs")->required();
        cmd->add_option("--attrs", gw.attrs, "dataset attributes")->required();
        cmd->add_option("--queries", gw.queries, "query count")->capture_default_str();
        cmd->add_option("--k", gw.k, "neighbors per query")->capture_default_str();
        cmd->add_option("--widths", gw.widths, "range width spec: fixed:W | log:A:B | uniform:A:B")
            ->capture_default_str();
        cmd->add_option("--seed", gw.seed, "rng seed")->capture_default_str();
        cmd->add_option("--out", gw.out, "workload output path")->required();
    }

    // ---- build -------------------------------------------------------------
    struct {
        std::string vectors, attrs, out;
        uint32_t segments = 8;
        uint32_t max_degree = 16;
        uint32_t ef_construction = 200;
        double level_norm = 0.0;
        uint64_t seed = 1;
        uint64_t sample_cap = 100000;
    } bd;
    {
        auto* cmd = app.add_subcommand("build", "build an index from a dataset");
        cmd->add_option("--vectors", bd.vectors, "dataset .fvecs")->required();
        cmd->add_option("--attrs", bd.attrs, "dataset attributes")->required();
        cmd->add_option("--out", bd.out, "index output path")->required();
        cmd->add_option("--segments", bd.segments, "attribute segments")->capture_default_str();
        cmd->add_option("--max-degree", bd.max_degree, "per-chunk degree bound")
            ->capture_default_str();
        cmd->add_option("--ef-construction", bd.ef_construction, "construction beam width")
            ->capture_default_str();
        cmd->add_option("--level-norm", bd.level_norm, "level scale (0 = 1/ln(max-degree))")
            ->capture_default_str();
        cmd->add_option("--seed", bd.seed, "level-draw rng seed")->capture_default_str();
        cmd->add_option("--sample-cap", bd.sample_cap, "boundary sample cap")
            ->capture_default_str();
    }

    // ---- insert ------------------------------------------------------------
    struct {
        std::string index, vectors, attrs, out;
    } ins;
    {
        auto* cmd = app.add_subcommand("insert", "append a dataset into an existing index");
        cmd->add_option("--index", ins.index, "index input path")->required();
        cmd->add_option("--vectors", ins.vectors, "new vectors .fvecs")->required();
        cmd->add_option("--attrs", ins.attrs, "new attributes")->required();
        cmd->add_option("--out", ins.out, "index output path (defaults to --index)");
    }

    // ---- search ------------------------------------------------------------
    struct {
        std::string index, range, query, strategy = "auto", thresholds;
        uint32_t k = 10;
        uint32_t ef = 150;
        uint32_t m = 16;
        uint32_t selection = 2;
    } se;
    {
        auto* cmd = app.add_subcommand("search", "answer one range-filtered query");
        cmd->add_option("--index", se.index, "index path")->required();
        cmd->add_option("--range", se.range, "attribute range LO:HI")->required();
        cmd->add_option("--query", se.query, "comma-separated query vector")->required();
        cmd->add_option("--k", se.k, "neighbors to return")->capture_default_str();
        cmd->add_option("--strategy", se.strategy, "pre | post | hybrid | auto")
            ->capture_default_str();
        cmd->add_option("--ef", se.ef, "beam width")->capture_default_str();
        cmd->add_option("--m", se.m, "hybrid per-hop expansion")->capture_default_str();
        cmd->add_option("--selection", se.selection, "hybrid edge selection: 1 re-ranked, 2 prefix")
            ->capture_default_str();
        cmd->add_option("--thresholds", se.thresholds, "calibrated thresholds file (auto)");
    }

    // ---- bench -------------------------------------------------------------
    struct {
        std::string index, workload, strategy = "hybrid", thresholds, oracle_cache, out;
        std::vector<uint32_t> efs;
        std::vector<uint32_t> ms;
        uint32_t selection = 2;
        uint32_t threads = 1;
    } be;
    {
        auto* cmd = app.add_subcommand("bench", "time a strategy over a workload");
        cmd->add_option("--index", be.index, "index path")->required();
        cmd->add_option("--workload", be.workload, "workload path")->required();
        cmd->add_option("--strategy", be.strategy, "pre | post | hybrid | auto")
            ->capture_default_str();
        cmd->add_option("--ef", be.efs, "beam width (repeatable for a sweep)");
        cmd->add_option("--m", be.ms, "hybrid expansion (repeatable for a sweep)");
        cmd->add_option("--selection", be.selection, "hybrid edge selection: 1 re-ranked, 2 prefix")
            ->capture_default_str();
        cmd->add_option("--threads", be.threads, "adds a sharded pass with this many threads")
            ->capture_default_str();
        cmd->add_option("--thresholds", be.thresholds, "calibrated thresholds file (auto)");
        cmd->add_option("--oracle-cache", be.oracle_cache, "cache file for exact answers");
        cmd->add_option("--out", be.out, "CSV output path (default stdout)");
    }

    // ---- calibrate ---------------------------------------------------------
    struct {
        std::string index, out;
        uint32_t queries = 200;
        double target = 0.9;
        uint32_t ef = 150;
        uint32_t m = 16;
        uint32_t k = 10;
        uint64_t seed = 1;
    } ca;
    {
        auto* cmd = app.add_subcommand("calibrate", "derive strategy thresholds by measurement");
        cmd->add_option("--index", ca.index, "index path")->required();
        cmd->add_option("--queries", ca.queries, "probe query count")->capture_default_str();
        cmd->add_option("--target", ca.target, "recall target")->capture_default_str();
        cmd->add_option("--ef", ca.ef, "probe beam width")->capture_default_str();
        cmd->add_option("--m", ca.m, "probe hybrid expansion")->capture_default_str();
        cmd->add_option("--k", ca.k, "probe k")->capture_default_str();
        cmd->add_option("--seed", ca.seed, "probe rng seed")->capture_default_str();
        cmd->add_option("--out", ca.out, "thresholds output path")->required();
    }

    // ---- validate-inclusivity ------------------------------------------------
    struct {
        std::string vectors, attrs, index;
        uint32_t segments = 8;
        uint32_t k = 10;
    } vi;
    {
        auto* cmd = app.add_subcommand(
            "validate-inclusivity",
            "check segmented-graph containment of exact neighbor graphs");
        cmd->add_option("--vectors", vi.vectors, "dataset .fvecs (exact segmented graph mode)");
        cmd->add_option("--attrs", vi.attrs, "dataset attributes");
        cmd->add_option("--index", vi.index, "built index (chunk containment report mode)");
        cmd->add_option("--segments", vi.segments, "segments (dataset mode)")
            ->capture_default_str();
        cmd->add_option("--k", vi.k, "neighbors per node")->capture_default_str();
    }

    // ---- scaling -------------------------------------------------------------
    struct {
        std::vector<uint64_t> sizes{10000, 20000, 40000, 80000};
        uint32_t dim = 16;
        uint32_t segments = 8;
        uint32_t max_degree = 16;
        uint32_t ef_construction = 200;
        uint32_t queries = 100;
        uint32_t k = 10;
        double width = 0.25;
        uint32_t ef = 200;
        uint32_t m = 16;
        uint64_t seed = 7;
        std::string out;
    } sc;
    {
        auto* cmd = app.add_subcommand("scaling", "build/search across increasing sizes");
        cmd->add_option("--sizes", sc.sizes, "collection sizes")->capture_default_str();
        cmd->add_option("--dim", sc.dim, "vector dimension")->capture_default_str();
        cmd->add_option("--segments", sc.segments, "attribute segments")->capture_default_str();
        cmd->add_option("--max-degree", sc.max_degree, "per-chunk degree bound")
            ->capture_default_str();
        cmd->add_option("--ef-construction", sc.ef_construction, "construction beam width")
            ->capture_default_str();
        cmd->add_option("--queries", sc.queries, "queries per size")->capture_default_str();
        cmd->add_option("--k", sc.k, "neighbors per query")->capture_default_str();
        cmd->add_option("--width", sc.width, "fixed range width fraction")->capture_default_str();
        cmd->add_option("--ef", sc.ef, "search beam width")->capture_default_str();
        cmd->add_option("--m", sc.m, "hybrid expansion")->capture_default_str();
        cmd->add_option("--seed", sc.seed, "rng seed")->capture_default_str();
        cmd->add_option("--out", sc.out, "CSV output path (default stdout)");
    }

    // ---- validate (index self-check) ----------------------------------------
    struct {
        std::string index;
    } va;
    {
        auto* cmd = app.add_subcommand("validate", "run the index structural self-check");
        cmd->add_option("--index", va.index, "index path")->required();
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("gen-data")) {
            const hsig::Dataset data =
                hsig::gen_synthetic(gd.n, gd.dim, gd.attr_low, gd.attr_high, gd.seed);
            hsig::save_fvecs(gd.out_vectors, data.vec(0), data.size(), data.dim());
            if (gd.out_attrs.size() >= 4 &&
                (gd.out_attrs.ends_with(".f64") || gd.out_attrs.ends_with(".bin"))) {
                hsig::save_attributes_f64(gd.out_attrs, data.attributes());
            } else {
                hsig::save_attributes_text(gd.out_attrs, data.attributes());
            }
            std::printf("wrote %zu vectors (dim %u) to %s and attributes to %s\n", data.size(),
                        data.dim(), gd.out_vectors.c_str(), gd.out_attrs.c_str());
        } else if (app.got_subcommand("gen-workload")) {
            const hsig::Dataset data = hsig::load_dataset(gw.vectors, gw.attrs);
            const hsig::WidthSpec widths = hsig::WidthSpec::parse(gw.widths);
            const hsig::Workload w =
                hsig::gen_workload(data, gw.queries, gw.k, widths, gw.seed);
            hsig::save_workload(gw.out, w);
            std::printf("wrote %zu queries (k=%u, widths %s) to %s\n", w.queries.size(), gw.k,
                        w.width_desc.c_str(), gw.out.c_str());
        } else if (app.got_subcommand("build")) {
            const hsig::Dataset data = hsig::load_dataset(bd.vectors, bd.attrs);
            hsig::HsigParams params;
            params.segments = bd.segments;
            params.max_degree = bd.max_degree;
            params.ef_construction = bd.ef_construction;
            params.level_norm = bd.level_norm;
            params.seed = bd.seed;
            const hsig::HsigIndex index = hsig::build_hsig(data, params, bd.sample_cap);
            hsig::save_index(bd.out, index);
            std::printf("built index over %zu objects (%u segments, layers 0..%d) -> %s\n",
                        index.size(), index.segment_count(), index.max_level(), bd.out.c_str());
        } else if (app.got_subcommand("insert")) {
            hsig::HsigIndex index = hsig::load_index(ins.index);
            const hsig::Dataset more = hsig::load_dataset(ins.vectors, ins.attrs);
            if (more.dim() != index.dim()) {
                throw std::runtime_error("new vectors have dimension " +
                                         std::to_string(more.dim()) + ", index expects " +
                                         std::to_string(index.dim()));
            }
            hsig::AttributedVector v;
            v.values.resize(more.dim());
            for (uint32_t i = 0; i < more.size(); ++i) {
                v.id = uint32_t(index.size());
                std::copy(more.vec(i), more.vec(i) + more.dim(), v.values.begin());
                v.attribute = more.attribute(i);
                index.insert(v);
            }
            const std::string out = ins.out.empty() ? ins.index : ins.out;
            hsig::save_index(out, index);
            std::printf("inserted %zu objects; index now holds %zu -> %s\n", size_t(more.size()),
                        index.size(), out.c_str());
        } else if (app.got_subcommand("search")) {
            const hsig::HsigIndex index = hsig::load_index(se.index);
            const auto [lo, hi] = parse_range(se.range);
            const hsig::RangeQuery q(parse_query_vector(se.query, index.dim()), lo, hi, se.k);
            hsig::SearchParams params;
            params.ef = std::max(se.ef, se.k);
            params.m = se.m;
            params.selection = parse_selection(se.selection);

            hsig::ResultSet res;
            std::string used = se.strategy;
            if (se.strategy == "pre") {
                res = index.search_pre(q);
            } else if (se.strategy == "post") {
                res = index.search_post(q, params.ef);
            } else if (se.strategy == "hybrid") {
                res = index.search_hybrid(q, params);
            } else if (se.strategy == "auto") {
                hsig::Thresholds t = hsig::Thresholds::defaults_for(index.size());
                if (!se.thresholds.empty()) t = hsig::load_thresholds(se.thresholds);
                hsig::RoutedResult routed = hsig::search_auto(index, q, params, t);
                res = std::move(routed.results);
                used = std::string("auto -> ") + hsig::strategy_name(routed.strategy);
            } else {
                throw std::runtime_error("unknown strategy '" + se.strategy + "'");
            }
            std::printf("strategy %s, %zu in range, %zu hits\n", used.c_str(),
                        index.range_cardinality(lo, hi), res.hits.size());
            for (const hsig::SearchHit& h : res.hits) {
                std::printf("%u %.6f %.17g\n", h.id, h.distance, index.data().attribute(h.id));
            }
        } else if (app.got_subcommand("bench")) {
            const hsig::HsigIndex index = hsig::load_index(be.index);
            const hsig::Workload w = hsig::load_workload(be.workload);
            std::vector<hsig::ResultSet> oracle;
            const bool cached = !be.oracle_cache.empty() &&
                                hsig::load_oracle_cache(be.oracle_cache, index.size(), w, oracle);
            if (!cached) {
                oracle = hsig::compute_oracle(index.data(), w);
                if (!be.oracle_cache.empty()) {
                    hsig::save_oracle_cache(be.oracle_cache, index.size(), w, oracle);
                }
            }
            hsig::BenchOptions options;
            options.strategy = be.strategy;
            if (!be.efs.empty()) options.ef_sweep = be.efs;
            if (!be.ms.empty()) options.m_sweep = be.ms;
            options.selection = parse_selection(be.selection);
            options.threads = be.threads;
            options.seed = w.seed;
            hsig::Thresholds t = hsig::Thresholds::defaults_for(index.size());
            if (!be.thresholds.empty()) t = hsig::load_thresholds(be.thresholds);
            const hsig::BenchReport report = hsig::run_benchmark(index, w, oracle, options, &t);
            write_text(be.out, report.to_csv());
        } else if (app.got_subcommand("calibrate")) {
            const hsig::HsigIndex index = hsig::load_index(ca.index);
            hsig::CalibrationOptions opt;
            opt.sample_queries = ca.queries;
            opt.recall_target = ca.target;
            opt.params.ef = ca.ef;
            opt.params.m = ca.m;
            opt.k = ca.k;
            opt.seed = ca.seed;
            const hsig::CalibrationReport rep = hsig::calibrate(index, opt);
            hsig::save_thresholds(ca.out, rep.thresholds, ca.target);
            std::printf("# bucket  y_lo..y_hi  queries  pre_us  hybrid_us  post_us  "
                        "hybrid_recall  post_recall\n");
            for (size_t b = 0; b < rep.rows.size(); ++b) {
                const auto& row = rep.rows[b];
                std::printf("%6zu  %" PRIu64 "..%" PRIu64 "  %u  %.1f  %.1f  %.1f  %.3f  %.3f\n",
                            b, row.y_lo, row.y_hi, row.queries, row.pre_us, row.hybrid_us,
                            row.post_us, row.hybrid_recall, row.post_recall);
            }
            std::printf("%s%s: tau_a=%" PRIu64 " tau_b=%" PRIu64 " -> %s\n", rep.note.c_str(),
                        rep.ef_doubled ? " (ef doubled)" : "", rep.thresholds.tau_a,
                        rep.thresholds.tau_b, ca.out.c_str());
            if (rep.fell_back) return 2;
        } else if (app.got_subcommand("validate-inclusivity")) {
            if (!vi.index.empty()) {
                const hsig::HsigIndex index = hsig::load_index(vi.index);
                const uint32_t segments = index.segment_count();
                double worst = 100.0;
                for (uint32_t lo = 0; lo < segments; ++lo) {
                    for (uint32_t hi = lo; hi < segments; ++hi) {
                        std::vector<uint32_t> members;
                        for (uint32_t id = 0; id < index.size(); ++id) {
                            const uint32_t s = index.segment_of(id);
                            if (s >= lo && s <= hi) members.push_back(id);
                        }
                        if (members.size() < 2) continue;
                        const hsig::DirectedGraph reference = hsig::knng_over_members(
                            index.data(), members, std::min<uint32_t>(vi.k, uint32_t(members.size() - 1)));
                        const hsig::DirectedGraph candidate = index.chunk_union_graph(0, lo, hi);
                        const double pct = hsig::inclusiveness(candidate, reference);
                        worst = std::min(worst, pct);
                        std::printf("segments %u..%u: %.2f%% of exact %u-NN edges present\n", lo,
                                    hi, pct, vi.k);
                    }
                }
                std::printf("worst combination: %.2f%%\n", worst);
            } else if (!vi.vectors.empty() && !vi.attrs.empty()) {
                const hsig::Dataset data = hsig::load_dataset(vi.vectors, vi.attrs);
                const hsig::SegmentBoundaries bounds =
                    hsig::build_boundaries_sampled(data.attributes(), vi.segments);
                const hsig::SigKnng sig = hsig::build_sig_knng(data, bounds, vi.k);
                if (sig.segment_count > 16) {
                    std::fprintf(stderr,
                                 "validate-inclusivity: %u segments means %llu combinations; "
                                 "use --segments 16 or fewer\n",
                                 sig.segment_count,
                                 (unsigned long long)(1ull << sig.segment_count) - 1);
                    return 1;
                }
                bool ok = true;
                for (uint32_t mask = 1; mask < (1u << sig.segment_count); ++mask) {
                    std::vector<uint32_t> combo;
                    std::string label;
                    for (uint32_t s = 0; s < sig.segment_count; ++s) {
                        if (mask & (1u << s)) {
                            combo.push_back(s);
                            label += (label.empty() ? "" : ",") + std::to_string(s);
                        }
                    }
                    const double ratio = hsig::check_inclusivity(sig, data, bounds, combo);
                    if (ratio < 1.0) ok = false;
                    std::printf("segments {%s}: containment %.6f\n", label.c_str(), ratio);
                }
                std::printf("%s\n", ok ? "containment holds for every combination"
                                       : "containment VIOLATED");
                if (!ok) return 1;
            } else {
                throw std::runtime_error(
                    "validate-inclusivity needs --index, or --vectors with --attrs");
            }
        } else if (app.got_subcommand("scaling")) {
            hsig::ScalingOptions options;
            options.sizes.assign(sc.sizes.begin(), sc.sizes.end());
            options.dim = sc.dim;
            options.params.segments = sc.segments;
            options.params.max_degree = sc.max_degree;
            options.params.ef_construction = sc.ef_construction;
            options.queries = sc.queries;
            options.k = sc.k;
            options.width = sc.width;
            options.ef = sc.ef;
            options.m = sc.m;
            options.seed = sc.seed;
            const hsig::ScalingReport report = hsig::run_scaling(options);
            write_text(sc.out, report.to_csv());
            std::printf("latency fit: %.3f * ln(n) + %.3f us", report.fit_a, report.fit_b);
            for (size_t i = 0; i < report.fit_residual.size(); ++i) {
                std::printf("%s%.1f%%", i == 0 ? "  (residuals " : ", ",
                            100.0 * report.fit_residual[i]);
            }
            std::printf(")\n");
        } else if (app.got_subcommand("validate")) {
            const hsig::HsigIndex index = hsig::load_index(va.index);
            const std::vector<std::string> bad = index.validate_structure();
            if (bad.empty()) {
                std::printf("index is structurally sound (%zu objects, layers 0..%d)\n",
                            index.size(), index.max_level());
            } else {
                for (const std::string& b : bad) std::fprintf(stderr, "violation: %s\n", b.c_str());
                return 1;
            }
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
