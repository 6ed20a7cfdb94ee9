#include "glr/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <sstream>

#include "glr/edge.hpp"
#include "glr/error.hpp"
#include "glr/io.hpp"
#include "glr/scenes.hpp"

namespace glr {

std::string to_string(BenchMode m) {
    switch (m) {
    case BenchMode::Gm: return "gm";
    case BenchMode::GmRerank: return "gm-rerank";
    case BenchMode::Bm: return "bm";
    }
    return "?";
}

BenchMode parse_bench_mode(const std::string& s) {
    if (s == "gm") return BenchMode::Gm;
    if (s == "gm-rerank") return BenchMode::GmRerank;
    if (s == "bm") return BenchMode::Bm;
    throw ConfigError("unknown bench mode '" + s + "' (expected gm, gm-rerank or bm)");
}

void BenchOptions::validate() const {
    if (sizes.empty() || channels.empty() || modes.empty()) throw ConfigError("bench needs sizes, channels and modes");
    if (repeats < 1) throw ConfigError("bench repeats must be at least 1");
    for (int s : sizes)
        if (s < match.patch_size) throw ConfigError("bench size smaller than the patch");
    for (int c : channels)
        if (c < 1) throw ConfigError("bench channel counts must be positive");
    match.validate();
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) { return std::chrono::duration<double, std::milli>(Clock::now() - t0).count(); }

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::uint64_t digest_of(const std::vector<TopK>& groups) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xff;
            h *= 1099511628211ull;
        }
    };
    for (const TopK& g : groups) {
        mix(g.positions.size());
        for (Anchor a : g.positions) mix((std::uint64_t(std::uint32_t(a.row)) << 32) | std::uint32_t(a.col));
    }
    return h;
}

} // namespace

std::vector<BenchRow> bench_matching(const BenchOptions& opts) {
    opts.validate();
    std::vector<BenchRow> rows;
    for (int size : opts.sizes) {
        for (int C : opts.channels) {
            const Tensor3d x = multispectral_scene(size, size, C, opts.seed);
            const Gradients grad = sobel_gradients(x);
            MatchConfig base = opts.match;
            base.mode = MatchMode::Global;
            const ExemplarSet ex = exemplars_for_mode(grad, size, size, base);
            const std::size_t first = rows.size();
            for (BenchMode mode : opts.modes) {
                MatchConfig cfg = base;
                cfg.rerank = mode == BenchMode::GmRerank;
                std::vector<double> match_t, gather_t, total_t;
                std::uint64_t digest = 0;
                for (int r = 0; r < opts.repeats; ++r) {
                    auto t0 = Clock::now();
                    std::vector<TopK> found;
                    if (mode == BenchMode::Bm) {
                        found = block_match_positions(x, ex, cfg);
                    } else {
                        const EdgeMaps edges = binarize_gradients(grad, cfg.edge_threshold);
                        found = global_match_positions(x, ex, cfg, edges);
                    }
                    const double tm = elapsed_ms(t0);
                    t0 = Clock::now();
                    std::vector<PatchGroupd> groups;
                    groups.reserve(found.size());
                    for (const TopK& g : found)
                        groups.push_back(gather_group(x, std::span<const Anchor>(g.positions), cfg.patch_size));
                    const double tg = elapsed_ms(t0);
                    match_t.push_back(tm);
                    gather_t.push_back(tg);
                    total_t.push_back(tm + tg);
                    const std::uint64_t d = digest_of(found);
                    if (r > 0 && d != digest) throw Error("matching is not deterministic across repeats");
                    digest = d;
                }
                BenchRow row;
                row.mode = mode;
                row.height = row.width = size;
                row.channels = C;
                row.patch = cfg.patch_size;
                row.exemplars = ex.size();
                row.group_size = cfg.group_size;
                row.repeats = opts.repeats;
                row.match_ms = median(match_t);
                row.match_min_ms = *std::min_element(match_t.begin(), match_t.end());
                row.gather_ms = median(gather_t);
                row.total_ms = median(total_t);
                row.digest = digest;
                rows.push_back(row);
            }
            const auto bm = std::find_if(rows.begin() + std::ptrdiff_t(first), rows.end(),
                                         [](const BenchRow& r) { return r.mode == BenchMode::Bm; });
            if (bm != rows.end()) {
                const double bm_match = bm->match_ms, bm_total = bm->total_ms;
                for (std::size_t i = first; i < rows.size(); ++i) {
                    rows[i].bm_ratio_match = bm_match / rows[i].match_ms;
                    rows[i].bm_ratio_total = bm_total / rows[i].total_ms;
                }
            }
        }
    }
    return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream os;
    os << "mode,height,width,channels,patch,exemplars,group_size,repeats,t_match_ms,t_match_min_ms,t_gather_ms,"
          "t_total_ms,bm_over_mode_match,bm_over_mode_total,digest\n";
    char buf[512];
    for (const BenchRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%d,%d,%d,%d,%zu,%d,%d,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f,%016llx\n",
                      to_string(r.mode).c_str(), r.height, r.width, r.channels, r.patch, r.exemplars, r.group_size,
                      r.repeats, r.match_ms, r.match_min_ms, r.gather_ms, r.total_ms, r.bm_ratio_match,
                      r.bm_ratio_total, static_cast<unsigned long long>(r.digest));
        os << buf;
    }
    return os.str();
}

void write_plot_data(const std::filesystem::path& dir, const std::vector<BenchRow>& rows) {
    std::filesystem::create_directories(dir);
    std::vector<BenchMode> modes;
    std::map<std::pair<int, int>, std::map<BenchMode, const BenchRow*>> table;
    for (const BenchRow& r : rows) {
        if (std::find(modes.begin(), modes.end(), r.mode) == modes.end()) modes.push_back(r.mode);
        table[{r.height, r.channels}][r.mode] = &r;
    }
    std::ostringstream times, ratios;
    times << "size,channels";
    ratios << "size,channels";
    for (BenchMode m : modes) {
        times << "," << to_string(m) << "_ms";
        if (m != BenchMode::Bm) ratios << ",bm_over_" << to_string(m);
    }
    times << "\n";
    ratios << "\n";
    char buf[64];
    for (const auto& [key, by_mode] : table) {
        times << key.first << "," << key.second;
        ratios << key.first << "," << key.second;
        for (BenchMode m : modes) {
            const auto it = by_mode.find(m);
            std::snprintf(buf, sizeof buf, ",%.4f", it == by_mode.end() ? 0.0 : it->second->match_ms);
            times << buf;
            if (m != BenchMode::Bm) {
                std::snprintf(buf, sizeof buf, ",%.4f", it == by_mode.end() ? 0.0 : it->second->bm_ratio_match);
                ratios << buf;
            }
        }
        times << "\n";
        ratios << "\n";
    }
    write_text_file(dir / "match_time_vs_channels.csv", times.str());
    write_text_file(dir / "match_ratio_vs_channels.csv", ratios.str());
}

} // namespace glr
