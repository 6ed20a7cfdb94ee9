#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "glr/matching.hpp"

namespace glr {

/// Matching strategies timed by the bench. All of them use the same exemplar
/// set (corners plus the sparse grid) so their work is comparable.
///  - gm:         edge heat maps, top-K by overlap
///  - gm-rerank:  edge heat maps, candidate pool (nearest ties at the cut) re-sorted by pixel distance
///  - bm:         local-window KNN by pixel distance
enum class BenchMode { Gm, GmRerank, Bm };

std::string to_string(BenchMode m);
BenchMode parse_bench_mode(const std::string& s);

struct BenchOptions {
    std::vector<int> sizes{128};
    std::vector<int> channels{1, 3, 6};
    std::vector<BenchMode> modes{BenchMode::Gm, BenchMode::GmRerank, BenchMode::Bm};
    int repeats = 5;
    std::uint64_t seed = 3;
    /// Matching parameters; mode and rerank are set per row.
    MatchConfig match;

    void validate() const;
};

/// One (size, channels, mode) configuration. Times are wall-clock
/// milliseconds: match finds member positions, gather copies the patches
/// into group matrices, total is both. Gradients are shared with exemplar
/// detection and not timed; edge binarization is part of gm's match phase.
struct BenchRow {
    BenchMode mode = BenchMode::Gm;
    int height = 0;
    int width = 0;
    int channels = 0;
    int patch = 0;
    std::size_t exemplars = 0;
    int group_size = 0;
    int repeats = 0;
    double match_ms = 0.0;     // median over repeats
    double match_min_ms = 0.0; // fastest repeat
    double gather_ms = 0.0;
    double total_ms = 0.0;
    /// bm time divided by this row's time at the same size and channels;
    /// 0 when bm was not run.
    double bm_ratio_match = 0.0;
    double bm_ratio_total = 0.0;
    /// FNV-1a over every group's positions; equal seeds give equal digests.
    std::uint64_t digest = 0;
};

/// Runs every configuration sequentially on multispectral_scene(size, size,
/// channels, seed).
std::vector<BenchRow> bench_matching(const BenchOptions& opts);

/// Header plus one line per row.
std::string bench_csv(const std::vector<BenchRow>& rows);

/// Plot-ready tables keyed by (size, channels): match_time_vs_channels.csv
/// with one median-time column per mode, and match_ratio_vs_channels.csv with
/// the bm/mode ratio of each non-bm mode.
void write_plot_data(const std::filesystem::path& dir, const std::vector<BenchRow>& rows);

} // namespace glr
