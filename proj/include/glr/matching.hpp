#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "glr/edge.hpp"
#include "glr/tensor.hpp"

namespace glr {

/// How exemplars are chosen and how their groups are searched.
///  - BmUniform:        uniform exemplar grid, local-window block matching
///  - BmCorner:         corner exemplars, local-window block matching
///  - BmCornerUniform:  corners plus a sparse grid, local-window block matching
///  - Global:           corners plus a sparse grid, whole-image edge-overlap matching
enum class MatchMode { BmUniform, BmCorner, BmCornerUniform, Global };

/// Valid cross-correlation engines. Bitpacked only accepts {0,1} data.
enum class CorrBackend { Direct, Im2col, Fft, Bitpacked };

std::string to_string(MatchMode m);
std::string to_string(CorrBackend b);
MatchMode parse_match_mode(const std::string& s);
CorrBackend parse_backend(const std::string& s);

struct MatchConfig {
    int patch_size = 8;
    int group_size = 64;
    /// Half-width of the block-matching search window.
    int window_radius = 20;
    int bm_stride = 1;
    /// Exemplar stride of the uniform (vanilla) grid.
    int exemplar_stride = 6;
    /// Stride of the sparse grid added to corner exemplars; unset means
    /// three times exemplar_stride, 0 disables the grid.
    std::optional<int> uniform_interval;
    /// Minimum Chebyshev distance between members of a global-match group.
    /// 0 and 1 both allow any two distinct positions.
    int min_separation = 0;
    /// Optional squared-distance cutoff for block matching.
    std::optional<double> bm_threshold;
    MatchMode mode = MatchMode::Global;
    CorrBackend backend = CorrBackend::Bitpacked;
    /// Re-rank heat-map candidates by pixel distance. The candidate pool holds
    /// rerank_pool * group_size positions by score, ties at the cut going to
    /// the positions nearest the exemplar; members are then taken by
    /// ascending pixel distance.
    bool rerank = true;
    int rerank_pool = 4;
    /// Skip global-match groups whose exemplar has no edge pixels (their heat
    /// map is all zero, so the group carries no similarity information).
    bool skip_edgeless = false;
    /// Edge threshold relative to the largest absolute gradient.
    double edge_threshold = 0.2;
    int max_corners = 512;
    /// Corner suppression radius; unset means ceil(P/2).
    std::optional<int> nms_radius;
    double corner_quality = 0.01;

    int separation() const { return min_separation; }
    std::optional<int> sparse_interval() const {
        const int v = uniform_interval.value_or(3 * exemplar_stride);
        return v > 0 ? std::optional<int>(v) : std::nullopt;
    }
    CornerParams corner_params() const {
        return {max_corners, nms_radius.value_or((patch_size + 1) / 2), corner_quality};
    }
    /// Throws ConfigError on inconsistent values.
    void validate() const;
};

/// Per-exemplar score maps over all valid patch positions. Slice n has
/// (H-P+1) rows and (W-P+1) columns.
struct SimilarityHeatMap {
    int rows = 0;
    int cols = 0;
    std::vector<Eigen::MatrixXd> slices;
    std::vector<Anchor> anchors;

    double operator()(int u, int v, int n) const { return slices[std::size_t(n)](u, v); }
};

/// values[u, v, n] = sum_{p,q,c} input[u+p, v+q, c] * kernels[n][p, q, c]
/// (no flip, channels summed).
SimilarityHeatMap xcorr2_valid_batch(const Tensor3d& input, std::span<const Tensor3d> kernels,
                                     CorrBackend backend = CorrBackend::Direct);

/// Packed binary maps for fast overlap counting. Every valid P x P window of
/// each channel is stored as a P*P-bit code.
class BitpackedMaps {
public:
    BitpackedMaps(const Tensor3d& binary, int patch);
    /// Same codes as packing stack_edge_maps(edges), without building the stack.
    BitpackedMaps(const EdgeMaps& edges, int patch);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int patch() const { return patch_; }

    /// Codes of the window anchored at `a`, one block of words per channel.
    std::vector<std::uint64_t> kernel_at(Anchor a) const;
    /// Codes of a P x P x C binary kernel.
    std::vector<std::uint64_t> encode_kernel(const Tensor3d& kernel) const;
    /// Overlap counts of `kernel` at every position, row-major.
    void score(std::span<const std::uint64_t> kernel, std::span<std::uint32_t> out) const;
    /// Scores `count` kernels stored back to back; out holds one map per kernel.
    void score_batch(std::span<const std::uint64_t> kernels, std::size_t count, std::span<std::uint32_t> out) const;

private:
    BitpackedMaps(int height, int width, int channels, int patch);
    void pack_plane(const double* data, int stride, int height, int width, int channel);

    int rows_ = 0, cols_ = 0, channels_ = 0, patch_ = 0, words_ = 0;
    std::vector<std::uint64_t> codes_; // [channel][word][position]
};

struct TopK {
    std::vector<Anchor> positions;
    std::vector<double> scores;
    bool relaxed_separation = false;
    int repeated_exemplar = 0;
};

/// Pick `k` positions from a row-major score map: exemplar first, then by
/// descending score with row-major tie order, skipping positions closer than
/// `min_separation` (Chebyshev) to an already chosen one. If too few remain the
/// separation is dropped, then the exemplar is repeated.
TopK select_top_k(std::span<const double> scores, int rows, int cols, Anchor exemplar, int k, int min_separation);
TopK select_top_k(std::span<const std::uint32_t> scores, int rows, int cols, Anchor exemplar, int k,
                  int min_separation);

/// Exemplars for a matching mode. Corner modes detect corners on `grad`.
ExemplarSet exemplars_for_mode(const Gradients& grad, int height, int width, const MatchConfig& cfg);

/// Whole-image matching on edge overlap. Patches are gathered from `x`;
/// PatchGroup::scores holds the heat-map values.
std::vector<PatchGroupd> global_match(const Tensor3d& x, const ExemplarSet& exemplars, const MatchConfig& cfg,
                                      const EdgeMaps& edges);

/// Local-window KNN by squared pixel distance. PatchGroup::scores holds the
/// distances; the exemplar is first with distance 0.
std::vector<PatchGroupd> block_match(const Tensor3d& x, const ExemplarSet& exemplars, const MatchConfig& cfg);

/// The matching step alone: member positions and scores per exemplar, in the
/// order the group constructors above use. No patches are gathered.
std::vector<TopK> global_match_positions(const Tensor3d& x, const ExemplarSet& exemplars, const MatchConfig& cfg,
                                         const EdgeMaps& edges);
std::vector<TopK> block_match_positions(const Tensor3d& x, const ExemplarSet& exemplars, const MatchConfig& cfg);

} // namespace glr
