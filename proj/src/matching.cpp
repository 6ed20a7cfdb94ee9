#include "glr/matching.hpp"

#include <algorithm>
#include <cmath>
#include <bit>
#include <complex>
#include <functional>
#include <numeric>

#if defined(__AVX512F__) && defined(__AVX512VPOPCNTDQ__)
#include <immintrin.h>
#define GLR_AVX512_POPCNT 1
#endif

#include "glr/fft.hpp"

namespace glr {

std::string to_string(MatchMode m) {
    switch (m) {
    case MatchMode::BmUniform: return "bm-uniform";
    case MatchMode::BmCorner: return "bm-corner";
    case MatchMode::BmCornerUniform: return "bm-corner-uniform";
    case MatchMode::Global: return "gm";
    }
    return "?";
}

std::string to_string(CorrBackend b) {
    switch (b) {
    case CorrBackend::Direct: return "direct";
    case CorrBackend::Im2col: return "im2col";
    case CorrBackend::Fft: return "fft";
    case CorrBackend::Bitpacked: return "bitpacked";
    }
    return "?";
}

MatchMode parse_match_mode(const std::string& s) {
    for (auto m : {MatchMode::BmUniform, MatchMode::BmCorner, MatchMode::BmCornerUniform, MatchMode::Global})
        if (to_string(m) == s) return m;
    throw ConfigError("unknown matching mode '" + s + "'");
}

CorrBackend parse_backend(const std::string& s) {
    for (auto b : {CorrBackend::Direct, CorrBackend::Im2col, CorrBackend::Fft, CorrBackend::Bitpacked})
        if (to_string(b) == s) return b;
    throw ConfigError("unknown correlation backend '" + s + "'");
}

void MatchConfig::validate() const {
    if (patch_size < 2) throw ConfigError("patch_size must be at least 2");
    if (group_size < 1) throw ConfigError("group_size must be at least 1");
    if (bm_stride < 1) throw ConfigError("bm_stride must be at least 1");
    if (exemplar_stride < 1) throw ConfigError("exemplar_stride must be at least 1");
    if (uniform_interval && *uniform_interval < 0) throw ConfigError("uniform_interval must be nonnegative");
    if (min_separation < 0) throw ConfigError("min_separation must be nonnegative");
    if (nms_radius && *nms_radius < 0) throw ConfigError("nms_radius must be nonnegative");
    if (max_corners < 1) throw ConfigError("max_corners must be at least 1");
    if (rerank_pool < 1) throw ConfigError("rerank_pool must be at least 1");
    if (!(edge_threshold >= 0.0)) throw ConfigError("edge_threshold must be nonnegative");
    if (mode != MatchMode::Global && window_radius < patch_size)
        throw ConfigError("block-matching window radius must be at least the patch size");
    if (backend == CorrBackend::Bitpacked && patch_size > 64)
        throw ConfigError("bitpacked backend supports patches up to 64 pixels wide");
}

// ---------------------------------------------------------------------------
// correlation backends

namespace {

void check_kernels(const Tensor3d& input, std::span<const Tensor3d> kernels) {
    if (kernels.empty()) return;
    const Tensor3d& k0 = kernels.front();
    if (k0.height() != k0.width()) throw ShapeError("correlation kernels must be square");
    if (k0.height() > input.height() || k0.width() > input.width())
        throw ShapeError("correlation kernel larger than input");
    if (k0.channels() != input.channels()) throw ShapeError("kernel and input channel counts differ");
    for (const auto& k : kernels)
        if (!k.same_shape(k0)) throw ShapeError("all correlation kernels must share one shape");
}

void xcorr_direct(const Tensor3d& in, std::span<const Tensor3d> kernels, SimilarityHeatMap& hm) {
    const int P = kernels.front().height(), C = in.channels(), row_len = P * C;
    for (std::size_t n = 0; n < kernels.size(); ++n) {
        const Tensor3d& k = kernels[n];
        Eigen::MatrixXd& s = hm.slices[n];
        for (int u = 0; u < hm.rows; ++u) {
            for (int v = 0; v < hm.cols; ++v) {
                double acc = 0.0;
                for (int p = 0; p < P; ++p) {
                    const double* a = in.pixel(u + p, v);
                    const double* b = k.pixel(p, 0);
                    for (int i = 0; i < row_len; ++i) acc += a[i] * b[i];
                }
                s(u, v) = acc;
            }
        }
    }
}

void xcorr_im2col(const Tensor3d& in, std::span<const Tensor3d> kernels, SimilarityHeatMap& hm) {
    const int P = kernels.front().height();
    std::vector<Anchor> all;
    all.reserve(std::size_t(hm.rows) * hm.cols);
    for (int u = 0; u < hm.rows; ++u)
        for (int v = 0; v < hm.cols; ++v) all.push_back({u, v});
    const PatchGroupd cols = gather_group(in, std::span<const Anchor>(all), P);
    Eigen::MatrixXd kmat(cols.matrix.rows(), Index(kernels.size()));
    for (std::size_t n = 0; n < kernels.size(); ++n) kmat.col(Index(n)) = kernels[n].data();
    const Eigen::MatrixXd scores = cols.matrix.transpose() * kmat;
    for (std::size_t n = 0; n < kernels.size(); ++n) {
        hm.slices[n] = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            scores.col(Index(n)).data(), hm.rows, hm.cols);
    }
}

Eigen::MatrixXcd padded_plane(const Tensor3d& t, int c, int rows, int cols) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(rows, cols);
    for (int h = 0; h < t.height(); ++h)
        for (int w = 0; w < t.width(); ++w) m(h, w) = t(h, w, c);
    return m;
}

void xcorr_fft(const Tensor3d& in, std::span<const Tensor3d> kernels, SimilarityHeatMap& hm) {
    const int C = in.channels();
    const int rows = next_pow2(in.height()), cols = next_pow2(in.width());
    std::vector<Eigen::MatrixXcd> spectra;
    spectra.reserve(std::size_t(C));
    for (int c = 0; c < C; ++c) {
        spectra.push_back(padded_plane(in, c, rows, cols));
        fft2(spectra.back());
    }
    for (std::size_t n = 0; n < kernels.size(); ++n) {
        Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(rows, cols);
        for (int c = 0; c < C; ++c) {
            Eigen::MatrixXcd k = padded_plane(kernels[n], c, rows, cols);
            fft2(k);
            acc.array() += spectra[std::size_t(c)].array() * k.array().conjugate();
        }
        fft2(acc, true);
        hm.slices[n] = acc.topLeftCorner(hm.rows, hm.cols).real();
    }
}

bool is_binary(const Tensor3d& t) {
    return ((t.data().array() == 0.0) || (t.data().array() == 1.0)).all();
}

} // namespace

BitpackedMaps::BitpackedMaps(int height, int width, int channels, int patch)
    : rows_(height - patch + 1), cols_(width - patch + 1), channels_(channels), patch_(patch),
      words_((patch * patch + 63) / 64) {
    if (patch < 1 || patch > 64) throw ConfigError("bitpacked backend supports patch sizes 1..64");
    if (rows_ < 1 || cols_ < 1) throw ShapeError("correlation kernel larger than input");
    codes_.assign(std::size_t(channels_) * words_ * std::size_t(rows_) * cols_, 0);
}

BitpackedMaps::BitpackedMaps(const Tensor3d& binary, int patch)
    : BitpackedMaps(binary.height(), binary.width(), binary.channels(), patch) {
    if (!is_binary(binary)) throw ConfigError("bitpacked backend requires {0,1} input");
    for (int ch = 0; ch < channels_; ++ch)
        pack_plane(binary.data().data() + ch, channels_, binary.height(), binary.width(), ch);
}

BitpackedMaps::BitpackedMaps(const EdgeMaps& edges, int patch)
    : BitpackedMaps(edges.h_pos.height(), edges.h_pos.width(), 4 * edges.h_pos.channels(), patch) {
    const Tensor3d* maps[4] = {&edges.h_pos, &edges.h_neg, &edges.v_pos, &edges.v_neg};
    const int C = edges.h_pos.channels();
    for (int m = 0; m < 4; ++m) {
        if (!maps[m]->same_shape(edges.h_pos)) throw ShapeError("edge maps differ in shape");
        if (!is_binary(*maps[m])) throw ConfigError("bitpacked backend requires {0,1} input");
        for (int c = 0; c < C; ++c)
            pack_plane(maps[m]->data().data() + c, C, maps[m]->height(), maps[m]->width(), m * C + c);
    }
}

void BitpackedMaps::pack_plane(const double* data, int stride, int H, int W, int ch) {
    const int patch = patch_;
    const std::size_t npos = std::size_t(rows_) * cols_;
    const std::uint64_t top = std::uint64_t(1) << (patch - 1);
    std::vector<std::uint8_t> plane(std::size_t(H) * W);
    for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = data[i * std::size_t(stride)] != 0.0;
    // bit q of rowbits(r, v) is pixel (r, v + q)
    std::vector<std::uint64_t> rowbits(std::size_t(H) * cols_);
    for (int r = 0; r < H; ++r) {
        const std::uint8_t* row = plane.data() + std::size_t(r) * W;
        std::uint64_t bits = 0;
        for (int q = 0; q < patch; ++q) bits |= std::uint64_t(row[q]) << q;
        std::uint64_t* out = rowbits.data() + std::size_t(r) * cols_;
        out[0] = bits;
        for (int v = 1; v < cols_; ++v) {
            bits = (bits >> 1) | (row[v + patch - 1] ? top : 0);
            out[v] = bits;
        }
    }
    std::uint64_t* base = codes_.data() + std::size_t(ch) * words_ * npos;
    for (int p = 0; p < patch; ++p) {
        const int offset = p * patch, w = offset / 64, shift = offset % 64;
        const bool spill = shift + patch > 64;
        for (int u = 0; u < rows_; ++u) {
            const std::uint64_t* src = rowbits.data() + std::size_t(u + p) * cols_;
            std::uint64_t* dst = base + std::size_t(w) * npos + std::size_t(u) * cols_;
            for (int v = 0; v < cols_; ++v) dst[v] |= src[v] << shift;
            if (spill) {
                std::uint64_t* dst2 = base + std::size_t(w + 1) * npos + std::size_t(u) * cols_;
                for (int v = 0; v < cols_; ++v) dst2[v] |= src[v] >> (64 - shift);
            }
        }
    }
}

std::vector<std::uint64_t> BitpackedMaps::kernel_at(Anchor a) const {
    const std::size_t npos = std::size_t(rows_) * cols_;
    const std::size_t pos = std::size_t(a.row) * cols_ + a.col;
    std::vector<std::uint64_t> k(std::size_t(channels_) * words_);
    for (std::size_t i = 0; i < k.size(); ++i) k[i] = codes_[i * npos + pos];
    return k;
}

std::vector<std::uint64_t> BitpackedMaps::encode_kernel(const Tensor3d& kernel) const {
    if (kernel.height() != patch_ || kernel.width() != patch_ || kernel.channels() != channels_)
        throw ShapeError("kernel shape does not match the packed maps");
    if (!is_binary(kernel)) throw ConfigError("bitpacked backend requires {0,1} kernels");
    std::vector<std::uint64_t> k(std::size_t(channels_) * words_, 0);
    for (int ch = 0; ch < channels_; ++ch)
        for (int p = 0; p < patch_; ++p)
            for (int q = 0; q < patch_; ++q)
                if (kernel(p, q, ch) != 0.0) {
                    const int bit = p * patch_ + q;
                    k[std::size_t(ch) * words_ + bit / 64] |= std::uint64_t(1) << (bit % 64);
                }
    return k;
}

void BitpackedMaps::score(std::span<const std::uint64_t> kernel, std::span<std::uint32_t> out) const {
    score_batch(kernel, 1, out);
}

void BitpackedMaps::score_batch(std::span<const std::uint64_t> kernels, std::size_t count,
                                std::span<std::uint32_t> out) const {
    const std::size_t npos = std::size_t(rows_) * cols_;
    const std::size_t kw = std::size_t(channels_) * words_;
    if (kernels.size() != count * kw || out.size() != count * npos)
        throw ShapeError("bitpacked score buffers have the wrong size");
    // zero kernel words contribute nothing
    std::vector<std::uint32_t> live;
    std::vector<std::size_t> live_start(count + 1, 0);
    for (std::size_t n = 0; n < count; ++n) {
        for (std::size_t i = 0; i < kw; ++i)
            if (kernels[n * kw + i] != 0) live.push_back(std::uint32_t(i));
        live_start[n + 1] = live.size();
    }
    // position blocks small enough that every word's slice stays in L1 while
    // all kernels of the batch sweep over it
    constexpr std::size_t block = 64;
    std::size_t j0 = 0;
#ifdef GLR_AVX512_POPCNT
    for (; j0 + block <= npos; j0 += block) {
        for (std::size_t n = 0; n < count; ++n) {
            const std::uint64_t* k = kernels.data() + n * kw;
            __m512i acc[8];
            for (auto& a : acc) a = _mm512_setzero_si512();
            for (std::size_t w = live_start[n]; w < live_start[n + 1]; ++w) {
                const std::uint32_t i = live[w];
                const __m512i kv = _mm512_set1_epi64(static_cast<long long>(k[i]));
                const std::uint64_t* src = codes_.data() + i * npos + j0;
                for (int b = 0; b < 8; ++b)
                    acc[b] = _mm512_add_epi64(
                        acc[b], _mm512_popcnt_epi64(_mm512_and_si512(_mm512_loadu_si512(src + 8 * b), kv)));
            }
            std::uint32_t* dst = out.data() + n * npos + j0;
            for (int b = 0; b < 8; ++b)
                _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + 8 * b), _mm512_cvtepi64_epi32(acc[b]));
        }
    }
#endif
    std::uint64_t acc[block];
    for (; j0 < npos; j0 += block) {
        const std::size_t len = std::min(block, npos - j0);
        for (std::size_t n = 0; n < count; ++n) {
            const std::uint64_t* k = kernels.data() + n * kw;
            std::fill(acc, acc + len, 0);
            for (std::size_t w = live_start[n]; w < live_start[n + 1]; ++w) {
                const std::uint32_t i = live[w];
                const std::uint64_t ki = k[i];
                const std::uint64_t* src = codes_.data() + i * npos + j0;
                for (std::size_t j = 0; j < len; ++j) acc[j] += std::uint64_t(std::popcount(src[j] & ki));
            }
            std::uint32_t* dst = out.data() + n * npos + j0;
            for (std::size_t j = 0; j < len; ++j) dst[j] = std::uint32_t(acc[j]);
        }
    }
}

SimilarityHeatMap xcorr2_valid_batch(const Tensor3d& input, std::span<const Tensor3d> kernels, CorrBackend backend) {
    check_kernels(input, kernels);
    SimilarityHeatMap hm;
    if (kernels.empty()) return hm;
    const int P = kernels.front().height();
    hm.rows = input.height() - P + 1;
    hm.cols = input.width() - P + 1;
    hm.slices.assign(kernels.size(), Eigen::MatrixXd::Zero(hm.rows, hm.cols));
    switch (backend) {
    case CorrBackend::Direct: xcorr_direct(input, kernels, hm); break;
    case CorrBackend::Im2col: xcorr_im2col(input, kernels, hm); break;
    case CorrBackend::Fft: xcorr_fft(input, kernels, hm); break;
    case CorrBackend::Bitpacked: {
        const BitpackedMaps maps(input, P);
        std::vector<std::uint32_t> buf(std::size_t(hm.rows) * hm.cols);
        for (std::size_t n = 0; n < kernels.size(); ++n) {
            maps.score(maps.encode_kernel(kernels[n]), buf);
            for (int u = 0; u < hm.rows; ++u)
                for (int v = 0; v < hm.cols; ++v) hm.slices[n](u, v) = buf[std::size_t(u) * hm.cols + v];
        }
        break;
    }
    }
    return hm;
}

// ---------------------------------------------------------------------------
// top-K selection

namespace {

/// Every index whose score is >= the m-th largest score, ordered by
/// (score descending, index ascending).
template <typename T>
std::vector<Index> leading_candidates(std::span<const T> s, Index m);

template <>
std::vector<Index> leading_candidates<double>(std::span<const double> s, Index m) {
    std::vector<double> copy(s.begin(), s.end());
    std::nth_element(copy.begin(), copy.begin() + (m - 1), copy.end(), std::greater<>());
    const double t = copy[std::size_t(m - 1)];
    std::vector<Index> out;
    for (Index i = 0; i < Index(s.size()); ++i)
        if (s[std::size_t(i)] >= t) out.push_back(i);
    std::sort(out.begin(), out.end(), [&](Index a, Index b) {
        const double sa = s[std::size_t(a)], sb = s[std::size_t(b)];
        return sa != sb ? sa > sb : a < b;
    });
    return out;
}

template <>
std::vector<Index> leading_candidates<std::uint32_t>(std::span<const std::uint32_t> s, Index m) {
    const std::uint32_t* d = s.data();
    const std::size_t n = s.size();
    const std::uint32_t hi = *std::max_element(s.begin(), s.end());
    const std::size_t bins = std::size_t(hi) + 1;
    // four interleaved histograms break the store-to-load chain on runs of
    // equal scores (mostly zeros)
    std::vector<std::uint32_t> sub(4 * bins, 0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        ++sub[d[i]];
        ++sub[bins + d[i + 1]];
        ++sub[2 * bins + d[i + 2]];
        ++sub[3 * bins + d[i + 3]];
    }
    for (; i < n; ++i) ++sub[d[i]];
    std::vector<std::size_t> hist(bins + 1, 0);
    for (std::size_t v = 0; v < bins; ++v) hist[v] = std::size_t(sub[v]) + sub[bins + v] + sub[2 * bins + v] + sub[3 * bins + v];
    // largest t with at least m scores >= t
    std::uint32_t t = hi;
    std::size_t above = hist[hi];
    while (above < std::size_t(m) && t > 0) above += hist[--t];
    // counting sort: score descending, index ascending within a score
    std::vector<std::size_t> start(bins + 1, 0);
    for (std::uint32_t v = hi; v > t; --v) start[v - 1] = start[v] + hist[v];
    std::vector<Index> out(above);
    for (i = 0; i < n; ++i)
        if (d[i] >= t) out[start[d[i]]++] = Index(i);
    return out;
}

template <typename T>
TopK select_top_k_impl(std::span<const T> s, int rows, int cols, Anchor ex, int k, int min_sep) {
    if (k < 1) throw ConfigError("group size must be at least 1");
    if (rows < 1 || cols < 1 || s.size() != std::size_t(rows) * cols) throw ShapeError("score map size mismatch");
    if (ex.row < 0 || ex.col < 0 || ex.row >= rows || ex.col >= cols) throw BoundsError("exemplar outside score map", 0);
    const Index total = Index(rows) * cols;
    const Index ex_idx = Index(ex.row) * cols + ex.col;

    TopK out;
    auto reset = [&] {
        out.positions.assign(1, ex);
        out.scores.assign(1, double(s[std::size_t(ex_idx)]));
    };
    auto take = [&](Index idx) {
        out.positions.push_back({int(idx / cols), int(idx % cols)});
        out.scores.push_back(double(s[std::size_t(idx)]));
    };
    reset();
    if (k == 1) return out;

    std::vector<unsigned char> blocked(std::size_t(total), 0);
    const int rad = std::max(min_sep - 1, 0);
    auto block_around = [&](Index idx) {
        const int r = int(idx / cols), c = int(idx % cols);
        for (int rr = std::max(0, r - rad); rr <= std::min(rows - 1, r + rad); ++rr)
            for (int cc = std::max(0, c - rad); cc <= std::min(cols - 1, c + rad); ++cc)
                blocked[std::size_t(rr) * cols + cc] = 1;
    };
    block_around(ex_idx);

    Index m = std::min<Index>(total, std::max<Index>(4 * Index(k), 64));
    std::size_t done = 0;
    std::vector<Index> cand;
    for (;;) {
        cand = leading_candidates<T>(s, m);
        std::size_t i = done;
        for (; i < cand.size() && int(out.positions.size()) < k; ++i) {
            const Index idx = cand[i];
            if (blocked[std::size_t(idx)]) continue;
            take(idx);
            block_around(idx);
        }
        if (int(out.positions.size()) == k || Index(cand.size()) == total) break;
        done = i;
        m = std::min<Index>(total, m * 4);
    }
    if (int(out.positions.size()) < k) {
        out.relaxed_separation = true;
        reset();
        for (Index idx : cand) {
            if (int(out.positions.size()) == k) break;
            if (idx != ex_idx) take(idx);
        }
        while (int(out.positions.size()) < k) {
            out.positions.push_back(ex);
            out.scores.push_back(double(s[std::size_t(ex_idx)]));
            ++out.repeated_exemplar;
        }
    }
    return out;
}

std::vector<double> flatten_row_major(const Eigen::MatrixXd& m) {
    std::vector<double> v(std::size_t(m.size()));
    for (Index u = 0; u < m.rows(); ++u)
        for (Index c = 0; c < m.cols(); ++c) v[std::size_t(u * m.cols() + c)] = m(u, c);
    return v;
}

double patch_distance(const Tensor3d& x, const Eigen::VectorXd& ref, Anchor a, int P) {
    const int row_len = P * x.channels();
    // eight independent lanes so the loop vectorizes without reassociation
    double lane[8] = {};
    double tail = 0.0;
    const double* b = ref.data();
    for (int p = 0; p < P; ++p, b += row_len) {
        const double* v = x.pixel(a.row + p, a.col);
        int i = 0;
        for (; i + 8 <= row_len; i += 8)
            for (int l = 0; l < 8; ++l) {
                const double t = v[i + l] - b[i + l];
                lane[l] += t * t;
            }
        for (; i < row_len; ++i) tail += (v[i] - b[i]) * (v[i] - b[i]);
    }
    return ((lane[0] + lane[1]) + (lane[2] + lane[3])) + ((lane[4] + lane[5]) + (lane[6] + lane[7])) + tail;
}

Eigen::VectorXd vectorize_patch(const Tensor3d& x, Anchor a, int P) {
    const Anchor one[1] = {a};
    return gather_group(x, std::span<const Anchor>(one), P).matrix.col(0);
}

/// Score of the m-th best position and the number of positions strictly above it.
template <typename T>
std::pair<T, Index> cut_score(std::span<const T> s, Index m);

template <>
std::pair<double, Index> cut_score<double>(std::span<const double> s, Index m) {
    std::vector<double> copy(s.begin(), s.end());
    std::nth_element(copy.begin(), copy.begin() + (m - 1), copy.end(), std::greater<>());
    const double t = copy[std::size_t(m - 1)];
    return {t, Index(std::count_if(s.begin(), s.end(), [&](double v) { return v > t; }))};
}

template <>
std::pair<std::uint32_t, Index> cut_score<std::uint32_t>(std::span<const std::uint32_t> s, Index m) {
    const std::uint32_t hi = *std::max_element(s.begin(), s.end());
    const std::size_t bins = std::size_t(hi) + 1;
    std::vector<std::uint32_t> sub(4 * bins, 0);
    const std::uint32_t* d = s.data();
    std::size_t i = 0;
    for (; i + 4 <= s.size(); i += 4) {
        ++sub[d[i]];
        ++sub[bins + d[i + 1]];
        ++sub[2 * bins + d[i + 2]];
        ++sub[3 * bins + d[i + 3]];
    }
    for (; i < s.size(); ++i) ++sub[d[i]];
    auto count = [&](std::size_t v) { return Index(sub[v]) + sub[bins + v] + sub[2 * bins + v] + sub[3 * bins + v]; };
    std::uint32_t t = hi;
    Index above = 0;
    for (Index at = count(hi); at < m && t > 0; at += count(--t)) above = at;
    return {t, above};
}

/// The rerank pool: every position scoring above the (pool * k)-th best, then
/// positions tied with it in order of Euclidean distance to the exemplar
/// (row-major among equals) until the pool is full. Members are then taken by
/// ascending squared pixel distance (row-major on ties) under the same
/// separation, relaxation and padding rules as select_top_k.
template <typename T>
TopK rerank_select(const Tensor3d& x, std::span<const T> s, int rows, int cols, Anchor ex, int k, int pool,
                   int min_sep, int P) {
    const Index total = Index(rows) * cols;
    const Index ex_idx = Index(ex.row) * cols + ex.col;
    const Index want = std::min<Index>(total, Index(pool) * k);
    const auto [cut, above] = cut_score<T>(s, want);
    std::vector<Index> lead;
    lead.reserve(std::size_t(want));
    for (Index i = 0; i < total; ++i)
        if (s[std::size_t(i)] > cut) lead.push_back(i);
    const Index need = want - above;
    // smallest Chebyshev radius holding enough ties; the nearest ones in the
    // Euclidean sense then lie within sqrt(2) times that radius
    const int reach = std::max({ex.row, rows - 1 - ex.row, ex.col, cols - 1 - ex.col});
    auto is_tie = [&](int r, int c) { return s[std::size_t(r) * cols + c] == cut; };
    Index found = 0;
    int radius = -1;
    while (found < need && radius < reach) {
        ++radius;
        const int r0 = ex.row - radius, r1 = ex.row + radius, c0 = ex.col - radius, c1 = ex.col + radius;
        for (int c = std::max(c0, 0); c <= std::min(c1, cols - 1); ++c) {
            if (r0 >= 0 && is_tie(r0, c)) ++found;
            if (radius > 0 && r1 < rows && is_tie(r1, c)) ++found;
        }
        for (int r = std::max(r0 + 1, 0); r <= std::min(r1 - 1, rows - 1); ++r) {
            if (c0 >= 0 && is_tie(r, c0)) ++found;
            if (radius > 0 && c1 < cols && is_tie(r, c1)) ++found;
        }
    }
    const int outer = std::min(reach, int(std::ceil(radius * std::sqrt(2.0))));
    std::vector<std::pair<long, Index>> ties;
    for (int r = std::max(ex.row - outer, 0); r <= std::min(ex.row + outer, rows - 1); ++r)
        for (int c = std::max(ex.col - outer, 0); c <= std::min(ex.col + outer, cols - 1); ++c)
            if (is_tie(r, c)) {
                const long dr = r - ex.row, dc = c - ex.col;
                ties.emplace_back(dr * dr + dc * dc, Index(r) * cols + c);
            }
    if (Index(ties.size()) > need) std::nth_element(ties.begin(), ties.begin() + std::ptrdiff_t(need), ties.end());
    for (Index j = 0; j < need; ++j) lead.push_back(ties[std::size_t(j)].second);

    const Eigen::VectorXd ref = vectorize_patch(x, ex, P);
    std::vector<std::pair<double, Index>> cand;
    for (Index i : lead)
        if (i != ex_idx) cand.emplace_back(patch_distance(x, ref, {int(i / cols), int(i % cols)}, P), i);
    // without a separation constraint only the first k - 1 can be used
    const std::size_t usable = std::size_t(k - 1);
    if (min_sep <= 1 && usable < cand.size()) {
        std::nth_element(cand.begin(), cand.begin() + std::ptrdiff_t(usable), cand.end());
        cand.resize(usable);
    }
    std::sort(cand.begin(), cand.end());

    TopK out;
    auto reset = [&] {
        out.positions.assign(1, ex);
        out.scores.assign(1, double(s[std::size_t(ex_idx)]));
    };
    auto take = [&](Index idx) {
        out.positions.push_back({int(idx / cols), int(idx % cols)});
        out.scores.push_back(double(s[std::size_t(idx)]));
    };
    reset();
    std::vector<Anchor> chosen{ex};
    for (const auto& [d, idx] : cand) {
        if (int(out.positions.size()) == k) break;
        const Anchor a{int(idx / cols), int(idx % cols)};
        if (std::any_of(chosen.begin(), chosen.end(), [&](Anchor c) { return chebyshev(a, c) < min_sep; })) continue;
        take(idx);
        chosen.push_back(a);
    }
    if (int(out.positions.size()) < k) {
        out.relaxed_separation = true;
        reset();
        for (const auto& [d, idx] : cand) {
            if (int(out.positions.size()) == k) break;
            take(idx);
        }
        while (int(out.positions.size()) < k) {
            out.positions.push_back(ex);
            out.scores.push_back(double(s[std::size_t(ex_idx)]));
            ++out.repeated_exemplar;
        }
    }
    return out;
}

PatchGroupd make_group(const Tensor3d& x, TopK top, int P) {
    PatchGroupd g = gather_group(x, std::span<const Anchor>(top.positions), P);
    g.scores = std::move(top.scores);
    g.relaxed_separation = top.relaxed_separation;
    g.repeated_exemplar = top.repeated_exemplar;
    return g;
}

} // namespace

TopK select_top_k(std::span<const double> scores, int rows, int cols, Anchor exemplar, int k, int min_separation) {
    return select_top_k_impl<double>(scores, rows, cols, exemplar, k, min_separation);
}

TopK select_top_k(std::span<const std::uint32_t> scores, int rows, int cols, Anchor exemplar, int k,
                  int min_separation) {
    return select_top_k_impl<std::uint32_t>(scores, rows, cols, exemplar, k, min_separation);
}

// ---------------------------------------------------------------------------
// exemplars and matching

ExemplarSet exemplars_for_mode(const Gradients& grad, int height, int width, const MatchConfig& cfg) {
    const int P = cfg.patch_size;
    switch (cfg.mode) {
    case MatchMode::BmUniform: return uniform_exemplars(height, width, P, cfg.exemplar_stride);
    case MatchMode::BmCorner:
        return select_exemplars(detect_corners(grad, cfg.corner_params()), height, width, P, std::nullopt);
    case MatchMode::BmCornerUniform:
    case MatchMode::Global:
        return select_exemplars(detect_corners(grad, cfg.corner_params()), height, width, P, cfg.sparse_interval());
    }
    return {};
}

std::vector<TopK> global_match_positions(const Tensor3d& x, const ExemplarSet& exemplars, const MatchConfig& cfg,
                                         const EdgeMaps& edges) {
    cfg.validate();
    const int P = cfg.patch_size;
    if (edges.h_pos.height() != x.height() || edges.h_pos.width() != x.width() ||
        edges.h_pos.channels() != x.channels())
        throw ShapeError("edge maps do not match the image");
    check_anchors(x, std::span<const Anchor>(exemplars.anchors), P);
    std::vector<TopK> groups;
    if (exemplars.empty()) return groups;

    const int rows = x.height() - P + 1, cols = x.width() - P + 1;
    const int K = cfg.group_size, sep = cfg.separation();
    groups.reserve(exemplars.size());

    auto finish = [&]<typename T>(std::span<const T> scores, Anchor a) {
        TopK top = cfg.rerank ? rerank_select<T>(x, scores, rows, cols, a, K, cfg.rerank_pool, sep, P)
                              : select_top_k(scores, rows, cols, a, K, sep);
        groups.push_back(std::move(top));
    };

    if (cfg.backend == CorrBackend::Bitpacked) {
        const BitpackedMaps maps(edges, P);
        const std::size_t npos = std::size_t(rows) * cols, batch = 32;
        std::vector<std::uint32_t> buf(batch * npos);
        std::vector<std::uint64_t> kernels;
        for (std::size_t b0 = 0; b0 < exemplars.size(); b0 += batch) {
            const std::size_t nb = std::min(batch, exemplars.size() - b0);
            kernels.clear();
            for (std::size_t n = 0; n < nb; ++n) {
                const auto k = maps.kernel_at(exemplars.anchors[b0 + n]);
                kernels.insert(kernels.end(), k.begin(), k.end());
            }
            maps.score_batch(kernels, nb, std::span<std::uint32_t>(buf.data(), nb * npos));
            for (std::size_t n = 0; n < nb; ++n)
                finish(std::span<const std::uint32_t>(buf.data() + n * npos, npos), exemplars.anchors[b0 + n]);
        }
    } else {
        const Tensor3d stacked = stack_edge_maps(edges);
        std::vector<Tensor3d> kernels;
        kernels.reserve(exemplars.size());
        const int row_len = P * stacked.channels();
        for (Anchor a : exemplars.anchors) {
            Tensor3d k(P, P, stacked.channels());
            for (int p = 0; p < P; ++p)
                k.data().segment(Index(p) * row_len, row_len) =
                    Eigen::Map<const Eigen::VectorXd>(stacked.pixel(a.row + p, a.col), row_len);
            kernels.push_back(std::move(k));
        }
        const SimilarityHeatMap hm = xcorr2_valid_batch(stacked, kernels, cfg.backend);
        for (std::size_t n = 0; n < exemplars.size(); ++n) {
            std::vector<double> flat = flatten_row_major(hm.slices[n]);
            if (cfg.backend == CorrBackend::Fft)
                for (double& v : flat) v = std::round(v);
            finish(std::span<const double>(flat), exemplars.anchors[n]);
        }
    }
    return groups;
}

std::vector<PatchGroupd> global_match(const Tensor3d& x, const ExemplarSet& exemplars, const MatchConfig& cfg,
                                      const EdgeMaps& edges) {
    std::vector<PatchGroupd> groups;
    for (TopK& top : global_match_positions(x, exemplars, cfg, edges))
        groups.push_back(make_group(x, std::move(top), cfg.patch_size));
    return groups;
}

std::vector<TopK> block_match_positions(const Tensor3d& x, const ExemplarSet& exemplars, const MatchConfig& cfg) {
    MatchConfig local = cfg;
    if (local.mode == MatchMode::Global) local.mode = MatchMode::BmUniform;
    local.validate();
    const int P = cfg.patch_size, R = cfg.window_radius, s = cfg.bm_stride;
    const int max_r = x.height() - P, max_c = x.width() - P;
    check_anchors(x, std::span<const Anchor>(exemplars.anchors), P);

    std::vector<TopK> groups;
    groups.reserve(exemplars.size());
    std::vector<std::pair<double, Index>> cand;
    for (Anchor a : exemplars.anchors) {
        const Eigen::VectorXd ref = vectorize_patch(x, a, P);
        const int r_lo = a.row - ((a.row - std::max(0, a.row - R)) / s) * s;
        const int c_lo = a.col - ((a.col - std::max(0, a.col - R)) / s) * s;
        const int r_hi = std::min(max_r, a.row + R), c_hi = std::min(max_c, a.col + R);
        cand.clear();
        for (int r = r_lo; r <= r_hi; r += s) {
            for (int c = c_lo; c <= c_hi; c += s) {
                if (r == a.row && c == a.col) continue;
                const double d = patch_distance(x, ref, {r, c}, P);
                if (cfg.bm_threshold && !(d < *cfg.bm_threshold)) continue;
                cand.emplace_back(d, Index(r) * (max_c + 1) + c);
            }
        }
        const std::size_t keep = std::min(cand.size(), std::size_t(cfg.group_size - 1));
        // (distance, index) pairs are distinct, so this ordering is total
        if (keep < cand.size()) std::nth_element(cand.begin(), cand.begin() + std::ptrdiff_t(keep), cand.end());
        std::sort(cand.begin(), cand.begin() + std::ptrdiff_t(keep));
        TopK top;
        top.positions.push_back(a);
        top.scores.push_back(0.0);
        for (std::size_t i = 0; i < keep; ++i) {
            top.positions.push_back({int(cand[i].second / (max_c + 1)), int(cand[i].second % (max_c + 1))});
            top.scores.push_back(cand[i].first);
        }
        groups.push_back(std::move(top));
    }
    return groups;
}

std::vector<PatchGroupd> block_match(const Tensor3d& x, const ExemplarSet& exemplars, const MatchConfig& cfg) {
    std::vector<PatchGroupd> groups;
    for (TopK& top : block_match_positions(x, exemplars, cfg)) groups.push_back(make_group(x, std::move(top), cfg.patch_size));
    return groups;
}

} // namespace glr
