#pragma once

// Slow, obviously-correct reference implementations used by the tests.

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "glr/tensor.hpp"

namespace oracle {

using glr::Anchor;
using glr::Tensor3d;

inline Tensor3d random_tensor(int h, int w, int c, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Tensor3d t(h, w, c);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
            for (int k = 0; k < c; ++k) t(i, j, k) = u(rng);
    return t;
}

inline Tensor3d random_binary(int h, int w, int c, std::mt19937_64& rng, double p = 0.5) {
    std::bernoulli_distribution b(p);
    Tensor3d t(h, w, c);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
            for (int k = 0; k < c; ++k) t(i, j, k) = b(rng) ? 1.0 : 0.0;
    return t;
}

inline Anchor random_anchor(int h, int w, int P, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> r(0, h - P), c(0, w - P);
    return {r(rng), c(rng)};
}

/// P x P x C block at `a`.
inline Tensor3d crop(const Tensor3d& img, Anchor a, int P) {
    Tensor3d out(P, P, img.channels());
    for (int p = 0; p < P; ++p)
        for (int q = 0; q < P; ++q)
            for (int c = 0; c < img.channels(); ++c) out(p, q, c) = img(a.row + p, a.col + q, c);
    return out;
}

inline Eigen::MatrixXd gather(const Tensor3d& img, const std::vector<Anchor>& anchors, int P) {
    const int C = img.channels();
    Eigen::MatrixXd m(P * P * C, Eigen::Index(anchors.size()));
    for (std::size_t j = 0; j < anchors.size(); ++j) {
        int r = 0;
        for (int p = 0; p < P; ++p)
            for (int q = 0; q < P; ++q)
                for (int c = 0; c < C; ++c) m(r++, Eigen::Index(j)) = img(anchors[j].row + p, anchors[j].col + q, c);
    }
    return m;
}

/// acc and cnt after adding every column of m at its anchor.
inline void scatter(Tensor3d& acc, Tensor3d& cnt, const std::vector<Anchor>& anchors, const Eigen::MatrixXd& m,
                    int P) {
    const int C = acc.channels();
    for (std::size_t j = 0; j < anchors.size(); ++j) {
        int r = 0;
        for (int p = 0; p < P; ++p)
            for (int q = 0; q < P; ++q)
                for (int c = 0; c < C; ++c) {
                    acc(anchors[j].row + p, anchors[j].col + q, c) += m(r++, Eigen::Index(j));
                    cnt(anchors[j].row + p, anchors[j].col + q, c) += 1.0;
                }
    }
}

/// Sobel on the interior, border copied from the nearest interior pixel.
inline std::pair<Tensor3d, Tensor3d> sobel(const Tensor3d& img) {
    const int H = img.height(), W = img.width(), C = img.channels();
    const int kh[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
    Tensor3d gh(H, W, C), gv(H, W, C);
    for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w) {
            const int hh = std::clamp(h, 1, H - 2), ww = std::clamp(w, 1, W - 2);
            for (int c = 0; c < C; ++c) {
                double sh = 0, sv = 0;
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) {
                        const double v = img(hh + i - 1, ww + j - 1, c);
                        sh += kh[i][j] * v;
                        sv += kh[j][i] * v;
                    }
                gh(h, w, c) = sh;
                gv(h, w, c) = sv;
            }
        }
    return {gh, gv};
}

/// Valid correlation of one kernel, channels summed.
inline Eigen::MatrixXd xcorr(const Tensor3d& in, const Tensor3d& k) {
    const int P = k.height();
    Eigen::MatrixXd out(in.height() - P + 1, in.width() - P + 1);
    for (int u = 0; u < out.rows(); ++u)
        for (int v = 0; v < out.cols(); ++v) {
            double s = 0;
            for (int p = 0; p < P; ++p)
                for (int q = 0; q < P; ++q)
                    for (int c = 0; c < in.channels(); ++c) s += in(u + p, v + q, c) * k(p, q, c);
            out(u, v) = s;
        }
    return out;
}

inline double sqdist(const Tensor3d& x, Anchor a, Anchor b, int P) {
    double s = 0;
    for (int p = 0; p < P; ++p)
        for (int q = 0; q < P; ++q)
            for (int c = 0; c < x.channels(); ++c) {
                const double d = x(a.row + p, a.col + q, c) - x(b.row + p, b.col + q, c);
                s += d * d;
            }
    return s;
}

struct Picked {
    std::vector<Anchor> positions;
    bool relaxed = false;
    int repeated = 0;
};

/// Greedy pick over a fully ordered candidate list: exemplar first, then
/// candidates that keep Chebyshev distance >= max(sep, 1) to everything
/// chosen; on shortfall drop the separation, then repeat the exemplar.
inline Picked greedy(const std::vector<Anchor>& order, Anchor ex, int k, int sep) {
    Picked out;
    out.positions = {ex};
    const int need = std::max(sep, 1);
    for (Anchor a : order) {
        if (int(out.positions.size()) == k) break;
        bool ok = true;
        for (Anchor c : out.positions)
            if (glr::chebyshev(a, c) < need) ok = false;
        if (ok) out.positions.push_back(a);
    }
    if (int(out.positions.size()) < k) {
        out.relaxed = true;
        out.positions = {ex};
        for (Anchor a : order) {
            if (int(out.positions.size()) == k) break;
            if (a != ex) out.positions.push_back(a);
        }
        while (int(out.positions.size()) < k) {
            out.positions.push_back(ex);
            ++out.repeated;
        }
    }
    return out;
}

/// Every position by (score desc, row-major).
inline Picked top_k(const Eigen::MatrixXd& s, Anchor ex, int k, int sep) {
    std::vector<Anchor> order;
    for (int u = 0; u < s.rows(); ++u)
        for (int v = 0; v < s.cols(); ++v) order.push_back({u, v});
    std::stable_sort(order.begin(), order.end(), [&](Anchor a, Anchor b) { return s(a.row, a.col) > s(b.row, b.col); });
    return greedy(order, ex, k, sep);
}

/// Pool of pool*k positions: all above the cut score, then cut-score ties by
/// (squared distance to ex, row-major). Ordered by (pixel distance, row-major).
inline Picked rerank(const Tensor3d& x, const Eigen::MatrixXd& s, Anchor ex, int k, int pool, int sep, int P) {
    std::vector<double> all(s.data(), s.data() + s.size());
    std::sort(all.begin(), all.end(), std::greater<>());
    const std::size_t want = std::min<std::size_t>(all.size(), std::size_t(pool) * k);
    const double cut = all[want - 1];
    std::vector<Anchor> lead, ties;
    for (int u = 0; u < s.rows(); ++u)
        for (int v = 0; v < s.cols(); ++v) {
            if (s(u, v) > cut) lead.push_back({u, v});
            else if (s(u, v) == cut) ties.push_back({u, v});
        }
    auto d2 = [&](Anchor a) { return (a.row - ex.row) * (a.row - ex.row) + (a.col - ex.col) * (a.col - ex.col); };
    std::stable_sort(ties.begin(), ties.end(), [&](Anchor a, Anchor b) { return d2(a) < d2(b); });
    for (std::size_t i = 0; lead.size() < want; ++i) lead.push_back(ties[i]);
    std::vector<Anchor> order;
    for (Anchor a : lead)
        if (a != ex) order.push_back(a);
    std::stable_sort(order.begin(), order.end(), [&](Anchor a, Anchor b) {
        const double da = sqdist(x, ex, a, P), db = sqdist(x, ex, b, P);
        if (da != db) return da < db;
        return a < b;
    });
    return greedy(order, ex, k, sep);
}

struct Neighbour {
    Anchor at;
    double dist;
};

/// Exemplar plus the k-1 nearest window positions by (distance, row-major).
inline std::vector<Neighbour> knn(const Tensor3d& x, Anchor ex, int P, int R, int stride, int k) {
    std::vector<Neighbour> all;
    for (int r = 0; r <= x.height() - P; ++r)
        for (int c = 0; c <= x.width() - P; ++c) {
            if (std::abs(r - ex.row) > R || std::abs(c - ex.col) > R) continue;
            if ((r - ex.row) % stride || (c - ex.col) % stride) continue;
            if (r == ex.row && c == ex.col) continue;
            all.push_back({{r, c}, sqdist(x, ex, {r, c}, P)});
        }
    std::stable_sort(all.begin(), all.end(), [](const Neighbour& a, const Neighbour& b) { return a.dist < b.dist; });
    std::vector<Neighbour> out{{ex, 0.0}};
    for (std::size_t i = 0; i < all.size() && int(out.size()) < k; ++i) out.push_back(all[i]);
    return out;
}

/// Weighted singular-value thresholding through Eigen's Jacobi SVD.
inline Eigen::MatrixXd weighted_svt(const Eigen::MatrixXd& m, double c, double eps, double sigma) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd s = svd.singularValues();
    const double K = double(m.cols());
    for (Eigen::Index j = 0; j < s.size(); ++j) {
        const double hat = std::sqrt(std::max(s[j] * s[j] - K * sigma * sigma, 0.0));
        const double w = c * std::sqrt(K) * sigma * sigma / (hat + eps);
        s[j] = std::max(s[j] - w, 0.0);
    }
    return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

inline Eigen::MatrixXd soft_threshold(const Eigen::MatrixXd& m, double tau) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd s = (svd.singularValues().array() - tau).max(0.0).matrix();
    return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

inline int numerical_rank(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s[0] == 0.0) return 0;
    int r = 0;
    for (Eigen::Index j = 0; j < s.size(); ++j)
        if (s[j] > 1e-8 * s[0]) ++r;
    return r;
}

inline double spectral_norm(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

/// Orthonormal 2-D DFT by direct summation.
inline Eigen::MatrixXcd dft2(const Eigen::MatrixXcd& x, bool inverse = false) {
    const int H = int(x.rows()), W = int(x.cols());
    const double sgn = inverse ? 1.0 : -1.0, pi = std::acos(-1.0);
    Eigen::MatrixXcd out(H, W);
    for (int u = 0; u < H; ++u)
        for (int v = 0; v < W; ++v) {
            std::complex<double> s = 0;
            for (int h = 0; h < H; ++h)
                for (int w = 0; w < W; ++w)
                    s += x(h, w) * std::polar(1.0, sgn * 2.0 * pi * (double(u) * h / H + double(v) * w / W));
            out(u, v) = s / std::sqrt(double(H) * W);
        }
    return out;
}

/// Mean SSIM of one channel, each 11x11 window evaluated from scratch.
inline double ssim_channel(const Tensor3d& a, const Tensor3d& b, int c, double peak) {
    const int n = 11;
    const double sigma = 1.5;
    double g[11][11], total = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            g[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * sigma * sigma));
            total += g[i][j];
        }
    const double C1 = (0.01 * peak) * (0.01 * peak), C2 = (0.03 * peak) * (0.03 * peak);
    double sum = 0;
    int count = 0;
    for (int h = 0; h + n <= a.height(); ++h)
        for (int w = 0; w + n <= a.width(); ++w) {
            double ma = 0, mb = 0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    ma += g[i][j] / total * a(h + i, w + j, c);
                    mb += g[i][j] / total * b(h + i, w + j, c);
                }
            double va = 0, vb = 0, cov = 0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const double da = a(h + i, w + j, c) - ma, db = b(h + i, w + j, c) - mb;
                    va += g[i][j] / total * da * da;
                    vb += g[i][j] / total * db * db;
                    cov += g[i][j] / total * da * db;
                }
            sum += (2 * ma * mb + C1) * (2 * cov + C2) / ((ma * ma + mb * mb + C1) * (va + vb + C2));
            ++count;
        }
    return sum / count;
}

inline double ssim(const Tensor3d& a, const Tensor3d& b, double peak) {
    double s = 0;
    for (int c = 0; c < a.channels(); ++c) s += ssim_channel(a, b, c, peak);
    return s / a.channels();
}

} // namespace oracle
