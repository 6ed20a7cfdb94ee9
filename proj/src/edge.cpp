#include "glr/edge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace glr {

namespace {

int clampi(int v, int lo, int hi) { return std::min(std::max(v, lo), hi); }

void binarize_into(const Tensor3d& g, double th, Tensor3d& pos, Tensor3d& neg) {
    pos = Tensor3d(g.height(), g.width(), g.channels());
    neg = Tensor3d(g.height(), g.width(), g.channels());
    pos.data() = (g.data().array() > th).cast<double>().matrix();
    neg.data() = ((-g.data().array()) > th).cast<double>().matrix();
}

} // namespace

Gradients sobel_gradients(const Tensor3d& img) {
    const int H = img.height(), W = img.width(), C = img.channels();
    if (H < 3 || W < 3) throw ShapeError("Sobel gradients need an image of at least 3x3");
    Gradients g{Tensor3d(H, W, C), Tensor3d(H, W, C)};
    for (int h = 1; h < H - 1; ++h) {
        for (int w = 1; w < W - 1; ++w) {
            for (int c = 0; c < C; ++c) {
                const double tl = img(h - 1, w - 1, c), tc = img(h - 1, w, c), tr = img(h - 1, w + 1, c);
                const double ml = img(h, w - 1, c), mr = img(h, w + 1, c);
                const double bl = img(h + 1, w - 1, c), bc = img(h + 1, w, c), br = img(h + 1, w + 1, c);
                g.horizontal(h, w, c) = (tr - tl) + 2.0 * (mr - ml) + (br - bl);
                g.vertical(h, w, c) = (bl - tl) + 2.0 * (bc - tc) + (br - tr);
            }
        }
    }
    // replicate the interior outwards
    for (int h = 0; h < H; ++h) {
        for (int w = 0; w < W; ++w) {
            if (h > 0 && h < H - 1 && w > 0 && w < W - 1) continue;
            const int sh = clampi(h, 1, H - 2), sw = clampi(w, 1, W - 2);
            for (int c = 0; c < C; ++c) {
                g.horizontal(h, w, c) = g.horizontal(sh, sw, c);
                g.vertical(h, w, c) = g.vertical(sh, sw, c);
            }
        }
    }
    return g;
}

EdgeMaps binarize_gradients_abs(const Gradients& g, double th_h, double th_v) {
    if (!(th_h >= 0.0) || !(th_v >= 0.0)) throw ConfigError("edge threshold must be nonnegative");
    if (!g.horizontal.same_shape(g.vertical)) throw ShapeError("gradient maps differ in shape");
    EdgeMaps e;
    binarize_into(g.horizontal, th_h, e.h_pos, e.h_neg);
    binarize_into(g.vertical, th_v, e.v_pos, e.v_neg);
    return e;
}

EdgeMaps binarize_gradients(const Gradients& g, double relative_threshold) {
    if (!(relative_threshold >= 0.0)) throw ConfigError("edge threshold must be nonnegative");
    const double mh = g.horizontal.data().cwiseAbs().maxCoeff();
    const double mv = g.vertical.data().cwiseAbs().maxCoeff();
    return binarize_gradients_abs(g, relative_threshold * mh, relative_threshold * mv);
}

Tensor3d stack_edge_maps(const EdgeMaps& e) {
    const int H = e.h_pos.height(), W = e.h_pos.width(), C = e.h_pos.channels();
    Tensor3d out(H, W, 4 * C);
    const Tensor3d* maps[4] = {&e.h_pos, &e.h_neg, &e.v_pos, &e.v_neg};
    for (Index px = 0; px < Index(H) * W; ++px) {
        for (int m = 0; m < 4; ++m) {
            out.data().segment(px * 4 * C + m * C, C) = maps[m]->data().segment(px * C, C);
        }
    }
    return out;
}

Tensor3d gradient_magnitude(const Gradients& g) {
    const int H = g.horizontal.height(), W = g.horizontal.width(), C = g.horizontal.channels();
    Tensor3d mag(H, W, 1);
    for (Index px = 0; px < Index(H) * W; ++px) {
        double s = 0.0;
        for (int c = 0; c < C; ++c) {
            const double gh = g.horizontal.data()[px * C + c], gv = g.vertical.data()[px * C + c];
            s += std::sqrt(gh * gh + gv * gv);
        }
        mag.data()[px] = s / C;
    }
    return mag;
}

Tensor3d min_eigen_response(const Tensor3d& image) {
    if (image.channels() != 1) throw ShapeError("corner response expects a single-channel map");
    const int H = image.height(), W = image.width();
    const Gradients g = sobel_gradients(image);
    Tensor3d xx(H, W, 1), yy(H, W, 1), xy(H, W, 1);
    xx.data() = g.horizontal.data().cwiseAbs2();
    yy.data() = g.vertical.data().cwiseAbs2();
    xy.data() = g.horizontal.data().cwiseProduct(g.vertical.data());
    Tensor3d r(H, W, 1);
    for (int h = 0; h < H; ++h) {
        for (int w = 0; w < W; ++w) {
            double a = 0.0, b = 0.0, c = 0.0;
            for (int dh = -1; dh <= 1; ++dh) {
                for (int dw = -1; dw <= 1; ++dw) {
                    const int sh = clampi(h + dh, 0, H - 1), sw = clampi(w + dw, 0, W - 1);
                    a += xx(sh, sw);
                    b += xy(sh, sw);
                    c += yy(sh, sw);
                }
            }
            const double half_diff = 0.5 * (a - c);
            r(h, w) = 0.5 * (a + c) - std::sqrt(half_diff * half_diff + b * b);
        }
    }
    return r;
}

std::vector<Anchor> detect_corners(const Gradients& g, const CornerParams& params) {
    if (params.max_corners < 1) throw ConfigError("max_corners must be at least 1");
    if (params.nms_radius < 0) throw ConfigError("nms_radius must be nonnegative");
    const Tensor3d response = min_eigen_response(gradient_magnitude(g));
    const int H = response.height(), W = response.width();
    const double peak = response.data().maxCoeff();
    std::vector<Anchor> corners;
    // flat images have no structure; the tiny floor ignores rounding noise
    if (!(peak > 1e-12)) return corners;
    const double floor = params.quality * peak;

    std::vector<Index> order;
    for (Index i = 0; i < response.size(); ++i)
        if (response.data()[i] >= floor && response.data()[i] > 0.0) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        const double ra = response.data()[a], rb = response.data()[b];
        return ra != rb ? ra > rb : a < b;
    });

    std::vector<unsigned char> blocked(std::size_t(H) * W, 0);
    const int rad = params.nms_radius;
    for (Index i : order) {
        if (blocked[std::size_t(i)]) continue;
        const int r = int(i / W), c = int(i % W);
        corners.push_back({r, c});
        if (int(corners.size()) == params.max_corners) break;
        for (int rr = std::max(0, r - rad); rr <= std::min(H - 1, r + rad); ++rr)
            for (int cc = std::max(0, c - rad); cc <= std::min(W - 1, c + rad); ++cc) blocked[std::size_t(rr) * W + cc] = 1;
    }
    return corners;
}

std::vector<Anchor> uniform_grid(int height, int width, int patch, int stride) {
    if (stride < 1) throw ConfigError("grid stride must be at least 1");
    if (patch > height || patch > width) throw ConfigError("patch larger than image");
    auto axis = [&](int extent) {
        std::vector<int> v;
        for (int i = 0; i <= extent - patch; i += stride) v.push_back(i);
        if (v.back() != extent - patch) v.push_back(extent - patch);
        return v;
    };
    const auto rows = axis(height), cols = axis(width);
    std::vector<Anchor> grid;
    grid.reserve(rows.size() * cols.size());
    for (int r : rows)
        for (int c : cols) grid.push_back({r, c});
    return grid;
}

ExemplarSet select_exemplars(const std::vector<Anchor>& corners, int height, int width, int patch,
                             std::optional<int> uniform_interval) {
    if (patch < 1) throw ConfigError("patch size must be positive");
    if (patch > height || patch > width) throw ConfigError("patch larger than image");
    ExemplarSet set;
    std::vector<unsigned char> taken(std::size_t(height - patch + 1) * (width - patch + 1), 0);
    auto add = [&](Anchor a, ExemplarOrigin origin) {
        auto& t = taken[std::size_t(a.row) * (width - patch + 1) + a.col];
        if (t) return;
        t = 1;
        set.anchors.push_back(a);
        set.origins.push_back(origin);
    };
    for (Anchor c : corners) {
        add({clampi(c.row - patch / 2, 0, height - patch), clampi(c.col - patch / 2, 0, width - patch)},
            ExemplarOrigin::Corner);
    }
    if (uniform_interval) {
        for (Anchor a : uniform_grid(height, width, patch, *uniform_interval)) add(a, ExemplarOrigin::Uniform);
    }
    return set;
}

ExemplarSet uniform_exemplars(int height, int width, int patch, int stride) {
    return select_exemplars({}, height, width, patch, stride);
}

} // namespace glr
