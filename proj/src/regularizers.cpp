#include "glr/regularizers.hpp"

#include <algorithm>
#include <cmath>

namespace glr {

std::string to_string(RegularizerKind r) {
    switch (r) {
    case RegularizerKind::Glr: return "glr";
    case RegularizerKind::NlrBm: return "nlr-bm";
    case RegularizerKind::NlrCornerBm: return "nlr-corner-bm";
    case RegularizerKind::NlrCornerUniformBm: return "nlr-corner-uniform-bm";
    case RegularizerKind::Tv: return "tv";
    }
    return "?";
}

RegularizerKind parse_regularizer(const std::string& s) {
    for (auto r : {RegularizerKind::Glr, RegularizerKind::NlrBm, RegularizerKind::NlrCornerBm,
                   RegularizerKind::NlrCornerUniformBm, RegularizerKind::Tv})
        if (to_string(r) == s) return r;
    throw ConfigError("unknown regularizer '" + s + "'");
}

Tensor3d tv_prox(const Tensor3d& x, double weight, int iterations) {
    if (!(weight >= 0.0)) throw ConfigError("TV weight must be nonnegative");
    if (iterations < 0) throw ConfigError("TV iterations must be nonnegative");
    if (weight == 0.0 || iterations == 0) return x;
    const int H = x.height(), W = x.width();
    constexpr double step = 0.2; // below 2 / ||D||^2 = 1/4
    Tensor3d out(H, W, x.channels());
    Eigen::ArrayXXd ph(H, W), pv(H, W), z(H, W);
    for (int c = 0; c < x.channels(); ++c) {
        Eigen::ArrayXXd f(H, W);
        for (int h = 0; h < H; ++h)
            for (int w = 0; w < W; ++w) f(h, w) = x(h, w, c);
        ph.setZero();
        pv.setZero();
        auto primal = [&] {
            // z = f - D^T p
            for (int h = 0; h < H; ++h) {
                for (int w = 0; w < W; ++w) {
                    double dt = 0.0;
                    if (w < W - 1) dt -= ph(h, w);
                    if (w > 0) dt += ph(h, w - 1);
                    if (h < H - 1) dt -= pv(h, w);
                    if (h > 0) dt += pv(h - 1, w);
                    z(h, w) = f(h, w) - dt;
                }
            }
        };
        for (int it = 0; it < iterations; ++it) {
            primal();
            for (int h = 0; h < H; ++h) {
                for (int w = 0; w < W; ++w) {
                    if (w < W - 1) ph(h, w) = std::clamp(ph(h, w) + step * (z(h, w + 1) - z(h, w)), -weight, weight);
                    if (h < H - 1) pv(h, w) = std::clamp(pv(h, w) + step * (z(h + 1, w) - z(h, w)), -weight, weight);
                }
            }
        }
        primal();
        for (int h = 0; h < H; ++h)
            for (int w = 0; w < W; ++w) out(h, w, c) = z(h, w);
    }
    return out;
}

double total_variation(const Tensor3d& x) {
    double tv = 0.0;
    for (int h = 0; h < x.height(); ++h)
        for (int w = 0; w < x.width(); ++w)
            for (int c = 0; c < x.channels(); ++c) {
                if (w + 1 < x.width()) tv += std::abs(x(h, w + 1, c) - x(h, w, c));
                if (h + 1 < x.height()) tv += std::abs(x(h + 1, w, c) - x(h, w, c));
            }
    return tv;
}

} // namespace glr
