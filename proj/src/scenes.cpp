#include "glr/scenes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace glr {

namespace {

constexpr double kPi = std::numbers::pi;

struct Grating {
    double fy, fx, phase, amp;
};

std::vector<Grating> random_gratings(std::mt19937_64& rng, int n, double min_period, double max_period) {
    std::vector<Grating> g;
    for (int i = 0; i < n; ++i) {
        const double period = min_period + (max_period - min_period) * unit_uniform(rng);
        const double angle = kPi * unit_uniform(rng);
        g.push_back({std::sin(angle) / period, std::cos(angle) / period, 2.0 * kPi * unit_uniform(rng),
                     0.5 + 0.5 * unit_uniform(rng)});
    }
    return g;
}

double eval_gratings(const std::vector<Grating>& g, double y, double x) {
    double s = 0.0, norm = 0.0;
    for (const auto& t : g) {
        s += t.amp * std::sin(2.0 * kPi * (t.fy * y + t.fx * x) + t.phase);
        norm += t.amp;
    }
    return norm > 0.0 ? s / norm : 0.0;
}

} // namespace

Tensor3d moving_square_scene(int height, int width, int frames, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto bg = random_gratings(rng, 3, 5.0, 12.0);
    Tensor3d x(height, width, frames);
    const int side = std::max(4, std::min(height, width) / 4);
    for (int t = 0; t < frames; ++t) {
        const int r0 = height / 6 + 2 * t, c0 = width / 6 + 3 * t;
        for (int h = 0; h < height; ++h) {
            for (int w = 0; w < width; ++w) {
                double v = 0.4 + 0.2 * eval_gratings(bg, h, w);
                if (h >= r0 && h < r0 + side && w >= c0 && w < c0 + side) v = 0.9;
                x(h, w, t) = v;
            }
        }
    }
    return x;
}

Tensor3d smooth_phantom(int height, int width) {
    struct Ellipse {
        double cy, cx, ry, rx, angle, value, slope_y, slope_x;
    };
    const Ellipse shapes[] = {
        {0.0, 0.0, 0.90, 0.70, 0.0, 0.35, 0.10, 0.05},
        {0.0, 0.0, 0.82, 0.62, 0.0, 0.20, -0.05, 0.08},
        {-0.25, -0.22, 0.30, 0.16, 0.35, 0.25, 0.10, 0.0},
        {-0.20, 0.25, 0.34, 0.18, -0.35, 0.15, 0.0, 0.12},
        {0.40, 0.0, 0.14, 0.22, 0.0, 0.20, 0.0, 0.0},
        {0.10, 0.0, 0.08, 0.08, 0.0, -0.10, 0.0, 0.0},
        {0.55, -0.18, 0.06, 0.10, 0.0, 0.25, 0.0, 0.0},
    };
    Tensor3d x(height, width, 1);
    for (int h = 0; h < height; ++h) {
        for (int w = 0; w < width; ++w) {
            const double y = 2.0 * (h + 0.5) / height - 1.0, xx = 2.0 * (w + 0.5) / width - 1.0;
            double v = 0.0;
            for (const auto& e : shapes) {
                const double dy = y - e.cy, dx = xx - e.cx;
                const double ry = std::cos(e.angle) * dy + std::sin(e.angle) * dx;
                const double rx = -std::sin(e.angle) * dy + std::cos(e.angle) * dx;
                if ((ry * ry) / (e.ry * e.ry) + (rx * rx) / (e.rx * e.rx) <= 1.0)
                    v += e.value + e.slope_y * ry + e.slope_x * rx;
            }
            // striped insert
            const double sy = y - 0.05, sx = xx + 0.05;
            if (sy * sy / 0.04 + sx * sx / 0.09 <= 1.0 && std::abs(sy) > 0.0)
                v += 0.12 * (std::sin(2.0 * kPi * w / 6.0) > 0.0 ? 1.0 : -1.0);
            x(h, w) = std::clamp(v, 0.0, 1.0);
        }
    }
    return x;
}

Tensor3d multispectral_scene(int height, int width, int channels, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto spectrum = [&](double base) {
        const double centre = unit_uniform(rng), spread = 0.2 + 0.4 * unit_uniform(rng);
        std::vector<double> s;
        for (int c = 0; c < channels; ++c) {
            const double lam = channels > 1 ? double(c) / (channels - 1) : 0.5;
            s.push_back(base + 0.4 * std::exp(-(lam - centre) * (lam - centre) / (2.0 * spread * spread)));
        }
        return s;
    };
    const std::vector<double> bg_spec = spectrum(0.25);
    // three motif types, each placed once per row and column of a 3 x 3 layout
    constexpr int kTypes = 3;
    std::vector<std::vector<Grating>> tex;
    std::vector<std::vector<double>> spec;
    for (int t = 0; t < kTypes; ++t) {
        tex.push_back(random_gratings(rng, 2, 5.0, 9.0));
        spec.push_back(spectrum(0.35));
    }
    const int cell_h = height / 3, cell_w = width / 3;
    const int side_h = std::max(4, cell_h * 2 / 3), side_w = std::max(4, cell_w * 2 / 3);
    Tensor3d x(height, width, channels);
    for (int h = 0; h < height; ++h) {
        for (int w = 0; w < width; ++w) {
            const double shade = 0.8 + 0.2 * double(h + w) / double(height + width);
            const std::vector<double>* sp = &bg_spec;
            double v = shade;
            const int ci = std::min(h / std::max(cell_h, 1), 2), cj = std::min(w / std::max(cell_w, 1), 2);
            // jitter the motif inside its cell so copies see different filter phases
            const int oh = ci * cell_h + (cell_h - side_h) / 2 + (ci + 2 * cj) % 3 - 1;
            const int ow = cj * cell_w + (cell_w - side_w) / 2 + (2 * ci + cj) % 3 - 1;
            if (h >= oh && h < oh + side_h && w >= ow && w < ow + side_w) {
                const int t = (ci + cj) % kTypes;
                sp = &spec[std::size_t(t)];
                v = 0.7 + 0.3 * eval_gratings(tex[std::size_t(t)], h - oh, w - ow);
            }
            for (int c = 0; c < channels; ++c) x(h, w, c) = std::clamp(v * (*sp)[std::size_t(c)], 0.0, 1.0);
        }
    }
    return x;
}

Tensor3d textured_quadrant_scene(int height, int width, int channels, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto tex = random_gratings(rng, 2, 4.0, 8.0);
    Tensor3d x(height, width, channels);
    for (int c = 0; c < channels; ++c) {
        for (int h = 0; h < height; ++h) {
            for (int w = 0; w < width; ++w) {
                double v = 0.3 + 0.3 * (double(h) / height) + 0.1 * (double(w) / width);
                if (h < height / 2 && w < width / 2) v = 0.45 + 0.3 * eval_gratings(tex, h + c, w + c);
                x(h, w, c) = std::clamp(v, 0.0, 1.0);
            }
        }
    }
    return x;
}

Tensor3d add_noise(const Tensor3d& x, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Tensor3d out = x;
    for (Index i = 0; i < out.size(); ++i) {
        // Box-Muller on platform-independent uniforms
        const double u1 = 1.0 - unit_uniform(rng), u2 = unit_uniform(rng);
        out.data()[i] += sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }
    return out;
}

Tensor3d demo_scene(const std::string& name, int height, int width, int channels, std::uint64_t seed) {
    if (name == "moving-square") return moving_square_scene(height, width, channels, seed);
    if (name == "phantom") {
        if (channels != 1) throw ConfigError("the phantom scene has a single channel");
        return smooth_phantom(height, width);
    }
    if (name == "multispectral") return multispectral_scene(height, width, channels, seed);
    if (name == "textured-quadrant") return textured_quadrant_scene(height, width, channels, seed);
    throw ConfigError("unknown demo scene '" + name + "'");
}

} // namespace glr
