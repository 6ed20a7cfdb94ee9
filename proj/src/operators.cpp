#include "glr/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "glr/fft.hpp"

namespace glr {

std::string to_string(OperatorKind k) {
    switch (k) {
    case OperatorKind::Cacti: return "cacti";
    case OperatorKind::Fourier: return "fourier";
    case OperatorKind::Msfa: return "msfa";
    }
    return "?";
}

OperatorKind parse_operator_kind(const std::string& s) {
    for (auto k : {OperatorKind::Cacti, OperatorKind::Fourier, OperatorKind::Msfa})
        if (to_string(k) == s) return k;
    throw ConfigError("unknown sensing model '" + s + "'");
}

Measurement subtract(const Measurement& a, const Measurement& b) {
    if (a.index() != b.index()) throw ShapeError("measurement kinds differ");
    if (const auto* ra = std::get_if<Tensor3d>(&a)) {
        const auto& rb = std::get<Tensor3d>(b);
        if (!ra->same_shape(rb)) throw ShapeError("measurement shapes differ");
        Tensor3d out = *ra;
        out.data() -= rb.data();
        return out;
    }
    const auto& ca = std::get<ComplexTensor2>(a);
    const auto& cb = std::get<ComplexTensor2>(b);
    if (!ca.same_shape(cb)) throw ShapeError("measurement shapes differ");
    ComplexTensor2 out = ca;
    out.data() -= cb.data();
    return out;
}

double norm(const Measurement& m) {
    return std::visit([](const auto& t) { return t.data().norm(); }, m);
}

double inner(const Measurement& a, const Measurement& b) {
    if (a.index() != b.index()) throw ShapeError("measurement kinds differ");
    if (const auto* ra = std::get_if<Tensor3d>(&a)) return inner(*ra, std::get<Tensor3d>(b));
    const auto& ca = std::get<ComplexTensor2>(a);
    const auto& cb = std::get<ComplexTensor2>(b);
    if (!ca.same_shape(cb)) throw ShapeError("measurement shapes differ");
    return ca.data().dot(cb.data()).real();
}

Tensor3d SensingOperator::project(const Tensor3d& z, const Measurement& y, double rho) const {
    check_measurement(y);
    Measurement r = subtract(y, forward(z));
    const Eigen::ArrayXd denom = gram_diag().data().array() + rho;
    const Eigen::ArrayXd scale = (denom > 0.0).select(1.0 / denom.max(1e-300), 0.0);
    std::visit([&](auto& t) { t.data().array() *= scale.template cast<typename std::decay_t<decltype(t.data())>::Scalar>(); }, r);
    Tensor3d out = z;
    out.data() += adjoint(r).data();
    return out;
}

// --- CACTI -------------------------------------------------------------------

namespace {

void check_video(const Tensor3d& x, const MaskSet& masks) {
    if (x.height() != masks.masks.height() || x.width() != masks.masks.width())
        throw ShapeError("signal and masks differ in spatial size");
    if (x.channels() != masks.count()) throw ShapeError("frame count does not match mask count");
}

void check_snapshot(const Tensor3d& y, const MaskSet& masks) {
    if (y.height() != masks.masks.height() || y.width() != masks.masks.width() || y.channels() != 1)
        throw ShapeError("measurement must be an H x W x 1 snapshot matching the masks");
}

Tensor3d masked_sum(const Tensor3d& x, const MaskSet& masks) {
    check_video(x, masks);
    const int T = masks.count();
    Tensor3d y(x.height(), x.width(), 1);
    for (Index px = 0; px < y.size(); ++px)
        y.data()[px] = x.data().segment(px * T, T).dot(masks.masks.data().segment(px * T, T));
    return y;
}

Tensor3d masked_spread(const Tensor3d& y, const MaskSet& masks) {
    check_snapshot(y, masks);
    const int T = masks.count();
    Tensor3d x(y.height(), y.width(), T);
    for (Index px = 0; px < y.size(); ++px)
        x.data().segment(px * T, T) = masks.masks.data().segment(px * T, T) * y.data()[px];
    return x;
}

Tensor3d sum_of_squares(const MaskSet& masks) {
    const int T = masks.count();
    Tensor3d g(masks.masks.height(), masks.masks.width(), 1);
    for (Index px = 0; px < g.size(); ++px) g.data()[px] = masks.masks.data().segment(px * T, T).squaredNorm();
    return g;
}

} // namespace

Tensor3d cacti_forward(const Tensor3d& x, const MaskSet& masks) { return masked_sum(x, masks); }

Tensor3d cacti_adjoint(const Tensor3d& y, const MaskSet& masks) { return masked_spread(y, masks); }

MaskSet bernoulli_masks(int height, int width, int frames, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    MaskSet m{Tensor3d(height, width, frames)};
    for (Index i = 0; i < m.masks.size(); ++i) m.masks.data()[i] = double(rng() >> 63);
    return m;
}

CactiOperator::CactiOperator(MaskSet masks) : masks_(std::move(masks)) {
    if (!all_finite(masks_.masks)) throw ConfigError("CACTI masks contain non-finite values");
    gram_ = sum_of_squares(masks_);
}

Tensor3d CactiOperator::adjoint(const Measurement& y) const {
    check_measurement(y);
    return cacti_adjoint(std::get<Tensor3d>(y), masks_);
}

void CactiOperator::check_measurement(const Measurement& y) const {
    const auto* t = std::get_if<Tensor3d>(&y);
    if (!t) throw ShapeError("CACTI measurements are real snapshots");
    check_snapshot(*t, masks_);
}

// --- Fourier -----------------------------------------------------------------

namespace {

void check_fourier_mask(const FourierMask& mask, int h, int w) {
    if (mask.map.height() != h || mask.map.width() != w || mask.map.channels() != 1)
        throw ShapeError("Fourier mask and signal shapes differ");
}

} // namespace

ComplexTensor2 fourier_forward(const Tensor3d& x, const FourierMask& mask) {
    if (x.channels() != 1) throw ShapeError("Fourier sampling expects a single-channel image");
    check_fourier_mask(mask, x.height(), x.width());
    Eigen::MatrixXcd m = x.plane().cast<std::complex<double>>();
    fft2_unitary(m);
    ComplexTensor2 y(x.height(), x.width());
    for (int h = 0; h < x.height(); ++h)
        for (int w = 0; w < x.width(); ++w) y(h, w) = m(h, w) * mask.map(h, w);
    return y;
}

namespace {

Eigen::MatrixXcd masked_inverse(const ComplexTensor2& y, const FourierMask& mask) {
    check_fourier_mask(mask, y.height(), y.width());
    Eigen::MatrixXcd m(y.height(), y.width());
    for (int h = 0; h < y.height(); ++h)
        for (int w = 0; w < y.width(); ++w) m(h, w) = y(h, w) * mask.map(h, w);
    fft2_unitary(m, true);
    return m;
}

} // namespace

Tensor3d fourier_adjoint(const ComplexTensor2& y, const FourierMask& mask) {
    const Eigen::MatrixXcd m = masked_inverse(y, mask);
    Tensor3d x(y.height(), y.width(), 1);
    for (int h = 0; h < y.height(); ++h)
        for (int w = 0; w < y.width(); ++w) x(h, w) = m(h, w).real();
    return x;
}

double fourier_imaginary_residual(const ComplexTensor2& y, const FourierMask& mask) {
    return masked_inverse(y, mask).imag().norm();
}

FourierMask radial_mask(int height, int width, int num_lines) {
    if (num_lines < 1) throw ConfigError("radial mask needs at least one line");
    if (height < 1 || width < 1) throw ConfigError("radial mask dimensions must be positive");
    FourierMask mask{Tensor3d(height, width, 1)};
    // centred coordinates dy in [-H/2, H-1-H/2], stored at dy mod H
    const int y_lo = -height / 2, y_hi = height - 1 - height / 2;
    const int x_lo = -width / 2, x_hi = width - 1 - width / 2;
    auto mark = [&](int dy, int dx) {
        if (dy < y_lo || dy > y_hi || dx < x_lo || dx > x_hi) return;
        mask.map((dy % height + height) % height, (dx % width + width) % width) = 1.0;
    };
    const double reach = double(std::max(height, width));
    for (int k = 0; k < num_lines; ++k) {
        const double theta = std::numbers::pi * k / num_lines;
        const int ey = int(std::lround(reach * std::sin(theta)));
        const int ex = int(std::lround(reach * std::cos(theta)));
        // Bresenham from (-ey, -ex) to (ey, ex)
        int y0 = -ey, x0 = -ex;
        const int dx = std::abs(2 * ex), dy = -std::abs(2 * ey);
        const int sx = ex > 0 ? 1 : -1, sy = ey > 0 ? 1 : -1;
        int err = dx + dy;
        for (;;) {
            mark(y0, x0);
            if (y0 == ey && x0 == ex) break;
            const int e2 = 2 * err;
            if (e2 >= dy) { err += dy; x0 += sx; }
            if (e2 <= dx) { err += dx; y0 += sy; }
        }
    }
    // conjugate symmetry: (k, l) pairs with (-k, -l) mod (H, W)
    Tensor3d sym = mask.map;
    for (int h = 0; h < height; ++h)
        for (int w = 0; w < width; ++w)
            if (mask.map(h, w) != 0.0) sym((height - h) % height, (width - w) % width) = 1.0;
    sym(0, 0) = 1.0;
    mask.map = std::move(sym);
    return mask;
}

Tensor3d fftshift(const Tensor3d& m) {
    const int H = m.height(), W = m.width(), C = m.channels();
    Tensor3d out(H, W, C);
    for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w)
            for (int c = 0; c < C; ++c) out((h + H / 2) % H, (w + W / 2) % W, c) = m(h, w, c);
    return out;
}

FourierOperator::FourierOperator(FourierMask mask) : mask_(std::move(mask)) {
    if (mask_.map.channels() != 1) throw ConfigError("Fourier mask must be a single-channel map");
    if (!((mask_.map.data().array() == 0.0) || (mask_.map.data().array() == 1.0)).all())
        throw ConfigError("Fourier mask must be binary");
}

Tensor3d FourierOperator::adjoint(const Measurement& y) const {
    check_measurement(y);
    return fourier_adjoint(std::get<ComplexTensor2>(y), mask_);
}

void FourierOperator::check_measurement(const Measurement& y) const {
    const auto* c = std::get_if<ComplexTensor2>(&y);
    if (!c) throw ShapeError("Fourier measurements are complex spectra");
    if (c->height() != height() || c->width() != width()) throw ShapeError("spectrum and mask shapes differ");
}

// --- MSFA --------------------------------------------------------------------

void check_partition(const MaskSet& masks) {
    const int N = masks.count();
    const Eigen::VectorXd& d = masks.masks.data();
    for (Index px = 0; px < Index(masks.masks.height()) * masks.masks.width(); ++px) {
        int active = 0;
        for (int i = 0; i < N; ++i) {
            const double v = d[px * N + i];
            if (v != 0.0 && v != 1.0)
                throw OrthogonalityError("MSFA masks must be binary (value " + std::to_string(v) + " at pixel " +
                                         std::to_string(px) + ")");
            active += v == 1.0;
        }
        if (active != 1) {
            const int h = int(px / masks.masks.width()), w = int(px % masks.masks.width());
            throw OrthogonalityError("MSFA masks violate orthogonality/partition at (" + std::to_string(h) + ", " +
                                     std::to_string(w) + "): " + std::to_string(active) +
                                     " active channels, expected exactly 1");
        }
    }
}

Tensor3d msfa_forward(const Tensor3d& x, const MaskSet& masks) { return masked_sum(x, masks); }

Tensor3d msfa_adjoint(const Tensor3d& y, const MaskSet& masks) { return masked_spread(y, masks); }

std::string to_string(MsfaPattern p) {
    switch (p) {
    case MsfaPattern::Bayer2x2: return "bayer-like-2x2";
    case MsfaPattern::Periodic3x3: return "periodic-3x3";
    case MsfaPattern::Periodic4x4: return "periodic-4x4";
    case MsfaPattern::CustomTile: return "custom-tile";
    }
    return "?";
}

MsfaPattern parse_msfa_pattern(const std::string& s) {
    for (auto p : {MsfaPattern::Bayer2x2, MsfaPattern::Periodic3x3, MsfaPattern::Periodic4x4, MsfaPattern::CustomTile})
        if (to_string(p) == s) return p;
    throw ConfigError("unknown MSFA pattern '" + s + "'");
}

FilterTile parse_tile(const std::string& text) {
    FilterTile tile;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        std::istringstream cells(line);
        std::vector<int> row;
        std::string tok;
        while (cells >> tok) {
            std::size_t used = 0;
            int v = 0;
            try {
                v = std::stoi(tok, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tok.size()) throw ConfigError("tile entry '" + tok + "' is not an integer");
            row.push_back(v);
        }
        if (row.empty()) continue;
        if (tile.rows > 0 && int(row.size()) != tile.cols) throw ConfigError("tile rows have different lengths");
        tile.cols = int(row.size());
        ++tile.rows;
        tile.channel.insert(tile.channel.end(), row.begin(), row.end());
    }
    if (tile.rows == 0) throw ConfigError("empty MSFA tile");
    return tile;
}

MaskSet msfa_pattern(MsfaPattern kind, int channels, int height, int width, const std::optional<FilterTile>& tile) {
    if (channels < 1) throw ConfigError("MSFA needs at least one channel");
    FilterTile t;
    auto periodic = [&](int k) {
        if (channels != k * k)
            throw ConfigError(to_string(kind) + " needs exactly " + std::to_string(k * k) + " channels");
        t.rows = t.cols = k;
        t.channel.resize(std::size_t(k) * k);
        std::iota(t.channel.begin(), t.channel.end(), 0);
    };
    switch (kind) {
    case MsfaPattern::Bayer2x2: periodic(2); break;
    case MsfaPattern::Periodic3x3: periodic(3); break;
    case MsfaPattern::Periodic4x4: periodic(4); break;
    case MsfaPattern::CustomTile:
        if (!tile) throw ConfigError("custom-tile pattern needs a tile");
        t = *tile;
        break;
    }
    for (int c : t.channel)
        if (c < 0 || c >= channels)
            throw ConfigError("tile channel index " + std::to_string(c) + " outside [0, " + std::to_string(channels) + ")");
    MaskSet m{Tensor3d(height, width, channels)};
    for (int h = 0; h < height; ++h)
        for (int w = 0; w < width; ++w) m.masks(h, w, t.at(h % t.rows, w % t.cols)) = 1.0;
    return m;
}

MsfaOperator::MsfaOperator(MaskSet masks) : masks_(std::move(masks)) {
    check_partition(masks_);
    gram_ = sum_of_squares(masks_);
}

Tensor3d MsfaOperator::adjoint(const Measurement& y) const {
    check_measurement(y);
    return msfa_adjoint(std::get<Tensor3d>(y), masks_);
}

void MsfaOperator::check_measurement(const Measurement& y) const {
    const auto* t = std::get_if<Tensor3d>(&y);
    if (!t) throw ShapeError("MSFA measurements are real mosaics");
    check_snapshot(*t, masks_);
}

} // namespace glr
