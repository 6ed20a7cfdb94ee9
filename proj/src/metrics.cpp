#include "glr/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace glr {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

std::array<double, kWindow> gaussian_taps() {
    std::array<double, kWindow> g{};
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - kWindow / 2;
        g[std::size_t(i)] = std::exp(-d * d / (2.0 * kSigma * kSigma));
        sum += g[std::size_t(i)];
    }
    for (double& v : g) v /= sum;
    return g;
}

/// Separable valid-mode filtering of an H x W plane.
Eigen::ArrayXXd filter_valid(const Eigen::ArrayXXd& in, const std::array<double, kWindow>& g) {
    const Index H = in.rows(), W = in.cols();
    Eigen::ArrayXXd tmp = Eigen::ArrayXXd::Zero(H, W - kWindow + 1);
    for (int k = 0; k < kWindow; ++k) tmp += g[std::size_t(k)] * in.middleCols(k, W - kWindow + 1);
    Eigen::ArrayXXd out = Eigen::ArrayXXd::Zero(H - kWindow + 1, W - kWindow + 1);
    for (int k = 0; k < kWindow; ++k) out += g[std::size_t(k)] * tmp.middleRows(k, H - kWindow + 1);
    return out;
}

Eigen::ArrayXXd plane(const Tensor3d& t, int c) {
    Eigen::ArrayXXd p(t.height(), t.width());
    for (int h = 0; h < t.height(); ++h)
        for (int w = 0; w < t.width(); ++w) p(h, w) = t(h, w, c);
    return p;
}

void check_pair(const Tensor3d& a, const Tensor3d& b, double peak) {
    if (!a.same_shape(b)) throw ShapeError("metric inputs differ in shape");
    if (!(peak > 0.0)) throw ConfigError("peak must be positive");
}

double psnr_from_mse(double mse, double peak) {
    if (mse == 0.0) return kPsnrCapDb;
    return std::min(kPsnrCapDb, 10.0 * std::log10(peak * peak / mse));
}

} // namespace

double psnr(const Tensor3d& a, const Tensor3d& b, double peak) {
    check_pair(a, b, peak);
    return psnr_from_mse((a.data() - b.data()).squaredNorm() / double(a.size()), peak);
}

std::vector<double> ssim_per_channel(const Tensor3d& a, const Tensor3d& b, double peak) {
    check_pair(a, b, peak);
    if (a.height() < kWindow || a.width() < kWindow) throw ShapeError("SSIM needs images of at least 11x11");
    const auto g = gaussian_taps();
    const double c1 = (0.01 * peak) * (0.01 * peak), c2 = (0.03 * peak) * (0.03 * peak);
    std::vector<double> out;
    for (int c = 0; c < a.channels(); ++c) {
        const Eigen::ArrayXXd x = plane(a, c), y = plane(b, c);
        const Eigen::ArrayXXd mx = filter_valid(x, g), my = filter_valid(y, g);
        const Eigen::ArrayXXd sxx = filter_valid(x * x, g) - mx * mx;
        const Eigen::ArrayXXd syy = filter_valid(y * y, g) - my * my;
        const Eigen::ArrayXXd sxy = filter_valid(x * y, g) - mx * my;
        const Eigen::ArrayXXd map =
            ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) / ((mx * mx + my * my + c1) * (sxx + syy + c2));
        out.push_back(map.mean());
    }
    return out;
}

double ssim(const Tensor3d& a, const Tensor3d& b, double peak) {
    const auto per = ssim_per_channel(a, b, peak);
    double s = 0.0;
    for (double v : per) s += v;
    return s / double(per.size());
}

MetricResult evaluate(const Tensor3d& reference, const Tensor3d& test, double peak) {
    MetricResult r;
    r.psnr_db = psnr(reference, test, peak);
    r.ssim_per_channel = ssim_per_channel(reference, test, peak);
    for (double v : r.ssim_per_channel) r.ssim += v;
    r.ssim /= double(r.ssim_per_channel.size());
    for (int c = 0; c < reference.channels(); ++c) r.psnr_per_channel.push_back(psnr(reference.channel(c), test.channel(c), peak));
    return r;
}

} // namespace glr
