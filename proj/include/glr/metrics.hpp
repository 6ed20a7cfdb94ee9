#pragma once

#include <vector>

#include "glr/tensor.hpp"

namespace glr {

inline constexpr double kPsnrCapDb = 100.0;

/// 10 log10(peak^2 / MSE) over all entries, capped at 100 dB.
double psnr(const Tensor3d& a, const Tensor3d& b, double peak = 1.0);

/// Mean SSIM of each channel: 11x11 Gaussian window (sigma 1.5) over the
/// valid region, K1 = 0.01, K2 = 0.03.
std::vector<double> ssim_per_channel(const Tensor3d& a, const Tensor3d& b, double peak = 1.0);

/// Channel average of ssim_per_channel.
double ssim(const Tensor3d& a, const Tensor3d& b, double peak = 1.0);

struct MetricResult {
    double psnr_db = 0.0;
    double ssim = 0.0;
    std::vector<double> psnr_per_channel;
    std::vector<double> ssim_per_channel;
};

MetricResult evaluate(const Tensor3d& reference, const Tensor3d& test, double peak = 1.0);

} // namespace glr
