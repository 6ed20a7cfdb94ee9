#pragma once

#include <optional>
#include <span>

#include "glr/tensor.hpp"

namespace glr {

struct WnnmParams {
    double c_weight = 2.8284271247461903; // 2 * sqrt(2)
    double eps = 1e-16;
    /// Per-entry noise standard deviation of the group matrix.
    double noise_sigma = 0.0;
    /// Replace the adaptive weights by one constant threshold (plain singular
    /// value soft-thresholding). Used to cross-check against SVT.
    std::optional<double> fixed_weight;

    void validate() const;
};

/// Weighted singular-value shrinkage of one patch group:
///   s_hat_j = sqrt(max(s_j^2 - K sigma^2, 0))
///   w_j     = c sqrt(K) sigma^2 / (s_hat_j + eps)
///   out     = U diag(max(s_j - w_j, 0)) V^T
/// where K is the number of columns.
Eigen::MatrixXd wnnm_prox(const Eigen::Ref<const Eigen::MatrixXd>& m, const WnnmParams& params);

/// Shrink every group and average the overlapping patches back into the
/// image. Pixels no patch covers keep their value from `x`.
Tensor3d glr_regularize(const Tensor3d& x, std::span<const PatchGroupd> groups, const WnnmParams& params);

} // namespace glr
