#include "glr/lowrank.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace glr {

void WnnmParams::validate() const {
    if (!(c_weight > 0.0)) throw ConfigError("WNNM c_weight must be positive");
    if (!(eps > 0.0)) throw ConfigError("WNNM eps must be positive");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ConfigError("noise sigma must be finite and nonnegative");
    if (fixed_weight && !(*fixed_weight >= 0.0)) throw ConfigError("fixed weight must be nonnegative");
}

Eigen::MatrixXd wnnm_prox(const Eigen::Ref<const Eigen::MatrixXd>& m, const WnnmParams& params) {
    params.validate();
    if (m.rows() < 1 || m.cols() < 1) throw ShapeError("WNNM needs a non-empty matrix");
    if (!m.allFinite()) throw NumericError("WNNM input contains non-finite entries");
    // all weights vanish without noise
    if (!params.fixed_weight && params.noise_sigma == 0.0) return m;

    // Singular pairs come from the symmetric eigendecomposition of the smaller
    // Gram matrix; with M^T M = V S^2 V^T the result U f(S) V^T is
    // M V diag(f(s)/s) V^T, so U and its signs never appear.
    const bool tall = m.rows() >= m.cols();
    const Eigen::MatrixXd gram = tall ? Eigen::MatrixXd(m.transpose() * m) : Eigen::MatrixXd(m * m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success) throw NumericError("eigendecomposition failed in WNNM");
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const Eigen::MatrixXd& vecs = eig.eigenvectors();

    const double k = double(m.cols());
    const double var = params.noise_sigma * params.noise_sigma;
    const double floor = std::numeric_limits<double>::epsilon() * std::max(lambda.maxCoeff(), 0.0) * double(gram.rows());
    Eigen::VectorXd gain(lambda.size());
    Index kept = 0;
    for (Index j = 0; j < lambda.size(); ++j) {
        if (!(lambda[j] > floor)) {
            gain[j] = 0.0;
            continue;
        }
        const double s = std::sqrt(lambda[j]);
        double w;
        if (params.fixed_weight) {
            w = *params.fixed_weight;
        } else {
            const double sig = std::sqrt(std::max(lambda[j] - k * var, 0.0));
            w = params.c_weight * std::sqrt(k) * var / (sig + params.eps);
        }
        gain[j] = std::max(s - w, 0.0) / s;
        if (gain[j] > 0.0) ++kept;
    }
    if (kept == 0) return Eigen::MatrixXd::Zero(m.rows(), m.cols());
    Eigen::MatrixXd v(vecs.rows(), kept);
    Eigen::VectorXd g(kept);
    for (Index j = 0, c = 0; j < lambda.size(); ++j) {
        if (gain[j] > 0.0) {
            v.col(c) = vecs.col(j);
            g[c++] = gain[j];
        }
    }
    const Eigen::MatrixXd scaled = v * g.asDiagonal();
    if (tall) return (m * scaled) * v.transpose();
    return scaled * (v.transpose() * m);
}

Tensor3d glr_regularize(const Tensor3d& x, std::span<const PatchGroupd> groups, const WnnmParams& params) {
    if (groups.empty()) return x;
    Tensor3d acc(x.height(), x.width(), x.channels());
    Tensor3d cnt(x.height(), x.width(), x.channels());
    PatchGroupd shrunk;
    for (const PatchGroupd& g : groups) {
        shrunk.patch_size = g.patch_size;
        shrunk.positions = g.positions;
        shrunk.matrix = wnnm_prox(g.matrix, params);
        scatter_group(acc, cnt, shrunk);
    }
    return normalize_accumulator(acc, cnt, x);
}

} // namespace glr
