#include "doctest.h"

#include "glr/lowrank.hpp"
#include "glr/scenes.hpp"
#include "oracles.hpp"

using namespace glr;

namespace {

Eigen::MatrixXd random_matrix(int m, int k, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Eigen::MatrixXd out(m, k);
    for (Index i = 0; i < out.size(); ++i) out.data()[i] = n(rng);
    return out;
}

Eigen::MatrixXd random_orthogonal(int m, std::mt19937_64& rng) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(m, m, rng));
    return qr.householderQ();
}

WnnmParams with_sigma(double s) {
    WnnmParams p;
    p.noise_sigma = s;
    return p;
}

} // namespace

TEST_CASE("wnnm of a zero matrix is zero") {
    CHECK(wnnm_prox(Eigen::MatrixXd::Zero(6, 4), with_sigma(0.3)).isZero(0));
}

TEST_CASE("wnnm without noise is the identity") {
    std::mt19937_64 rng(40);
    Eigen::MatrixXd m = random_matrix(12, 7, rng);
    CHECK((wnnm_prox(m, with_sigma(0.0)) - m).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("wnnm of a rank-one matrix follows the scalar formula") {
    std::mt19937_64 rng(41);
    const int m = 20, K = 9;
    Eigen::VectorXd u = random_matrix(m, 1, rng).col(0).normalized(), v = random_matrix(K, 1, rng).col(0).normalized();
    const double sigma = 5.0, noise = 0.4;
    Eigen::MatrixXd M = sigma * u * v.transpose();
    WnnmParams p = with_sigma(noise);
    Eigen::MatrixXd out = wnnm_prox(M, p);
    const double hat = std::sqrt(sigma * sigma - K * noise * noise);
    const double w = p.c_weight * std::sqrt(double(K)) * noise * noise / (hat + p.eps);
    const double expect = std::max(sigma - w, 0.0);
    CHECK(oracle::spectral_norm(out) == doctest::Approx(expect).epsilon(1e-10));
    CHECK((out - expect * u * v.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((out - oracle::weighted_svt(M, p.c_weight, p.eps, noise)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("wnnm matches an independent weighted SVT") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 30; ++trial) {
        const int m = 1 + int(rng() % 40), k = 1 + int(rng() % 40);
        Eigen::MatrixXd M = random_matrix(m, k, rng);
        const double sigma = 0.05 * (1 + trial % 6);
        WnnmParams p = with_sigma(sigma);
        CHECK((wnnm_prox(M, p) - oracle::weighted_svt(M, p.c_weight, p.eps, sigma)).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("fixed weight equals plain soft thresholding") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXd M = random_matrix(15, 10, rng);
        WnnmParams p;
        p.fixed_weight = 0.5 * trial;
        CHECK((wnnm_prox(M, p) - oracle::soft_threshold(M, 0.5 * trial)).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("wnnm rejects bad input") {
    Eigen::MatrixXd M = Eigen::MatrixXd::Ones(3, 3);
    M(1, 1) = std::nan("");
    CHECK_THROWS_AS(wnnm_prox(M, with_sigma(0.1)), NumericError);
    WnnmParams p;
    p.c_weight = 0.0;
    CHECK_THROWS_AS(wnnm_prox(Eigen::MatrixXd::Ones(2, 2), p), ConfigError);
}

TEST_CASE("property: rank never grows, spectral norm never grows") {
    std::mt19937_64 rng(44);
    for (int trial = 0; trial < 25; ++trial) {
        const int m = 2 + int(rng() % 30), k = 2 + int(rng() % 30), r = 1 + int(rng() % 5);
        Eigen::MatrixXd M = random_matrix(m, r, rng) * random_matrix(r, k, rng) + random_matrix(m, k, rng, 0.05);
        Eigen::MatrixXd out = wnnm_prox(M, with_sigma(0.1));
        CHECK(oracle::numerical_rank(out) <= oracle::numerical_rank(M));
        CHECK(oracle::spectral_norm(out) <= oracle::spectral_norm(M) * (1 + 1e-12));
    }
}

TEST_CASE("property: wnnm commutes with orthogonal transforms") {
    std::mt19937_64 rng(45);
    for (int trial = 0; trial < 10; ++trial) {
        const int m = 3 + int(rng() % 20), k = 2 + int(rng() % 20);
        Eigen::MatrixXd M = random_matrix(m, k, rng);
        Eigen::MatrixXd Q = random_orthogonal(m, rng);
        WnnmParams p = with_sigma(0.2);
        CHECK((wnnm_prox(Q * M, p) - Q * wnnm_prox(M, p)).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("glr regularize leaves a constant image unchanged without noise") {
    Tensor3d x(16, 16, 2, 0.4);
    std::vector<Anchor> a{{0, 0}, {3, 5}, {8, 8}};
    std::vector<PatchGroupd> g{gather_group(x, std::span<const Anchor>(a), 8)};
    CHECK(glr_regularize(x, g, with_sigma(0.0)) == x);
}

TEST_CASE("glr regularize only changes covered pixels") {
    std::mt19937_64 rng(46);
    Tensor3d x = oracle::random_tensor(20, 20, 1, rng);
    std::vector<Anchor> a{{0, 0}, {0, 4}}, b{{12, 12}, {14, 14}};
    std::vector<PatchGroupd> g{gather_group(x, std::span<const Anchor>(a), 4),
                               gather_group(x, std::span<const Anchor>(b), 4)};
    Tensor3d out = glr_regularize(x, g, with_sigma(0.3));
    bool changed = false;
    for (int h = 0; h < 20; ++h)
        for (int w = 0; w < 20; ++w) {
            const bool covered = (h < 4 && w < 8) || (h >= 12 && h < 18 && w >= 12 && w < 18);
            if (!covered) CHECK(out(h, w) == x(h, w));
            else if (out(h, w) != x(h, w)) changed = true;
        }
    CHECK(changed);
    CHECK(glr_regularize(x, {}, with_sigma(0.3)) == x);
}

TEST_CASE("glr regularize reduces noise on a repeating texture") {
    std::mt19937_64 rng(47);
    Tensor3d tile = oracle::random_tensor(8, 8, 1, rng);
    Tensor3d clean(32, 32, 1);
    for (int h = 0; h < 32; ++h)
        for (int w = 0; w < 32; ++w) clean(h, w) = tile(h % 8, w % 8);
    const double sigma = 0.1;
    double before = 0, after = 0;
    for (int rep = 0; rep < 5; ++rep) {
        Tensor3d noisy = add_noise(clean, sigma, 100 + std::uint64_t(rep));
        std::vector<Anchor> a;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) a.push_back({8 * r, 8 * c});
        std::vector<PatchGroupd> g{gather_group(noisy, std::span<const Anchor>(a), 8)};
        Tensor3d out = glr_regularize(noisy, g, with_sigma(sigma));
        before += (noisy.data() - clean.data()).squaredNorm();
        after += (out.data() - clean.data()).squaredNorm();
    }
    // one shrinkage pass with 16 patches removes roughly a third of the error
    CHECK(after < 0.75 * before);
}
