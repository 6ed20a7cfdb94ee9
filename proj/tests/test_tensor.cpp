#include "doctest.h"

#include "glr/tensor.hpp"
#include "oracles.hpp"

using namespace glr;

TEST_CASE("tensor rejects bad shapes") {
    CHECK_THROWS_AS(Tensor3d(0, 3, 1), ShapeError);
    CHECK_THROWS_AS(Tensor3d(2, 2, 2, Eigen::VectorXd::Zero(7)), ShapeError);
    Tensor3d t(2, 3, 4);
    CHECK(t.size() == 24);
    t(1, 2, 3) = 5.0;
    CHECK(t.data()[(1 * 3 + 2) * 4 + 3] == 5.0);
}

TEST_CASE("gather of a constant image gives a column of ones") {
    Tensor3d img(4, 4, 1, 1.0);
    std::vector<Anchor> a{{0, 0}};
    PatchGroupd g = gather_group(img, std::span<const Anchor>(a), 2);
    CHECK(g.matrix.rows() == 4);
    CHECK(g.matrix.cols() == 1);
    CHECK(g.matrix.isOnes());
}

TEST_CASE("duplicate anchors give identical columns") {
    std::mt19937_64 rng(1);
    Tensor3d img = oracle::random_tensor(6, 6, 2, rng);
    std::vector<Anchor> a{{0, 0}, {0, 0}};
    PatchGroupd g = gather_group(img, std::span<const Anchor>(a), 3);
    CHECK(g.matrix.col(0) == g.matrix.col(1));
}

TEST_CASE("gather matches a naive copy") {
    std::mt19937_64 rng(2);
    Tensor3d img = oracle::random_tensor(8, 8, 2, rng);
    std::vector<Anchor> a;
    for (int i = 0; i < 5; ++i) a.push_back(oracle::random_anchor(8, 8, 3, rng));
    PatchGroupd g = gather_group(img, std::span<const Anchor>(a), 3);
    CHECK(g.matrix == oracle::gather(img, a, 3));
    CHECK(g.positions == a);
}

TEST_CASE("out-of-bounds anchor reports its index") {
    Tensor3d img(8, 8, 1);
    std::vector<Anchor> a{{0, 0}, {1, 1}, {6, 0}};
    try {
        gather_group(img, std::span<const Anchor>(a), 3);
        FAIL("expected BoundsError");
    } catch (const BoundsError& e) {
        CHECK(e.index() == 2);
    }
}

TEST_CASE("scatter round trip on a constant image") {
    Tensor3d img(6, 6, 2, 0.7);
    std::vector<Anchor> a{{1, 2}};
    PatchGroupd g = gather_group(img, std::span<const Anchor>(a), 3);
    Tensor3d acc(6, 6, 2), cnt(6, 6, 2);
    scatter_group(acc, cnt, g);
    Tensor3d out = normalize_accumulator(acc, cnt, Tensor3d(6, 6, 2, -1.0));
    for (int h = 0; h < 6; ++h)
        for (int w = 0; w < 6; ++w) {
            const bool covered = h >= 1 && h < 4 && w >= 2 && w < 5;
            CHECK(out(h, w, 1) == (covered ? 0.7 : -1.0));
        }
}

TEST_CASE("overlapping groups with equal values average to those values") {
    std::mt19937_64 rng(3);
    Tensor3d img = oracle::random_tensor(7, 7, 1, rng);
    std::vector<Anchor> a{{0, 0}, {1, 1}}, b{{2, 2}, {1, 0}};
    Tensor3d acc(7, 7, 1), cnt(7, 7, 1);
    scatter_group(acc, cnt, gather_group(img, std::span<const Anchor>(a), 4));
    scatter_group(acc, cnt, gather_group(img, std::span<const Anchor>(b), 4));
    Tensor3d out = normalize_accumulator(acc, cnt, img);
    CHECK((out.data() - img.data()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("scatter matches naive accumulation") {
    std::mt19937_64 rng(4);
    Tensor3d acc(9, 10, 3), cnt(9, 10, 3), acc2(9, 10, 3), cnt2(9, 10, 3);
    for (int g = 0; g < 4; ++g) {
        std::vector<Anchor> a;
        for (int i = 0; i < 3; ++i) a.push_back(oracle::random_anchor(9, 10, 4, rng));
        PatchGroupd grp;
        grp.patch_size = 4;
        grp.positions = a;
        grp.matrix = Eigen::MatrixXd::Random(4 * 4 * 3, 3);
        scatter_group(acc, cnt, grp);
        oracle::scatter(acc2, cnt2, a, grp.matrix, 4);
    }
    CHECK((acc.data() - acc2.data()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(cnt == cnt2);
}

TEST_CASE("scatter rejects mismatched accumulator and counter") {
    Tensor3d acc(5, 5, 1), cnt(5, 4, 1);
    PatchGroupd g;
    g.patch_size = 2;
    g.positions = {{0, 0}};
    g.matrix = Eigen::MatrixXd::Zero(4, 1);
    CHECK_THROWS_AS(scatter_group(acc, cnt, g), ShapeError);
}

TEST_CASE("property: scatter of gathered groups restores covered pixels") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const int H = 6 + int(rng() % 10), W = 6 + int(rng() % 10), C = 1 + int(rng() % 3), P = 2 + int(rng() % 4);
        Tensor3d x = oracle::random_tensor(H, W, C, rng, -3, 3);
        Tensor3d acc(H, W, C), cnt(H, W, C);
        for (int g = 0; g < 3; ++g) {
            std::vector<Anchor> a;
            for (int i = 0; i < 4; ++i) a.push_back(oracle::random_anchor(H, W, P, rng));
            scatter_group(acc, cnt, gather_group(x, std::span<const Anchor>(a), P));
        }
        Tensor3d fallback(H, W, C, 99.0);
        Tensor3d out = normalize_accumulator(acc, cnt, fallback);
        for (Index i = 0; i < x.size(); ++i) {
            if (cnt.data()[i] > 0) CHECK(std::abs(out.data()[i] - x.data()[i]) <= 1e-14 * std::abs(x.data()[i]) + 1e-15);
            else CHECK(out.data()[i] == 99.0);
        }
    }
}

TEST_CASE("property: gather and scatter are adjoint") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const int H = 8 + int(rng() % 8), W = 8 + int(rng() % 8), C = 1 + int(rng() % 3), P = 2 + int(rng() % 5);
        Tensor3d x = oracle::random_tensor(H, W, C, rng, -1, 1);
        std::vector<Anchor> a;
        for (int i = 0; i < 6; ++i) a.push_back(oracle::random_anchor(H, W, P, rng));
        PatchGroupd m;
        m.patch_size = P;
        m.positions = a;
        m.matrix = Eigen::MatrixXd::Random(P * P * C, 6);
        const double lhs = (gather_group(x, std::span<const Anchor>(a), P).matrix.array() * m.matrix.array()).sum();
        Tensor3d acc(H, W, C), cnt(H, W, C);
        scatter_group(acc, cnt, m);
        const double rhs = inner(x, acc);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
    }
}
