#include "doctest.h"

#include "glr/metrics.hpp"
#include "glr/scenes.hpp"
#include "glr/solvers.hpp"
#include "oracles.hpp"

using namespace glr;

namespace {

SolverConfig quick(RegularizerKind r, int iters) {
    SolverConfig c;
    c.regularizer = r;
    c.max_iters = iters;
    return c;
}

const RegularizerKind kAllRegs[] = {RegularizerKind::Glr, RegularizerKind::NlrBm, RegularizerKind::NlrCornerBm,
                                    RegularizerKind::NlrCornerUniformBm, RegularizerKind::Tv};

} // namespace

TEST_CASE("full-mask Fourier recovers exactly in one iteration") {
    Tensor3d x = smooth_phantom(32, 32);
    FourierOperator op(FourierMask{Tensor3d(32, 32, 1, 1.0)});
    Measurement y = op.forward(x);
    for (RegularizerKind r : {RegularizerKind::Glr, RegularizerKind::Tv, RegularizerKind::NlrBm}) {
        ReconResult res = gap_solve(op, y, quick(r, 1), &x);
        CHECK(psnr(x, res.x) == kPsnrCapDb);
        CHECK(*res.report.iterations.at(0).psnr == kPsnrCapDb);
    }
}

TEST_CASE("identity CACTI returns the snapshot after one iteration") {
    std::mt19937_64 rng(70);
    Tensor3d x = oracle::random_tensor(24, 24, 1, rng);
    CactiOperator op(MaskSet{Tensor3d(24, 24, 1, 1.0)});
    Measurement y = op.forward(x);
    for (RegularizerKind r : {RegularizerKind::Glr, RegularizerKind::Tv}) {
        ReconResult res = gap_solve(op, y, quick(r, 1));
        CHECK((res.x.data() - x.data()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("CACTI: GLR beats TV on the moving-square scene") {
    Tensor3d x = moving_square_scene(64, 64, 4, 7);
    CactiOperator op(bernoulli_masks(64, 64, 4, 0));
    Measurement y = op.forward(x);
    const double glr_db = psnr(x, gap_solve(op, y, quick(RegularizerKind::Glr, 60)).x);
    const double tv_db = psnr(x, gap_solve(op, y, quick(RegularizerKind::Tv, 60)).x);
    MESSAGE("GAP-GLR " << glr_db << " dB, GAP-TV " << tv_db << " dB");
    CHECK(glr_db > tv_db);

    SolverConfig admm = quick(RegularizerKind::Glr, 60);
    admm.algorithm = Algorithm::Admm;
    const double admm_db = psnr(x, admm_solve(op, y, admm).x);
    MESSAGE("ADMM-GLR " << admm_db << " dB");
    CHECK(admm_db > tv_db);
}

TEST_CASE("ADMM data step with a huge penalty keeps the prior estimate") {
    std::mt19937_64 rng(71);
    CactiOperator op(bernoulli_masks(16, 16, 3, 2));
    Tensor3d x = oracle::random_tensor(16, 16, 3, rng);
    Tensor3d v = oracle::random_tensor(16, 16, 3, rng);
    Tensor3d out = admm_x_update(op, op.forward(x), v, 1e6);
    CHECK((out.data() - v.data()).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("ADMM on a full-mask Fourier problem converges within three iterations") {
    Tensor3d x = smooth_phantom(32, 32);
    FourierOperator op(FourierMask{Tensor3d(32, 32, 1, 1.0)});
    Measurement y = op.forward(x);
    SolverConfig c = quick(RegularizerKind::Tv, 3);
    c.algorithm = Algorithm::Admm;
    c.tv_weight = 0.0;
    double err = 1.0;
    admm_solve(op, y, c, nullptr, [&](int k, const Tensor3d& it) {
        if (k == 3) err = (it.data() - x.data()).cwiseAbs().maxCoeff();
    });
    CHECK(err < 1e-6);
}

TEST_CASE("regularizer: TV keeps a constant image") {
    Tensor3d x(16, 16, 2, 0.3);
    RegularizerState st;
    Tensor3d z = regularize_dispatch(x, quick(RegularizerKind::Tv, 1), st, 0.1);
    CHECK((z.data() - x.data()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("regularizer: GLR on a blank image has no exemplars to work with") {
    Tensor3d x(32, 32, 1, 0.5);
    SolverConfig c = quick(RegularizerKind::Glr, 1);
    c.match.uniform_interval = 0;
    RegularizerState st;
    Tensor3d z = regularize_dispatch(x, c, st, 0.1);
    CHECK(st.exemplar_count == 0);
    CHECK(z == x);
}

TEST_CASE("regularizer: matching is refreshed on schedule") {
    Tensor3d x = multispectral_scene(48, 48, 2, 1);
    SolverConfig c = quick(RegularizerKind::Glr, 10);
    c.match_refresh_interval = 3;
    RegularizerState st;
    for (int call = 0; call < 7; ++call) {
        PhaseTimes t;
        regularize_dispatch(x, c, st, 0.05, &t);
        CHECK(st.calls == call + 1);
    }
    CHECK(st.group_positions.size() > 0);
}

TEST_CASE("regularizer: GLR matching is cheaper than block matching at 128x128x6") {
    Tensor3d x = multispectral_scene(128, 128, 6, 3);
    double best[2] = {1e30, 1e30};
    std::size_t exemplars[2] = {0, 0};
    const RegularizerKind regs[2] = {RegularizerKind::Glr, RegularizerKind::NlrBm};
    for (int rep = 0; rep < 3; ++rep)
        for (int i = 0; i < 2; ++i) {
            RegularizerState st;
            PhaseTimes t;
            regularize_dispatch(x, quick(regs[i], 1), st, 0.05, &t);
            best[i] = std::min(best[i], t.match_ms);
            exemplars[i] = st.exemplar_count;
        }
    MESSAGE("glr " << best[0] << " ms / " << exemplars[0] << " exemplars, nlr-bm " << best[1] << " ms / "
                   << exemplars[1] << " exemplars");
    CHECK(exemplars[0] >= 256);
    CHECK(exemplars[1] >= 256);
    CHECK(best[0] < best[1]);
}

TEST_CASE("GAP keeps measured Fourier bins exact") {
    Tensor3d x = smooth_phantom(48, 48);
    FourierOperator op(radial_mask(48, 48, 12));
    Measurement y = op.forward(x);
    const ComplexTensor2& meas = std::get<ComplexTensor2>(y);
    double worst = 0.0;
    ReconResult r = gap_solve(op, y, quick(RegularizerKind::Glr, 8), nullptr, [&](int, const Tensor3d& it) {
        const ComplexTensor2 f = fourier_forward(it, op.mask());
        worst = std::max(worst, (f.data() - meas.data()).cwiseAbs().maxCoeff());
    });
    REQUIRE(r.report.clamped_entries == 0);
    CHECK(worst < 1e-12);
}

TEST_CASE("same configuration and seed give identical results") {
    Tensor3d x = moving_square_scene(32, 32, 3, 2);
    CactiOperator op(bernoulli_masks(32, 32, 3, 5));
    Measurement y = op.forward(x);
    for (Algorithm a : {Algorithm::Gap, Algorithm::Admm}) {
        SolverConfig c = quick(RegularizerKind::Glr, 12);
        c.algorithm = a;
        ReconResult r1 = solve(op, y, c, &x), r2 = solve(op, y, c, &x);
        CHECK(r1.x == r2.x);
        REQUIRE(r1.report.iterations.size() == r2.report.iterations.size());
        for (std::size_t i = 0; i < r1.report.iterations.size(); ++i) {
            CHECK(r1.report.iterations[i].residual == r2.report.iterations[i].residual);
            CHECK(*r1.report.iterations[i].psnr == *r2.report.iterations[i].psnr);
            CHECK(*r1.report.iterations[i].ssim == *r2.report.iterations[i].ssim);
        }
    }
}

TEST_CASE("every regularizer runs under both solvers") {
    Tensor3d x = moving_square_scene(24, 24, 2, 4);
    CactiOperator op(bernoulli_masks(24, 24, 2, 6));
    Measurement y = op.forward(x);
    for (Algorithm a : {Algorithm::Gap, Algorithm::Admm})
        for (RegularizerKind r : kAllRegs) {
            SolverConfig c = quick(r, 4);
            c.algorithm = a;
            c.match.window_radius = 8;
            c.match.group_size = 16;
            ReconResult res = solve(op, y, c, &x);
            CAPTURE(to_string(r));
            CHECK(res.x.same_shape(x));
            CHECK(all_finite(res.x));
            CHECK(res.report.iterations.size() == 4);
            CHECK(res.x.data().minCoeff() >= 0.0);
            CHECK(res.x.data().maxCoeff() <= 1.0);
        }
}

TEST_CASE("iterates stay within the bounded range") {
    Tensor3d x = moving_square_scene(32, 32, 4, 3);
    CactiOperator op(bernoulli_masks(32, 32, 4, 1));
    Measurement y = op.forward(x);
    bool inside = true;
    gap_solve(op, y, quick(RegularizerKind::Glr, 10), nullptr, [&](int, const Tensor3d& it) {
        inside = inside && it.data().minCoeff() >= -0.5 && it.data().maxCoeff() <= 1.5;
    });
    CHECK(inside);
}

TEST_CASE("report timings accumulate") {
    Tensor3d x = moving_square_scene(32, 32, 2, 3);
    CactiOperator op(bernoulli_masks(32, 32, 2, 1));
    ReconResult r = gap_solve(op, op.forward(x), quick(RegularizerKind::Glr, 6), &x);
    double prev = 0.0;
    for (const auto& it : r.report.iterations) {
        CHECK(it.cumulative_ms >= prev);
        prev = it.cumulative_ms;
        CHECK(it.psnr.has_value());
    }
    CHECK(r.report.iterations[0].rematched);
    CHECK(!r.report.iterations[1].rematched);
    CHECK(r.report.iterations[5].rematched);
}

TEST_CASE("solver configuration validation") {
    SolverConfig c;
    c.max_iters = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.match_refresh_interval = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.sigma0 = 0.001;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.warm_start_iters = c.max_iters;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    CHECK(c.sigma_at(c.max_iters) == doctest::Approx(c.sigma_min));
    CHECK(c.sigma_at(1) < c.sigma0);
    CHECK(c.sigma_at(1) > c.sigma_at(2));
}

TEST_CASE("mismatched measurement is rejected") {
    CactiOperator op(bernoulli_masks(16, 16, 2, 1));
    CHECK_THROWS_AS(gap_solve(op, Tensor3d(16, 15, 1), quick(RegularizerKind::Tv, 2)), ShapeError);
    Tensor3d bad_ref(16, 16, 3);
    CHECK_THROWS_AS(gap_solve(op, Tensor3d(16, 16, 1), quick(RegularizerKind::Tv, 2), &bad_ref), ShapeError);
}

TEST_CASE("warm start runs TV first") {
    SolverConfig c;
    c.max_iters = 10;
    c.warm_start_iters = 4;
    CHECK(c.regularizer_at(4) == RegularizerKind::Tv);
    CHECK(c.regularizer_at(5) == RegularizerKind::Glr);
    CHECK(c.sigma_at(2) == 0.0);
}
