#include "glr/solvers.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "glr/edge.hpp"
#include "glr/metrics.hpp"

namespace glr {

std::string to_string(Algorithm a) { return a == Algorithm::Gap ? "gap" : "admm"; }

Algorithm parse_algorithm(const std::string& s) {
    if (s == "gap") return Algorithm::Gap;
    if (s == "admm") return Algorithm::Admm;
    throw ConfigError("unknown algorithm '" + s + "'");
}

std::string to_string(InitMode m) { return m == InitMode::Adjoint ? "adjoint" : "zero"; }

InitMode parse_init_mode(const std::string& s) {
    if (s == "adjoint") return InitMode::Adjoint;
    if (s == "zero") return InitMode::Zero;
    throw ConfigError("unknown init mode '" + s + "'");
}

void SolverConfig::validate() const {
    if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
    if (match_refresh_interval < 1) throw ConfigError("match_refresh_interval must be at least 1");
    if (!(peak > 0.0)) throw ConfigError("peak must be positive");
    if (!(sigma_min > 0.0) || !(sigma0 >= sigma_min)) throw ConfigError("noise schedule needs sigma0 >= sigma_min > 0");
    if (!(admm_rho > 0.0)) throw ConfigError("admm_rho must be positive");
    if (!(tv_weight >= 0.0)) throw ConfigError("tv_weight must be nonnegative");
    if (tv_iters < 0) throw ConfigError("tv_iters must be nonnegative");
    if (warm_start_iters < 0 || warm_start_iters >= max_iters)
        throw ConfigError("warm_start_iters must be in [0, max_iters)");
    if (regularizer != RegularizerKind::Tv) {
        MatchConfig m = match;
        m.mode = regularizer == RegularizerKind::Glr ? MatchMode::Global : MatchMode::BmUniform;
        m.validate();
        wnnm.validate();
    }
}

double SolverConfig::sigma_at(int k) const {
    if (k <= warm_start_iters) return 0.0;
    const int n = max_iters - warm_start_iters;
    return peak * sigma0 * std::pow(sigma_min / sigma0, double(k - warm_start_iters) / double(n));
}

RegularizerKind SolverConfig::regularizer_at(int k) const {
    return k <= warm_start_iters ? RegularizerKind::Tv : regularizer;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

MatchMode mode_for(RegularizerKind r) {
    switch (r) {
    case RegularizerKind::Glr: return MatchMode::Global;
    case RegularizerKind::NlrBm: return MatchMode::BmUniform;
    case RegularizerKind::NlrCornerBm: return MatchMode::BmCorner;
    case RegularizerKind::NlrCornerUniformBm: return MatchMode::BmCornerUniform;
    case RegularizerKind::Tv: break;
    }
    return MatchMode::BmUniform;
}

std::size_t clamp_iterate(Tensor3d& x, double peak) {
    std::size_t n = 0;
    for (Index i = 0; i < x.size(); ++i) {
        double& v = x.data()[i];
        if (v < -0.5 * peak) { v = -0.5 * peak; ++n; }
        else if (v > 1.5 * peak) { v = 1.5 * peak; ++n; }
    }
    return n;
}

/// Shared loop bookkeeping for both solvers.
class RunLog {
public:
    RunLog(const SolverConfig& cfg, const Measurement& y, const Tensor3d* reference)
        : cfg_(cfg), y_norm_(norm(y)), reference_(reference), start_(Clock::now()) {}

    void record(IterationRecord rec, const SensingOperator& op, const Measurement& y, const Tensor3d& z,
                const Tensor3d& x) {
        rec.residual = norm(subtract(y, op.forward(z))) / (y_norm_ > 0.0 ? y_norm_ : 1.0);
        if (reference_) {
            Tensor3d clipped = x;
            clipped.data() = clipped.data().cwiseMax(0.0).cwiseMin(cfg_.peak);
            rec.psnr = psnr(*reference_, clipped, cfg_.peak);
            if (x.height() >= 11 && x.width() >= 11) rec.ssim = ssim(*reference_, clipped, cfg_.peak);
        }
        report.match_ms += rec.match_ms;
        report.lowrank_ms += rec.lowrank_ms;
        report.projection_ms += rec.projection_ms;
        rec.cumulative_ms = ms_since(start_);
        report.total_ms = rec.cumulative_ms;
        check_divergence(rec.residual, rec.iteration);
        report.iterations.push_back(rec);
    }

    ReconReport report;

private:
    void check_divergence(double r, int k) {
        if (!std::isfinite(r)) throw DivergenceError("data residual became non-finite at iteration " + std::to_string(k));
        min_residual_ = std::min(min_residual_, r);
        if (r > 10.0 * min_residual_ + 1e-9) {
            if (++over_ >= 20)
                throw DivergenceError("data residual stayed above 10x its minimum (" + std::to_string(min_residual_) +
                                      ") for 20 iterations; last " + std::to_string(r) + " at iteration " +
                                      std::to_string(k));
        } else {
            over_ = 0;
        }
    }

    const SolverConfig& cfg_;
    double y_norm_;
    const Tensor3d* reference_;
    Clock::time_point start_;
    double min_residual_ = std::numeric_limits<double>::infinity();
    int over_ = 0;
};

Tensor3d initial_iterate(const SensingOperator& op, const Measurement& y, const SolverConfig& cfg) {
    if (cfg.init == InitMode::Zero) return Tensor3d(op.height(), op.width(), op.channels());
    return op.adjoint(y);
}

SolverConfig warm_config(const SolverConfig& cfg) {
    SolverConfig w = cfg;
    w.regularizer = RegularizerKind::Tv;
    return w;
}

void check_problem(const SensingOperator& op, const Measurement& y, const SolverConfig& cfg, const Tensor3d* reference) {
    cfg.validate();
    op.check_measurement(y);
    if (reference && (reference->height() != op.height() || reference->width() != op.width() ||
                      reference->channels() != op.channels()))
        throw ShapeError("reference does not match the operator's signal shape");
}

} // namespace

Tensor3d regularize_dispatch(const Tensor3d& x, const SolverConfig& cfg, RegularizerState& state, double sigma,
                             PhaseTimes* times) {
    if (cfg.regularizer == RegularizerKind::Tv) {
        const auto t0 = Clock::now();
        Tensor3d z = tv_prox(x, cfg.tv_weight * cfg.peak, cfg.tv_iters);
        if (times) times->lowrank_ms += ms_since(t0);
        return z;
    }

    const int call = state.calls++;
    MatchConfig mc = cfg.match;
    mc.mode = mode_for(cfg.regularizer);
    const int P = mc.patch_size;
    if (P > x.height() || P > x.width()) throw ConfigError("patch size larger than the image");

    std::vector<PatchGroupd> groups;
    const auto t0 = Clock::now();
    if (call % cfg.match_refresh_interval == 0) {
        const Gradients grad = sobel_gradients(x);
        const ExemplarSet exemplars = exemplars_for_mode(grad, x.height(), x.width(), mc);
        if (mc.mode == MatchMode::Global) {
            groups = global_match(x, exemplars, mc, binarize_gradients(grad, mc.edge_threshold));
            if (mc.skip_edgeless)
                std::erase_if(groups, [](const PatchGroupd& g) { return g.scores.empty() || g.scores.front() <= 0.0; });
        } else
            groups = block_match(x, exemplars, mc);
        state.exemplar_count = exemplars.size();
        state.group_positions.clear();
        for (const auto& g : groups) state.group_positions.push_back(g.positions);
    } else {
        groups.reserve(state.group_positions.size());
        for (const auto& pos : state.group_positions)
            groups.push_back(gather_group(x, std::span<const Anchor>(pos), P));
    }
    const auto t1 = Clock::now();
    if (times) times->match_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();

    WnnmParams params = cfg.wnnm;
    params.noise_sigma = sigma;
    Tensor3d z = glr_regularize(x, groups, params);
    if (times) times->lowrank_ms += ms_since(t1);
    return z;
}

ReconResult gap_solve(const SensingOperator& op, const Measurement& y, const SolverConfig& cfg,
                      const Tensor3d* reference, const IterateObserver& observer) {
    check_problem(op, y, cfg, reference);
    RunLog log(cfg, y, reference);
    RegularizerState state;
    const SolverConfig warm = warm_config(cfg);
    Tensor3d x = initial_iterate(op, y, cfg);
    for (int k = 1; k <= cfg.max_iters; ++k) {
        IterationRecord rec;
        rec.iteration = k;
        rec.sigma = cfg.sigma_at(k);
        const SolverConfig& step = k <= cfg.warm_start_iters ? warm : cfg;
        rec.rematched = step.regularizer != RegularizerKind::Tv && state.calls % cfg.match_refresh_interval == 0;
        PhaseTimes times;
        const Tensor3d z = regularize_dispatch(x, step, state, rec.sigma, &times);
        const auto t0 = Clock::now();
        x = op.project(z, y);
        log.report.clamped_entries += clamp_iterate(x, cfg.peak);
        rec.projection_ms = ms_since(t0);
        rec.match_ms = times.match_ms;
        rec.lowrank_ms = times.lowrank_ms;
        rec.groups = int(state.group_positions.size());
        if (observer) observer(k, x);
        log.record(rec, op, y, z, x);
    }
    log.report.exemplars = state.exemplar_count;
    x.data() = x.data().cwiseMax(0.0).cwiseMin(cfg.peak);
    return {std::move(x), std::move(log.report)};
}

Tensor3d admm_x_update(const SensingOperator& op, const Measurement& y, const Tensor3d& v, double rho) {
    if (!(rho > 0.0)) throw ConfigError("admm_rho must be positive");
    return op.project(v, y, rho);
}

ReconResult admm_solve(const SensingOperator& op, const Measurement& y, const SolverConfig& cfg,
                       const Tensor3d* reference, const IterateObserver& observer) {
    check_problem(op, y, cfg, reference);
    RunLog log(cfg, y, reference);
    RegularizerState state;
    const SolverConfig warm = warm_config(cfg);
    Tensor3d x = initial_iterate(op, y, cfg);
    Tensor3d z = x;
    Tensor3d u(x.height(), x.width(), x.channels());
    for (int k = 1; k <= cfg.max_iters; ++k) {
        IterationRecord rec;
        rec.iteration = k;
        rec.sigma = cfg.sigma_at(k);
        const SolverConfig& step = k <= cfg.warm_start_iters ? warm : cfg;
        rec.rematched = step.regularizer != RegularizerKind::Tv && state.calls % cfg.match_refresh_interval == 0;
        const auto t0 = Clock::now();
        Tensor3d v = z;
        v.data() -= u.data();
        x = admm_x_update(op, y, v, cfg.admm_rho);
        log.report.clamped_entries += clamp_iterate(x, cfg.peak);
        rec.projection_ms = ms_since(t0);

        PhaseTimes times;
        Tensor3d xu = x;
        xu.data() += u.data();
        z = regularize_dispatch(xu, step, state, rec.sigma, &times);
        u.data() += x.data() - z.data();
        rec.match_ms = times.match_ms;
        rec.lowrank_ms = times.lowrank_ms;
        rec.groups = int(state.group_positions.size());
        if (observer) observer(k, x);
        log.record(rec, op, y, z, x);
    }
    log.report.exemplars = state.exemplar_count;
    x.data() = x.data().cwiseMax(0.0).cwiseMin(cfg.peak);
    return {std::move(x), std::move(log.report)};
}

ReconResult solve(const SensingOperator& op, const Measurement& y, const SolverConfig& cfg, const Tensor3d* reference,
                  const IterateObserver& observer) {
    return cfg.algorithm == Algorithm::Gap ? gap_solve(op, y, cfg, reference, observer)
                                           : admm_solve(op, y, cfg, reference, observer);
}

} // namespace glr
