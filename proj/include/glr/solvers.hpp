#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "glr/lowrank.hpp"
#include "glr/matching.hpp"
#include "glr/operators.hpp"
#include "glr/regularizers.hpp"

namespace glr {

enum class Algorithm { Gap, Admm };
enum class InitMode { Adjoint, Zero };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);
std::string to_string(InitMode m);
InitMode parse_init_mode(const std::string& s);

struct SolverConfig {
    Algorithm algorithm = Algorithm::Gap;
    RegularizerKind regularizer = RegularizerKind::Glr;
    int max_iters = 200;
    /// Re-detect exemplars and re-match every this many iterations.
    int match_refresh_interval = 5;
    /// Dynamic range of the signal; iterates are clipped to [0, peak] at the end.
    double peak = 1.0;
    /// WNNM noise level decays geometrically from sigma0 to sigma_min
    /// (both as fractions of peak) over max_iters.
    double sigma0 = 0.5;
    double sigma_min = 0.003;
    double admm_rho = 0.01;
    /// TV weight as a fraction of peak.
    double tv_weight = 0.03;
    int tv_iters = 20;
    InitMode init = InitMode::Adjoint;
    /// Leading iterations that use the TV step instead of the configured
    /// regularizer. They count toward max_iters; the noise schedule spans the
    /// remaining iterations.
    int warm_start_iters = 0;
    MatchConfig match;
    WnnmParams wnnm;
    std::uint64_t seed = 0;

    void validate() const;
    /// Absolute noise level at 1-based iteration k (0 during warm start).
    double sigma_at(int k) const;
    /// Regularizer in effect at 1-based iteration k.
    RegularizerKind regularizer_at(int k) const;
};

/// Phase timings of one regularization call.
struct PhaseTimes {
    double match_ms = 0.0;
    double lowrank_ms = 0.0;
};

/// Matching results carried between iterations.
struct RegularizerState {
    std::vector<std::vector<Anchor>> group_positions;
    std::size_t exemplar_count = 0;
    int calls = 0;
};

/// One regularization step on x at noise level sigma. Matching is refreshed
/// on the first call and then every match_refresh_interval calls; between
/// refreshes the previous group positions are re-gathered from x.
Tensor3d regularize_dispatch(const Tensor3d& x, const SolverConfig& cfg, RegularizerState& state, double sigma,
                             PhaseTimes* times = nullptr);

struct IterationRecord {
    int iteration = 0;
    double sigma = 0.0;
    /// ||y - Phi z|| / ||y|| for the regularized estimate z.
    double residual = 0.0;
    std::optional<double> psnr;
    std::optional<double> ssim;
    double match_ms = 0.0;
    double lowrank_ms = 0.0;
    double projection_ms = 0.0;
    double cumulative_ms = 0.0;
    int groups = 0;
    bool rematched = false;
};

struct ReconReport {
    std::vector<IterationRecord> iterations;
    double total_ms = 0.0;
    double match_ms = 0.0;
    double lowrank_ms = 0.0;
    double projection_ms = 0.0;
    std::size_t exemplars = 0;
    /// Entries pulled back into [-0.5 peak, 1.5 peak] over the whole run.
    std::size_t clamped_entries = 0;
};

struct ReconResult {
    Tensor3d x;
    ReconReport report;
};

/// Called with (iteration, iterate after the data step).
using IterateObserver = std::function<void(int, const Tensor3d&)>;

/// Generalized alternating projection:
///   z = R(x);  x = z + Phi^T D^-1 (y - Phi z)
ReconResult gap_solve(const SensingOperator& op, const Measurement& y, const SolverConfig& cfg,
                      const Tensor3d* reference = nullptr, const IterateObserver& observer = {});

/// x = argmin ||y - Phi x||^2 + rho ||x - (z - u)||^2;  z = R(x + u);  u += x - z.
ReconResult admm_solve(const SensingOperator& op, const Measurement& y, const SolverConfig& cfg,
                       const Tensor3d* reference = nullptr, const IterateObserver& observer = {});

/// Closed-form ADMM data step for v = z - u.
Tensor3d admm_x_update(const SensingOperator& op, const Measurement& y, const Tensor3d& v, double rho);

/// Runs gap_solve or admm_solve according to cfg.algorithm.
ReconResult solve(const SensingOperator& op, const Measurement& y, const SolverConfig& cfg,
                  const Tensor3d* reference = nullptr, const IterateObserver& observer = {});

} // namespace glr
