#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "aml/estimator.hpp"
#include "aml/models.hpp"
#include "aml/rng.hpp"

namespace aml {

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
    /// Interval before the nonnegativity shift; equal to (lower, upper) when
    /// no shift happened.
    double raw_lower = 0.0;
    double raw_upper = 0.0;
    bool shifted = false;
};

/// Basic bootstrap interval [2 t - q(1 - a/2), 2 t - q(a/2)] at confidence
/// `level` = 1 - a. For a nonnegative parameter whose raw interval dips below
/// zero, the interval is moved to [0, upper - lower].
Interval basic_ci(double theta_hat, std::span<const double> replicates, double level,
                  bool nonnegative = false);

/// 2 theta_hat - mean(replicates), per coordinate.
Vector bias_corrected_estimate(std::span<const double> theta_hat,
                               const std::vector<Vector>& replicates);

/// Bonferroni-adjusted per-coordinate level for simultaneous coverage.
double simultaneous_level(double level, std::size_t p);

/// Per-coordinate basic intervals with joint coverage `level` over p coordinates.
std::vector<Interval> simultaneous_ci(std::span<const double> theta_hat,
                                      const std::vector<Vector>& replicates, double level,
                                      const std::vector<bool>& nonnegative = {});

struct BootstrapResult {
    std::vector<Vector> replicates;        ///< B rows of p estimates
    Vector theta_hat;
    Vector bias_corrected;
    Vector se;
    std::vector<Interval> intervals;
    double level = 0.95;
    bool simultaneous = false;
};

/// Re-estimates theta on B datasets simulated at theta_hat. Each replicate
/// summarizes a fresh observed-size dataset and runs the full multi-start
/// estimator against it.
std::vector<Vector> bootstrap_replicates(std::span<const double> theta_hat,
                                         const SimulatorModel& model, const RunConfig& config,
                                         std::size_t B, const Stream& rng,
                                         const Prior* prior = nullptr, std::size_t threads = 1);

/// Aggregates replicates into bias correction, standard errors and intervals.
BootstrapResult summarize_bootstrap(std::span<const double> theta_hat,
                                    std::vector<Vector> replicates, double level,
                                    bool simultaneous, const std::vector<bool>& nonnegative);

}  // namespace aml
