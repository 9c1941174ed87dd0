#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "aml/rng.hpp"
#include "aml/spsa.hpp"

namespace aml {

struct TuningConfig {
    std::uint64_t K = 10000;        ///< planned iterations
    std::uint64_t K0 = 1000;        ///< diagnostic period
    Vector b = {0.0005};            ///< desired early step per coordinate (unit space); size 1 broadcasts
    double c_fraction = 0.02;       ///< c as a fraction of the parameter range
    double f = 1.5;                 ///< gain adjustment factor
    std::size_t n1 = 25;            ///< gradient replicates for calibrating a
    std::size_t n2 = 0;             ///< likelihood replicates per convergence test (0: use n)
    double alpha_trend = 0.05;
    double alpha_conv = 0.05;
    double range_span_threshold = 0.7;
    double alpha = 1.0;             ///< a_k decay exponent
    double gamma = 1.0 / 6.0;       ///< c_k decay exponent

    void validate() const;
    [[nodiscard]] double b_at(std::size_t i) const { return b.size() == 1 ? b[0] : b[i]; }
};

/// CDF of Student's t distribution with `df` degrees of freedom.
double student_t_cdf(double t, double df);

struct TrendResult {
    std::vector<bool> detected;
    Vector p_values;
};

/// Two-sided one-sample t-test of zero mean on successive differences of
/// each coordinate.
TrendResult trend_test(std::span<const Vector> iterates, double alpha_trend);

/// Coordinate i fires when the trajectory span strictly exceeds
/// threshold * range(i).
std::vector<bool> range_test(std::span<const Vector> iterates, const ParameterSpace& space,
                             double threshold);

struct ConvergenceResult {
    bool growth_detected = false;
    double p_value = 1.0;
};

/// One-sided Welch t-test of H1: mean(new) > mean(old) on log-likelihoods.
ConvergenceResult convergence_test(std::span<const double> log_lik_old,
                                   std::span<const double> log_lik_new, double alpha_conv);

struct Adjustment {
    GainSchedule schedule;
    bool a_adjusted = false;
};

/// Range hits divide a[i] by f, trend hits multiply by f; range wins ties.
Adjustment apply_adjustments(const std::vector<bool>& trend_detected,
                             const std::vector<bool>& range_exceeded,
                             const GainSchedule& schedule, double f);

/// Evaluates (log L(plus), log L(minus)) for one perturbation pair.
using PairEvaluator =
    std::function<std::pair<double, double>(std::span<const double> plus,
                                            std::span<const double> minus, Stream& rng)>;

struct Calibration {
    GainSchedule schedule;
    Vector median_gradient;
};

/// Sets c from c_fraction, A = floor(0.1 K), and a from the median of n1
/// gradient estimates at theta0 so the first step in coordinate i is about b[i].
Calibration calibrate_gains(std::span<const double> theta0, const ParameterSpace& space,
                            const TuningConfig& cfg, const PairEvaluator& evaluator, Stream& rng);

struct DiagnosticVerdict {
    std::uint64_t iteration = 0;
    std::vector<bool> trend_detected;
    Vector trend_p_values;
    std::vector<bool> range_exceeded;
    bool growth_detected = false;
    double growth_p_value = 1.0;
    double mean_log_lik_old = 0.0;
    double mean_log_lik_new = 0.0;
    std::size_t consecutive_no_growth = 0;
    bool a_adjusted = false;
    Vector a_before;
    Vector a_after;
    bool converged = false;
};

/// Three-in-a-row rule: a round counts only when growth was not detected and
/// a was left unchanged; anything else resets the count.
class ConvergenceTracker {
public:
    static constexpr std::size_t kRequiredRounds = 3;

    /// Returns the updated consecutive count.
    std::size_t record(bool growth_detected, bool a_adjusted) noexcept;
    [[nodiscard]] std::size_t consecutive() const noexcept { return consecutive_; }
    [[nodiscard]] bool converged() const noexcept { return consecutive_ >= kRequiredRounds; }

private:
    std::size_t consecutive_ = 0;
};

}  // namespace aml
