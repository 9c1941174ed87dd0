#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aml/kde.hpp"
#include "aml/models.hpp"
#include "aml/rng.hpp"
#include "aml/spsa.hpp"
#include "aml/tuning.hpp"

namespace aml {

enum class Mode { ML, MAP };

struct RunConfig {
    std::size_t n = 100;                   ///< simulations per likelihood estimate
    TuningConfig tuning;
    KdeConfig kde;
    std::size_t n_start_candidates = 1000;
    std::size_t n_starts = 5;
    Mode mode = Mode::ML;
    std::uint64_t master_seed = 1;
    std::uint64_t min_iterations = 0;      ///< no convergence stop before this iteration

    void validate() const;
    [[nodiscard]] std::size_t n2() const { return tuning.n2 == 0 ? n : tuning.n2; }
};

/// Stochastic log-likelihood (or log-posterior) evaluated in the original
/// parameter coordinates.
class Objective {
public:
    virtual ~Objective() = default;

    /// Log-likelihood estimates at a perturbation pair. Implementations that
    /// smooth bandwidths record this iteration's estimate in `history`.
    virtual std::pair<double, double> pair(std::span<const double> plus,
                                           std::span<const double> minus, Stream& rng,
                                           BandwidthHistory& history) const = 0;

    /// One estimate at theta. With a non-empty `history`, its smoothed
    /// bandwidth is used; otherwise the bandwidth comes from this estimate's
    /// own samples.
    virtual double single(std::span<const double> theta, Stream& rng,
                          const BandwidthHistory* history) const = 0;
};

/// Kernel density estimate of p(S_obs | theta) from n simulated summaries,
/// optionally multiplied by a prior.
class SimulatedLikelihood final : public Objective {
public:
    SimulatedLikelihood(const SimulatorModel& model, Vector observed_summary, std::size_t n,
                        KdeConfig kde, const Prior* prior = nullptr);

    [[nodiscard]] std::vector<Vector> simulate_summaries(std::span<const double> theta,
                                                         Stream& rng) const;

    /// Full estimate with degeneracy flag. Adds the log prior in MAP mode; a
    /// point outside the prior support returns log_value = -inf.
    LikelihoodEstimate estimate(std::span<const double> theta, Stream& rng,
                                const BandwidthMatrix* bandwidth = nullptr) const;

    std::pair<double, double> pair(std::span<const double> plus, std::span<const double> minus,
                                   Stream& rng, BandwidthHistory& history) const override;
    double single(std::span<const double> theta, Stream& rng,
                  const BandwidthHistory* history) const override;

    [[nodiscard]] const Vector& observed() const noexcept { return observed_; }

private:
    double with_prior(std::span<const double> theta, double log_lik) const;

    const SimulatorModel& model_;
    Vector observed_;
    std::size_t n_;
    KdeConfig kde_;
    const Prior* prior_;
};

/// Trajectory-CSV event markers.
struct RunEvent {
    std::uint64_t iteration = 0;
    std::string what;
};

struct RunTrajectory {
    std::vector<Vector> iterates;          ///< theta_0 .. theta_k, original coordinates
    Vector c_k;                            ///< c_k per iteration (unit space), index k-1
    std::vector<Vector> a_k;               ///< a_k per iteration (unit space), index k-1
    std::vector<std::pair<std::uint64_t, double>> log_lik_checks;
    std::vector<DiagnosticVerdict> diagnostics;
    std::vector<RunEvent> events;
    GainSchedule initial_schedule;
    GainSchedule final_schedule;
    Vector calibration_gradient;
    std::optional<std::uint64_t> converged_at;
    Vector final_theta;

    [[nodiscard]] std::uint64_t iterations() const noexcept {
        return iterates.empty() ? 0 : iterates.size() - 1;
    }
};

/// Draws n_start_candidates uniform points on the box, estimates the
/// likelihood once at each and keeps the n_starts best (draw order breaks ties).
std::vector<Vector> screen_starting_points(const Objective& objective,
                                           const ParameterSpace& space, const RunConfig& config,
                                           const Stream& rng, std::size_t threads = 1);

/// One AML run from `start`. All optimization happens in the unit cube; the
/// trajectory is reported in the original coordinates.
RunTrajectory run_aml(std::span<const double> start, const Objective& objective,
                      const ParameterSpace& space, const RunConfig& config, const Stream& rng);

struct MultiStartResult {
    Vector theta;
    std::size_t best_start = 0;
    Vector final_log_lik;                  ///< fresh estimate at each run's final theta
    std::vector<Vector> starts;
    std::vector<RunTrajectory> trajectories;
};

/// Runs AML from each given start (in parallel when threads > 1) and keeps
/// the final point with the highest fresh likelihood estimate; the lowest
/// start index wins ties.
MultiStartResult multi_start_from(std::vector<Vector> starts, const Objective& objective,
                                  const ParameterSpace& space, const RunConfig& config,
                                  const Stream& rng, std::size_t threads = 1);

/// Screens starts, runs AML from each and keeps the final point with the
/// highest fresh likelihood estimate.
MultiStartResult multi_start_estimate(const Objective& objective, const ParameterSpace& space,
                                      const RunConfig& config, const Stream& rng,
                                      std::size_t threads = 1);

/// Convenience: seeds the hierarchy from config.master_seed.
MultiStartResult multi_start_estimate(const Objective& objective, const ParameterSpace& space,
                                      const RunConfig& config, std::size_t threads = 1);

}  // namespace aml
