#include "aml/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "aml/error.hpp"
#include "aml/parallel.hpp"

namespace aml {

namespace {

// Stand-in for a log-likelihood of -inf (point outside the prior support),
// so the gradient stays finite and the clamp bounds the step.
constexpr double kLogLikFloor = -1e100;

double finite_or_floor(double v) { return std::isfinite(v) ? v : kLogLikFloor; }

BandwidthMatrix average(const BandwidthMatrix& x, const BandwidthMatrix& y) {
    Vector diag(x.dim());
    for (std::size_t i = 0; i < diag.size(); ++i) diag[i] = 0.5 * (x.diag()[i] + y.diag()[i]);
    return BandwidthMatrix(std::move(diag));
}

}  // namespace

void RunConfig::validate() const {
    if (n < 2) throw ConfigError("run.n", "must be >= 2");
    if (n_starts < 1) throw ConfigError("run.n_starts", "must be >= 1");
    if (n_start_candidates < n_starts) {
        throw ConfigError("run.n_start_candidates", "must be >= run.n_starts");
    }
    tuning.validate();
    if (tuning.K0 < 2) throw ConfigError("tuning.K0", "must be >= 2");
    kde.validate();
    if (min_iterations > tuning.K) {
        throw ConfigError("run.min_iterations", "must not exceed tuning.K");
    }
}

// --- SimulatedLikelihood -----------------------------------------------------

SimulatedLikelihood::SimulatedLikelihood(const SimulatorModel& model, Vector observed_summary,
                                         std::size_t n, KdeConfig kde, const Prior* prior)
    : model_(model), observed_(std::move(observed_summary)), n_(n), kde_(kde), prior_(prior) {
    if (observed_.size() != model_.summary_dim()) {
        throw DimensionError("observed summary has dimension " + std::to_string(observed_.size()) +
                             ", model produces " + std::to_string(model_.summary_dim()));
    }
    for (double s : observed_) {
        if (!std::isfinite(s)) throw DomainError("observed summary must be finite");
    }
    if (n_ < 2) throw DomainError("simulated likelihood: need n >= 2");
}

std::vector<Vector> SimulatedLikelihood::simulate_summaries(std::span<const double> theta,
                                                            Stream& rng) const {
    std::vector<Vector> out;
    out.reserve(n_);
    for (std::size_t j = 0; j < n_; ++j) {
        Stream sim = rng.child(j);
        out.push_back(model_.simulate_summary(theta, sim));
    }
    return out;
}

double SimulatedLikelihood::with_prior(std::span<const double> theta, double log_lik) const {
    if (prior_ == nullptr) return log_lik;
    const double lp = prior_->log_density(theta);
    if (!std::isfinite(lp)) return -std::numeric_limits<double>::infinity();
    return log_lik + lp;
}

LikelihoodEstimate SimulatedLikelihood::estimate(std::span<const double> theta, Stream& rng,
                                                 const BandwidthMatrix* bandwidth) const {
    const auto samples = simulate_summaries(theta, rng);
    const BandwidthMatrix H = bandwidth ? *bandwidth : silverman_bandwidth(samples);
    LikelihoodEstimate est = kde_log_likelihood(observed_, samples, H, kde_);
    est.log_value = with_prior(theta, est.log_value);
    return est;
}

std::pair<double, double> SimulatedLikelihood::pair(std::span<const double> plus,
                                                    std::span<const double> minus, Stream& rng,
                                                    BandwidthHistory& history) const {
    Stream plus_rng = rng.child(stream_tag::kPlus);
    Stream minus_rng = rng.child(stream_tag::kMinus);
    const auto plus_samples = simulate_summaries(plus, plus_rng);
    const auto minus_samples = simulate_summaries(minus, minus_rng);
    history.push(average(silverman_bandwidth(plus_samples), silverman_bandwidth(minus_samples)));
    const BandwidthMatrix H = history.smoothed();
    const double lp = kde_log_likelihood(observed_, plus_samples, H, kde_).log_value;
    const double lm = kde_log_likelihood(observed_, minus_samples, H, kde_).log_value;
    return {with_prior(plus, lp), with_prior(minus, lm)};
}

double SimulatedLikelihood::single(std::span<const double> theta, Stream& rng,
                                   const BandwidthHistory* history) const {
    if (history != nullptr && !history->empty()) {
        const BandwidthMatrix H = history->smoothed();
        return estimate(theta, rng, &H).log_value;
    }
    return estimate(theta, rng).log_value;
}

// --- screening ---------------------------------------------------------------

std::vector<Vector> screen_starting_points(const Objective& objective,
                                           const ParameterSpace& space, const RunConfig& config,
                                           const Stream& rng, std::size_t threads) {
    const std::size_t m = config.n_start_candidates;
    Stream draw = rng.child(stream_tag::kScreen, 0);
    std::vector<Vector> candidates(m, Vector(space.dim()));
    for (auto& cand : candidates) {
        for (std::size_t i = 0; i < space.dim(); ++i) {
            cand[i] = space.lower()[i] + space.range(i) * draw.uniform01();
        }
    }
    Vector scores(m);
    parallel_for(m, threads, [&](std::size_t i) {
        Stream s = rng.child(stream_tag::kScreen, 1, i);
        scores[i] = finite_or_floor(objective.single(candidates[i], s, nullptr));
    });
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return scores[x] > scores[y]; });
    std::vector<Vector> out;
    out.reserve(config.n_starts);
    for (std::size_t j = 0; j < config.n_starts; ++j) out.push_back(candidates[order[j]]);
    return out;
}

// --- main loop ---------------------------------------------------------------

RunTrajectory run_aml(std::span<const double> start, const Objective& objective,
                      const ParameterSpace& space, const RunConfig& config, const Stream& rng) {
    const std::size_t p = space.dim();
    if (start.size() != p) throw DimensionError("run_aml: start has wrong dimension");
    const ParameterSpace unit = space.unit();
    const TuningConfig& tc = config.tuning;
    BandwidthHistory history(config.kde.smoothing_window);

    auto pair_in_unit = [&](std::span<const double> plus_u, std::span<const double> minus_u,
                            Stream& s) {
        const auto [lp, lm] =
            objective.pair(space.from_unit(plus_u), space.from_unit(minus_u), s, history);
        return std::pair{finite_or_floor(lp), finite_or_floor(lm)};
    };

    RunTrajectory traj;
    Stream calib_rng = rng.child(stream_tag::kCalibrate);
    Calibration cal = calibrate_gains(space.to_unit(start), unit, tc, pair_in_unit, calib_rng);
    GainSchedule schedule = cal.schedule;
    traj.initial_schedule = schedule;
    traj.calibration_gradient = cal.median_gradient;
    traj.events.push_back({0, "calibration"});

    Vector u = project_to_feasible(space.to_unit(start), unit, gain_at(schedule, 1).c_k);
    std::vector<Vector> unit_iterates{u};
    traj.iterates.push_back(space.from_unit(u));
    const std::size_t n2 = config.n2();
    ConvergenceTracker tracker;

    for (std::uint64_t k = 1; k <= tc.K; ++k) {
        const Gains gains = gain_at(schedule, k);
        Stream it = rng.child(stream_tag::kIteration, k);
        Stream pert = it.child(stream_tag::kPerturbation);
        const PerturbationVector delta = sample_perturbation(pert, p);
        const Vector plus = perturbed(u, delta, gains.c_k, +1);
        const Vector minus = perturbed(u, delta, gains.c_k, -1);
        const auto [lp, lm] = pair_in_unit(plus, minus, it);
        GradientEstimate grad = gradient_estimate(delta, lp, lm, gains.c_k);
        if (numerically_equal(lp, lm)) grad.g.assign(p, 0.0);
        const double c_next = schedule.c / std::pow(static_cast<double>(k + 1), schedule.gamma);
        u = update_iterate(u, grad, gains.a_k, unit, c_next);

        unit_iterates.push_back(u);
        traj.iterates.push_back(space.from_unit(u));
        traj.c_k.push_back(gains.c_k);
        traj.a_k.push_back(gains.a_k);

        if (k % tc.K0 != 0) continue;

        DiagnosticVerdict verdict;
        verdict.iteration = k;
        const std::span<const Vector> window(unit_iterates.data() + (k - tc.K0), tc.K0 + 1);
        TrendResult trend = trend_test(window, tc.alpha_trend);
        verdict.trend_detected = std::move(trend.detected);
        verdict.trend_p_values = std::move(trend.p_values);
        verdict.range_exceeded = range_test(window, unit, tc.range_span_threshold);

        Stream diag = rng.child(stream_tag::kDiagnostic, k);
        const Vector old_theta = space.from_unit(unit_iterates[k - tc.K0]);
        const Vector new_theta = space.from_unit(u);
        Vector old_ll(n2);
        Vector new_ll(n2);
        for (std::size_t r = 0; r < n2; ++r) {
            Stream so = diag.child(stream_tag::kOld, r);
            Stream sn = diag.child(stream_tag::kNew, r);
            old_ll[r] = finite_or_floor(objective.single(old_theta, so, &history));
            new_ll[r] = finite_or_floor(objective.single(new_theta, sn, &history));
        }
        const ConvergenceResult conv = convergence_test(old_ll, new_ll, tc.alpha_conv);
        verdict.growth_detected = conv.growth_detected;
        verdict.growth_p_value = conv.p_value;
        verdict.mean_log_lik_old = std::accumulate(old_ll.begin(), old_ll.end(), 0.0) / n2;
        verdict.mean_log_lik_new = std::accumulate(new_ll.begin(), new_ll.end(), 0.0) / n2;
        traj.log_lik_checks.emplace_back(k, verdict.mean_log_lik_new);

        verdict.a_before = schedule.a;
        Adjustment adj =
            apply_adjustments(verdict.trend_detected, verdict.range_exceeded, schedule, tc.f);
        schedule = std::move(adj.schedule);
        verdict.a_adjusted = adj.a_adjusted;
        verdict.a_after = schedule.a;
        verdict.consecutive_no_growth = tracker.record(conv.growth_detected, adj.a_adjusted);
        verdict.converged = tracker.converged() && k >= config.min_iterations;

        std::string what = "diagnostic";
        if (std::find(verdict.trend_detected.begin(), verdict.trend_detected.end(), true) !=
            verdict.trend_detected.end()) {
            what += ";trend";
        }
        if (std::find(verdict.range_exceeded.begin(), verdict.range_exceeded.end(), true) !=
            verdict.range_exceeded.end()) {
            what += ";range";
        }
        if (conv.growth_detected) what += ";growth";
        if (verdict.converged) what += ";converged";
        traj.events.push_back({k, std::move(what)});
        const bool stop = verdict.converged;
        traj.diagnostics.push_back(std::move(verdict));
        if (stop) {
            traj.converged_at = k;
            break;
        }
    }
    traj.final_schedule = schedule;
    traj.final_theta = traj.iterates.back();
    return traj;
}

MultiStartResult multi_start_from(std::vector<Vector> starts, const Objective& objective,
                                  const ParameterSpace& space, const RunConfig& config,
                                  const Stream& rng, std::size_t threads) {
    if (starts.empty()) throw DomainError("multi_start: no starting points");
    MultiStartResult out;
    out.starts = std::move(starts);
    const std::size_t m = out.starts.size();
    out.trajectories.resize(m);
    out.final_log_lik.assign(m, 0.0);
    parallel_for(m, threads, [&](std::size_t j) {
        out.trajectories[j] =
            run_aml(out.starts[j], objective, space, config, rng.child(stream_tag::kRun, j));
        Stream fin = rng.child(stream_tag::kFinal, j);
        out.final_log_lik[j] =
            finite_or_floor(objective.single(out.trajectories[j].final_theta, fin, nullptr));
    });
    out.best_start = static_cast<std::size_t>(
        std::max_element(out.final_log_lik.begin(), out.final_log_lik.end()) -
        out.final_log_lik.begin());
    out.theta = out.trajectories[out.best_start].final_theta;
    return out;
}

MultiStartResult multi_start_estimate(const Objective& objective, const ParameterSpace& space,
                                      const RunConfig& config, const Stream& rng,
                                      std::size_t threads) {
    return multi_start_from(screen_starting_points(objective, space, config, rng, threads),
                            objective, space, config, rng, threads);
}

MultiStartResult multi_start_estimate(const Objective& objective, const ParameterSpace& space,
                                      const RunConfig& config, std::size_t threads) {
    return multi_start_estimate(objective, space, config, Stream(config.master_seed), threads);
}

}  // namespace aml
