#include "aml/tuning.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>

#include "aml/error.hpp"

namespace aml {

namespace {

struct Moments {
    double mean = 0.0;
    double var = 0.0;  // unbiased
};

Moments moments(std::span<const double> xs) {
    Moments m;
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(xs.size());
    for (double x : xs) m.var += (x - m.mean) * (x - m.mean);
    m.var /= static_cast<double>(xs.size() - 1);
    return m;
}

double median(Vector xs) {
    const std::size_t n = xs.size();
    std::sort(xs.begin(), xs.end());
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

void TuningConfig::validate() const {
    if (K < 1) throw ConfigError("tuning.K", "must be >= 1");
    if (K0 < 1) throw ConfigError("tuning.K0", "must be >= 1");
    if (K0 > K) throw ConfigError("tuning.K0", "must not exceed tuning.K");
    if (b.empty()) throw ConfigError("tuning.b", "must be nonempty");
    for (double bi : b) {
        if (!(bi > 0.0) || !std::isfinite(bi)) throw ConfigError("tuning.b", "must be positive");
    }
    if (!(c_fraction > 0.0 && c_fraction < 1.0)) {
        throw ConfigError("tuning.c_fraction", "must lie in (0, 1)");
    }
    if (!(f > 1.0)) throw ConfigError("tuning.f", "must be > 1");
    if (n1 < 1) throw ConfigError("tuning.n1", "must be >= 1");
    if (n2 == 1) throw ConfigError("tuning.n2", "must be >= 2 (or 0 for n)");
    if (!(alpha_trend > 0.0 && alpha_trend < 1.0)) {
        throw ConfigError("tuning.alpha_trend", "must lie in (0, 1)");
    }
    if (!(alpha_conv > 0.0 && alpha_conv < 1.0)) {
        throw ConfigError("tuning.alpha_conv", "must lie in (0, 1)");
    }
    if (!(range_span_threshold > 0.0 && range_span_threshold < 1.0)) {
        throw ConfigError("tuning.range_span_threshold", "must lie in (0, 1)");
    }
    if (!(alpha > 0.0)) throw ConfigError("tuning.alpha", "must be positive");
    if (!(gamma > 0.0)) throw ConfigError("tuning.gamma", "must be positive");
}

double student_t_cdf(double t, double df) {
    if (!(df > 0.0)) throw DomainError("student_t_cdf: df must be positive");
    if (std::isnan(t)) throw DomainError("student_t_cdf: t is NaN");
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    return boost::math::cdf(boost::math::students_t_distribution<double>(df), t);
}

TrendResult trend_test(std::span<const Vector> iterates, double alpha_trend) {
    if (iterates.size() < 3) throw InsufficientDataError("trend_test: need at least 3 iterates");
    const std::size_t p = iterates.front().size();
    const std::size_t m = iterates.size() - 1;
    TrendResult out{std::vector<bool>(p, false), Vector(p, 1.0)};
    Vector diffs(m);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t k = 0; k < m; ++k) diffs[k] = iterates[k + 1][i] - iterates[k][i];
        const Moments mo = moments(diffs);
        if (mo.var <= 0.0) {
            out.detected[i] = mo.mean != 0.0;
            out.p_values[i] = out.detected[i] ? 0.0 : 1.0;
            continue;
        }
        const double t = mo.mean / std::sqrt(mo.var / static_cast<double>(m));
        const double pv = 2.0 * student_t_cdf(-std::abs(t), static_cast<double>(m - 1));
        out.p_values[i] = pv;
        out.detected[i] = pv < alpha_trend;
    }
    return out;
}

std::vector<bool> range_test(std::span<const Vector> iterates, const ParameterSpace& space,
                             double threshold) {
    if (iterates.size() < 2) throw InsufficientDataError("range_test: need at least 2 iterates");
    const std::size_t p = space.dim();
    std::vector<bool> out(p, false);
    for (std::size_t i = 0; i < p; ++i) {
        double lo = iterates.front()[i];
        double hi = lo;
        for (const auto& it : iterates) {
            lo = std::min(lo, it[i]);
            hi = std::max(hi, it[i]);
        }
        out[i] = (hi - lo) > threshold * space.range(i);
    }
    return out;
}

ConvergenceResult convergence_test(std::span<const double> log_lik_old,
                                   std::span<const double> log_lik_new, double alpha_conv) {
    if (log_lik_old.size() < 2 || log_lik_new.size() < 2) {
        throw InsufficientDataError("convergence_test: need at least 2 values per sample");
    }
    const Moments mo = moments(log_lik_old);
    const Moments mn = moments(log_lik_new);
    const double n_old = static_cast<double>(log_lik_old.size());
    const double n_new = static_cast<double>(log_lik_new.size());
    const double v_old = mo.var / n_old;
    const double v_new = mn.var / n_new;
    ConvergenceResult out;
    if (v_old + v_new <= 0.0) {
        out.growth_detected = mn.mean > mo.mean;
        out.p_value = out.growth_detected ? 0.0 : 1.0;
        return out;
    }
    const double t = (mn.mean - mo.mean) / std::sqrt(v_old + v_new);
    const double df = (v_old + v_new) * (v_old + v_new) /
                      (v_old * v_old / (n_old - 1.0) + v_new * v_new / (n_new - 1.0));
    out.p_value = 1.0 - student_t_cdf(t, df);
    out.growth_detected = out.p_value < alpha_conv;
    return out;
}

Adjustment apply_adjustments(const std::vector<bool>& trend_detected,
                             const std::vector<bool>& range_exceeded,
                             const GainSchedule& schedule, double f) {
    if (!(f > 1.0)) throw DomainError("apply_adjustments: f must be > 1");
    const std::size_t p = schedule.a.size();
    if (trend_detected.size() != p || range_exceeded.size() != p) {
        throw DimensionError("apply_adjustments: verdict length differs from a");
    }
    Adjustment out{schedule, false};
    for (std::size_t i = 0; i < p; ++i) {
        if (range_exceeded[i]) {
            out.schedule.a[i] /= f;
            out.a_adjusted = true;
        } else if (trend_detected[i]) {
            out.schedule.a[i] *= f;
            out.a_adjusted = true;
        }
    }
    return out;
}

Calibration calibrate_gains(std::span<const double> theta0, const ParameterSpace& space,
                            const TuningConfig& cfg, const PairEvaluator& evaluator, Stream& rng) {
    const std::size_t p = space.dim();
    if (theta0.size() != p) throw DimensionError("calibrate_gains: dimension mismatch");

    double min_range = space.range(0);
    for (std::size_t i = 1; i < p; ++i) min_range = std::min(min_range, space.range(i));

    GainSchedule schedule;
    schedule.alpha = cfg.alpha;
    schedule.gamma = cfg.gamma;
    schedule.c = cfg.c_fraction * min_range;
    schedule.A = static_cast<std::uint64_t>(std::floor(0.1 * static_cast<double>(cfg.K)));
    const double c1 = schedule.c;

    const Vector start = project_to_feasible(theta0, space, c1);
    std::vector<Vector> grads;
    grads.reserve(cfg.n1);
    for (std::size_t j = 0; j < cfg.n1; ++j) {
        Stream sub = rng.child(j);
        const PerturbationVector delta = sample_perturbation(sub, p);
        const Vector plus = perturbed(start, delta, c1, +1);
        const Vector minus = perturbed(start, delta, c1, -1);
        const auto [lp, lm] = evaluator(plus, minus, sub);
        if (!std::isfinite(lp) || !std::isfinite(lm)) continue;
        grads.push_back(numerically_equal(lp, lm) ? Vector(p, 0.0)
                                                  : gradient_estimate(delta, lp, lm, c1).g);
    }

    Calibration out;
    out.median_gradient.assign(p, 0.0);
    const double shift = std::pow(static_cast<double>(schedule.A + 1), cfg.alpha);
    schedule.a.resize(p);
    for (std::size_t i = 0; i < p; ++i) {
        double med = 0.0;
        if (!grads.empty()) {
            Vector col(grads.size());
            for (std::size_t j = 0; j < grads.size(); ++j) col[j] = grads[j][i];
            med = median(std::move(col));
        }
        out.median_gradient[i] = med;
        const double mag = std::abs(med);
        schedule.a[i] = (mag > 0.0 && std::isfinite(mag)) ? cfg.b_at(i) * shift / mag
                                                          : cfg.b_at(i) * shift;
    }
    out.schedule = std::move(schedule);
    return out;
}

std::size_t ConvergenceTracker::record(bool growth_detected, bool a_adjusted) noexcept {
    if (growth_detected || a_adjusted) {
        consecutive_ = 0;
    } else {
        ++consecutive_;
    }
    return consecutive_;
}

}  // namespace aml
