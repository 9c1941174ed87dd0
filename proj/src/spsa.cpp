#include "aml/spsa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "aml/error.hpp"

namespace aml {

ParameterSpace::ParameterSpace(Vector lower, Vector upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.empty()) throw DimensionError("parameter space: zero dimensions");
    if (lower_.size() != upper_.size()) {
        throw DimensionError("parameter space: lower and upper differ in length");
    }
    for (std::size_t i = 0; i < lower_.size(); ++i) {
        const double r = upper_[i] - lower_[i];
        if (!(lower_[i] < upper_[i]) || !std::isfinite(r)) {
            throw DomainError("parameter space: need finite lower < upper in coordinate " +
                              std::to_string(i));
        }
    }
}

bool ParameterSpace::contains(std::span<const double> theta) const noexcept {
    if (theta.size() != dim()) return false;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (!(theta[i] >= lower_[i] && theta[i] <= upper_[i])) return false;
    }
    return true;
}

Vector ParameterSpace::to_unit(std::span<const double> theta) const {
    if (theta.size() != dim()) throw DimensionError("to_unit: dimension mismatch");
    Vector out(dim());
    for (std::size_t i = 0; i < dim(); ++i) out[i] = (theta[i] - lower_[i]) / range(i);
    return out;
}

Vector ParameterSpace::from_unit(std::span<const double> unit) const {
    if (unit.size() != dim()) throw DimensionError("from_unit: dimension mismatch");
    Vector out(dim());
    // clamped so rounding at the faces never leaves the box
    for (std::size_t i = 0; i < dim(); ++i) {
        out[i] = std::clamp(lower_[i] + unit[i] * range(i), lower_[i], upper_[i]);
    }
    return out;
}

ParameterSpace ParameterSpace::unit() const {
    return ParameterSpace(Vector(dim(), 0.0), Vector(dim(), 1.0));
}

void GainSchedule::validate() const {
    if (a.empty()) throw ConfigError("gains.a", "must be nonempty");
    for (double ai : a) {
        if (!(ai > 0.0) || !std::isfinite(ai)) throw ConfigError("gains.a", "must be positive");
    }
    if (!(alpha > 0.0)) throw ConfigError("gains.alpha", "must be positive");
    if (!(c > 0.0)) throw ConfigError("gains.c", "must be positive");
    if (!(gamma > 0.0)) throw ConfigError("gains.gamma", "must be positive");
}

Gains gain_at(const GainSchedule& schedule, std::uint64_t k) {
    if (k == 0) throw DomainError("gain_at: iteration index starts at 1");
    Gains g;
    const double denom = std::pow(static_cast<double>(k + schedule.A), schedule.alpha);
    g.a_k.reserve(schedule.a.size());
    for (double ai : schedule.a) g.a_k.push_back(ai / denom);
    g.c_k = schedule.c / std::pow(static_cast<double>(k), schedule.gamma);
    return g;
}

PerturbationVector::PerturbationVector(std::vector<signed char> signs) : signs_(std::move(signs)) {
    for (auto s : signs_) {
        if (s != 1 && s != -1) throw DomainError("perturbation entries must be -1 or +1");
    }
}

PerturbationVector sample_perturbation(Stream& rng, std::size_t p) {
    std::vector<signed char> signs(p);
    // one bit per coordinate, refilled every 64 coordinates
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < p; ++i) {
        if (i % 64 == 0) bits = rng();
        signs[i] = (bits >> 63) ? 1 : -1;
        bits <<= 1;
    }
    return PerturbationVector(std::move(signs));
}

GradientEstimate gradient_estimate(const PerturbationVector& delta, double log_lik_plus,
                                   double log_lik_minus, double c_k) {
    if (!(c_k > 0.0)) throw DomainError("gradient_estimate: c_k must be positive");
    if (!std::isfinite(log_lik_plus) || !std::isfinite(log_lik_minus)) {
        throw DomainError("gradient_estimate: log-likelihood values must be finite");
    }
    const double scale = (log_lik_plus - log_lik_minus) / (2.0 * c_k);
    GradientEstimate out;
    out.g.resize(delta.dim());
    for (std::size_t i = 0; i < delta.dim(); ++i) out.g[i] = delta[i] * scale;
    out.log_lik_plus = log_lik_plus;
    out.log_lik_minus = log_lik_minus;
    out.c_k = c_k;
    return out;
}

bool numerically_equal(double log_lik_plus, double log_lik_minus) noexcept {
    constexpr double tol = 64.0 * std::numeric_limits<double>::epsilon();
    return std::abs(log_lik_plus - log_lik_minus) <=
           tol * std::max(std::abs(log_lik_plus), std::abs(log_lik_minus));
}

Vector perturbed(std::span<const double> theta, const PerturbationVector& delta, double c_k,
                 int sign) {
    if (theta.size() != delta.dim()) throw DimensionError("perturbed: dimension mismatch");
    Vector out(theta.begin(), theta.end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += sign * c_k * delta[i];
    return out;
}

Vector project_to_feasible(std::span<const double> theta, const ParameterSpace& space,
                           double c_k) {
    if (theta.size() != space.dim()) throw DimensionError("project: dimension mismatch");
    Vector out(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double lo = space.lower()[i] + c_k;
        const double hi = space.upper()[i] - c_k;
        if (lo > hi) {
            out[i] = 0.5 * (space.lower()[i] + space.upper()[i]);
        } else {
            out[i] = std::clamp(theta[i], lo, hi);
        }
    }
    return out;
}

bool is_feasible(std::span<const double> theta, const ParameterSpace& space, double c_k) {
    if (theta.size() != space.dim()) return false;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double lo = space.lower()[i] + c_k;
        const double hi = space.upper()[i] - c_k;
        if (lo > hi) {
            if (theta[i] != 0.5 * (space.lower()[i] + space.upper()[i])) return false;
        } else if (!(theta[i] >= lo && theta[i] <= hi)) {
            return false;
        }
    }
    return true;
}

Vector clamp_step(std::span<const double> step, const ParameterSpace& space) {
    if (step.size() != space.dim()) throw DimensionError("clamp_step: dimension mismatch");
    Vector out(step.size());
    for (std::size_t i = 0; i < step.size(); ++i) {
        const double bound = kStepClampFraction * space.range(i);
        out[i] = std::clamp(step[i], -bound, bound);
    }
    return out;
}

Vector update_iterate(std::span<const double> theta, const GradientEstimate& grad,
                      std::span<const double> a_k, const ParameterSpace& space, double c_next) {
    if (theta.size() != grad.g.size() || theta.size() != a_k.size()) {
        throw DimensionError("update_iterate: dimension mismatch");
    }
    Vector step(theta.size());
    for (std::size_t i = 0; i < step.size(); ++i) step[i] = a_k[i] * grad.g[i];
    const Vector clamped = clamp_step(step, space);
    Vector next(theta.begin(), theta.end());
    for (std::size_t i = 0; i < next.size(); ++i) next[i] += clamped[i];
    return project_to_feasible(next, space, c_next);
}

}  // namespace aml
