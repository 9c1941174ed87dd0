#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "aml/rng.hpp"

namespace aml {

using Vector = std::vector<double>;

/// Axis-aligned search box.
class ParameterSpace {
public:
    ParameterSpace() = default;
    ParameterSpace(Vector lower, Vector upper);

    [[nodiscard]] std::size_t dim() const noexcept { return lower_.size(); }
    [[nodiscard]] const Vector& lower() const noexcept { return lower_; }
    [[nodiscard]] const Vector& upper() const noexcept { return upper_; }
    [[nodiscard]] double range(std::size_t i) const noexcept { return upper_[i] - lower_[i]; }
    [[nodiscard]] bool contains(std::span<const double> theta) const noexcept;

    /// Affine maps between this box and the unit cube.
    [[nodiscard]] Vector to_unit(std::span<const double> theta) const;
    [[nodiscard]] Vector from_unit(std::span<const double> unit) const;

    /// The unit cube of the same dimension.
    [[nodiscard]] ParameterSpace unit() const;

private:
    Vector lower_;
    Vector upper_;
};

/// a_k = a / (k + A)^alpha per coordinate, c_k = c / k^gamma.
struct GainSchedule {
    Vector a;
    std::uint64_t A = 0;
    double alpha = 1.0;
    double c = 0.02;
    double gamma = 1.0 / 6.0;

    void validate() const;
};

struct Gains {
    Vector a_k;
    double c_k = 0.0;
};

Gains gain_at(const GainSchedule& schedule, std::uint64_t k);

/// Vector with entries in {-1, +1}.
class PerturbationVector {
public:
    PerturbationVector() = default;
    explicit PerturbationVector(std::vector<signed char> signs);

    [[nodiscard]] std::size_t dim() const noexcept { return signs_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return signs_[i]; }
    [[nodiscard]] const std::vector<signed char>& signs() const noexcept { return signs_; }

    friend bool operator==(const PerturbationVector&, const PerturbationVector&) = default;

private:
    std::vector<signed char> signs_;
};

/// i.i.d. Rademacher draws from `rng`.
PerturbationVector sample_perturbation(Stream& rng, std::size_t p);

struct GradientEstimate {
    Vector g;
    double log_lik_plus = 0.0;
    double log_lik_minus = 0.0;
    double c_k = 0.0;
};

/// delta * (log L+ - log L-) / (2 c_k).
GradientEstimate gradient_estimate(const PerturbationVector& delta, double log_lik_plus,
                                   double log_lik_minus, double c_k);

/// True when two log-likelihood values differ only by floating-point
/// rounding; such a pair carries no slope information.
bool numerically_equal(double log_lik_plus, double log_lik_minus) noexcept;

/// theta +/- c_k * delta.
Vector perturbed(std::span<const double> theta, const PerturbationVector& delta, double c_k,
                 int sign);

/// Closest point to theta for which theta +/- c_k * delta both lie in the box.
/// Coordinates whose box is narrower than 2 c_k go to the midpoint.
Vector project_to_feasible(std::span<const double> theta, const ParameterSpace& space,
                           double c_k);

/// True when both perturbed points lie in the box.
bool is_feasible(std::span<const double> theta, const ParameterSpace& space, double c_k);

/// Clamp each step coordinate to +/- 10% of the coordinate's range.
Vector clamp_step(std::span<const double> step, const ParameterSpace& space);

inline constexpr double kStepClampFraction = 0.1;

/// theta + clamp(a_k * g), projected so the next perturbation stays feasible.
Vector update_iterate(std::span<const double> theta, const GradientEstimate& grad,
                      std::span<const double> a_k, const ParameterSpace& space, double c_next);

}  // namespace aml
