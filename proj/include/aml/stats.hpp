#pragma once

#include <span>
#include <vector>

namespace aml {

/// Type-7 (linear interpolation of order statistics) empirical quantile.
double quantile(std::span<const double> values, double beta);

/// Type-7 quantile on data already sorted ascending.
double quantile_sorted(std::span<const double> sorted, double beta);

double mean(std::span<const double> values);

/// Sample standard deviation (n - 1 denominator). NaN for fewer than 2 values.
double sample_sd(std::span<const double> values);

}  // namespace aml
