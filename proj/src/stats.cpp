#include "aml/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aml/error.hpp"

namespace aml {

double quantile_sorted(std::span<const double> sorted, double beta) {
    if (sorted.empty()) throw InsufficientDataError("quantile: empty input");
    if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("quantile: beta must lie in [0, 1]");
    const double h = static_cast<double>(sorted.size() - 1) * beta;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double quantile(std::span<const double> values, double beta) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return quantile_sorted(sorted, beta);
}

double mean(std::span<const double> values) {
    if (values.empty()) throw InsufficientDataError("mean: empty input");
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
    if (values.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace aml
