#include "aml/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "aml/error.hpp"

namespace aml {

namespace {

constexpr double kSdFloorAbs = 1e-8;
constexpr double kSdFloorRel = 1e-8;

void check_samples(std::span<const double> target, std::span<const Vector> samples,
                   const BandwidthMatrix& H) {
    if (samples.empty()) throw InsufficientDataError("kde: no samples");
    if (H.dim() != target.size()) {
        throw DimensionError("kde: bandwidth has dimension " + std::to_string(H.dim()) +
                             ", target has " + std::to_string(target.size()));
    }
    for (const auto& s : samples) {
        if (s.size() != target.size()) {
            throw DimensionError("kde: sample of dimension " + std::to_string(s.size()) +
                                 " does not match target dimension " +
                                 std::to_string(target.size()));
        }
    }
}

}  // namespace

BandwidthMatrix::BandwidthMatrix(Vector diag) : diag_(std::move(diag)) {
    if (diag_.empty()) throw DimensionError("bandwidth: empty diagonal");
    for (double h : diag_) {
        if (!(h > 0.0) || !std::isfinite(h)) {
            throw DomainError("bandwidth: diagonal entries must be finite and positive");
        }
    }
}

double BandwidthMatrix::log_det() const noexcept {
    double acc = 0.0;
    for (double h : diag_) acc += std::log(h);
    return acc;
}

void KdeConfig::validate() const {
    if (smoothing_window < 1) throw ConfigError("kde.smoothing_window", "must be >= 1");
    if (!(zero_threshold > 0.0) ||
        zero_threshold > std::numeric_limits<double>::min() * 1e6) {
        throw ConfigError("kde.zero_threshold", "must lie in (0, DBL_MIN * 1e6]");
    }
}

double modified_gaussian_kernel(double q) { return std::exp(log_modified_gaussian_kernel(q)); }

double log_modified_gaussian_kernel(double q) {
    if (std::isnan(q) || q < 0.0) throw DomainError("kernel: q must be nonnegative");
    return q < 1.0 ? -0.5 * q : -0.5 * std::sqrt(q);
}

double whitened_sq_distance(std::span<const double> a, std::span<const double> b,
                            const BandwidthMatrix& H) {
    const auto& h = H.diag();
    double q = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        q += diff * diff / h[i];
    }
    return q;
}

BandwidthMatrix silverman_bandwidth(std::span<const Vector> samples) {
    const std::size_t n = samples.size();
    if (n < 2) throw InsufficientDataError("silverman_bandwidth: need at least 2 samples");
    const std::size_t d = samples.front().size();
    if (d == 0) throw DimensionError("silverman_bandwidth: zero-dimensional samples");
    for (const auto& s : samples) {
        if (s.size() != d) throw DimensionError("silverman_bandwidth: ragged samples");
    }

    const double dd = static_cast<double>(d);
    const double factor = std::pow(4.0 / (dd + 2.0), 1.0 / (dd + 4.0)) *
                          std::pow(static_cast<double>(n), -1.0 / (dd + 4.0));

    Vector diag(d);
    for (std::size_t i = 0; i < d; ++i) {
        double mean = 0.0;
        for (const auto& s : samples) mean += s[i];
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (const auto& s : samples) {
            const double dev = s[i] - mean;
            ss += dev * dev;
        }
        double sd = std::sqrt(ss / static_cast<double>(n - 1));
        sd = std::max(sd, std::max(kSdFloorAbs, kSdFloorRel * std::abs(mean)));
        const double h = sd * factor;
        diag[i] = h * h;
    }
    return BandwidthMatrix(std::move(diag));
}

BandwidthMatrix smooth_bandwidth(std::span<const BandwidthMatrix> history, std::size_t window) {
    if (history.empty()) throw InsufficientDataError("smooth_bandwidth: empty history");
    if (window < 1) throw DomainError("smooth_bandwidth: window must be >= 1");
    const std::size_t d = history.front().dim();
    const std::size_t take = std::min(window, history.size());
    Vector mean(d, 0.0);
    for (std::size_t j = history.size() - take; j < history.size(); ++j) {
        const auto& h = history[j].diag();
        if (h.size() != d) throw DimensionError("smooth_bandwidth: mixed dimensions");
        for (std::size_t i = 0; i < d; ++i) mean[i] += h[i];
    }
    for (double& m : mean) m /= static_cast<double>(take);
    return BandwidthMatrix(std::move(mean));
}

BandwidthMatrix smooth_bandwidth(const std::deque<BandwidthMatrix>& history, std::size_t window) {
    const std::vector<BandwidthMatrix> tmp(history.begin(), history.end());
    return smooth_bandwidth(std::span<const BandwidthMatrix>(tmp), window);
}

LikelihoodEstimate kde_log_likelihood(std::span<const double> target,
                                      std::span<const Vector> samples,
                                      const BandwidthMatrix& H, const KdeConfig& cfg) {
    check_samples(target, samples, H);

    // log-sum-exp over kernel contributions; the density itself may underflow
    std::vector<double> log_k(samples.size());
    for (std::size_t j = 0; j < samples.size(); ++j) {
        log_k[j] = log_modified_gaussian_kernel(whitened_sq_distance(target, samples[j], H));
    }
    const double top = *std::max_element(log_k.begin(), log_k.end());
    double acc = 0.0;
    for (double lk : log_k) acc += std::exp(lk - top);
    const double log_density = top + std::log(acc) -
                               std::log(static_cast<double>(samples.size())) -
                               0.5 * H.log_det();

    if (log_density < std::log(cfg.zero_threshold)) {
        return nearest_neighbor_fallback(target, samples, H);
    }
    return {log_density, samples.size(), false};
}

LikelihoodEstimate nearest_neighbor_fallback(std::span<const double> target,
                                             std::span<const Vector> samples,
                                             const BandwidthMatrix& H) {
    check_samples(target, samples, H);
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < samples.size(); ++j) {
        double dist = 0.0;
        for (std::size_t i = 0; i < target.size(); ++i) {
            const double diff = samples[j][i] - target[i];
            dist += diff * diff;
        }
        if (dist < best_dist) {
            best_dist = dist;
            best = j;
        }
    }
    const double q = whitened_sq_distance(target, samples[best], H);
    return {log_modified_gaussian_kernel(q) - 0.5 * H.log_det(), 1, true};
}

void BandwidthHistory::push(BandwidthMatrix H) {
    if (!entries_.empty() && entries_.front().dim() != H.dim()) {
        throw DimensionError("bandwidth history: dimension changed");
    }
    entries_.push_back(std::move(H));
    while (entries_.size() > window_) entries_.pop_front();
}

BandwidthMatrix BandwidthHistory::smoothed() const { return smooth_bandwidth(entries_, window_); }

}  // namespace aml
