#pragma once

#include <cstddef>
#include <deque>
#include <limits>
#include <span>
#include <vector>

namespace aml {

using Vector = std::vector<double>;

/// Diagonal of a positive definite bandwidth matrix H (squared bandwidths).
class BandwidthMatrix {
public:
    BandwidthMatrix() = default;
    explicit BandwidthMatrix(Vector diag);

    static BandwidthMatrix identity(std::size_t d) { return BandwidthMatrix(Vector(d, 1.0)); }

    [[nodiscard]] const Vector& diag() const noexcept { return diag_; }
    [[nodiscard]] std::size_t dim() const noexcept { return diag_.size(); }
    [[nodiscard]] double log_det() const noexcept;

    friend bool operator==(const BandwidthMatrix&, const BandwidthMatrix&) = default;

private:
    Vector diag_;
};

struct KdeConfig {
    /// Moving-average window over per-iteration bandwidth estimates.
    std::size_t smoothing_window = 10;
    /// Densities below this are treated as numerically zero.
    double zero_threshold = std::numeric_limits<double>::min() * 1e3;

    void validate() const;
};

/// Estimated likelihood at one parameter point. `log_value` is the natural
/// log of the kernel density estimate with an unnormalized kernel, so it is
/// defined up to an additive constant that depends only on the summary
/// dimension.
struct LikelihoodEstimate {
    double log_value = 0.0;
    std::size_t n_points = 0;
    bool degenerate = false;
};

/// Gaussian kernel with an exponential tail beyond the unit ellipsoid:
/// exp(-q/2) for q < 1, exp(-sqrt(q)/2) otherwise. q is the whitened
/// squared distance x' H^-1 x.
double modified_gaussian_kernel(double q);

/// Natural log of modified_gaussian_kernel, finite for every finite q >= 0.
double log_modified_gaussian_kernel(double q);

/// Whitened squared distance (a - b)' H^-1 (a - b) for diagonal H.
double whitened_sq_distance(std::span<const double> a, std::span<const double> b,
                            const BandwidthMatrix& H);

/// Per-coordinate normal-reference bandwidth,
/// h_i = sd_i * (4/(d+2))^(1/(d+4)) * n^(-1/(d+4)), returned as diag(h_i^2).
/// Zero-variance coordinates are floored at max(1e-8, 1e-8 * |mean_i|).
BandwidthMatrix silverman_bandwidth(std::span<const Vector> samples);

/// Elementwise mean of the last min(window, history.size()) entries.
BandwidthMatrix smooth_bandwidth(std::span<const BandwidthMatrix> history, std::size_t window);
BandwidthMatrix smooth_bandwidth(const std::deque<BandwidthMatrix>& history, std::size_t window);

/// Kernel density estimate of `target` from `samples`, falling back to the
/// nearest-neighbor estimate when the density is numerically zero.
LikelihoodEstimate kde_log_likelihood(std::span<const double> target,
                                      std::span<const Vector> samples,
                                      const BandwidthMatrix& H, const KdeConfig& cfg);

/// Single-point estimate using the sample closest to `target` in raw
/// Euclidean distance (lowest index wins ties).
LikelihoodEstimate nearest_neighbor_fallback(std::span<const double> target,
                                             std::span<const Vector> samples,
                                             const BandwidthMatrix& H);

/// Bounded bandwidth history maintaining the moving average used across
/// iterations of one run.
class BandwidthHistory {
public:
    explicit BandwidthHistory(std::size_t window = 10) : window_(window) {}

    void push(BandwidthMatrix H);
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] BandwidthMatrix smoothed() const;

private:
    std::size_t window_;
    std::deque<BandwidthMatrix> entries_;
};

}  // namespace aml
