#include "aml/bootstrap.hpp"

#include <algorithm>
#include <cmath>

#include "aml/error.hpp"
#include "aml/parallel.hpp"
#include "aml/stats.hpp"

namespace aml {

namespace {

Vector column(const std::vector<Vector>& rows, std::size_t i) {
    Vector out(rows.size());
    for (std::size_t b = 0; b < rows.size(); ++b) out[b] = rows[b][i];
    return out;
}

void check_rows(const std::vector<Vector>& replicates, std::size_t p) {
    if (replicates.size() < 2) throw InsufficientDataError("bootstrap: need B >= 2 replicates");
    for (const auto& row : replicates) {
        if (row.size() != p) throw DimensionError("bootstrap: replicate of wrong dimension");
    }
}

}  // namespace

Interval basic_ci(double theta_hat, std::span<const double> replicates, double level,
                  bool nonnegative) {
    if (replicates.empty()) throw InsufficientDataError("basic_ci: no replicates");
    if (!(level > 0.0 && level < 1.0)) throw DomainError("basic_ci: level must lie in (0, 1)");
    const double a = 1.0 - level;
    std::vector<double> sorted(replicates.begin(), replicates.end());
    std::sort(sorted.begin(), sorted.end());
    Interval ci;
    ci.raw_lower = 2.0 * theta_hat - quantile_sorted(sorted, 1.0 - a / 2.0);
    ci.raw_upper = 2.0 * theta_hat - quantile_sorted(sorted, a / 2.0);
    ci.lower = ci.raw_lower;
    ci.upper = ci.raw_upper;
    if (nonnegative && ci.raw_lower < 0.0) {
        ci.lower = 0.0;
        ci.upper = ci.raw_upper - ci.raw_lower;
        ci.shifted = true;
    }
    return ci;
}

Vector bias_corrected_estimate(std::span<const double> theta_hat,
                               const std::vector<Vector>& replicates) {
    check_rows(replicates, theta_hat.size());
    Vector out(theta_hat.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = 2.0 * theta_hat[i] - mean(column(replicates, i));
    }
    return out;
}

double simultaneous_level(double level, std::size_t p) {
    if (p < 1) throw DomainError("simultaneous_level: p must be >= 1");
    return 1.0 - (1.0 - level) / static_cast<double>(p);
}

std::vector<Interval> simultaneous_ci(std::span<const double> theta_hat,
                                      const std::vector<Vector>& replicates, double level,
                                      const std::vector<bool>& nonnegative) {
    const std::size_t p = theta_hat.size();
    check_rows(replicates, p);
    const double per_coord = simultaneous_level(level, p);
    std::vector<Interval> out;
    out.reserve(p);
    for (std::size_t i = 0; i < p; ++i) {
        const bool nonneg = i < nonnegative.size() && nonnegative[i];
        out.push_back(basic_ci(theta_hat[i], column(replicates, i), per_coord, nonneg));
    }
    return out;
}

std::vector<Vector> bootstrap_replicates(std::span<const double> theta_hat,
                                         const SimulatorModel& model, const RunConfig& config,
                                         std::size_t B, const Stream& rng, const Prior* prior,
                                         std::size_t threads) {
    if (B < 2) throw DomainError("bootstrap: need B >= 2");
    if (!model.space().contains(theta_hat)) {
        throw DomainError("bootstrap: theta_hat lies outside the search space");
    }
    std::vector<Vector> rows(B);
    parallel_for(B, threads, [&](std::size_t b) {
        const Stream rep = rng.child(stream_tag::kBootstrap, b);
        Stream data_rng = rep.child(stream_tag::kObserved);
        const Vector summary = model.simulate_summary(theta_hat, data_rng);
        const SimulatedLikelihood objective(model, summary, config.n, config.kde,
                                            config.mode == Mode::MAP ? prior : nullptr);
        rows[b] = multi_start_estimate(objective, model.space(), config,
                                       rep.child(stream_tag::kReplicate), 1)
                      .theta;
    });
    return rows;
}

BootstrapResult summarize_bootstrap(std::span<const double> theta_hat,
                                    std::vector<Vector> replicates, double level,
                                    bool simultaneous, const std::vector<bool>& nonnegative) {
    const std::size_t p = theta_hat.size();
    check_rows(replicates, p);
    BootstrapResult out;
    out.theta_hat.assign(theta_hat.begin(), theta_hat.end());
    out.bias_corrected = bias_corrected_estimate(theta_hat, replicates);
    out.level = level;
    out.simultaneous = simultaneous;
    out.se.resize(p);
    for (std::size_t i = 0; i < p; ++i) out.se[i] = sample_sd(column(replicates, i));
    if (simultaneous) {
        out.intervals = simultaneous_ci(theta_hat, replicates, level, nonnegative);
    } else {
        for (std::size_t i = 0; i < p; ++i) {
            const bool nonneg = i < nonnegative.size() && nonnegative[i];
            out.intervals.push_back(basic_ci(theta_hat[i], column(replicates, i), level, nonneg));
        }
    }
    out.replicates = std::move(replicates);
    return out;
}

}  // namespace aml
