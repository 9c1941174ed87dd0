#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aml/rng.hpp"
#include "aml/spsa.hpp"

namespace aml {

/// Raw data of one simulated or observed dataset, stored row-major.
struct Dataset {
    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t cols = 0;

    [[nodiscard]] double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// A data-generating process with a summary-statistic map.
class SimulatorModel {
public:
    virtual ~SimulatorModel() = default;

    [[nodiscard]] virtual std::string kind() const = 0;
    [[nodiscard]] virtual std::size_t param_dim() const = 0;
    [[nodiscard]] virtual std::size_t summary_dim() const = 0;
    [[nodiscard]] virtual const ParameterSpace& space() const = 0;

    /// Deterministic given the stream state.
    virtual Dataset simulate(std::span<const double> theta, Stream& rng) const = 0;
    [[nodiscard]] virtual Vector summarize(const Dataset& data) const = 0;

    /// Coordinates known to be nonnegative (used for interval reporting).
    [[nodiscard]] virtual std::vector<bool> nonnegative() const {
        return std::vector<bool>(param_dim(), false);
    }

    /// Closed-form maximum likelihood estimate from raw data, when one exists.
    [[nodiscard]] virtual std::optional<Vector> analytic_estimate(const Dataset&) const {
        return std::nullopt;
    }

    /// Reads an observed dataset from CSV in this model's raw-data layout.
    [[nodiscard]] virtual Dataset read_csv(const std::filesystem::path& path) const;

    Vector simulate_summary(std::span<const double> theta, Stream& rng) const {
        return summarize(simulate(theta, rng));
    }

protected:
    [[nodiscard]] virtual std::size_t csv_columns() const = 0;
};

/// Log-prior density for MAP estimation.
class Prior {
public:
    virtual ~Prior() = default;
    /// -infinity outside the support.
    [[nodiscard]] virtual double log_density(std::span<const double> theta) const = 0;
};

/// Uniform on the search box: -sum log(range_i) inside, -inf outside.
class UniformPrior final : public Prior {
public:
    explicit UniformPrior(ParameterSpace space);
    [[nodiscard]] double log_density(std::span<const double> theta) const override;

private:
    ParameterSpace space_;
    double log_volume_ = 0.0;
};

/// Independent normal prior per coordinate.
class NormalPrior final : public Prior {
public:
    NormalPrior(Vector mean, Vector sd);
    [[nodiscard]] double log_density(std::span<const double> theta) const override;

private:
    Vector mean_;
    Vector sd_;
};

std::unique_ptr<Prior> prior_uniform(const ParameterSpace& space);

enum class NormalSummaries { Plain, Transformed };

/// Multivariate normal N(theta, I) with `sample_size` draws per dataset.
/// Plain summaries are the coordinate means; transformed summaries (10-dim
/// only) mix them linearly plus one product term.
class NormalModel final : public SimulatorModel {
public:
    NormalModel(ParameterSpace space, std::size_t sample_size, NormalSummaries summaries);

    [[nodiscard]] std::string kind() const override { return "normal"; }
    [[nodiscard]] std::size_t param_dim() const override { return space_.dim(); }
    [[nodiscard]] std::size_t summary_dim() const override { return space_.dim(); }
    [[nodiscard]] const ParameterSpace& space() const override { return space_; }
    [[nodiscard]] std::size_t sample_size() const noexcept { return sample_size_; }
    [[nodiscard]] NormalSummaries summaries() const noexcept { return summaries_; }

    Dataset simulate(std::span<const double> theta, Stream& rng) const override;
    [[nodiscard]] Vector summarize(const Dataset& data) const override;
    [[nodiscard]] std::optional<Vector> analytic_estimate(const Dataset& data) const override;

protected:
    [[nodiscard]] std::size_t csv_columns() const override { return space_.dim(); }

private:
    ParameterSpace space_;
    std::size_t sample_size_;
    NormalSummaries summaries_;
};

/// Coordinate means of a row-major dataset.
Vector column_means(const Dataset& data);

/// (X1, X2+X3, X2-X3, X4+X5, X5+X6, X6+X4, X7, X7+X8, X9, X9*X10)
Vector normal_summarize_transformed(std::span<const double> xbar);

/// Single-server FIFO queue, service U ~ Uniform[theta1, theta1 + theta2],
/// interarrival W ~ Exponential(rate theta3); only the M interdeparture
/// times are observed. Summaries: min, quartiles, max.
class Mg1Model final : public SimulatorModel {
public:
    Mg1Model(ParameterSpace space, std::size_t customers);

    [[nodiscard]] std::string kind() const override { return "mg1"; }
    [[nodiscard]] std::size_t param_dim() const override { return 3; }
    [[nodiscard]] std::size_t summary_dim() const override { return 5; }
    [[nodiscard]] const ParameterSpace& space() const override { return space_; }
    [[nodiscard]] std::size_t customers() const noexcept { return customers_; }
    [[nodiscard]] std::vector<bool> nonnegative() const override { return {true, true, true}; }

    Dataset simulate(std::span<const double> theta, Stream& rng) const override;
    [[nodiscard]] Vector summarize(const Dataset& data) const override;

protected:
    [[nodiscard]] std::size_t csv_columns() const override { return 1; }

private:
    ParameterSpace space_;
    std::size_t customers_;
};

/// Interdeparture times from service and interarrival times.
Vector mg1_interdepartures(std::span<const double> service, std::span<const double> interarrival);

/// (min, Q1, median, Q3, max) with type-7 quartiles. Requires at least 4 values.
Vector mg1_summarize(std::span<const double> interdepartures);

}  // namespace aml
