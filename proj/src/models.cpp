#include "aml/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "aml/error.hpp"
#include "aml/stats.hpp"

namespace aml {

namespace {

/// Parses one CSV/whitespace-separated line. Returns nullopt for a token that
/// is not a number.
std::optional<std::vector<double>> parse_row(std::string line) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    std::vector<double> row;
    std::string tok;
    while (fields >> tok) {
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size()) return std::nullopt;
        row.push_back(v);
    }
    return row;
}

}  // namespace

Dataset SimulatorModel::read_csv(const std::filesystem::path& path) const {
    std::ifstream in(path);
    if (!in) throw Error("cannot open observed data file " + path.string());
    const std::size_t cols = csv_columns();
    Dataset data;
    data.cols = cols;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto row = parse_row(line);
        if (!row) {
            if (data.rows == 0) continue;  // header
            throw Error(path.string() + ":" + std::to_string(line_no) + ": not numeric");
        }
        if (row->empty()) continue;
        if (row->size() != cols) {
            throw Error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(cols) + " values, found " + std::to_string(row->size()));
        }
        data.values.insert(data.values.end(), row->begin(), row->end());
        ++data.rows;
    }
    if (data.rows == 0) throw Error("observed data file " + path.string() + " has no rows");
    return data;
}

UniformPrior::UniformPrior(ParameterSpace space) : space_(std::move(space)) {
    for (std::size_t i = 0; i < space_.dim(); ++i) log_volume_ += std::log(space_.range(i));
}

double UniformPrior::log_density(std::span<const double> theta) const {
    if (!space_.contains(theta)) return -std::numeric_limits<double>::infinity();
    return -log_volume_;
}

NormalPrior::NormalPrior(Vector mean, Vector sd) : mean_(std::move(mean)), sd_(std::move(sd)) {
    if (mean_.size() != sd_.size()) throw DimensionError("normal prior: mean/sd length differ");
    for (double s : sd_) {
        if (!(s > 0.0)) throw DomainError("normal prior: sd must be positive");
    }
}

double NormalPrior::log_density(std::span<const double> theta) const {
    if (theta.size() != mean_.size()) throw DimensionError("normal prior: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double z = (theta[i] - mean_[i]) / sd_[i];
        acc += -0.5 * z * z - std::log(sd_[i]) - 0.5 * std::log(2.0 * std::numbers::pi);
    }
    return acc;
}

std::unique_ptr<Prior> prior_uniform(const ParameterSpace& space) {
    return std::make_unique<UniformPrior>(space);
}

// --- normal ----------------------------------------------------------------

NormalModel::NormalModel(ParameterSpace space, std::size_t sample_size,
                         NormalSummaries summaries)
    : space_(std::move(space)), sample_size_(sample_size), summaries_(summaries) {
    if (sample_size_ < 1) throw DomainError("normal model: sample_size must be >= 1");
    if (summaries_ == NormalSummaries::Transformed && space_.dim() != 10) {
        throw DomainError("normal model: transformed summaries need 10 dimensions");
    }
}

Dataset NormalModel::simulate(std::span<const double> theta, Stream& rng) const {
    const std::size_t p = space_.dim();
    if (theta.size() != p) throw DimensionError("normal simulate: dimension mismatch");
    Dataset data;
    data.rows = sample_size_;
    data.cols = p;
    data.values.resize(sample_size_ * p);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t r = 0; r < sample_size_; ++r) {
        for (std::size_t i = 0; i < p; ++i) data.values[r * p + i] = theta[i] + noise(rng);
    }
    return data;
}

Vector column_means(const Dataset& data) {
    if (data.rows == 0) throw InsufficientDataError("column_means: empty dataset");
    Vector out(data.cols, 0.0);
    for (std::size_t r = 0; r < data.rows; ++r) {
        for (std::size_t c = 0; c < data.cols; ++c) out[c] += data.at(r, c);
    }
    for (double& v : out) v /= static_cast<double>(data.rows);
    return out;
}

Vector normal_summarize_transformed(std::span<const double> x) {
    if (x.size() != 10) throw DimensionError("transformed summaries need 10 means");
    return {x[0],        x[1] + x[2], x[1] - x[2], x[3] + x[4], x[4] + x[5],
            x[5] + x[3], x[6],        x[6] + x[7], x[8],        x[8] * x[9]};
}

Vector NormalModel::summarize(const Dataset& data) const {
    if (data.cols != space_.dim()) throw DimensionError("normal summarize: column mismatch");
    Vector xbar = column_means(data);
    if (summaries_ == NormalSummaries::Transformed) return normal_summarize_transformed(xbar);
    return xbar;
}

std::optional<Vector> NormalModel::analytic_estimate(const Dataset& data) const {
    return column_means(data);
}

// --- M/G/1 -----------------------------------------------------------------

Mg1Model::Mg1Model(ParameterSpace space, std::size_t customers)
    : space_(std::move(space)), customers_(customers) {
    if (space_.dim() != 3) throw DimensionError("mg1 model: parameter space must be 3-dim");
    if (customers_ < 4) throw DomainError("mg1 model: need at least 4 customers");
}

Vector mg1_interdepartures(std::span<const double> service, std::span<const double> interarrival) {
    if (service.size() != interarrival.size()) {
        throw DimensionError("mg1: service and interarrival lengths differ");
    }
    Vector y(service.size());
    double arrivals = 0.0;    // sum of W_1..W_m
    double departures = 0.0;  // sum of Y_1..Y_{m-1}
    for (std::size_t m = 0; m < service.size(); ++m) {
        arrivals += interarrival[m];
        y[m] = arrivals <= departures ? service[m] : service[m] + arrivals - departures;
        departures += y[m];
    }
    return y;
}

Dataset Mg1Model::simulate(std::span<const double> theta, Stream& rng) const {
    if (theta.size() != 3) throw DimensionError("mg1 simulate: theta must have 3 entries");
    // theta2 = 0 (constant service time) is allowed: it is the closed face of the box
    if (!(theta[0] >= 0.0) || !(theta[1] >= 0.0) || !(theta[2] > 0.0) ||
        !std::isfinite(theta[0] + theta[1] + theta[2])) {
        throw DomainError("mg1 simulate: need theta1 >= 0, theta2 >= 0, theta3 > 0");
    }
    std::exponential_distribution<double> wait(theta[2]);
    Dataset data;
    data.rows = customers_;
    data.cols = 1;
    data.values.resize(customers_);
    double arrivals = 0.0;
    double departures = 0.0;
    for (std::size_t m = 0; m < customers_; ++m) {
        const double u = theta[0] + theta[1] * rng.uniform01();
        arrivals += wait(rng);
        const double y = arrivals <= departures ? u : u + arrivals - departures;
        departures += y;
        data.values[m] = y;
    }
    return data;
}

Vector mg1_summarize(std::span<const double> y) {
    if (y.size() < 4) throw InsufficientDataError("mg1 summaries need at least 4 values");
    std::vector<double> sorted(y.begin(), y.end());
    std::sort(sorted.begin(), sorted.end());
    return {sorted.front(), quantile_sorted(sorted, 0.25), quantile_sorted(sorted, 0.5),
            quantile_sorted(sorted, 0.75), sorted.back()};
}

Vector Mg1Model::summarize(const Dataset& data) const { return mg1_summarize(data.values); }

}  // namespace aml
