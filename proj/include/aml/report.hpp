#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "aml/bootstrap.hpp"
#include "aml/config.hpp"
#include "aml/estimator.hpp"

namespace aml {

/// Per-start summary stored in the estimate result file.
struct StartSummary {
    Vector start;
    Vector final_theta;
    double final_log_lik = 0.0;
    std::uint64_t iterations = 0;
    std::optional<std::uint64_t> converged_at;
    std::size_t diagnostic_rounds = 0;
    Vector initial_a;
    Vector final_a;
    double c = 0.0;
    std::uint64_t A = 0;

    friend bool operator==(const StartSummary&, const StartSummary&) = default;
};

struct EstimateReport {
    std::string model;
    Vector theta_aml;
    std::size_t best_start = 0;
    Vector observed_summary;
    std::vector<StartSummary> starts;

    friend bool operator==(const EstimateReport&, const EstimateReport&) = default;
};

EstimateReport make_estimate_report(const Problem& problem, const MultiStartResult& result);

void to_json(Json& j, const StartSummary& s);
void from_json(const Json& j, StartSummary& s);
void to_json(Json& j, const EstimateReport& r);
void from_json(const Json& j, EstimateReport& r);
void to_json(Json& j, const Interval& ci);
void to_json(Json& j, const BootstrapResult& r);

/// Decimal with 17 significant digits.
std::string format_number(double v);

/// One row per iteration of every start:
/// start,iteration,theta_1..theta_p,c_k,a_1..a_p,event
void write_trajectory_csv(std::ostream& out, const MultiStartResult& result);

/// Header `replicate,theta_1..theta_p` then one row per replicate.
void write_matrix_csv(std::ostream& out, const std::vector<Vector>& rows,
                      const std::string& index_name, const std::string& prefix = "theta_");

/// Writes text to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace aml
