#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aml/estimator.hpp"
#include "aml/models.hpp"

namespace aml {

using Json = nlohmann::json;

/// A fully resolved estimation problem built from a config document.
struct Problem {
    Json resolved;                         ///< config with every default filled in
    std::unique_ptr<SimulatorModel> model;
    std::unique_ptr<Prior> prior;          ///< set in MAP mode only
    RunConfig run;
    Vector observed_summary;
    std::optional<Dataset> observed_data;
    std::optional<Vector> reference;       ///< bias reference (explicit or analytic)
    std::vector<std::uint64_t> checkpoints;

    [[nodiscard]] SimulatedLikelihood objective() const {
        return SimulatedLikelihood(*model, observed_summary, run.n, run.kde, prior.get());
    }
};

/// Reads a JSON config file. Throws ConfigError on syntax errors.
Json read_config_file(const std::filesystem::path& path);

/// Applies `key=value`. Dotted keys address nested sections; a bare key is
/// looked up in the run, tuning and kde sections in that order. The value is
/// parsed as JSON when possible and taken as a string otherwise.
void apply_override(Json& config, const std::string& assignment);

/// Validates and resolves a config. Relative data paths resolve against
/// `base_dir`. Throws ConfigError naming the offending field.
Problem load_problem(const Json& config, const std::filesystem::path& base_dir = {});

}  // namespace aml
