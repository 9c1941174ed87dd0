#include "aml/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include "aml/bootstrap.hpp"
#include "aml/config.hpp"
#include "aml/error.hpp"
#include "aml/parallel.hpp"
#include "aml/report.hpp"
#include "aml/stats.hpp"

#ifndef AML_VERSION
#define AML_VERSION "0.0.0"
#endif

namespace aml {

namespace {

namespace fs = std::filesystem;

struct CommonOptions {
    std::string config;
    std::string out_dir;
    std::size_t threads = 0;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config, "JSON run configuration")->required();
    cmd->add_option("--out-dir", opts.out_dir,
                    "output directory (default: $AML_OUT_DIR or ./aml-out)");
    cmd->add_option("--threads", opts.threads, "worker threads (default: all cores)");
    cmd->add_option("--override", opts.overrides, "key=value config override (repeatable)")
        ->take_all();
}

std::string now_iso8601() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Owns the run directory and its manifest.
class RunDirectory {
public:
    RunDirectory(const CommonOptions& opts, std::string command, const Problem& problem,
                 Json arguments)
        : dir_(resolve_dir(opts.out_dir)) {
        manifest_ = {{"command", std::move(command)},
                     {"status", "incomplete"},
                     {"config", problem.resolved},
                     {"master_seed", problem.run.master_seed},
                     {"version", AML_VERSION},
                     {"arguments", std::move(arguments)},
                     {"started_at", now_iso8601()},
                     {"outputs", Json::array()}};
        flush();
    }

    void write(const std::string& name, const std::string& text) {
        write_text_file(dir_ / name, text);
        manifest_["outputs"].push_back((dir_ / name).string());
    }

    void complete() {
        manifest_["status"] = "complete";
        manifest_["finished_at"] = now_iso8601();
        flush();
    }

private:
    static fs::path resolve_dir(const std::string& flag) {
        if (!flag.empty()) return flag;
        if (const char* env = std::getenv("AML_OUT_DIR"); env != nullptr && *env != '\0') {
            return env;
        }
        return "aml-out";
    }

    void flush() const { write_text_file(dir_ / "manifest.json", manifest_.dump(2) + "\n"); }

    fs::path dir_;
    Json manifest_;
};

std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

Problem load(const CommonOptions& opts) {
    Json cfg = read_config_file(opts.config);
    for (const auto& o : opts.overrides) apply_override(cfg, o);
    return load_problem(cfg, fs::path(opts.config).parent_path());
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

int cmd_estimate(const CommonOptions& opts, std::ostream& out) {
    const Problem pb = load(opts);
    RunDirectory dir(opts, "estimate", pb, Json::object());
    const SimulatedLikelihood objective = pb.objective();
    const MultiStartResult result = multi_start_estimate(
        objective, pb.model->space(), pb.run, resolve_threads(opts.threads));
    const EstimateReport report = make_estimate_report(pb, result);
    dir.write("result.json", dump(Json(report)));
    std::ostringstream traj;
    write_trajectory_csv(traj, result);
    dir.write("trajectories.csv", traj.str());
    dir.complete();
    out << "theta_aml:";
    for (double v : report.theta_aml) out << ' ' << format_number(v);
    out << '\n';
    return 0;
}

int cmd_bootstrap(const CommonOptions& opts, const std::string& estimate_path, std::size_t B,
                  double level, bool simultaneous, std::ostream& out) {
    const Problem pb = load(opts);
    if (B < 2) throw ConfigError("--replicates", "bootstrap needs at least 2 replicates");
    if (!(level > 0.0 && level < 1.0)) throw ConfigError("--level", "must lie in (0, 1)");

    std::ifstream in(estimate_path);
    if (!in) throw Error("cannot open estimate file " + estimate_path);
    EstimateReport estimate;
    try {
        estimate = Json::parse(in).get<EstimateReport>();
    } catch (const nlohmann::json::exception& e) {
        throw Error("malformed estimate file " + estimate_path + ": " + e.what());
    }
    if (estimate.theta_aml.size() != pb.model->param_dim()) {
        throw Error("estimate file does not match the configured model dimension");
    }

    RunDirectory dir(opts, "bootstrap", pb,
                     {{"estimate", estimate_path},
                      {"replicates", B},
                      {"level", level},
                      {"simultaneous", simultaneous}});
    auto rows = bootstrap_replicates(estimate.theta_aml, *pb.model, pb.run, B,
                                     Stream(pb.run.master_seed), pb.prior.get(),
                                     resolve_threads(opts.threads));
    std::ostringstream csv;
    write_matrix_csv(csv, rows, "replicate");
    const BootstrapResult result = summarize_bootstrap(estimate.theta_aml, std::move(rows), level,
                                                       simultaneous, pb.model->nonnegative());
    dir.write("bootstrap.json", dump(Json(result)));
    dir.write("bootstrap_replicates.csv", csv.str());
    dir.complete();
    for (std::size_t i = 0; i < result.intervals.size(); ++i) {
        out << "theta_" << i + 1 << ": " << format_number(result.theta_hat[i]) << " ["
            << format_number(result.intervals[i].lower) << ", "
            << format_number(result.intervals[i].upper) << "]\n";
    }
    return 0;
}

/// R independent multi-start estimates on the observed data.
std::vector<MultiStartResult> replicate_estimates(const Problem& pb, const RunConfig& run,
                                                  std::size_t R, std::size_t threads) {
    const SimulatedLikelihood objective = pb.objective();
    std::vector<MultiStartResult> results(R);
    const Stream master(run.master_seed);
    parallel_for(R, threads, [&](std::size_t r) {
        results[r] = multi_start_estimate(objective, pb.model->space(), run,
                                          master.child(stream_tag::kReplicate, r), 1);
    });
    return results;
}

Json coordinate_stats(const std::vector<Vector>& rows) {
    const std::size_t p = rows.front().size();
    Vector m(p);
    Vector sd(p);
    for (std::size_t i = 0; i < p; ++i) {
        Vector col(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) col[r] = rows[r][i];
        m[i] = mean(col);
        sd[i] = sample_sd(col);
    }
    Json j = {{"mean", m}};
    // sd is undefined for a single replicate
    j["sd"] = rows.size() > 1 ? Json(sd) : Json(nullptr);
    return j;
}

int cmd_replicate_density(const CommonOptions& opts, std::size_t R, std::ostream& out) {
    const Problem pb = load(opts);
    if (R < 1) throw ConfigError("--replicates", "must be >= 1");
    RunDirectory dir(opts, "replicate-density", pb, {{"replicates", R}});
    const auto results = replicate_estimates(pb, pb.run, R, resolve_threads(opts.threads));

    std::vector<Vector> rows;
    std::ostringstream csv;
    const std::size_t p = pb.model->param_dim();
    csv << "replicate";
    for (std::size_t i = 1; i <= p; ++i) csv << ",theta_" << i;
    csv << ",log_lik\n";
    for (std::size_t r = 0; r < R; ++r) {
        rows.push_back(results[r].theta);
        csv << r;
        for (double v : results[r].theta) csv << ',' << format_number(v);
        csv << ',' << format_number(results[r].final_log_lik[results[r].best_start]) << '\n';
    }
    Json summary = coordinate_stats(rows);
    summary["replicates"] = R;
    summary["reference"] = pb.reference ? Json(*pb.reference) : Json(nullptr);
    dir.write("replicate_density.csv", csv.str());
    dir.write("replicate_density.json", dump(summary));
    dir.complete();
    out << "replicates: " << R << '\n';
    return 0;
}

int cmd_bias_curve(const CommonOptions& opts, std::vector<std::uint64_t> checkpoints,
                   std::size_t R, std::ostream& out) {
    const Problem pb = load(opts);
    if (checkpoints.empty()) checkpoints = pb.checkpoints;
    if (checkpoints.empty()) {
        throw ConfigError("bias_curve.checkpoints", "give --checkpoints or bias_curve.checkpoints");
    }
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        if (checkpoints[c] < 1) throw ConfigError("--checkpoints", "checkpoints start at 1");
        if (c > 0 && checkpoints[c] <= checkpoints[c - 1]) {
            throw ConfigError("--checkpoints", "must be strictly increasing");
        }
    }
    if (checkpoints.back() > pb.run.tuning.K) {
        throw ConfigError("--checkpoints", "checkpoint " + std::to_string(checkpoints.back()) +
                                               " exceeds tuning.K");
    }
    if (!pb.reference) {
        throw ConfigError("bias_curve.reference",
                          "required when the model has no closed-form estimate");
    }
    if (R < 1) throw ConfigError("--replicates", "must be >= 1");

    RunDirectory dir(opts, "bias-curve", pb, {{"replicates", R}, {"checkpoints", checkpoints}});
    RunConfig run = pb.run;
    run.min_iterations = run.tuning.K;  // no early stopping
    const auto results = replicate_estimates(pb, run, R, resolve_threads(opts.threads));

    const std::size_t p = pb.model->param_dim();
    std::ostringstream csv;
    csv << "checkpoint,coordinate,mean,abs_bias,se\n";
    Json rows_json = Json::array();
    for (const std::uint64_t cp : checkpoints) {
        for (std::size_t i = 0; i < p; ++i) {
            Vector col(R);
            for (std::size_t r = 0; r < R; ++r) {
                const RunTrajectory& t = results[r].trajectories[results[r].best_start];
                col[r] = t.iterates.at(cp)[i];
            }
            const double m = mean(col);
            const double bias = std::abs(m - (*pb.reference)[i]);
            const double se = sample_sd(col);
            csv << cp << ',' << i + 1 << ',' << format_number(m) << ',' << format_number(bias)
                << ',' << format_number(se) << '\n';
            rows_json.push_back({{"checkpoint", cp},
                                 {"coordinate", i + 1},
                                 {"mean", m},
                                 {"abs_bias", bias},
                                 {"se", std::isnan(se) ? Json(nullptr) : Json(se)}});
        }
    }
    dir.write("bias_curve.csv", csv.str());
    dir.write("bias_curve.json",
              dump({{"reference", *pb.reference}, {"replicates", R}, {"rows", rows_json}}));
    dir.complete();
    out << "checkpoints: " << checkpoints.size() << ", replicates: " << R << '\n';
    return 0;
}

int cmd_validate(const CommonOptions& opts, std::ostream& out) {
    const Problem pb = load(opts);
    out << pb.resolved.dump(2) << '\n';
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Approximate maximum likelihood estimation for simulation models", "aml"};
    app.require_subcommand(1);
    app.set_version_flag("--version", AML_VERSION);

    CommonOptions opts;
    auto* estimate = app.add_subcommand("estimate", "run multi-start AML estimation");
    add_common(estimate, opts);

    auto* bootstrap = app.add_subcommand("bootstrap", "parametric bootstrap around an estimate");
    add_common(bootstrap, opts);
    std::string estimate_path;
    std::size_t B = 100;
    double level = 0.95;
    bool simultaneous = false;
    bootstrap->add_option("--estimate", estimate_path, "result.json from `aml estimate`")
        ->required();
    bootstrap->add_option("--replicates,-B", B, "bootstrap replicates");
    bootstrap->add_option("--level", level, "confidence level");
    bootstrap->add_flag("--simultaneous", simultaneous, "Bonferroni simultaneous intervals");

    auto* density = app.add_subcommand("replicate-density",
                                       "independent AML estimates on the same observed data");
    add_common(density, opts);
    std::size_t R = 10;
    density->add_option("--replicates,-R", R, "number of replicate estimates");

    auto* bias = app.add_subcommand("bias-curve", "bias and standard error versus iteration");
    add_common(bias, opts);
    std::vector<std::uint64_t> checkpoints;
    std::size_t R_bias = 10;
    bias->add_option("--checkpoints", checkpoints, "iteration checkpoints")->delimiter(',');
    bias->add_option("--replicates,-R", R_bias, "number of replicate runs");

    auto* validate = app.add_subcommand("validate-config", "check and print the resolved config");
    add_common(validate, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*estimate) return cmd_estimate(opts, out);
        if (*bootstrap) return cmd_bootstrap(opts, estimate_path, B, level, simultaneous, out);
        if (*density) return cmd_replicate_density(opts, R, out);
        if (*bias) return cmd_bias_curve(opts, checkpoints, R_bias, out);
        if (*validate) return cmd_validate(opts, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace aml
