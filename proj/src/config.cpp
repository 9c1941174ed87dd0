#include "aml/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "aml/error.hpp"

namespace aml {

namespace {

/// Typed access to one config section with field-level error messages and
/// rejection of unknown keys.
class Section {
public:
    Section(const Json& root, std::string path) : path_(std::move(path)) {
        if (root.is_null()) {
            node_ = Json::object();
        } else if (!root.is_object()) {
            throw ConfigError(path_, "must be an object");
        } else {
            node_ = root;
        }
    }

    [[nodiscard]] bool has(const std::string& key) const { return node_.contains(key); }
    [[nodiscard]] std::string field(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    Json sub(const std::string& key) {
        seen_.insert(key);
        return node_.contains(key) ? node_.at(key) : Json();
    }

    template <typename T>
    T get(const std::string& key, T fallback) {
        seen_.insert(key);
        if (!node_.contains(key)) return fallback;
        return as<T>(key);
    }

    template <typename T>
    T require(const std::string& key) {
        seen_.insert(key);
        if (!node_.contains(key)) throw ConfigError(field(key), "required field is missing");
        return as<T>(key);
    }

    /// A number or an array of numbers; a number broadcasts to `dim`.
    Vector vector(const std::string& key, std::size_t dim, const Vector& fallback) {
        seen_.insert(key);
        if (!node_.contains(key)) return fallback;
        const Json& v = node_.at(key);
        if (v.is_number()) return Vector(dim, v.get<double>());
        Vector out = as<Vector>(key);
        if (dim != 0 && out.size() != dim) {
            throw ConfigError(field(key), "expected " + std::to_string(dim) + " entries, got " +
                                              std::to_string(out.size()));
        }
        return out;
    }

    void finish() const {
        for (const auto& [key, _] : node_.items()) {
            if (!seen_.count(key)) throw ConfigError(field(key), "unknown field");
        }
    }

private:
    template <typename T>
    T as(const std::string& key) const {
        const Json& v = node_.at(key);
        try {
            if constexpr (std::is_same_v<T, std::uint64_t> || std::is_same_v<T, std::size_t>) {
                if (!v.is_number_integer() || v.get<long long>() < 0) {
                    throw ConfigError(field(key), "must be a nonnegative integer");
                }
            }
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw ConfigError(field(key), "must be a number");
            }
            return v.get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(field(key), std::string("wrong type: ") + e.what());
        }
    }

    Json node_;
    std::string path_;
    std::set<std::string> seen_;
};

std::unique_ptr<SimulatorModel> build_model(Section& s, Json& resolved) {
    const auto kind = s.require<std::string>("kind");
    resolved["kind"] = kind;
    auto space_of = [&](std::size_t dim, const Vector& lo, const Vector& hi) {
        const Vector lower = s.vector("lower", dim, lo);
        const Vector upper = s.vector("upper", dim, hi);
        resolved["lower"] = lower;
        resolved["upper"] = upper;
        try {
            return ParameterSpace(lower, upper);
        } catch (const Error& e) {
            throw ConfigError(s.field("lower"), e.what());
        }
    };
    if (kind == "normal") {
        const auto dim = s.get<std::size_t>("dim", 10);
        if (dim < 1) throw ConfigError(s.field("dim"), "must be >= 1");
        const auto sample_size = s.get<std::size_t>("sample_size", 1);
        if (sample_size < 1) throw ConfigError(s.field("sample_size"), "must be >= 1");
        const auto summaries = s.get<std::string>("summaries", "plain");
        NormalSummaries set;
        if (summaries == "plain") {
            set = NormalSummaries::Plain;
        } else if (summaries == "transformed") {
            set = NormalSummaries::Transformed;
            if (dim != 10) throw ConfigError(s.field("summaries"), "transformed needs dim = 10");
        } else {
            throw ConfigError(s.field("summaries"), "must be \"plain\" or \"transformed\"");
        }
        resolved["dim"] = dim;
        resolved["sample_size"] = sample_size;
        resolved["summaries"] = summaries;
        auto space = space_of(dim, Vector(dim, -100.0), Vector(dim, 100.0));
        s.finish();
        return std::make_unique<NormalModel>(std::move(space), sample_size, set);
    }
    if (kind == "mg1") {
        const auto customers = s.get<std::size_t>("customers", 100);
        if (customers < 4) throw ConfigError(s.field("customers"), "must be >= 4");
        resolved["customers"] = customers;
        auto space = space_of(3, {0.0, 0.0, 0.05}, {10.0, 10.0, 10.0});
        if (space.lower()[0] < 0.0 || space.lower()[1] < 0.0 || space.lower()[2] < 0.0) {
            throw ConfigError(s.field("lower"), "mg1 parameters are nonnegative");
        }
        s.finish();
        return std::make_unique<Mg1Model>(std::move(space), customers);
    }
    throw ConfigError(s.field("kind"), "unknown model kind \"" + kind + "\"");
}

RunConfig build_run(Section& run, Section& tuning, Section& kde, Json& resolved) {
    RunConfig rc;
    rc.n = run.get<std::size_t>("n", rc.n);
    rc.n_start_candidates = run.get<std::size_t>("n_start_candidates", rc.n_start_candidates);
    rc.n_starts = run.get<std::size_t>("n_starts", rc.n_starts);
    const auto mode = run.get<std::string>("mode", "ML");
    if (mode == "ML") {
        rc.mode = Mode::ML;
    } else if (mode == "MAP") {
        rc.mode = Mode::MAP;
    } else {
        throw ConfigError(run.field("mode"), "must be \"ML\" or \"MAP\"");
    }
    rc.master_seed = run.get<std::uint64_t>("master_seed", rc.master_seed);
    rc.min_iterations = run.get<std::uint64_t>("min_iterations", rc.min_iterations);
    run.finish();

    TuningConfig& t = rc.tuning;
    t.K = tuning.get<std::uint64_t>("K", t.K);
    t.K0 = tuning.get<std::uint64_t>("K0", std::min<std::uint64_t>(1000, t.K));
    t.b = tuning.vector("b", 0, t.b);
    t.c_fraction = tuning.get<double>("c_fraction", t.c_fraction);
    t.f = tuning.get<double>("f", t.f);
    t.n1 = tuning.get<std::size_t>("n1", t.n1);
    t.n2 = tuning.get<std::size_t>("n2", rc.n);
    t.alpha_trend = tuning.get<double>("alpha_trend", t.alpha_trend);
    t.alpha_conv = tuning.get<double>("alpha_conv", t.alpha_conv);
    t.range_span_threshold = tuning.get<double>("range_span_threshold", t.range_span_threshold);
    t.alpha = tuning.get<double>("alpha", t.alpha);
    t.gamma = tuning.get<double>("gamma", t.gamma);
    tuning.finish();

    rc.kde.smoothing_window = kde.get<std::size_t>("smoothing_window", rc.kde.smoothing_window);
    rc.kde.zero_threshold = kde.get<double>("zero_threshold", rc.kde.zero_threshold);
    kde.finish();

    rc.validate();

    resolved["run"] = {{"n", rc.n},
                       {"n_start_candidates", rc.n_start_candidates},
                       {"n_starts", rc.n_starts},
                       {"mode", mode},
                       {"master_seed", rc.master_seed},
                       {"min_iterations", rc.min_iterations}};
    resolved["tuning"] = {{"K", t.K},
                          {"K0", t.K0},
                          {"b", t.b},
                          {"c_fraction", t.c_fraction},
                          {"f", t.f},
                          {"n1", t.n1},
                          {"n2", t.n2},
                          {"alpha_trend", t.alpha_trend},
                          {"alpha_conv", t.alpha_conv},
                          {"range_span_threshold", t.range_span_threshold},
                          {"alpha", t.alpha},
                          {"gamma", t.gamma}};
    resolved["kde"] = {{"smoothing_window", rc.kde.smoothing_window},
                       {"zero_threshold", rc.kde.zero_threshold}};
    return rc;
}

Json parse_value(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception&) {
        return Json(text);
    }
}

}  // namespace

Json read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("--config", std::string("malformed JSON: ") + e.what());
    }
}

void apply_override(Json& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("--override", "expected key=value, got \"" + assignment + "\"");
    }
    const std::string key = assignment.substr(0, eq);
    const Json value = parse_value(assignment.substr(eq + 1));
    if (!config.is_object()) throw ConfigError("--override", "config root is not an object");

    std::vector<std::string> path;
    if (key.find('.') == std::string::npos) {
        static const std::map<std::string, std::string> kSection = {
            {"n", "run"},           {"n_start_candidates", "run"}, {"n_starts", "run"},
            {"mode", "run"},        {"master_seed", "run"},        {"min_iterations", "run"},
            {"K", "tuning"},        {"K0", "tuning"},              {"b", "tuning"},
            {"c_fraction", "tuning"}, {"f", "tuning"},             {"n1", "tuning"},
            {"n2", "tuning"},       {"alpha_trend", "tuning"},     {"alpha_conv", "tuning"},
            {"range_span_threshold", "tuning"}, {"alpha", "tuning"}, {"gamma", "tuning"},
            {"smoothing_window", "kde"}, {"zero_threshold", "kde"}};
        const auto it = kSection.find(key);
        if (it == kSection.end()) throw ConfigError(key, "unknown override key");
        path = {it->second, key};
    } else {
        std::stringstream ss(key);
        std::string part;
        while (std::getline(ss, part, '.')) path.push_back(part);
    }
    Json* node = &config;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        if (!node->contains(path[i])) (*node)[path[i]] = Json::object();
        node = &(*node)[path[i]];
        if (!node->is_object()) throw ConfigError(key, "cannot descend into a non-object");
    }
    (*node)[path.back()] = value;
}

Problem load_problem(const Json& config, const std::filesystem::path& base_dir) {
    Section root(config, "");
    Problem pb;
    Json& resolved = pb.resolved;
    resolved = Json::object();

    Section model_sec(root.sub("model"), "model");
    if (!root.has("model")) throw ConfigError("model.kind", "required field is missing");
    Json model_resolved = Json::object();
    pb.model = build_model(model_sec, model_resolved);
    resolved["model"] = model_resolved;

    Section run_sec(root.sub("run"), "run");
    Section tuning_sec(root.sub("tuning"), "tuning");
    Section kde_sec(root.sub("kde"), "kde");
    pb.run = build_run(run_sec, tuning_sec, kde_sec, resolved);
    const std::size_t p = pb.model->param_dim();
    if (pb.run.tuning.b.size() != 1 && pb.run.tuning.b.size() != p) {
        throw ConfigError("tuning.b", "needs 1 or " + std::to_string(p) + " entries");
    }

    // observed data
    if (!root.has("observed")) throw ConfigError("observed", "required section is missing");
    Section obs(root.sub("observed"), "observed");
    const int sources = obs.has("simulate") + obs.has("csv") + obs.has("summary");
    if (sources != 1) {
        throw ConfigError("observed", "give exactly one of simulate, csv, summary");
    }
    Json obs_resolved = Json::object();
    if (obs.has("simulate")) {
        Section sim(obs.sub("simulate"), "observed.simulate");
        const Vector theta = sim.vector("theta", p, {});
        if (theta.empty()) throw ConfigError("observed.simulate.theta", "required field is missing");
        const auto seed = sim.require<std::uint64_t>("seed");
        sim.finish();
        try {
            Stream rng = Stream(seed).child(stream_tag::kObserved);
            pb.observed_data = pb.model->simulate(theta, rng);
        } catch (const Error& e) {
            throw ConfigError("observed.simulate.theta", e.what());
        }
        obs_resolved["simulate"] = {{"theta", theta}, {"seed", seed}};
    } else if (obs.has("csv")) {
        std::filesystem::path path = obs.require<std::string>("csv");
        if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
        try {
            pb.observed_data = pb.model->read_csv(path);
        } catch (const Error& e) {
            throw ConfigError("observed.csv", e.what());
        }
        obs_resolved["csv"] = path.string();
    } else {
        pb.observed_summary = obs.vector("summary", pb.model->summary_dim(), {});
        obs_resolved["summary"] = pb.observed_summary;
    }
    obs.finish();
    if (pb.observed_data) {
        try {
            pb.observed_summary = pb.model->summarize(*pb.observed_data);
        } catch (const Error& e) {
            throw ConfigError("observed", e.what());
        }
    }
    resolved["observed"] = obs_resolved;

    // prior
    Section prior_sec(root.sub("prior"), "prior");
    const auto prior_kind = prior_sec.get<std::string>("kind", "uniform");
    Json prior_resolved = {{"kind", prior_kind}};
    std::unique_ptr<Prior> prior;
    if (prior_kind == "uniform") {
        prior = prior_uniform(pb.model->space());
    } else if (prior_kind == "normal") {
        const Vector m = prior_sec.vector("mean", p, {});
        const Vector sd = prior_sec.vector("sd", p, {});
        if (m.empty()) throw ConfigError("prior.mean", "required field is missing");
        if (sd.empty()) throw ConfigError("prior.sd", "required field is missing");
        for (double v : sd) {
            if (!(v > 0.0)) throw ConfigError("prior.sd", "must be positive");
        }
        prior = std::make_unique<NormalPrior>(m, sd);
        prior_resolved["mean"] = m;
        prior_resolved["sd"] = sd;
    } else {
        throw ConfigError("prior.kind", "must be \"uniform\" or \"normal\"");
    }
    prior_sec.finish();
    if (pb.run.mode == Mode::MAP) pb.prior = std::move(prior);
    resolved["prior"] = prior_resolved;

    // bias-curve settings
    Section bc(root.sub("bias_curve"), "bias_curve");
    Json bc_resolved = Json::object();
    if (bc.has("reference")) {
        pb.reference = bc.vector("reference", p, {});
        bc_resolved["reference"] = *pb.reference;
    } else if (pb.observed_data) {
        pb.reference = pb.model->analytic_estimate(*pb.observed_data);
    }
    if (bc.has("checkpoints")) {
        pb.checkpoints = bc.get<std::vector<std::uint64_t>>("checkpoints", {});
        bc_resolved["checkpoints"] = pb.checkpoints;
    }
    bc.finish();
    if (!bc_resolved.empty()) resolved["bias_curve"] = bc_resolved;

    root.finish();
    return pb;
}

}  // namespace aml
