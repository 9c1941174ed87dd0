#include "aml/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "aml/error.hpp"

namespace aml {

EstimateReport make_estimate_report(const Problem& problem, const MultiStartResult& result) {
    EstimateReport r;
    r.model = problem.model->kind();
    r.theta_aml = result.theta;
    r.best_start = result.best_start;
    r.observed_summary = problem.observed_summary;
    for (std::size_t j = 0; j < result.trajectories.size(); ++j) {
        const RunTrajectory& t = result.trajectories[j];
        StartSummary s;
        s.start = result.starts[j];
        s.final_theta = t.final_theta;
        s.final_log_lik = result.final_log_lik[j];
        s.iterations = t.iterations();
        s.converged_at = t.converged_at;
        s.diagnostic_rounds = t.diagnostics.size();
        s.initial_a = t.initial_schedule.a;
        s.final_a = t.final_schedule.a;
        s.c = t.initial_schedule.c;
        s.A = t.initial_schedule.A;
        r.starts.push_back(std::move(s));
    }
    return r;
}

void to_json(Json& j, const StartSummary& s) {
    j = Json{{"start", s.start},
             {"final_theta", s.final_theta},
             {"final_log_lik", s.final_log_lik},
             {"iterations", s.iterations},
             {"converged_at", s.converged_at ? Json(*s.converged_at) : Json(nullptr)},
             {"diagnostic_rounds", s.diagnostic_rounds},
             {"initial_a", s.initial_a},
             {"final_a", s.final_a},
             {"c", s.c},
             {"A", s.A}};
}

void from_json(const Json& j, StartSummary& s) {
    j.at("start").get_to(s.start);
    j.at("final_theta").get_to(s.final_theta);
    j.at("final_log_lik").get_to(s.final_log_lik);
    j.at("iterations").get_to(s.iterations);
    if (j.at("converged_at").is_null()) {
        s.converged_at.reset();
    } else {
        s.converged_at = j.at("converged_at").get<std::uint64_t>();
    }
    j.at("diagnostic_rounds").get_to(s.diagnostic_rounds);
    j.at("initial_a").get_to(s.initial_a);
    j.at("final_a").get_to(s.final_a);
    j.at("c").get_to(s.c);
    j.at("A").get_to(s.A);
}

void to_json(Json& j, const EstimateReport& r) {
    j = Json{{"model", r.model},
             {"theta_aml", r.theta_aml},
             {"best_start", r.best_start},
             {"observed_summary", r.observed_summary},
             {"starts", r.starts}};
}

void from_json(const Json& j, EstimateReport& r) {
    j.at("model").get_to(r.model);
    j.at("theta_aml").get_to(r.theta_aml);
    j.at("best_start").get_to(r.best_start);
    j.at("observed_summary").get_to(r.observed_summary);
    j.at("starts").get_to(r.starts);
}

void to_json(Json& j, const Interval& ci) {
    j = Json{{"lower", ci.lower},
             {"upper", ci.upper},
             {"raw_lower", ci.raw_lower},
             {"raw_upper", ci.raw_upper},
             {"shifted", ci.shifted}};
}

void to_json(Json& j, const BootstrapResult& r) {
    j = Json{{"B", r.replicates.size()},
             {"theta_hat", r.theta_hat},
             {"bias_corrected", r.bias_corrected},
             {"se", r.se},
             {"level", r.level},
             {"simultaneous", r.simultaneous},
             {"intervals", r.intervals}};
}

std::string format_number(double v) {
    if (std::isnan(v)) return "NaN";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_trajectory_csv(std::ostream& out, const MultiStartResult& result) {
    if (result.trajectories.empty()) return;
    const std::size_t p = result.trajectories.front().final_theta.size();
    out << "start,iteration";
    for (std::size_t i = 1; i <= p; ++i) out << ",theta_" << i;
    out << ",c_k";
    for (std::size_t i = 1; i <= p; ++i) out << ",a_" << i;
    out << ",event\n";
    for (std::size_t j = 0; j < result.trajectories.size(); ++j) {
        const RunTrajectory& t = result.trajectories[j];
        std::map<std::uint64_t, std::string> events;
        for (const auto& e : t.events) {
            auto& slot = events[e.iteration];
            slot += slot.empty() ? e.what : ";" + e.what;
        }
        for (std::size_t k = 0; k < t.iterates.size(); ++k) {
            out << j << ',' << k;
            for (double v : t.iterates[k]) out << ',' << format_number(v);
            if (k == 0) {
                out << ',';
                for (std::size_t i = 0; i < p; ++i) out << ',';
            } else {
                out << ',' << format_number(t.c_k[k - 1]);
                for (double v : t.a_k[k - 1]) out << ',' << format_number(v);
            }
            const auto e = events.find(k);
            out << ',' << (e == events.end() ? "" : e->second) << '\n';
        }
    }
}

void write_matrix_csv(std::ostream& out, const std::vector<Vector>& rows,
                      const std::string& index_name, const std::string& prefix) {
    const std::size_t p = rows.empty() ? 0 : rows.front().size();
    out << index_name;
    for (std::size_t i = 1; i <= p; ++i) out << ',' << prefix << i;
    out << '\n';
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out << r;
        for (double v : rows[r]) out << ',' << format_number(v);
        out << '\n';
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed for " + path.string());
}

}  // namespace aml
