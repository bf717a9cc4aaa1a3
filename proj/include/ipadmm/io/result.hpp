#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ipadmm/core/linear_map.hpp"
#include "ipadmm/io/config.hpp"

namespace ipadmm {

inline constexpr int kResultSchemaVersion = 1;

struct CertificateSummary {
    std::string name;
    bool passed = false;
    double worst = 0;         // worst slack or violation
    int first_failure = -1;   // iteration index, -1 when none
    std::string detail;

    bool operator==(const CertificateSummary&) const = default;
};

/// One solver run: status, counts, η metrics, objectives, certificates and the config echo.
/// NaN marks a quantity the instance class does not define; it serializes as null.
struct ResultRecord {
    int schema_version = kResultSchemaVersion;
    std::string command = "solve";
    std::string status;  // converged | max_iter | error | certified | certificate_failure
    std::string instance, kind, solver;
    int iterations = 0;
    double wall_ms = 0;
    double eta_max = std::numeric_limits<double>::quiet_NaN();
    double eta_gap = std::numeric_limits<double>::quiet_NaN();
    double primal_obj = std::numeric_limits<double>::quiet_NaN();
    double dual_obj = std::numeric_limits<double>::quiet_NaN();
    double kkt_residual = std::numeric_limits<double>::quiet_NaN();
    double sigma_final = 0;
    int sigma_changes = 0;
    std::vector<CertificateSummary> certificates;
    nlohmann::json config;
    std::vector<double> x, y, z;  // best iterate
    std::string message;

    bool operator==(const ResultRecord& o) const {
        auto same = [](double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; };
        return schema_version == o.schema_version && command == o.command && status == o.status &&
               instance == o.instance && kind == o.kind && solver == o.solver && iterations == o.iterations &&
               same(wall_ms, o.wall_ms) && same(eta_max, o.eta_max) && same(eta_gap, o.eta_gap) &&
               same(primal_obj, o.primal_obj) && same(dual_obj, o.dual_obj) && same(kkt_residual, o.kkt_residual) &&
               sigma_final == o.sigma_final && sigma_changes == o.sigma_changes && certificates == o.certificates &&
               config == o.config && x == o.x && y == o.y && z == o.z && message == o.message;
    }
};

namespace detail {

inline nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

inline double num(const nlohmann::json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace detail

inline nlohmann::json config_json(const RunConfig& c) {
    return {{"solver", solver_name(c.solver)}, {"tau", c.tau},           {"sigma", c.sigma},
            {"tol", c.stop_tol},               {"max_iter", c.max_iter}, {"schedule", c.schedule},
            {"eps0", c.eps0},                  {"eps_rate", c.eps_rate}, {"adaptive_sigma", c.adaptive_sigma},
            {"input", c.input},                {"format", c.format},     {"generator", c.generator},
            {"seed", c.seed}};
}

inline nlohmann::json to_json(const ResultRecord& r) {
    using detail::num;
    nlohmann::json certs = nlohmann::json::array();
    for (const auto& c : r.certificates)
        certs.push_back({{"name", c.name}, {"passed", c.passed}, {"worst", num(c.worst)},
                         {"first_failure", c.first_failure}, {"detail", c.detail}});
    return {{"schema_version", r.schema_version},
            {"command", r.command},
            {"status", r.status},
            {"instance", r.instance},
            {"kind", r.kind},
            {"solver", r.solver},
            {"iterations", r.iterations},
            {"wall_ms", num(r.wall_ms)},
            {"eta_max", num(r.eta_max)},
            {"eta_gap", num(r.eta_gap)},
            {"primal_obj", num(r.primal_obj)},
            {"dual_obj", num(r.dual_obj)},
            {"kkt_residual", num(r.kkt_residual)},
            {"sigma_final", r.sigma_final},
            {"sigma_changes", r.sigma_changes},
            {"certificates", certs},
            {"config", r.config},
            {"solution", {{"x", r.x}, {"y", r.y}, {"z", r.z}}},
            {"message", r.message}};
}

inline ResultRecord result_from_json(const nlohmann::json& j) {
    using detail::num;
    ResultRecord r;
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kResultSchemaVersion) throw InvalidInput("unsupported result schema_version");
    r.command = j.at("command").get<std::string>();
    r.status = j.at("status").get<std::string>();
    r.instance = j.at("instance").get<std::string>();
    r.kind = j.at("kind").get<std::string>();
    r.solver = j.at("solver").get<std::string>();
    r.iterations = j.at("iterations").get<int>();
    r.wall_ms = num(j.at("wall_ms"));
    r.eta_max = num(j.at("eta_max"));
    r.eta_gap = num(j.at("eta_gap"));
    r.primal_obj = num(j.at("primal_obj"));
    r.dual_obj = num(j.at("dual_obj"));
    r.kkt_residual = num(j.at("kkt_residual"));
    r.sigma_final = j.at("sigma_final").get<double>();
    r.sigma_changes = j.at("sigma_changes").get<int>();
    for (const auto& c : j.at("certificates"))
        r.certificates.push_back({c.at("name").get<std::string>(), c.at("passed").get<bool>(), num(c.at("worst")),
                                  c.at("first_failure").get<int>(), c.at("detail").get<std::string>()});
    r.config = j.at("config");
    const auto& s = j.at("solution");
    r.x = s.at("x").get<std::vector<double>>();
    r.y = s.at("y").get<std::vector<double>>();
    r.z = s.at("z").get<std::vector<double>>();
    r.message = j.at("message").get<std::string>();
    return r;
}

inline std::vector<double> to_std(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

/// Per-iteration row of the CSV trace. NaN cells are written empty.
struct TraceRow {
    int k = 0;
    double eta_max = 0, eta_gap = 0, sigma = 0, tau = 0, step_norm = 0, residual = 0, feasibility = 0;
    double delta_norm = 0, delta_tilde_norm = 0, gamma_norm = 0, d_norm = 0, eps = 0;
};

inline const char* trace_header() {
    return "k,eta_max,eta_gap,sigma,tau,step_norm,residual,feasibility,delta_norm,delta_tilde_norm,gamma_norm,d_norm,eps";
}

inline void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
    char buf[64];
    auto cell = [&](double v) -> std::string {
        if (std::isnan(v)) return "";
        std::snprintf(buf, sizeof buf, "%.10g", v);
        return buf;
    };
    out << trace_header() << '\n';
    for (const auto& r : rows)
        out << r.k << ',' << cell(r.eta_max) << ',' << cell(r.eta_gap) << ',' << cell(r.sigma) << ',' << cell(r.tau) << ','
            << cell(r.step_norm) << ',' << cell(r.residual) << ',' << cell(r.feasibility) << ',' << cell(r.delta_norm)
            << ',' << cell(r.delta_tilde_norm) << ',' << cell(r.gamma_norm) << ',' << cell(r.d_norm) << ','
            << cell(r.eps) << '\n';
}

}  // namespace ipadmm
