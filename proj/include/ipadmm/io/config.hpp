#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ipadmm/core/errors.hpp"
#include "ipadmm/ipalm/schedule.hpp"

namespace ipadmm {

enum class SolverKind { ipalm, sgs_ipadmm, classic_admm, directly_extended };

inline std::string solver_name(SolverKind s) {
    switch (s) {
        case SolverKind::ipalm: return "ipalm";
        case SolverKind::sgs_ipadmm: return "sgs-ipadmm";
        case SolverKind::classic_admm: return "classic-admm";
        case SolverKind::directly_extended: return "directly-extended";
    }
    return "?";
}

inline SolverKind parse_solver(const std::string& s) {
    for (auto k : {SolverKind::ipalm, SolverKind::sgs_ipadmm, SolverKind::classic_admm, SolverKind::directly_extended})
        if (solver_name(k) == s) return k;
    throw InvalidInput("unknown solver '" + s + "' (ipalm, sgs-ipadmm, classic-admm, directly-extended)");
}

/// `kind[:key=value,...]`, e.g. `sdp:n=10,m=20` or `multiblock:dims=4x3x2,nx=6,nz=3`.
struct GeneratorSpec {
    std::string kind;
    std::map<std::string, std::string> params;

    static GeneratorSpec parse(const std::string& text) {
        GeneratorSpec g;
        auto colon = text.find(':');
        g.kind = text.substr(0, colon);
        if (g.kind.empty()) throw InvalidInput("empty generator spec");
        if (colon == std::string::npos) return g;
        std::string rest = text.substr(colon + 1);
        size_t i = 0;
        while (i <= rest.size()) {
            size_t j = rest.find(',', i);
            if (j == std::string::npos) j = rest.size();
            std::string kv = rest.substr(i, j - i);
            if (!kv.empty()) {
                auto eq = kv.find('=');
                if (eq == std::string::npos || eq == 0) throw InvalidInput("generator parameter '" + kv + "' needs key=value");
                g.params[kv.substr(0, eq)] = kv.substr(eq + 1);
            }
            i = j + 1;
        }
        return g;
    }

    std::string str() const {
        std::string s = kind;
        char sep = ':';
        for (const auto& [k, v] : params) {
            s += sep + k + "=" + v;
            sep = ',';
        }
        return s;
    }

    int get_int(const std::string& key, int def) const {
        auto it = params.find(key);
        if (it == params.end()) return def;
        try {
            size_t pos = 0;
            int v = std::stoi(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument(key);
            return v;
        } catch (const std::exception&) {
            throw InvalidInput("generator parameter " + key + " is not an integer");
        }
    }

    std::vector<int> get_dims(const std::string& key, std::vector<int> def) const {
        auto it = params.find(key);
        if (it == params.end()) return def;
        std::vector<int> out;
        size_t i = 0;
        const std::string& s = it->second;
        while (i <= s.size()) {
            size_t j = s.find('x', i);
            if (j == std::string::npos) j = s.size();
            try {
                out.push_back(std::stoi(s.substr(i, j - i)));
            } catch (const std::exception&) {
                throw InvalidInput("generator parameter " + key + " must look like 4x3x2");
            }
            i = j + 1;
        }
        return out;
    }
};

struct RunConfig {
    SolverKind solver = SolverKind::sgs_ipadmm;
    double tau = 1.618;
    double sigma = 1.0;
    double stop_tol = 1e-6;
    int max_iter = 10000;
    std::string schedule = "exact";  // exact | geometric | polynomial
    double eps0 = 1e-2;
    double eps_rate = 0.95;
    bool adaptive_sigma = false;

    std::string input;                       // instance file
    std::string format = "auto";             // auto | sdpa | native
    std::string generator;                   // generator spec, used when input is empty
    std::uint64_t seed = 1;

    std::string output;     // result record; empty = stdout
    std::string trace;      // per-iteration CSV
    bool timing = true;     // wall-clock fields in records and tables

    void validate() const {
        if (!(tau > 0.0 && tau < 2.0)) throw InvalidInput("tau must lie in (0, 2)");
        if (!(sigma > 0.0)) throw InvalidInput("sigma must be positive");
        if (!(stop_tol > 0.0)) throw InvalidInput("tol must be positive");
        if (max_iter < 0) throw InvalidInput("max-iter must be nonnegative");
        if (schedule != "exact" && schedule != "geometric" && schedule != "polynomial")
            throw InvalidInput("schedule must be exact, geometric or polynomial");
        if (format != "auto" && format != "sdpa" && format != "native")
            throw InvalidInput("format must be sdpa or native");
        if (input.empty() && generator.empty()) throw InvalidInput("no instance: give a file or --gen");
        if (schedule != "exact") eps_schedule(1.0);
    }

    /// alpha scales the polynomial family.
    EpsSchedule eps_schedule(double alpha) const {
        if (schedule == "geometric") return EpsSchedule::geometric(eps0, eps_rate);
        if (schedule == "polynomial") return EpsSchedule::polynomial(alpha);
        return EpsSchedule::exact();
    }
};

}  // namespace ipadmm
