#pragma once

#include <cmath>
#include <string>

#include "ipadmm/core/errors.hpp"

namespace ipadmm {

/// Riemann zeta for s > 1 by direct summation with an Euler-Maclaurin tail.
inline double riemann_zeta(double s) {
    if (!(s > 1.0)) throw InvalidInput("zeta needs s > 1");
    const int N = 64;
    double sum = 0.0;
    for (int n = 1; n < N; ++n) sum += std::pow(double(n), -s);
    const double Nd = N;
    sum += std::pow(Nd, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(Nd, -s) + s / 12.0 * std::pow(Nd, -s - 1.0) -
           s * (s + 1.0) * (s + 2.0) / 720.0 * std::pow(Nd, -s - 3.0);
    return sum;
}

/// Summable tolerance sequences: eps_k = 0, eps0 * gamma^k, or 1 / (alpha (k+1)^power).
struct EpsSchedule {
    enum class Kind { exact, geometric, polynomial };
    Kind kind = Kind::exact;
    double eps0 = 1.0;
    double gamma = 0.5;
    double alpha = 1.0;
    double power = 1.2;

    static EpsSchedule exact() { return {}; }
    static EpsSchedule geometric(double eps0, double gamma) {
        if (!(gamma > 0.0 && gamma < 1.0) || !(eps0 >= 0.0)) throw InvalidInput("geometric schedule needs 0<gamma<1");
        EpsSchedule s;
        s.kind = Kind::geometric;
        s.eps0 = eps0;
        s.gamma = gamma;
        return s;
    }
    static EpsSchedule polynomial(double alpha, double power = 1.2) {
        if (!(alpha > 0.0) || !(power > 1.0)) throw InvalidInput("polynomial schedule needs alpha>0, power>1");
        EpsSchedule s;
        s.kind = Kind::polynomial;
        s.alpha = alpha;
        s.power = power;
        return s;
    }

    double at(int k) const {
        switch (kind) {
            case Kind::exact: return 0.0;
            case Kind::geometric: return eps0 * std::pow(gamma, k);
            case Kind::polynomial: return 1.0 / (alpha * std::pow(double(k + 1), power));
        }
        return 0.0;
    }
    /// sum over k >= 0
    double sum() const {
        switch (kind) {
            case Kind::exact: return 0.0;
            case Kind::geometric: return eps0 / (1.0 - gamma);
            case Kind::polynomial: return riemann_zeta(power) / alpha;
        }
        return 0.0;
    }
    /// sum over k >= 1 of eps_k^2
    double sum_sq_from1() const {
        switch (kind) {
            case Kind::exact: return 0.0;
            case Kind::geometric: return eps0 * eps0 * gamma * gamma / (1.0 - gamma * gamma);
            case Kind::polynomial: return (riemann_zeta(2.0 * power) - 1.0) / (alpha * alpha);
        }
        return 0.0;
    }
    std::string describe() const {
        switch (kind) {
            case Kind::exact: return "exact";
            case Kind::geometric: return "geometric(" + std::to_string(eps0) + "," + std::to_string(gamma) + ")";
            case Kind::polynomial: return "polynomial(" + std::to_string(alpha) + "," + std::to_string(power) + ")";
        }
        return "?";
    }
};

inline void check_tau(double tau) {
    if (!(tau > 0.0 && tau < 2.0)) throw InvalidInput("step-length tau must lie in (0,2), got " + std::to_string(tau));
}

}  // namespace ipadmm
