#pragma once

#include <algorithm>
#include <limits>
#include <random>

#include "ipadmm/model/problem.hpp"

namespace ipadmm {

struct MajorizationReport {
    double worst_majorization_slack = std::numeric_limits<double>::infinity();
    double worst_gradient_slack = std::numeric_limits<double>::infinity();
    bool passed = false;
};

/// Samples (y, y', y'') and checks
///   f̂(y, y') - f(y) >= 0   and   <∇f(y) - ∇f(y'), y'' - y'> + 1/4 |y - y''|^2_Σ̂ >= 0.
/// Slacks are normalized by 1 + the magnitudes involved.
inline MajorizationReport check_majorization(const SmoothFn& f, int n_samples, unsigned seed, double scale = 1.0) {
    if (n_samples < 1) throw InvalidInput("check_majorization needs at least one sample");
    std::mt19937 gen(seed);
    std::normal_distribution<double> nd(0.0, scale);
    const int n = f.dim();
    auto draw = [&] {
        Vec v(n);
        for (auto& x : v) x = nd(gen);
        return v;
    };
    MapPtr sig = f.sigma_hat();
    MajorizationReport rep;
    for (int t = 0; t < n_samples; ++t) {
        Vec y = draw(), y1 = draw(), y2 = draw();
        double fy = f.value(y);
        double maj = f.majorized(y, y1);
        double s1 = (maj - fy) / (1.0 + std::abs(fy) + std::abs(maj));
        Vec dy = y - y2;
        double lhs = (f.gradient(y) - f.gradient(y1)).dot(y2 - y1);
        double quart = 0.25 * dy.dot(sig->apply(dy));
        double s2 = (lhs + quart) / (1.0 + std::abs(lhs) + std::abs(quart));
        rep.worst_majorization_slack = std::min(rep.worst_majorization_slack, s1);
        rep.worst_gradient_slack = std::min(rep.worst_gradient_slack, s2);
    }
    rep.passed = rep.worst_majorization_slack >= -1e-10 && rep.worst_gradient_slack >= -1e-10;
    return rep;
}

inline MajorizationReport check_majorization(const MultiBlockProblem& P, int n_samples, unsigned seed) {
    return check_majorization(*P.f, n_samples, seed);
}

}  // namespace ipadmm
