#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "ipadmm/ipalm/ipalm.hpp"

namespace ipadmm {

/// Ξ = τσ(1/2 Σ̂ + S + (2-τ)σ/6 AA*),  Θ = τσ(Σ̂ + S + (2-τ)σ/3 AA*).
struct MetricOperators {
    Mat Xi, Theta;
    double tau = 0, sigma = 0;
};

inline MetricOperators metric_operators(const IpalmOperators& op, double sigma, double tau) {
    MetricOperators m;
    m.tau = tau;
    m.sigma = sigma;
    const double ts = tau * sigma;
    m.Xi = ts * (0.5 * op.Sigma + op.S + (2.0 - tau) * sigma / 6.0 * op.AAt);
    m.Theta = ts * (op.Sigma + op.S + (2.0 - tau) * sigma / 3.0 * op.AAt);
    m.Xi = 0.5 * (m.Xi + m.Xi.transpose());
    m.Theta = 0.5 * (m.Theta + m.Theta.transpose());
    return m;
}

/// |(x; w)|^2_Ω = |x|^2 + |w|^2_Θ
inline double omega_sq(const MetricOperators& m, const Vec& x, const Vec& w) {
    return x.squaredNorm() + w.dot(m.Theta * w);
}

inline void require_pd(const Mat& a, const std::string& name) {
    double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    double lo = min_eigenvalue(a);
    if (!(lo > 1e-12 * scale)) throw AssumptionViolation(name, "smallest eigenvalue " + std::to_string(lo));
}

struct FejerReport {
    double worst_slack = -std::numeric_limits<double>::infinity();
    double scale = 1.0;
    int violations = 0;
    int first_violation = -1;  // iteration index k of the first failing inequality
    std::vector<double> slack;
    std::vector<double> omega_distance;  // |u^k - u*|_Ω
    bool passed = false;
};

/// Checks, for k >= 1,
///   |u_e^{k+1}|^2_Ω - |u_e^k|^2_Ω <= -((2-τ)/(3τ)|x^{k+1}-x^k|^2 + |w^{k+1}-w^k|^2_Ξ - 2τσ<d^k, w_e^{k+1}>).
inline FejerReport fejer_certificate(const GenericProblem& GP, const IPALMConfig& cfg, const IpalmTrace& tr,
                                     const Vec& x_star, const Vec& w_star, double rel_tol = 1e-8) {
    if (tr.x.size() != tr.residual.size()) throw Misuse("fejer_certificate needs recorded iterates");
    IpalmOperators op = assemble_operators(GP, cfg, 500);
    MetricOperators m = metric_operators(op, cfg.sigma, cfg.tau);
    require_pd(m.Xi, "Xi > 0");
    const double tau = cfg.tau, sigma = cfg.sigma;
    FejerReport rep;
    const int K = int(tr.x.size());
    for (int k = 0; k < K; ++k) rep.omega_distance.push_back(std::sqrt(omega_sq(m, tr.x[k] - x_star, tr.w[k] - w_star)));
    rep.scale = std::max(1.0, rep.omega_distance.empty() ? 0.0 : rep.omega_distance[0] * rep.omega_distance[0]);
    for (int k = 1; k + 1 < K; ++k) {
        double lhs = rep.omega_distance[k + 1] * rep.omega_distance[k + 1] - rep.omega_distance[k] * rep.omega_distance[k];
        Vec dx = tr.x[k + 1] - tr.x[k], dw = tr.w[k + 1] - tr.w[k];
        double rhs = -((2.0 - tau) / (3.0 * tau) * dx.squaredNorm() + dw.dot(m.Xi * dw) -
                       2.0 * tau * sigma * tr.d[k].dot(tr.w[k + 1] - w_star));
        double s = lhs - rhs;
        rep.slack.push_back(s);
        rep.worst_slack = std::max(rep.worst_slack, s);
        if (s > rel_tol * rep.scale) {
            if (rep.first_violation < 0) rep.first_violation = k;
            ++rep.violations;
        }
    }
    if (rep.slack.empty()) rep.worst_slack = 0.0;
    rep.passed = rep.violations == 0;
    return rep;
}

struct RateConstants {
    double rho = 0, beta = 0, mu = 0, zeta = 0;
    double theta_norm = 0, theta_inv_sqrt_norm = 0, sigma_s_norm = 0, ata_norm = 0, Minv_norm = 0;
};

inline RateConstants rate_constants(const GenericProblem& GP, const IPALMConfig& cfg, int cap = 500) {
    if (GP.dim_w() > cap) throw SizeLimit("rate_constants: dimension exceeds the dense cap");
    check_tau(cfg.tau);
    IpalmOperators op = assemble_operators(GP, cfg, cap);
    MetricOperators m = metric_operators(op, cfg.sigma, cfg.tau);
    require_pd(m.Xi, "Xi > 0");
    const double tau = cfg.tau, sigma = cfg.sigma;
    RateConstants rc;
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(m.Theta, m.Xi);
    if (ges.info() != Eigen::Success) throw NumericalFailure("generalized eigenproblem for zeta", 0);
    rc.zeta = ges.eigenvalues().maxCoeff();
    rc.theta_norm = spectral_norm(m.Theta);
    rc.theta_inv_sqrt_norm = 1.0 / std::sqrt(min_eigenvalue(m.Theta));
    rc.sigma_s_norm = spectral_norm(Mat(op.Sigma + op.S));
    rc.ata_norm = GP.dim_x() > 0 ? spectral_norm(op.A) * spectral_norm(op.A) : 0.0;
    rc.Minv_norm = 1.0 / min_eigenvalue(op.M);
    double t1 = (6.0 * sigma * sigma * (tau - 1.0) * (tau - 1.0) * rc.ata_norm + 3.0) / (tau * sigma * sigma * (2.0 - tau));
    double t2 = 2.0 * rc.zeta * rc.sigma_s_norm / (tau * sigma);
    rc.rho = std::max(t1, t2) * std::max(rc.theta_norm, 1.0);
    rc.beta = std::max(std::sqrt(rc.zeta), std::sqrt(3.0 * tau / (2.0 - tau)));
    Mat inner = op.Sigma + op.S + 2.0 / 3.0 * (1.0 + tau) * sigma * op.AAt;
    rc.mu = std::sqrt(tau * sigma * spectral_norm(inner)) * rc.Minv_norm;
    return rc;
}

struct ComplexityReport {
    std::vector<double> curve;  // k * min_{j<=k} |R(u^j)|^2, k = 0..K
    double varrho = 0;
    double e = 0;
    double worst_ratio = 0;  // max_k curve_k / varrho
    int first_violation = -1;
    double first_quartile_mean = 0, final_quartile_mean = 0;
    bool bounded = false, trending = false, passed = false;
};

/// ϱ = max{(12σ²(τ-1)²|A*A| + 3)/(τσ²(2-τ)), 2ζ|Σ̂+S|/(τσ)} · e with
/// e = |u_e^0|^2_Ω + 2τσ|Θ^{-1/2}| Σε (|u_e^0|_Ω + μ Σε) + 4 Σ_{j>=1} ε_j^2.
inline ComplexityReport complexity_certificate(const GenericProblem& GP, const IPALMConfig& cfg, const IpalmTrace& tr,
                                               const Vec& x_star, const Vec& w_star) {
    if (tr.residual.size() < 2 && !tr.residual.empty() && tr.residual[0] != 0.0)
        throw Misuse("complexity_certificate needs at least two trace entries");
    if (tr.x.empty()) throw Misuse("complexity_certificate needs recorded iterates");
    IpalmOperators op = assemble_operators(GP, cfg, 500);
    MetricOperators m = metric_operators(op, cfg.sigma, cfg.tau);
    RateConstants rc = rate_constants(GP, cfg);
    const double tau = cfg.tau, sigma = cfg.sigma;
    double sum_eps = cfg.eps.sum(), sum_sq = cfg.eps.sum_sq_from1();
    double u0 = std::sqrt(omega_sq(m, tr.x[0] - x_star, tr.w[0] - w_star));
    ComplexityReport rep;
    rep.e = u0 * u0 + 2.0 * tau * sigma * rc.theta_inv_sqrt_norm * sum_eps * (u0 + rc.mu * sum_eps) + 4.0 * sum_sq;
    double t1 = (12.0 * sigma * sigma * (tau - 1.0) * (tau - 1.0) * rc.ata_norm + 3.0) / (tau * sigma * sigma * (2.0 - tau));
    double t2 = 2.0 * rc.zeta * rc.sigma_s_norm / (tau * sigma);
    rep.varrho = std::max(t1, t2) * rep.e;
    double best = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < tr.residual.size(); ++k) {
        best = std::min(best, tr.residual[k] * tr.residual[k]);
        rep.curve.push_back(double(k) * best);
    }
    rep.bounded = true;
    for (size_t k = 1; k < rep.curve.size(); ++k) {
        double ratio = rep.varrho > 0 ? rep.curve[k] / rep.varrho : (rep.curve[k] > 0 ? 1e300 : 0.0);
        rep.worst_ratio = std::max(rep.worst_ratio, ratio);
        if (rep.curve[k] > rep.varrho * (1.0 + 1e-10) + 1e-300) {
            rep.bounded = false;
            if (rep.first_violation < 0) rep.first_violation = int(k);
        }
    }
    const int n = int(rep.curve.size()) - 1;  // k = 1..n
    if (n >= 4) {
        int q = n / 4;
        double a = 0, b = 0;
        for (int k = 1; k <= q; ++k) a += rep.curve[k];
        for (int k = n - q + 1; k <= n; ++k) b += rep.curve[k];
        rep.first_quartile_mean = a / q;
        rep.final_quartile_mean = b / q;
        rep.trending = rep.final_quartile_mean < rep.first_quartile_mean || rep.first_quartile_mean == 0.0;
    } else {
        // too short to take quartiles: require the last value not to exceed the first
        rep.first_quartile_mean = n >= 1 ? rep.curve[1] : 0.0;
        rep.final_quartile_mean = n >= 1 ? rep.curve[n] : 0.0;
        rep.trending = rep.final_quartile_mean <= rep.first_quartile_mean;
    }
    rep.passed = rep.bounded && rep.trending;
    return rep;
}

struct DistanceCheck {
    double worst_slack = -std::numeric_limits<double>::infinity();
    bool passed = false;
};

/// |w^{k+1} - w̄^{k+1}|^2_M <= <d^k, w^{k+1} - w̄^{k+1}> + 1e-10, with w̄^{k+1} from an exact dense re-solve.
inline DistanceCheck estimated_distance_check(const GenericProblem& GP, const IPALMConfig& cfg, const IpalmTrace& tr) {
    IpalmOperators op = assemble_operators(GP, cfg, 500);
    DistanceCheck rep;
    for (int k = 0; k < tr.iterations(); ++k) {
        Vec q = ipalm_linear_term(GP, cfg, op, tr.x[k], tr.w[k]);
        QuadProxResult ex = solve_quad_prox(GP.phi, GP.phi_dim, op.M, q);
        Vec diff = tr.w[k + 1] - ex.w;
        double s = diff.dot(op.M * diff) - tr.d[k].dot(diff);
        rep.worst_slack = std::max(rep.worst_slack, s);
    }
    if (tr.iterations() == 0) rep.worst_slack = 0.0;
    rep.passed = rep.worst_slack <= 1e-10;
    return rep;
}

/// Least-squares slope of log |u^k - u*|_Ω over the last 30% of the run, reported as a Q-linear factor.
inline double rate_estimate(const std::vector<double>& omega_distance) {
    const int K = int(omega_distance.size());
    int start = int(std::floor(0.7 * K));
    std::vector<std::pair<double, double>> pts;
    for (int k = start; k < K; ++k)
        if (omega_distance[k] > 0.0) pts.push_back({double(k), std::log(omega_distance[k])});
    if (pts.size() < 2) return 0.0;
    double mx = 0, my = 0;
    for (auto& p : pts) mx += p.first, my += p.second;
    mx /= pts.size();
    my /= pts.size();
    double sxy = 0, sxx = 0;
    for (auto& p : pts) sxy += (p.first - mx) * (p.second - my), sxx += (p.first - mx) * (p.first - mx);
    return std::exp(sxy / sxx);
}

/// η̂_k = |d^k| / |u^k - u^{k+1}|, logged after the fact.
inline std::vector<double> eta_hat(const IpalmTrace& tr) {
    std::vector<double> out;
    for (int k = 0; k < tr.iterations(); ++k) {
        double step = std::sqrt((tr.x[k] - tr.x[k + 1]).squaredNorm() + (tr.w[k] - tr.w[k + 1]).squaredNorm());
        out.push_back(step > 0 ? tr.d[k].norm() / step : 0.0);
    }
    return out;
}

struct ReevalReport {
    double max_discrepancy = 0;  // re-evaluated inclusion residual of the logged d^k
    double max_bound_excess = 0; // max(|d^k| - eps_k, 0) over steps without injection
    double sum_d = 0, sum_eps = 0;
    bool passed = false;
};

/// Re-evaluates every logged d^k from the stored iterates and checks |d^k| <= eps_k as logged.
inline ReevalReport reevaluate_trace(const GenericProblem& GP, const IPALMConfig& cfg, const IpalmTrace& tr,
                                     bool bounds_apply = true) {
    IpalmOperators op = assemble_operators(GP, cfg, 2000);
    ReevalReport rep;
    for (int k = 0; k < tr.iterations(); ++k) {
        Vec q = ipalm_linear_term(GP, cfg, op, tr.x[k], tr.w[k]);
        rep.max_discrepancy = std::max(rep.max_discrepancy, quad_prox_reeval(GP.phi, GP.phi_dim, op.M, q, tr.w[k + 1], tr.d[k]));
        rep.sum_d += tr.d[k].norm();
        rep.sum_eps += tr.eps[k];
        if (bounds_apply) rep.max_bound_excess = std::max(rep.max_bound_excess, tr.d[k].norm() - tr.eps[k]);
    }
    rep.passed = rep.max_discrepancy <= 1e-10 && rep.max_bound_excess <= 0.0;
    return rep;
}

}  // namespace ipadmm
