#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "ipadmm/core/quad_prox_solver.hpp"
#include "ipadmm/ipalm/schedule.hpp"
#include "ipadmm/model/problem.hpp"

namespace ipadmm {

/// min phi(w_head) + h(w)   s.t.  A* w = c,   with A: X -> W.
/// phi acts on the leading phi_dim coordinates of w and vanishes on the rest.
struct GenericProblem {
    ProxFn phi;
    int phi_dim = 0;
    SmoothPtr h;
    MapPtr A;
    Vec c;
    std::string name;

    int dim_w() const { return A->rows(); }
    int dim_x() const { return A->cols(); }
    Vec Astar(const Vec& w) const { return A->apply_adjoint(w); }
    Vec Ax(const Vec& x) const { return A->apply(x); }

    void validate() const {
        if (!A || !h) throw InvalidInput("generic problem needs A and h");
        if (int(c.size()) != dim_x()) throw InvalidInput("c has wrong dimension");
        if (h->dim() != dim_w()) throw InvalidInput("h has wrong dimension");
        if (phi_dim < 0 || phi_dim > dim_w()) throw InvalidInput("phi dimension out of range");
    }
};

/// Residual (c - A*w; w - Prox_phi(w - ∇h(w) - A x)).
inline Vec kkt_residual(const GenericProblem& GP, const Vec& x, const Vec& w) {
    const int nx = GP.dim_x(), nw = GP.dim_w();
    Vec R(nx + nw);
    R.head(nx) = GP.c - GP.Astar(w);
    Vec v = w - GP.h->gradient(w) - GP.Ax(x);
    Vec pv = v;
    if (GP.phi_dim > 0) pv.head(GP.phi_dim) = prox(GP.phi, Vec(v.head(GP.phi_dim)), 1.0);
    R.tail(nw) = w - pv;
    return R;
}

/// Exact residuals supplied by the caller for step k: the subproblem then becomes
/// min L_σ + 1/2|w - w^k|_S^2 - <d_k, w>, so that d_k lies in the subdifferential of the original one.
using InjectedResidual = std::function<Vec(int k)>;

using SubproblemSolver =
    std::function<QuadProxResult(const GenericProblem&, const Mat& M, const Vec& q, double eps)>;

struct IPALMConfig {
    double sigma = 1.0;
    double tau = 1.9;
    MapPtr S;  // proximal term, may be indefinite; null means 0
    EpsSchedule eps = EpsSchedule::exact();
    int max_iter = 10000;
    double stop_tol = 1e-8;
    bool record_iterates = true;
    InjectedResidual inject;
    SubproblemSolver solver;
};

/// Dense operators shared by the steps and the certificates.
struct IpalmOperators {
    Mat Sigma, S, AAt, M;
    Mat A;  // dense A: X -> W
};

inline IpalmOperators assemble_operators(const GenericProblem& GP, const IPALMConfig& cfg, int cap = 2000) {
    if (GP.dim_w() > cap) throw SizeLimit("dense assembly of the iPALM operators exceeds the size cap");
    IpalmOperators op;
    const int nw = GP.dim_w();
    op.Sigma = GP.h->sigma_hat()->to_dense();
    op.Sigma = 0.5 * (op.Sigma + op.Sigma.transpose());
    op.S = cfg.S ? Mat(cfg.S->to_dense()) : Mat(Mat::Zero(nw, nw));
    op.S = 0.5 * (op.S + op.S.transpose());
    op.A = GP.A->to_dense();
    op.AAt = op.A * op.A.transpose();
    op.M = op.Sigma + op.S + cfg.sigma * op.AAt;
    op.M = 0.5 * (op.M + op.M.transpose());
    return op;
}

struct StepResult {
    Vec w, x, d;
    bool exact = false;
    int inner_iterations = 0;
};

/// Linear term of the step-k subproblem  phi(w) + 1/2<w, M w> + <q, w>.
inline Vec ipalm_linear_term(const GenericProblem& GP, const IPALMConfig& cfg, const IpalmOperators& op,
                             const Vec& xk, const Vec& wk) {
    return GP.h->gradient(wk) - op.Sigma * wk + GP.Ax(xk) - cfg.sigma * GP.Ax(GP.c) - op.S * wk;
}

inline QuadProxResult default_subproblem_solver(const GenericProblem& GP, const Mat& M, const Vec& q, double eps) {
    QuadProxOptions opt;
    opt.eps = eps;
    return solve_quad_prox(GP.phi, GP.phi_dim, M, q, opt);
}

inline StepResult ipalm_step(const GenericProblem& GP, const IPALMConfig& cfg, const IpalmOperators& op, const Vec& xk,
                             const Vec& wk, double eps_k, const Vec* injected = nullptr) {
    if (!(eps_k >= 0.0)) throw InvalidInput("eps_k must be nonnegative");
    Vec q = ipalm_linear_term(GP, cfg, op, xk, wk);
    if (injected) q -= *injected;
    const auto& solver = cfg.solver ? cfg.solver : SubproblemSolver(default_subproblem_solver);
    QuadProxResult r = solver(GP, op.M, q, injected ? 0.0 : eps_k);
    StepResult out;
    out.w = r.w;
    out.d = r.d;
    out.exact = r.exact;
    out.inner_iterations = r.iterations;
    if (injected) out.d += *injected;
    if (out.d.norm() > eps_k && !injected && !r.exact)
        throw ToleranceNotMet("iPALM subproblem", out.d.norm(), eps_k);
    out.x = xk + cfg.tau * cfg.sigma * (GP.Astar(out.w) - GP.c);
    return out;
}

inline StepResult ipalm_step(const GenericProblem& GP, const IPALMConfig& cfg, const Vec& xk, const Vec& wk,
                             double eps_k) {
    return ipalm_step(GP, cfg, assemble_operators(GP, cfg), xk, wk, eps_k);
}

struct IpalmTrace {
    std::vector<Vec> x, w;     // u^0 .. u^K
    std::vector<Vec> d;        // d^0 .. d^{K-1}
    std::vector<double> eps;   // eps_0 .. eps_{K-1}
    std::vector<double> residual;  // |R(u^k)|
    std::vector<char> exact;   // solve at step k was finite-termination
    double sigma = 0, tau = 0;
    int iterations() const { return int(d.size()); }
};

struct IpalmResult {
    Vec x, w;
    Vec best_x, best_w;  // iterate with the smallest residual
    double best_residual = 0;
    IpalmTrace trace;
    bool converged = false;
    int iterations = 0;
    double residual = 0;
    double wall_ms = 0;
};

inline IpalmResult run_ipalm(const GenericProblem& GP, const IPALMConfig& cfg, const Vec& x0, const Vec& w0) {
    GP.validate();
    check_tau(cfg.tau);
    if (!(cfg.sigma > 0.0)) throw InvalidInput("sigma must be positive");
    if (x0.size() != GP.dim_x() || w0.size() != GP.dim_w()) throw InvalidInput("initial point has wrong dimension");
    auto t0 = std::chrono::steady_clock::now();
    IpalmOperators op = assemble_operators(GP, cfg);
    IpalmResult res;
    res.trace.sigma = cfg.sigma;
    res.trace.tau = cfg.tau;
    Vec x = x0, w = w0;
    const double scale = 1.0 + GP.c.norm();
    auto record_point = [&](const Vec& xx, const Vec& ww, double r) {
        if (cfg.record_iterates) {
            res.trace.x.push_back(xx);
            res.trace.w.push_back(ww);
        }
        res.trace.residual.push_back(r);
    };
    double r = kkt_residual(GP, x, w).norm();
    record_point(x, w, r);
    res.best_x = x;
    res.best_w = w;
    res.best_residual = r;
    int k = 0;
    while (r / scale > cfg.stop_tol && k < cfg.max_iter) {
        double eps_k = cfg.eps.at(k);
        Vec inj;
        if (cfg.inject) inj = cfg.inject(k);
        StepResult st = ipalm_step(GP, cfg, op, x, w, eps_k, cfg.inject ? &inj : nullptr);
        x = st.x;
        w = st.w;
        if (cfg.record_iterates) res.trace.d.push_back(st.d);
        else res.trace.d.push_back(Vec());
        res.trace.eps.push_back(eps_k);
        res.trace.exact.push_back(st.exact);
        r = kkt_residual(GP, x, w).norm();
        record_point(x, w, r);
        if (r < res.best_residual) {
            res.best_x = x;
            res.best_w = w;
            res.best_residual = r;
        }
        ++k;
    }
    res.x = x;
    res.w = w;
    res.iterations = k;
    res.residual = r;
    res.converged = r / scale <= cfg.stop_tol;
    res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

/// Assumption report: S + 1/2 Σ̂ ⪰ 0 and 1/2 Σ̂ + σ A A* + S ≻ 0, with M = Σ̂ + S + σ A A*.
struct AssumptionReport {
    double min_eig_first = 0;   // λmin(S + 1/2 Σ̂)
    double min_eig_second = 0;  // λmin(1/2 Σ̂ + σAA* + S)
    double min_eig_M = 0;
    Mat M;
    bool passed = false;
};

inline AssumptionReport check_assumption_basic(const GenericProblem& GP, const IPALMConfig& cfg, int cap = 500) {
    AssumptionReport rep;
    if (GP.dim_w() <= cap) {
        IpalmOperators op = assemble_operators(GP, cfg, cap);
        double scale = std::max({1.0, spectral_norm(op.Sigma), spectral_norm(op.S), cfg.sigma * spectral_norm(op.AAt)});
        rep.min_eig_first = min_eigenvalue(op.S + 0.5 * op.Sigma);
        rep.min_eig_second = min_eigenvalue(0.5 * op.Sigma + cfg.sigma * op.AAt + op.S);
        rep.min_eig_M = min_eigenvalue(op.M);
        rep.M = op.M;
        if (rep.min_eig_first < -1e-12 * scale)
            throw AssumptionViolation("S + 1/2 Sigma_h >= 0", "smallest eigenvalue " + std::to_string(rep.min_eig_first));
        if (!(rep.min_eig_second > 1e-12 * scale))
            throw AssumptionViolation("1/2 Sigma_h + sigma A A* + S > 0",
                                      "smallest eigenvalue " + std::to_string(rep.min_eig_second));
        if (!(rep.min_eig_M > 1e-12 * scale))
            throw AssumptionViolation("M > 0", "smallest eigenvalue " + std::to_string(rep.min_eig_M));
    } else {
        MapPtr sig = GP.h->sigma_hat();
        MapPtr S = cfg.S ? cfg.S : zero_map(GP.dim_w());
        MapPtr first = linear_combination({{1.0, S}, {0.5, sig}});
        MapPtr second = linear_combination({{0.5, sig}, {cfg.sigma, gram(GP.A)}, {1.0, S}});
        MapPtr M = linear_combination({{1.0, sig}, {cfg.sigma, gram(GP.A)}, {1.0, S}});
        double scale = std::max(1.0, operator_norm(*M, 1e-6, 300));
        rep.min_eig_first = lanczos_min_ritz(*first);
        rep.min_eig_second = lanczos_min_ritz(*second);
        rep.min_eig_M = lanczos_min_ritz(*M);
        if (rep.min_eig_first < -1e-12 * scale) throw AssumptionViolation("S + 1/2 Sigma_h >= 0", "negative Ritz value");
        if (!(rep.min_eig_second > 1e-12 * scale))
            throw AssumptionViolation("1/2 Sigma_h + sigma A A* + S > 0", "nonpositive Ritz value");
        if (!(rep.min_eig_M > 1e-12 * scale)) throw AssumptionViolation("M > 0", "nonpositive Ritz value");
    }
    rep.passed = true;
    return rep;
}

}  // namespace ipadmm
