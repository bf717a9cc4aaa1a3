#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "ipadmm/ipalm/schedule.hpp"
#include "ipadmm/model/metrics.hpp"
#include "ipadmm/sgs/sweep.hpp"

namespace ipadmm {

/// `exact`: zero inner tolerance, direct solves wherever possible. `inexact`: the ε̃_k schedule
/// drives every inner solve and each solve reports its attained residual.
enum class AdmmMode { exact, inexact };

/// Proximal terms D_i as a function of σ, so an adaptive-σ change can rebuild them.
using DBuilder = std::function<std::vector<MapPtr>(double sigma)>;

/// Stopping measure evaluated at (x, y, z); defaults to the relative KKT residual.
using StopMetric = std::function<double(const Vec& x, const Vec& y, const Vec& z)>;

struct AdaptiveSigma {
    bool enabled = false;
    int window = 10;
    double ratio = 5.0;
    double factor = 1.25;
    double lo = 1e-4;
    double hi = 1e6;
};

struct ADMMConfig {
    double sigma = 1.0;
    double tau = 1.9;
    DBuilder D;
    EpsSchedule tol = EpsSchedule::exact();
    AdaptiveSigma adaptive;
    StopMetric stop_metric;
    double stop_tol = 1e-8;  // <= 0 runs for max_iter iterations
    int max_iter = 10000;
    AdmmMode mode = AdmmMode::exact;
    SweepOptions sweep;
    DecompositionOptions decomp;
    bool iterative_z = false;  // pcg for Step 3 even when a factorization is affordable
    int z_dense_cap = 2000;
    bool record_iterates = true;
};

inline std::vector<MapPtr> default_D(const MultiBlockProblem& P) { return std::vector<MapPtr>(P.num_blocks()); }

inline std::vector<MapPtr> build_D(const MultiBlockProblem& P, const ADMMConfig& cfg, double sigma) {
    std::vector<MapPtr> D = cfg.D ? cfg.D(sigma) : default_D(P);
    if (D.empty()) D = default_D(P);
    return D;
}

struct AssumptionPReport {
    std::vector<double> block_min_eig;  // λmin(1/2 Σ̂_ii + σ F_i F_i* + D_i)
    double second_min_eig = 0;          // λmin(D + 1/2 Σ̂)
    bool passed = false;
};

/// 1/2 Σ̂_ii + σ F_i F_i* + D_i ≻ 0 for every block and D ⪰ -1/2 Σ̂.
inline AssumptionPReport check_assumption_p(const MultiBlockProblem& P, std::vector<MapPtr> D, double sigma,
                                            int cap = 500) {
    if (!(sigma > 0.0)) throw InvalidInput("sigma must be positive");
    const int s = P.num_blocks();
    if (D.empty()) D.resize(s);
    if (int(D.size()) != s) throw InvalidInput("one proximal term per block is required");
    for (int i = 0; i < s; ++i)
        if (!D[i]) D[i] = zero_map(P.blocks[i]);
    AssumptionPReport rep;
    MapPtr sig = P.f->sigma_hat();
    const int ny = P.dim_y();
    if (ny > cap) throw SizeLimit("check_assumption_p: y dimension exceeds the dense cap");
    Mat S = sig->to_dense();
    S = 0.5 * (S + S.transpose());
    Mat Dd = Mat::Zero(ny, ny);
    for (int i = 0; i < s; ++i) {
        const int off = P.offset(i), d = P.blocks[i];
        Mat Di = D[i]->to_dense();
        Dd.block(off, off, d, d) = 0.5 * (Di + Di.transpose());
        Mat Fi = P.F[i]->to_dense();
        Mat Bi = 0.5 * S.block(off, off, d, d) + sigma * Fi * Fi.transpose() + Dd.block(off, off, d, d);
        double lo = min_eigenvalue(Bi);
        rep.block_min_eig.push_back(lo);
        double scale = std::max(1.0, spectral_norm(Bi));
        if (!(lo > 1e-12 * scale))
            throw AssumptionViolation("block " + std::to_string(i + 1),
                                      "1/2 Sigma_ii + sigma F_i F_i* + D_i is not positive definite (smallest eigenvalue " +
                                          std::to_string(lo) + ")");
    }
    Mat second = Dd + 0.5 * S;
    rep.second_min_eig = min_eigenvalue(second);
    if (rep.second_min_eig < -1e-10)
        throw AssumptionViolation("D >= -1/2 Sigma_f",
                                  "smallest eigenvalue " + std::to_string(rep.second_min_eig));
    rep.passed = true;
    return rep;
}

/// Step-3 solver for G G* z = r: Cholesky, dense minimum-norm pseudoinverse when G G* is singular,
/// or pcg with a diagonal preconditioner.
class ZSolver {
public:
    enum class Kind { empty, cholesky, pinv, pcg };

    ZSolver(const MapPtr& G, bool iterative, int dense_cap, int maxit = 5000) : G_(G), maxit_(maxit) {
        nz_ = G->rows();
        if (nz_ == 0) {
            kind_ = Kind::empty;
            return;
        }
        GGt_ = gram(G);
        Vec dg = GGt_->diagonal();
        Vec inv(nz_);
        for (int i = 0; i < nz_; ++i) inv[i] = dg[i] > 0 ? 1.0 / dg[i] : 1.0;
        precond_ = diagonal_map(inv);
        if (iterative || nz_ > dense_cap) {
            kind_ = Kind::pcg;
            return;
        }
        Mat a = GGt_->to_dense();
        a = 0.5 * (a + a.transpose());
        try {
            chol_.factorize(a, 1e-12);
            kind_ = Kind::cholesky;
        } catch (const RankDeficiency&) {
            pinv_ = dense_pinv_sym(a, 1e-12);
            kind_ = Kind::pinv;
        }
    }

    Kind kind() const { return kind_; }
    bool direct() const { return kind_ == Kind::cholesky || kind_ == Kind::pinv || kind_ == Kind::empty; }
    const MapPtr& GGt() const { return GGt_; }

    /// Solves to absolute residual tol on |G G* z - r| when iterative. z0 warm-starts pcg.
    Vec solve(const Vec& r, double tol, const Vec& z0, int& iters) const {
        switch (kind_) {
            case Kind::empty: return Vec();
            case Kind::cholesky: return chol_.solve(r);
            case Kind::pinv: return pinv_ * r;
            case Kind::pcg: {
                if (!(tol > 0.0)) throw ToleranceNotMet("Step-3 pcg cannot be solved exactly", std::numeric_limits<double>::infinity(), 0.0);
                PcgResult res = pcg(*GGt_, r, precond_.get(), 0.5 * tol / (1.0 + r.norm()), maxit_, &z0);
                iters += res.iters;
                return res.x;
            }
        }
        return Vec();
    }

private:
    MapPtr G_, GGt_, precond_;
    int nz_ = 0;
    int maxit_;
    Kind kind_ = Kind::empty;
    CholeskyHandle chol_;
    Mat pinv_;
};

struct AdmmStepResult {
    Vec y, z, x;
    Vec y_half, delta_tilde, delta, gamma;
    int inner_iterations = 0;
    int skipped = 0;
};

/// One pass of Steps 1-4 at fixed σ.
inline AdmmStepResult admm_step(const MultiBlockProblem& P, const ADMMConfig& cfg, const SGSDecomposition& dec,
                                const ZSolver& zs, const Vec& xk, const Vec& yk, const Vec& zk, double eps_k) {
    if (!(eps_k >= 0.0)) throw InvalidInput("inner tolerance must be nonnegative");
    const double sigma = dec.sigma();
    const double inner = cfg.mode == AdmmMode::exact ? 0.0 : eps_k;
    SweepResult sw = sgs_sweep(dec, P, zk, xk, yk, sigma, inner, cfg.sweep);
    AdmmStepResult out;
    out.y = sw.y_next;
    out.y_half = sw.y_half;
    out.delta = sw.delta;
    out.delta_tilde = sw.delta_tilde;
    out.inner_iterations = sw.inner_iterations;
    out.skipped = sw.skipped;

    // Step 3: G G* z = (b - G x)/σ - G(F* y - c), residual γ = G x - b + σ G(F* y + G* z - c)
    if (P.dim_z() > 0) {
        Vec fy = P.Fstar(out.y) - P.c;
        Vec r = (P.b - P.Gx(xk)) / sigma - P.Gx(fy);
        int it = 0;
        out.z = zs.solve(r, inner / sigma, zk, it);
        out.inner_iterations += it;
        if (zs.direct()) {
            out.gamma = Vec::Zero(P.dim_z());
        } else {
            out.gamma = P.Gx(xk) - P.b + sigma * P.Gx(Vec(fy + P.Gstar(out.z)));
            if (out.gamma.norm() > inner) throw ToleranceNotMet("Step-3 pcg", out.gamma.norm(), inner);
        }
    } else {
        out.z = Vec();
        out.gamma = Vec();
    }
    // Step 4
    out.x = xk + cfg.tau * sigma * P.constraint(out.y, out.z);
    return out;
}

inline double relative_kkt(const MultiBlockProblem& P, const Vec& x, const Vec& y, const Vec& z) {
    return kkt_residual_norm(P, {x, y, z}) / (1.0 + P.c.norm() + P.b.norm());
}

struct AdmmTrace {
    std::vector<Vec> x, y, z;                          // k = 0..K
    std::vector<Vec> y_half, delta, delta_tilde, gamma; // steps k = 0..K-1
    std::vector<double> eps;                           // ε̃_k per step
    std::vector<double> sigma;                         // σ used at step k
    std::vector<int> segment;                          // fixed-σ segment of step k
    std::vector<double> metric;                        // stop metric at u^k
    std::vector<double> residual;                      // |R(u^k)|
    std::vector<double> feasibility;                   // |b - G x^k|
    std::vector<double> step_norm;                     // |u^{k+1} - u^k|
    std::vector<char> z_direct;                        // Step 3 used a direct solve
    double tau = 0;
    AdmmMode mode = AdmmMode::exact;
    int iterations() const { return int(eps.size()); }
};

struct AdmmResult {
    Vec x, y, z;
    AdmmTrace trace;
    Vec best_x, best_y, best_z;  // iterate with the smallest stop metric
    double best_metric = 0;
    int best_k = 0;
    bool converged = false;
    int iterations = 0;
    double metric = 0;
    double sigma_final = 0;
    int sigma_changes = 0;
    double wall_ms = 0;
};

/// One adaptive-σ decision from window averages of the constraint residual |F*y+G*z-c|/(1+|c|) and the
/// multiplier-side residual |(y_1 - Prox(y_1 - ∇f - F x), rest; G x - b)|/(1+|b|).
inline double adapt_sigma(double primal, double dual, double sigma, const AdaptiveSigma& pol) {
    if (!pol.enabled) return sigma;
    double ratio = dual > 0 ? primal / dual : (primal > 0 ? std::numeric_limits<double>::infinity() : 1.0);
    double next = sigma;
    if (ratio > pol.ratio) next = sigma * pol.factor;
    else if (ratio < 1.0 / pol.ratio) next = sigma / pol.factor;
    next = std::min(std::max(next, pol.lo), pol.hi);
    if (sigma >= pol.hi && next > sigma) next = sigma;
    if (sigma <= pol.lo && next < sigma) next = sigma;
    return next;
}

inline AdmmResult run_admm(const MultiBlockProblem& P, const ADMMConfig& cfg, const Vec& x0, const Vec& y0,
                           const Vec& z0) {
    P.validate(true);
    check_tau(cfg.tau);
    if (!(cfg.sigma > 0.0)) throw InvalidInput("sigma must be positive");
    if (x0.size() != P.dim_x() || y0.size() != P.dim_y() || z0.size() != P.dim_z())
        throw InvalidInput("initial point has wrong dimension");
    if (!std::isfinite(prox_value(P.p, y0.head(P.blocks[0]))))
        throw InvalidInput("initial y_1 lies outside dom p");
    auto t0 = std::chrono::steady_clock::now();
    double sigma = cfg.sigma;
    DecompositionOptions dopt = cfg.decomp;
    if (cfg.mode == AdmmMode::exact) dopt.iterative_blocks = false;
    auto dec = std::make_unique<SGSDecomposition>(P, build_D(P, cfg, sigma), sigma, dopt);
    ZSolver zs(P.G, cfg.iterative_z && cfg.mode == AdmmMode::inexact, cfg.z_dense_cap);

    AdmmResult res;
    AdmmTrace& tr = res.trace;
    tr.tau = cfg.tau;
    tr.mode = cfg.mode;
    auto metric = [&](const Vec& x, const Vec& y, const Vec& z) {
        return cfg.stop_metric ? cfg.stop_metric(x, y, z) : relative_kkt(P, x, y, z);
    };
    auto record = [&](const Vec& x, const Vec& y, const Vec& z, double m) {
        if (cfg.record_iterates) {
            tr.x.push_back(x);
            tr.y.push_back(y);
            tr.z.push_back(z);
        }
        tr.metric.push_back(m);
        tr.residual.push_back(kkt_residual_norm(P, {x, y, z}));
        tr.feasibility.push_back((P.b - P.Gx(x)).norm());
    };
    Vec x = x0, y = y0, z = z0;
    double m = metric(x, y, z);
    record(x, y, z, m);
    res.best_x = x;
    res.best_y = y;
    res.best_z = z;
    res.best_metric = m;
    int k = 0, segment = 0;
    double acc_p = 0, acc_d = 0;
    int acc_n = 0;
    while ((cfg.stop_tol <= 0.0 || m > cfg.stop_tol) && k < cfg.max_iter) {
        double eps_k = cfg.tol.at(k);
        AdmmStepResult st = admm_step(P, cfg, *dec, zs, x, y, z, eps_k);
        double step = std::sqrt((st.x - x).squaredNorm() + (st.y - y).squaredNorm() + (st.z - z).squaredNorm());
        tr.eps.push_back(cfg.mode == AdmmMode::exact ? 0.0 : eps_k);
        tr.sigma.push_back(sigma);
        tr.segment.push_back(segment);
        tr.step_norm.push_back(step);
        tr.z_direct.push_back(zs.direct());
        if (cfg.record_iterates) {
            tr.y_half.push_back(st.y_half);
            tr.delta.push_back(st.delta);
            tr.delta_tilde.push_back(st.delta_tilde);
            tr.gamma.push_back(st.gamma);
        } else {
            tr.gamma.push_back(Vec::Constant(1, st.gamma.norm()));
        }
        x = std::move(st.x);
        y = std::move(st.y);
        z = std::move(st.z);
        ++k;
        m = metric(x, y, z);
        record(x, y, z, m);
        if (m < res.best_metric) {
            res.best_x = x;
            res.best_y = y;
            res.best_z = z;
            res.best_metric = m;
            res.best_k = k;
        }
        if (cfg.adaptive.enabled) {
            Vec R = kkt_residual(P, {x, y, z});
            acc_p += R.head(P.dim_x()).norm() / (1.0 + P.c.norm());
            acc_d += R.tail(P.dim_y() + P.dim_z()).norm() / (1.0 + P.b.norm());
            if (++acc_n >= cfg.adaptive.window) {
                double next = adapt_sigma(acc_p / acc_n, acc_d / acc_n, sigma, cfg.adaptive);
                acc_p = acc_d = 0;
                acc_n = 0;
                if (next != sigma) {
                    sigma = next;
                    dec = std::make_unique<SGSDecomposition>(P, build_D(P, cfg, sigma), sigma, dopt);
                    ++segment;
                    ++res.sigma_changes;
                }
            }
        }
    }
    res.x = x;
    res.y = y;
    res.z = z;
    res.iterations = k;
    res.metric = m;
    res.sigma_final = sigma;
    res.converged = cfg.stop_tol > 0.0 && m <= cfg.stop_tol;
    res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

/// The two-block case s = 1, f ≡ 0: y-prox step, z linear solve, τσ multiplier step.
inline AdmmResult classic_admm_2block(const MultiBlockProblem& P, const ADMMConfig& cfg, const Vec& x0, const Vec& y0,
                                      const Vec& z0) {
    if (P.num_blocks() != 1) throw Misuse("classic_admm_2block needs exactly one y block");
    if (!dynamic_cast<const ZeroSmooth*>(P.f.get())) throw Misuse("classic_admm_2block needs f = 0");
    return run_admm(P, cfg, x0, y0, z0);
}

struct XiReport {
    std::vector<double> xi;
    double worst_slack = -std::numeric_limits<double>::infinity();  // max_k |b - G x^k| - ξ_k
    double identity_residual = 0;  // b - G x^{k+1} vs (1-τ)(b - G x^k) - τ γ^k
    int first_violation = -1;
    bool passed = false;
};

/// ξ_0 = |b - G x^0|, ξ_k = |1-τ| ξ_{k-1} + τ ε̃_{k-1}; checks |b - G x^k| <= ξ_k + 1e-10.
inline XiReport xi_bound_certificate(const MultiBlockProblem& P, const AdmmTrace& tr, double tau) {
    XiReport rep;
    const int K = int(tr.feasibility.size());
    if (K == 0) return rep;
    double xi = tr.feasibility[0];
    rep.xi.push_back(xi);
    rep.worst_slack = 0.0;
    for (int k = 1; k < K; ++k) {
        xi = std::abs(1.0 - tau) * xi + tau * tr.eps[k - 1];
        rep.xi.push_back(xi);
        double s = tr.feasibility[k] - xi;
        rep.worst_slack = std::max(rep.worst_slack, s);
        if (s > 1e-10 && rep.first_violation < 0) rep.first_violation = k;
    }
    if (!tr.x.empty() && P.dim_z() > 0) {
        for (int k = 0; k + 1 < K; ++k) {
            Vec lhs = P.b - P.Gx(tr.x[k + 1]);
            Vec rhs = (1.0 - tau) * (P.b - P.Gx(tr.x[k])) - tau * tr.gamma[k];
            rep.identity_residual = std::max(rep.identity_residual, (lhs - rhs).norm() / (1.0 + P.b.norm()));
        }
    }
    rep.passed = rep.first_violation < 0;
    return rep;
}

struct AdmmReeval {
    double max_discrepancy = 0;   // logged residual vs residual rebuilt from iterates
    double max_bound_excess = 0;  // max over blocks and γ of |residual| - ε̃_k
    bool passed = false;
};

/// Rebuilds δ̃, δ and γ of every step from the stored iterates and compares them with the log.
inline AdmmReeval reevaluate_admm_trace(const MultiBlockProblem& P, const ADMMConfig& cfg, const AdmmTrace& tr) {
    if (tr.x.empty() || tr.y_half.size() != size_t(tr.iterations()))
        throw Misuse("reevaluate_admm_trace needs recorded iterates");
    AdmmReeval rep;
    DecompositionOptions dopt = cfg.decomp;
    if (cfg.mode == AdmmMode::exact) dopt.iterative_blocks = false;
    std::unique_ptr<SGSDecomposition> dec;
    int seg = -1;
    for (int k = 0; k < tr.iterations(); ++k) {
        if (tr.segment[k] != seg) {
            seg = tr.segment[k];
            dec = std::make_unique<SGSDecomposition>(P, build_D(P, cfg, tr.sigma[k]), tr.sigma[k], dopt);
        }
        const double sigma = tr.sigma[k];
        const Vec &xk = tr.x[k], &yk = tr.y[k], &zk = tr.z[k], &yh = tr.y_half[k], &yn = tr.y[k + 1];
        Vec g = sweep_linear_term(*dec, P, zk, xk, yk, sigma);
        const int s = dec->num_blocks();
        double disc = 0, excess = 0;
        for (int i = 0; i < s; ++i) {
            const auto& h = dec->handle(i);
            // forward state: blocks <= i at y^{k+1}, blocks > i at y^{k+1/2}
            Vec fw = yh;
            fw.head(h.offset + h.dim) = yn.head(h.offset + h.dim);
            Vec gi = dec->N_row(i, fw) + g.segment(h.offset, h.dim);
            Vec logged = tr.delta[k].segment(h.offset, h.dim);
            if (i == 0) {
                disc = std::max(disc, inclusion_residual(P.p, yn.head(h.dim), Vec(logged - gi)));
            } else {
                disc = std::max(disc, (logged - gi).norm());
                // backward state: blocks < i at y^k, blocks >= i at y^{k+1/2}
                if (cfg.sweep.kind == SweepKind::symmetric) {
                    Vec bw = yh;
                    bw.head(h.offset) = yk.head(h.offset);
                    Vec gb = dec->N_row(i, bw) + g.segment(h.offset, h.dim);
                    disc = std::max(disc, (tr.delta_tilde[k].segment(h.offset, h.dim) - gb).norm());
                    excess = std::max(excess, tr.delta_tilde[k].segment(h.offset, h.dim).norm() - tr.eps[k]);
                }
            }
            excess = std::max(excess, logged.norm() - tr.eps[k]);
        }
        if (P.dim_z() > 0) {
            Vec gam = P.Gx(xk) - P.b + sigma * P.Gx(P.constraint(yn, tr.z[k + 1]));
            disc = std::max(disc, (gam - tr.gamma[k]).norm());
            excess = std::max(excess, tr.gamma[k].norm() - tr.eps[k]);
        }
        rep.max_discrepancy = std::max(rep.max_discrepancy, disc);
        rep.max_bound_excess = std::max(rep.max_bound_excess, excess);
    }
    rep.passed = rep.max_discrepancy <= 1e-10 && rep.max_bound_excess <= 0.0;
    return rep;
}

}  // namespace ipadmm
