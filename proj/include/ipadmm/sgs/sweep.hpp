#pragma once

#include <cmath>
#include <limits>
#include <random>

#include "ipadmm/sgs/decomposition.hpp"

namespace ipadmm {

/// Reuse of an available block value instead of a fresh solve, when it already meets the tolerance.
/// `forward` checks y^{k+1/2}_i against the forward subproblem, `backward` checks y^k_i against the
/// backward one.
enum class SweepSkip { none, forward, backward };

/// `forward_only` drops the backward half: the directly extended (Gauss-Seidel) multi-block scheme,
/// which is kept only as a benchmark baseline.
enum class SweepKind { symmetric, forward_only };

struct SweepOptions {
    SweepSkip skip = SweepSkip::none;
    SweepKind kind = SweepKind::symmetric;
    int pcg_maxit = 5000;
};

struct SweepResult {
    Vec y_next;
    Vec y_half;       // y^{k+1/2}; entries of block 1 equal y^k_1
    Vec delta_tilde;  // backward residuals; block 1 holds δ_1
    Vec delta;        // forward residuals
    Vec g;            // linear term of the y-subproblem
    int skipped = 0;
    int inner_iterations = 0;
};

/// Linear term of  q(y) = p(y_1) + 1/2 <y, N y> + <g, y>, the σ-augmented majorized Lagrangian in y
/// at fixed (z^k, x^k) plus 1/2 |y - y^k|^2_D, up to a constant.
inline Vec sweep_linear_term(const SGSDecomposition& dec, const MultiBlockProblem& P, const Vec& z, const Vec& x,
                             const Vec& yk, double sigma) {
    Vec gz = P.Gstar(z) - P.c;
    Vec g = P.f->gradient(yk) - P.f->sigma_hat()->apply(yk) + P.Fx(x) + sigma * P.Fx(gz);
    for (int i = 0; i < dec.num_blocks(); ++i) {
        const auto& h = dec.handle(i);
        g.segment(h.offset, h.dim) -= dec.D()[i]->apply(yk.segment(h.offset, h.dim));
    }
    return g;
}

namespace detail {

/// Solve block i >= 2 of the current sweep, writing the block into y and returning its residual.
inline Vec solve_smooth_block(const SGSDecomposition& dec, int i, const Vec& g, Vec& y, double tol, int maxit,
                              bool try_skip, bool& skipped, int& iters) {
    const auto& h = dec.handle(i);
    Vec yi = y.segment(h.offset, h.dim);
    Vec rhs = -g.segment(h.offset, h.dim) - dec.N_row(i, y) + h.Nii->apply(yi);
    skipped = false;
    if (try_skip) {
        Vec r = h.Nii->apply(yi) - rhs;
        if (r.norm() <= tol) {
            skipped = true;
            return r;
        }
    }
    if (h.kind == BlockSolve::direct) {
        y.segment(h.offset, h.dim) = h.chol.solve(rhs);
        return Vec::Zero(h.dim);
    }
    if (!(tol > 0.0)) throw ToleranceNotMet("iterative block " + std::to_string(i + 1) + " cannot be solved exactly",
                                            std::numeric_limits<double>::infinity(), 0.0);
    const double rel = 0.5 * tol / (1.0 + rhs.norm());
    PcgResult res = pcg(*h.Nii, rhs, h.precond, rel, maxit, &yi);
    iters += res.iters;
    Vec r = h.Nii->apply(res.x) - rhs;
    if (r.norm() > tol)
        throw ToleranceNotMet("pcg on block " + std::to_string(i + 1), r.norm(), tol);
    y.segment(h.offset, h.dim) = res.x;
    return r;
}

inline Vec solve_prox_block(const SGSDecomposition& dec, const MultiBlockProblem& P, const Vec& g, Vec& y, double tol,
                            int& iters) {
    const auto& h = dec.handle(0);
    Vec y1 = y.head(h.dim);
    Vec h1 = g.head(h.dim) + dec.N_row(0, y) - h.Nii->apply(y1);
    if (h.kind == BlockSolve::prox_diagonal) {
        y.head(h.dim) = prox(P.p, Vec(-h1.cwiseQuotient(h.diag)), h.diag);
        return Vec::Zero(h.dim);
    }
    QuadProxOptions opt;
    opt.eps = tol;
    QuadProxResult r = solve_quad_prox(P.p, h.dim, h.dense, h1, opt);
    iters += r.iterations;
    if (tol > 0.0 && r.d.norm() > tol) throw ToleranceNotMet("block 1 prox subproblem", r.d.norm(), tol);
    y.head(h.dim) = r.w;
    return r.d;
}

}  // namespace detail

/// Backward sweep over blocks s..2 followed by the forward sweep over 1..s. Each block minimizes q
/// with the other blocks at their latest values. With tol == 0 and direct solves the residuals are
/// exactly zero.
inline SweepResult sgs_sweep(const SGSDecomposition& dec, const MultiBlockProblem& P, const Vec& z, const Vec& x,
                             const Vec& yk, double sigma, double tol, const SweepOptions& opt = {}) {
    if (!(tol >= 0.0)) throw InvalidInput("inner tolerance must be nonnegative");
    if (std::abs(sigma - dec.sigma()) > 1e-15 * sigma) throw Misuse("sweep sigma differs from the decomposition");
    const int s = dec.num_blocks();
    SweepResult out;
    out.g = sweep_linear_term(dec, P, z, x, yk, sigma);
    out.delta_tilde = Vec::Zero(dec.dim_y());
    out.delta = Vec::Zero(dec.dim_y());
    Vec y = yk;
    bool skipped = false;
    if (opt.kind == SweepKind::symmetric) {
        for (int i = s - 1; i >= 1; --i) {
            const auto& h = dec.handle(i);
            Vec r = detail::solve_smooth_block(dec, i, out.g, y, tol, opt.pcg_maxit, opt.skip == SweepSkip::backward,
                                               skipped, out.inner_iterations);
            out.skipped += skipped;
            out.delta_tilde.segment(h.offset, h.dim) = r;
        }
    }
    out.y_half = y;
    for (int i = 0; i < s; ++i) {
        const auto& h = dec.handle(i);
        Vec r;
        if (i == 0) {
            r = detail::solve_prox_block(dec, P, out.g, y, tol, out.inner_iterations);
            out.delta_tilde.head(h.dim) = r;
        } else {
            r = detail::solve_smooth_block(dec, i, out.g, y, tol, opt.pcg_maxit,
                                           opt.skip == SweepSkip::forward && opt.kind == SweepKind::symmetric, skipped,
                                           out.inner_iterations);
            out.skipped += skipped;
        }
        out.delta.segment(h.offset, h.dim) = r;
    }
    out.y_next = y;
    return out;
}

struct LemmaCheck {
    double violation = 0.0;          // |y_next - dense solution|
    double identity_residual = 0.0;  // N + N_sGS vs (N_d + N_u) N_d^{-1} (N_d + N_u*)
};

/// Dense one-shot solution of
///   min q(y) + 1/2 |y - y^k|^2_{N_sGS} - <δ_sGS, y>
/// compared with the sweep output.
inline LemmaCheck verify_sgs_lemma(const SGSDecomposition& dec, const MultiBlockProblem& P, const Vec& z, const Vec& x,
                                   const Vec& yk, double sigma, const Vec& y_next, const Vec& delta_sgs,
                                   int cap = 500) {
    LemmaCheck out;
    if (dec.num_blocks() == 1) return out;
    const int ny = dec.dim_y();
    if (ny > cap) throw SizeLimit("verify_sgs_lemma: y dimension exceeds the dense cap");
    Mat N = dec.dense_N(cap);
    Mat Nd = Mat::Zero(ny, ny), Nu = Mat::Zero(ny, ny);
    for (int i = 0; i < dec.num_blocks(); ++i) {
        const auto& hi = dec.handle(i);
        Nd.block(hi.offset, hi.offset, hi.dim, hi.dim) = N.block(hi.offset, hi.offset, hi.dim, hi.dim);
        for (int j = i + 1; j < dec.num_blocks(); ++j) {
            const auto& hj = dec.handle(j);
            Nu.block(hi.offset, hj.offset, hi.dim, hj.dim) = N.block(hi.offset, hj.offset, hi.dim, hj.dim);
        }
    }
    Mat NdInvNut = Nd.ldlt().solve(Mat(Nu.transpose()));
    Mat Nsgs = Nu * NdInvNut;
    Nsgs = 0.5 * (Nsgs + Nsgs.transpose());
    Vec g = sweep_linear_term(dec, P, z, x, yk, sigma);
    Mat H = N + Nsgs;
    Vec lin = g - Nsgs * yk - delta_sgs;
    QuadProxResult r = solve_quad_prox(P.p, P.blocks[0], 0.5 * (H + H.transpose()), lin);
    out.violation = (y_next - r.w).norm();

    std::mt19937 gen(11);
    std::normal_distribution<double> nd;
    Mat Lt = Nd + Nu;
    for (int t = 0; t < 5; ++t) {
        Vec v(ny);
        for (auto& e : v) e = nd(gen);
        Vec lhs = H * v;
        Vec rhs = Lt * Nd.ldlt().solve(Vec(Lt.transpose() * v));
        out.identity_residual = std::max(out.identity_residual, (lhs - rhs).norm() / (1.0 + lhs.norm()));
    }
    return out;
}

}  // namespace ipadmm
