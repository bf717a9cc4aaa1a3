#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "ipadmm/model/problem.hpp"

namespace ipadmm {

/// p(y_1) + f̂(y, y_anchor) - <b,z> + <F*y + G*z - c, x> + σ/2 |F*y + G*z - c|^2; +inf outside dom p.
inline double eval_majorized_auglag(const MultiBlockProblem& P, const Vec& y, const Vec& z, const Vec& x,
                                    const Vec& y_anchor, double sigma) {
    if (!(sigma > 0.0)) throw InvalidInput("sigma must be positive");
    double pv = prox_value(P.p, y.head(P.blocks[0]));
    if (!std::isfinite(pv)) return std::numeric_limits<double>::infinity();
    Vec r = P.constraint(y, z);
    return pv + P.f->majorized(y, y_anchor) - P.b.dot(z) + r.dot(x) + 0.5 * sigma * r.squaredNorm();
}

/// Stacked KKT residual (c - F*y - G*z; y - Prox(y - ∇f(y) - Fx); Gx - b); the prox acts on block 1
/// only, the remaining blocks are the identity so their slot reads ∇f(y) + Fx.
inline Vec kkt_residual(const MultiBlockProblem& P, const KKTPoint& u) {
    const int nx = P.dim_x(), ny = P.dim_y(), nz = P.dim_z();
    Vec R(nx + ny + nz);
    R.head(nx) = -P.constraint(u.y, u.z);
    Vec g = u.y - P.f->gradient(u.y) - P.Fx(u.x);
    Vec py = g;
    const int n1 = P.blocks[0];
    py.head(n1) = prox(P.p, Vec(g.head(n1)), 1.0);
    R.segment(nx, ny) = u.y - py;
    R.tail(nz) = P.Gx(u.x) - P.b;
    return R;
}

inline double kkt_residual_norm(const MultiBlockProblem& P, const KKTPoint& u) { return kkt_residual(P, u).norm(); }

/// Feasibility, cone, and gap quotients for linear SDP in svec coordinates.
struct EtaSdp {
    double D = 0, P = 0, S = 0, gap = 0, max = 0;
};

/// `cone` is the projector defining Π (PSD, or a product of PSD and nonnegative blocks).
inline EtaSdp eta_sdp(const LinearMap& A, const Vec& b, const Vec& C, const Vec& X, const Vec& z, const Vec& S,
                      const ProxFn& cone = ProxFn::psd()) {
    EtaSdp e;
    e.D = (A.apply_adjoint(z) + S - C).norm() / (1.0 + C.norm());
    e.P = (A.apply(X) - b).norm() / (1.0 + b.norm());
    Vec px = prox(cone, X, 1.0);
    double nx = X.norm(), ns = S.norm();
    e.S = std::max((X - px).norm() / (1.0 + nx), std::abs(X.dot(S)) / (1.0 + nx + ns));
    double pobj = C.dot(X), dobj = b.dot(z);
    e.gap = (pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    e.max = std::max({e.D, e.P, e.S});
    return e;
}

struct EtaQsdp {
    double D = 0, P = 0, W = 0, S = 0, I = 0, gap = 0, max = 0;
    double primal_obj = 0, dual_obj = 0;
};

/// Quotients for   min 1/2<X,QX> - <C,X>  s.t.  A_E X = b_E, A_I X >= b_I, X in the cone,
/// measured at the tuple (X, W, S, z_E, z_I). q_norm is the operator norm of Q.
inline EtaQsdp eta_qsdp(const LinearMap& Q, double q_norm, const LinearMap& AE, const Vec& bE, const LinearMap& AI,
                        const Vec& bI, const Vec& C, const Vec& X, const Vec& W, const Vec& S, const Vec& zE,
                        const Vec& zI, const ProxFn& cone = ProxFn::psd()) {
    EtaQsdp e;
    Vec QW = Q.apply(W), QX = Q.apply(X);
    Vec dual = S - QW + C;
    if (AE.rows() > 0) dual += AE.apply_adjoint(zE);
    if (AI.rows() > 0) dual += AI.apply_adjoint(zI);
    e.D = dual.norm() / (1.0 + C.norm());
    e.P = AE.rows() > 0 ? (AE.apply(X) - bE).norm() / (1.0 + bE.norm()) : 0.0;
    e.W = (QX - QW).norm() / (1.0 + q_norm);
    Vec px = prox(cone, X, 1.0);
    double nx = X.norm(), ns = S.norm();
    e.S = std::max((X - px).norm() / (1.0 + nx), std::abs(X.dot(S)) / (1.0 + nx + ns));
    if (AI.rows() > 0) {
        Vec ri = AI.apply(X) - bI;
        double t1 = zI.cwiseMin(0.0).norm() / (1.0 + zI.norm());
        double t2 = ri.cwiseMin(0.0).norm() / (1.0 + bI.norm());
        double t3 = std::abs(ri.dot(zI)) / (1.0 + ri.norm() + zI.norm());
        e.I = std::max({t1, t2, t3});
    }
    e.primal_obj = 0.5 * X.dot(QX) - C.dot(X);
    e.dual_obj = -0.5 * W.dot(QW) + (AE.rows() > 0 ? bE.dot(zE) : 0.0) + (AI.rows() > 0 ? bI.dot(zI) : 0.0);
    e.gap = (e.primal_obj - e.dual_obj) / (1.0 + std::abs(e.primal_obj) + std::abs(e.dual_obj));
    e.max = std::max({e.D, e.P, e.W, e.S, e.I});
    return e;
}

}  // namespace ipadmm
