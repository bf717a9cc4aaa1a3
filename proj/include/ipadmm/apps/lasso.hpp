#pragma once

#include <cmath>
#include <string>

#include "ipadmm/admm/sgs_admm.hpp"

namespace ipadmm {

/// min 1/2 |Φx - η|^2 + λ|x|_1   s.t.  A_E x = b_E,  A_I x >= b_I.
struct LassoInstance {
    Mat Phi;
    Vec eta;
    double lambda = 1.0;
    Mat AE, AI;
    Vec bE, bI;
    std::string name;

    int n() const { return int(Phi.cols()); }
    int mE() const { return int(bE.size()); }
    int mI() const { return int(bI.size()); }
};

inline double lasso_objective(const LassoInstance& inst, const Vec& x) {
    return 0.5 * (inst.Phi * x - inst.eta).squaredNorm() + inst.lambda * x.lpNorm<1>();
}

inline void validate_lasso(const LassoInstance& inst) {
    if (!(inst.lambda > 0.0)) throw InvalidInput("lasso penalty must be positive");
    if (inst.eta.size() != inst.Phi.rows()) throw InvalidInput("lasso response has wrong size");
    if (inst.mE() > 0 && (inst.AE.rows() != inst.mE() || inst.AE.cols() != inst.n()))
        throw InvalidInput("lasso A_E has wrong dimensions");
    if (inst.mI() > 0 && (inst.AI.rows() != inst.mI() || inst.AI.cols() != inst.n()))
        throw InvalidInput("lasso A_I has wrong dimensions");
}

/// Dual with the slack for the inequalities:
///   min p(y_1) + 1/2 <w, Q w> - <b_E, z_E> - <b_I, z_I>
///   s.t.  -y_11 - Q w + A_E' z_E + A_I' z_I = -Φ'η,   -y_12 + z_I = 0,
/// with Q = Φ'Φ, p = δ_[-λ,λ](y_11) + δ_+(y_12), y = ((y_11, y_12), w), z = (z_E, z_I).
/// The multiplier (x, x_s) carries the primal x.
inline MultiBlockProblem build_constrained_lasso(const LassoInstance& inst) {
    validate_lasso(inst);
    const int n = inst.n(), mE = inst.mE(), mI = inst.mI();
    const int nx = n + mI, nz = mE + mI;
    Mat Q = inst.Phi.transpose() * inst.Phi;
    MultiBlockProblem P;
    P.blocks = {nx, n};
    P.p = mI > 0 ? ProxFn::product({{n, ProxFn::box(-inst.lambda, inst.lambda)}, {mI, ProxFn::nonneg()}})
                 : ProxFn::box(-inst.lambda, inst.lambda);
    P.F.push_back(identity_map(nx, -1.0));
    Mat F2 = Mat::Zero(n, nx);
    F2.leftCols(n) = -Q;
    P.F.push_back(dense_map(F2));
    Mat Sig = Mat::Zero(nx + n, nx + n);
    Sig.bottomRightCorner(n, n) = Q;
    P.f = std::make_shared<QuadraticSmooth>(symmetric_map(Sig), Vec::Zero(nx + n));
    Mat G = Mat::Zero(nz, nx);
    if (mE > 0) G.topLeftCorner(mE, n) = inst.AE;
    if (mI > 0) {
        G.block(mE, 0, mI, n) = inst.AI;
        G.block(mE, n, mI, mI) = Mat::Identity(mI, mI);
    }
    P.G = nz > 0 ? dense_map(G) : zero_map(0, nx);
    P.b = Vec(nz);
    if (mE > 0) P.b.head(mE) = inst.bE;
    if (mI > 0) P.b.tail(mI) = inst.bI;
    P.c = Vec::Zero(nx);
    P.c.head(n) = -inst.Phi.transpose() * inst.eta;
    P.name = inst.name.empty() ? "lasso" : inst.name;
    P.validate(true);
    return P;
}

/// D = (0, ridge I): keeps the w block positive definite when Φ'Φ is singular.
inline DBuilder lasso_proximal_terms(const LassoInstance& inst, double ridge = 1e-8) {
    const int n = inst.n();
    return [n, ridge](double) { return std::vector<MapPtr>{nullptr, identity_map(n, ridge)}; };
}

struct LassoSolution {
    Vec x;
    double objective = 0;
    int iterations = 0;
    bool converged = false;
    double wall_ms = 0;
};

inline LassoSolution solve_lasso(const LassoInstance& inst, ADMMConfig cfg) {
    MultiBlockProblem P = build_constrained_lasso(inst);
    if (!cfg.D) cfg.D = lasso_proximal_terms(inst);
    AdmmResult r = run_admm(P, cfg, Vec::Zero(P.dim_x()), Vec::Zero(P.dim_y()), Vec::Zero(P.dim_z()));
    LassoSolution s;
    s.x = r.x.head(inst.n());
    s.objective = lasso_objective(inst, s.x);
    s.iterations = r.iterations;
    s.converged = r.converged;
    s.wall_ms = r.wall_ms;
    return s;
}

}  // namespace ipadmm
