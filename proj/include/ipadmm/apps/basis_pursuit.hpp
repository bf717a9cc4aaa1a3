#pragma once

#include <string>

#include "ipadmm/admm/sgs_admm.hpp"

namespace ipadmm {

/// Dual of  min |x|_1  s.t.  G x = b:
///   min δ_{|y|_inf <= 1}(y) - <b, z>   s.t.  -y + G' z = 0.
/// The multiplier x is the primal solution.
inline MultiBlockProblem build_basis_pursuit_dual(const Mat& G, const Vec& b) {
    if (G.rows() != b.size()) throw InvalidInput("basis pursuit: b has wrong size");
    const int n = int(G.cols());
    MultiBlockProblem P;
    P.blocks = {n};
    P.p = ProxFn::box(-1.0, 1.0);
    P.f = std::make_shared<ZeroSmooth>(n);
    P.F = {identity_map(n, -1.0)};
    P.G = dense_map(G);
    P.b = b;
    P.c = Vec::Zero(n);
    P.name = "basis-pursuit";
    P.validate(true);
    return P;
}

struct BasisPursuitSolution {
    Vec x, z;
    double primal_obj = 0, dual_obj = 0;
    int iterations = 0;
    bool converged = false;
};

inline BasisPursuitSolution solve_basis_pursuit(const Mat& G, const Vec& b, ADMMConfig cfg) {
    MultiBlockProblem P = build_basis_pursuit_dual(G, b);
    AdmmResult r = classic_admm_2block(P, cfg, Vec::Zero(P.dim_x()), Vec::Zero(P.dim_y()), Vec::Zero(P.dim_z()));
    BasisPursuitSolution s;
    s.x = r.x;
    s.z = r.z;
    s.primal_obj = r.x.lpNorm<1>();
    s.dual_obj = b.dot(r.z);
    s.iterations = r.iterations;
    s.converged = r.converged;
    return s;
}

}  // namespace ipadmm
