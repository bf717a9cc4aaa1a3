#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ipadmm/admm/sgs_admm.hpp"
#include "ipadmm/core/sym_matrix.hpp"

namespace ipadmm {

/// Linear SDP  max <b,z>  s.t.  sum_i z_i A_i + S = C,  S ⪰ 0,  with primal  min <C,X>  s.t.  A X = b, X ⪰ 0.
/// Matrices live in block svec coordinates: a positive block size d contributes svec of a d x d block,
/// a negative size -d contributes the d diagonal entries of a diagonal block.
/// Row i of A is the svec of A_i, so that <A_i, X> = A.row(i) . svec(X).
struct SdpInstance {
    std::vector<int> blocks;
    SpMat A;
    Vec b;
    Vec C;
    std::string name;
    Vec feasible_X;  // optional strictly feasible primal point
    Vec feasible_z;  // optional strictly feasible dual point

    int m() const { return int(b.size()); }
    int nvec() const { return int(C.size()); }
    int order() const {
        int n = 0;
        for (int d : blocks) n += std::abs(d);
        return n;
    }
};

inline int block_svec_dim(const std::vector<int>& blocks) {
    int s = 0;
    for (int d : blocks) {
        if (d == 0) throw InvalidInput("block size 0");
        s += d > 0 ? svec_dim(d) : -d;
    }
    return s;
}

/// PSD cone on the positive blocks, nonnegative orthant on the diagonal blocks.
inline ProxFn sdp_cone(const std::vector<int>& blocks) {
    if (blocks.size() == 1 && blocks[0] > 0) return ProxFn::psd();
    std::vector<std::pair<int, ProxFn>> pieces;
    for (int d : blocks) pieces.push_back(d > 0 ? std::make_pair(svec_dim(d), ProxFn::psd())
                                                : std::make_pair(-d, ProxFn::nonneg()));
    return ProxFn::product(std::move(pieces));
}

/// Block-diagonal dense matrix from block svec coordinates.
inline Mat block_smat(const std::vector<int>& blocks, const Vec& v) {
    int n = 0;
    for (int d : blocks) n += std::abs(d);
    Mat out = Mat::Zero(n, n);
    int off = 0, pos = 0;
    for (int d : blocks) {
        if (d > 0) {
            out.block(pos, pos, d, d) = smat(v.segment(off, svec_dim(d)));
            off += svec_dim(d);
            pos += d;
        } else {
            for (int i = 0; i < -d; ++i) out(pos + i, pos + i) = v[off + i];
            off += -d;
            pos += -d;
        }
    }
    return out;
}

/// Inverse of block_smat; off-block entries are ignored.
inline Vec block_svec(const std::vector<int>& blocks, const Mat& m) {
    Vec out(block_svec_dim(blocks));
    int off = 0, pos = 0;
    for (int d : blocks) {
        if (d > 0) {
            out.segment(off, svec_dim(d)) = svec(Mat(m.block(pos, pos, d, d)));
            off += svec_dim(d);
            pos += d;
        } else {
            for (int i = 0; i < -d; ++i) out[off + i] = m(pos + i, pos + i);
            off += -d;
            pos += -d;
        }
    }
    return out;
}

/// Minimum eigenvalue over all blocks of a block svec point.
inline double block_min_eigenvalue(const std::vector<int>& blocks, const Vec& v) {
    double lo = std::numeric_limits<double>::infinity();
    int off = 0;
    for (int d : blocks) {
        if (d > 0) {
            lo = std::min(lo, min_eigenvalue(smat(v.segment(off, svec_dim(d)))));
            off += svec_dim(d);
        } else {
            lo = std::min(lo, v.segment(off, -d).minCoeff());
            off += -d;
        }
    }
    return lo;
}

inline void validate_sdp(const SdpInstance& inst, bool allow_rank_deficient = false) {
    if (inst.blocks.empty()) throw InvalidInput("sdp instance has no blocks");
    if (block_svec_dim(inst.blocks) != inst.nvec()) throw InvalidInput("C does not match the block structure");
    if (inst.A.rows() != inst.m() || inst.A.cols() != inst.nvec()) throw InvalidInput("A has wrong dimensions");
    if (!inst.b.allFinite() || !inst.C.allFinite()) throw InvalidInput("sdp data is not finite");
    if (inst.m() == 0) return;
    Mat AAt = Mat(inst.A * SpMat(inst.A.transpose()));
    try {
        CholeskyHandle h(AAt, 1e-12);
    } catch (const RankDeficiency& e) {
        if (!allow_rank_deficient)
            throw InvalidInput("sdp constraint matrices are linearly dependent (pivot " + std::to_string(e.pivot()) + ")");
    }
}

/// min δ_K(S) - <b,z>  s.t.  S + A* z = C; the multiplier of the constraint is the primal X.
inline MultiBlockProblem build_sdp_dual(const SdpInstance& inst, bool allow_rank_deficient = false) {
    validate_sdp(inst, allow_rank_deficient);
    MultiBlockProblem P;
    const int nv = inst.nvec();
    P.blocks = {nv};
    P.p = sdp_cone(inst.blocks);
    P.f = std::make_shared<ZeroSmooth>(nv);
    P.F = {identity_map(nv)};
    P.G = sparse_map(inst.A);
    P.b = inst.b;
    P.c = inst.C;
    P.name = inst.name.empty() ? "sdp" : inst.name;
    P.validate(true);
    return P;
}

inline EtaSdp sdp_eta(const SdpInstance& inst, const Vec& X, const Vec& z, const Vec& S) {
    SparseMap A(inst.A, false);
    return eta_sdp(A, inst.b, inst.C, X, z, S, sdp_cone(inst.blocks));
}

struct SdpSolution {
    Vec X, z, S;
    EtaSdp eta;
    double primal_obj = 0, dual_obj = 0;
    int iterations = 0;
    bool converged = false;
    double wall_ms = 0;
    AdmmTrace trace;
};

/// Classic two-block ADMM on the dual, stopped on η_max = max(η_D, η_P, η_S).
inline SdpSolution solve_sdp(const SdpInstance& inst, ADMMConfig cfg) {
    MultiBlockProblem P = build_sdp_dual(inst);
    SparseMap A(inst.A, false);
    ProxFn cone = sdp_cone(inst.blocks);
    cfg.stop_metric = [&inst, &A, cone](const Vec& x, const Vec& y, const Vec& z) {
        return eta_sdp(A, inst.b, inst.C, x, z, y, cone).max;
    };
    Vec x0 = Vec::Zero(P.dim_x()), y0 = Vec::Zero(P.dim_y()), z0 = Vec::Zero(P.dim_z());
    AdmmResult r = classic_admm_2block(P, cfg, x0, y0, z0);
    SdpSolution s;
    s.X = r.x;
    s.z = r.z;
    s.S = r.y;
    s.eta = eta_sdp(A, inst.b, inst.C, s.X, s.z, s.S, cone);
    s.primal_obj = inst.C.dot(s.X);
    s.dual_obj = inst.b.dot(s.z);
    s.iterations = r.iterations;
    s.converged = r.converged;
    s.wall_ms = r.wall_ms;
    s.trace = std::move(r.trace);
    return s;
}

/// n = 2, m = 1: A = trace, b = 1, C = diag(1, 2).
inline SdpInstance toy_sdp() {
    SdpInstance inst;
    inst.blocks = {2};
    inst.A = SpMat(1, 3);
    inst.A.insert(0, svec_index(0, 0)) = 1.0;
    inst.A.insert(0, svec_index(1, 1)) = 1.0;
    inst.A.makeCompressed();
    inst.b = Vec::Constant(1, 1.0);
    Mat C = Mat::Zero(2, 2);
    C(0, 0) = 1.0;
    C(1, 1) = 2.0;
    inst.C = svec(C);
    inst.feasible_X = svec(Mat(0.5 * Mat::Identity(2, 2)));
    inst.feasible_z = Vec::Zero(1);
    inst.name = "toy-sdp";
    return inst;
}

}  // namespace ipadmm
