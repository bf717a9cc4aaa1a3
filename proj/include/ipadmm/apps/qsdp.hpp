#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ipadmm/admm/sgs_admm.hpp"
#include "ipadmm/core/sym_matrix.hpp"

namespace ipadmm {

/// Convex QSDP
///   min 1/2 <X, Q X> - <C, X>   s.t.  A_E X = b_E,  A_I X >= b_I,  X ⪰ 0,
/// in svec coordinates of a single n x n block. Q(X) = 1/2 (QA X QB + QB X QA) when the factors are set.
struct QsdpInstance {
    int n = 0;
    Mat QA, QB;
    MapPtr Q;          // on svec space; built from QA, QB by make_kron_q
    Mat AE, AI;        // rows are svecs of the constraint matrices
    Vec bE, bI;
    Vec C;
    double d_scale = 0;  // D = d_scale I on the slack; 0 selects sqrt(|A_I|)/2
    std::string name;
    Vec feasible_X;     // optional strictly feasible primal point

    int nvec() const { return svec_dim(n); }
    int mE() const { return int(bE.size()); }
    int mI() const { return int(bI.size()); }
};

/// svec form of X -> 1/2 (A X B + B X A).
inline MapPtr make_kron_q(const Mat& A, const Mat& B) {
    const int n = int(A.rows());
    const int nv = svec_dim(n);
    auto fn = [A, B](const Vec& v) {
        Mat X = smat(v);
        Mat Y = 0.5 * (A * X * B + B * X * A);
        return svec(Mat(0.5 * (Y + Y.transpose())));
    };
    return function_map(nv, nv, fn, fn, true);
}

inline double qsdp_d_scale(const QsdpInstance& inst) {
    if (inst.d_scale > 0) return inst.d_scale;
    if (inst.mI() == 0) return 1.0;
    return std::sqrt(spectral_norm(inst.AI)) / 2.0;
}

inline void validate_qsdp(const QsdpInstance& inst) {
    const int nv = inst.nvec();
    if (inst.n < 1) throw InvalidInput("qsdp order must be positive");
    if (!inst.Q || inst.Q->rows() != nv || inst.Q->cols() != nv) throw InvalidInput("qsdp: Q has wrong dimensions");
    if (inst.C.size() != nv) throw InvalidInput("qsdp: C has wrong dimension");
    if (inst.AE.rows() != inst.mE() || (inst.mE() > 0 && inst.AE.cols() != nv))
        throw InvalidInput("qsdp: A_E has wrong dimensions");
    if (inst.AI.rows() != inst.mI() || (inst.mI() > 0 && inst.AI.cols() != nv))
        throw InvalidInput("qsdp: A_I has wrong dimensions");
    if (inst.d_scale < 0) throw InvalidInput("qsdp: D must be positive");
}

/// Where each dual variable lives inside (x, y, z) of the multi-block form.
struct QsdpLayout {
    int nv = 0, mE = 0, mI = 0;
    bool has_W = false, has_zE = false;
    int block_W = -1, block_zE = -1;
    double d = 1.0;
    double q_norm = 0.0;
    /// backward sweep z_E -> W, forward sweep (S,s) -> W -> z_E, then z_I, then the multipliers
    std::string order;
};

struct QsdpModel {
    MultiBlockProblem P;
    QsdpLayout layout;
};

/// Dual in the multi-block form: y = ((S, s), W, z_E), z = z_I,
///   F*y + G*z = c  reads  S - Q W + A_E* z_E + A_I* z_I = -C  and  D s - D z_I = 0,
///   p = δ_PSD(S) + δ_+(s),  f = 1/2 <W, Q W> - <b_E, z_E>,  b = b_I.
/// The multiplier (X, x_s) carries the primal X. Blocks that are empty (m_I = 0, Q = 0, m_E = 0) are dropped.
inline QsdpModel build_qsdp_dual(const QsdpInstance& inst) {
    validate_qsdp(inst);
    QsdpModel M;
    auto& L = M.layout;
    L.nv = inst.nvec();
    L.mE = inst.mE();
    L.mI = inst.mI();
    L.d = qsdp_d_scale(inst);
    L.q_norm = operator_norm(*inst.Q, 1e-12, 2000);
    L.has_W = L.q_norm > 0.0;
    L.has_zE = L.mE > 0;
    const int nv = L.nv, mI = L.mI, mE = L.mE;
    std::vector<int> xdims = {nv};
    if (mI > 0) xdims.push_back(mI);
    const int nx = nv + mI;

    MultiBlockProblem& P = M.P;
    P.p = mI > 0 ? ProxFn::product({{nv, ProxFn::psd()}, {mI, ProxFn::nonneg()}}) : ProxFn::psd();
    P.blocks = {nx};
    P.F.push_back(mI > 0 ? block_diagonal({identity_map(nv), identity_map(mI, L.d)}) : identity_map(nv));
    std::vector<MapPtr> sig = {zero_map(nx)};
    Vec q = Vec::Zero(nx);
    if (L.has_W) {
        L.block_W = int(P.blocks.size());
        P.blocks.push_back(nv);
        std::vector<std::vector<MapPtr>> row = {{scale(-1.0, inst.Q)}};
        if (mI > 0) row[0].push_back(nullptr);
        P.F.push_back(block_map({nv}, xdims, row));
        sig.push_back(inst.Q);
        q.conservativeResize(q.size() + nv);
        q.tail(nv).setZero();
    }
    if (L.has_zE) {
        L.block_zE = int(P.blocks.size());
        P.blocks.push_back(mE);
        std::vector<std::vector<MapPtr>> row = {{dense_map(inst.AE)}};
        if (mI > 0) row[0].push_back(nullptr);
        P.F.push_back(block_map({mE}, xdims, row));
        sig.push_back(zero_map(mE));
        q.conservativeResize(q.size() + mE);
        q.tail(mE) = -inst.bE;
    }
    P.f = std::make_shared<QuadraticSmooth>(block_diagonal(sig), q);
    if (mI > 0) {
        P.G = block_map({mI}, xdims, {{dense_map(inst.AI), identity_map(mI, -L.d)}});
    } else {
        P.G = zero_map(0, nx);
    }
    P.b = inst.bI;
    P.c = Vec::Zero(nx);
    P.c.head(nv) = -inst.C;
    P.name = inst.name.empty() ? "qsdp" : inst.name;
    L.order = "z_E -> W (backward), (S,s) -> W -> z_E (forward), z_I, (X, x_s)";
    P.validate(true);
    return M;
}

/// Proximal terms for the W block: exact mode uses ρI - σQ² with ρ = σ|Q|² + 1e-8, which turns the
/// W subproblem into a solve with Q + ρI; inexact mode uses 1e-8 I and pcg.
inline DBuilder qsdp_proximal_terms(const QsdpInstance& inst, const QsdpLayout& L, AdmmMode mode) {
    MapPtr Q = inst.Q;
    return [Q, L, mode](double sigma) {
        std::vector<MapPtr> D;
        D.push_back(nullptr);
        if (L.has_W) {
            if (mode == AdmmMode::exact) {
                double rho = sigma * L.q_norm * L.q_norm + 1e-8;
                D.push_back(linear_combination({{rho, identity_map(L.nv)}, {-sigma, compose(Q, Q, true)}}));
            } else {
                D.push_back(identity_map(L.nv, 1e-8));
            }
        }
        if (L.has_zE) D.push_back(nullptr);
        return D;
    };
}

struct QsdpPoint {
    Vec X, W, S, s, zE, zI;
};

inline QsdpPoint qsdp_unpack(const QsdpModel& M, const Vec& x, const Vec& y, const Vec& z) {
    const auto& L = M.layout;
    QsdpPoint u;
    u.X = x.head(L.nv);
    u.S = y.head(L.nv);
    u.s = y.segment(L.nv, L.mI);
    int off = L.nv + L.mI;
    if (L.has_W) {
        u.W = y.segment(off, L.nv);
        off += L.nv;
    } else {
        u.W = Vec::Zero(L.nv);
    }
    u.zE = L.has_zE ? Vec(y.segment(off, L.mE)) : Vec();
    u.zI = z;
    return u;
}

inline EtaQsdp qsdp_eta(const QsdpInstance& inst, const QsdpModel& M, const Vec& x, const Vec& y, const Vec& z) {
    QsdpPoint u = qsdp_unpack(M, x, y, z);
    DenseMap AE(inst.AE, false), AI(inst.AI, false);
    return eta_qsdp(*inst.Q, M.layout.q_norm, AE, inst.bE, AI, inst.bI, inst.C, u.X, u.W, u.S, u.zE, u.zI);
}

struct QsdpSolution {
    QsdpPoint point;
    EtaQsdp eta;
    int iterations = 0;
    bool converged = false;
    double wall_ms = 0;
    int sigma_changes = 0;
};

inline QsdpSolution solve_qsdp(const QsdpInstance& inst, ADMMConfig cfg) {
    QsdpModel M = build_qsdp_dual(inst);
    if (!cfg.D) cfg.D = qsdp_proximal_terms(inst, M.layout, cfg.mode);
    DenseMap AE(inst.AE, false), AI(inst.AI, false);
    const QsdpModel* MM = &M;
    cfg.stop_metric = [&inst, MM, &AE, &AI](const Vec& x, const Vec& y, const Vec& z) {
        QsdpPoint u = qsdp_unpack(*MM, x, y, z);
        return eta_qsdp(*inst.Q, MM->layout.q_norm, AE, inst.bE, AI, inst.bI, inst.C, u.X, u.W, u.S, u.zE, u.zI)
            .max;
    };
    const auto& P = M.P;
    AdmmResult r = run_admm(P, cfg, Vec::Zero(P.dim_x()), Vec::Zero(P.dim_y()), Vec::Zero(P.dim_z()));
    QsdpSolution s;
    s.point = qsdp_unpack(M, r.x, r.y, r.z);
    s.eta = qsdp_eta(inst, M, r.x, r.y, r.z);
    s.iterations = r.iterations;
    s.converged = r.converged;
    s.wall_ms = r.wall_ms;
    s.sigma_changes = r.sigma_changes;
    return s;
}

}  // namespace ipadmm
