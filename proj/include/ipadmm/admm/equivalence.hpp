#pragma once

#include <cmath>
#include <vector>

#include "ipadmm/admm/sgs_admm.hpp"
#include "ipadmm/ipalm/ipalm.hpp"

namespace ipadmm {

/// The sGS-ADMM problem written as an instance of the generic model in the variable v = (y, ζ), z = U ζ,
/// where the columns of U span range(G):
///   h(v) = f(y) - <U'b, ζ>,  A x = (F x; U' G x),  φ = p on y_1,
/// and the proximal term T = blockdiag(D + N_sGS + σ F G*(G G*)^† G F*, 0).
struct Reformulation {
    GenericProblem gp;
    Mat T;
    Mat U;      // nz x r
    Mat F, G;   // dense F: X -> Y and G: X -> Z
    Mat GGpinv; // (G G*)^†
    Mat Nsgs;
    int ny = 0, r = 0;
};

inline Reformulation build_reformulation(const MultiBlockProblem& P, const SGSDecomposition& dec, int cap = 500) {
    Reformulation R;
    const int ny = P.dim_y(), nx = P.dim_x(), nz = P.dim_z();
    if (ny + nz > cap) throw SizeLimit("reformulation is assembled densely");
    R.ny = ny;
    R.F = P.F_stacked()->to_dense();
    R.G = nz > 0 ? Mat(P.G->to_dense()) : Mat(Mat::Zero(0, nx));
    R.U = nz > 0 ? range_basis(Mat(R.G)) : Mat(Mat::Zero(0, 0));
    R.r = int(R.U.cols());
    R.GGpinv = nz > 0 ? dense_pinv_sym(Mat(R.G * R.G.transpose())) : Mat(Mat::Zero(0, 0));

    const double sigma = dec.sigma();
    Mat N = dec.dense_N(cap);
    Mat Nd = Mat::Zero(ny, ny), Nu = Mat::Zero(ny, ny), Dd = Mat::Zero(ny, ny);
    for (int i = 0; i < dec.num_blocks(); ++i) {
        const auto& hi = dec.handle(i);
        Nd.block(hi.offset, hi.offset, hi.dim, hi.dim) = N.block(hi.offset, hi.offset, hi.dim, hi.dim);
        Mat di = dec.D()[i]->to_dense();
        Dd.block(hi.offset, hi.offset, hi.dim, hi.dim) = 0.5 * (di + di.transpose());
        for (int j = i + 1; j < dec.num_blocks(); ++j) {
            const auto& hj = dec.handle(j);
            Nu.block(hi.offset, hj.offset, hi.dim, hj.dim) = N.block(hi.offset, hj.offset, hi.dim, hj.dim);
        }
    }
    R.Nsgs = Nu * Nd.ldlt().solve(Mat(Nu.transpose()));
    R.Nsgs = 0.5 * (R.Nsgs + R.Nsgs.transpose());
    const int nv = ny + R.r;
    R.T = Mat::Zero(nv, nv);
    Mat Tyy = Dd + R.Nsgs;
    if (nz > 0) Tyy += sigma * R.F * R.G.transpose() * R.GGpinv * R.G * R.F.transpose();
    R.T.topLeftCorner(ny, ny) = 0.5 * (Tyy + Tyy.transpose());

    Mat A(nv, nx);
    A.topRows(ny) = R.F;
    if (R.r > 0) A.bottomRows(R.r) = R.U.transpose() * R.G;
    Vec Ub = R.r > 0 ? Vec(R.U.transpose() * P.b) : Vec();
    SmoothPtr f = P.f;
    Mat SigF = f->sigma_hat()->to_dense();
    Mat Sig = Mat::Zero(nv, nv);
    Sig.topLeftCorner(ny, ny) = 0.5 * (SigF + SigF.transpose());
    auto value = [f, ny, Ub](const Vec& v) { return f->value(v.head(ny)) - (Ub.size() ? Ub.dot(v.tail(Ub.size())) : 0.0); };
    auto grad = [f, ny, Ub, nv](const Vec& v) {
        Vec g(nv);
        g.head(ny) = f->gradient(v.head(ny));
        if (Ub.size()) g.tail(Ub.size()) = -Ub;
        return g;
    };
    R.gp.phi = P.p;
    R.gp.phi_dim = P.blocks[0];
    R.gp.h = std::make_shared<CallableSmooth>(nv, value, grad, dense_map(Sig));
    R.gp.A = dense_map(A);
    R.gp.c = P.c;
    R.gp.name = P.name + "/alm-view";
    return R;
}

/// v = (y, U'z)
inline Vec to_v(const Reformulation& R, const Vec& y, const Vec& z) {
    Vec v(R.ny + R.r);
    v.head(R.ny) = y;
    if (R.r > 0) v.tail(R.r) = R.U.transpose() * z;
    return v;
}

/// 1/2 P + σ B B* + T ≻ 0 in the v coordinates, with P = blockdiag(Σ̂_f, 0) and B* v = F* y + G* U ζ.
inline double alm_view_min_eig(const Reformulation& R, double sigma) {
    IPALMConfig cfg;
    cfg.sigma = sigma;
    cfg.S = dense_map(R.T);
    IpalmOperators op = assemble_operators(R.gp, cfg);
    return min_eigenvalue(Mat(0.5 * op.Sigma + sigma * op.AAt + op.S));
}

struct AlmView {
    std::vector<Vec> Delta, gamma;  // per step
    std::vector<double> eps_hat;    // |(Δ^k; γ^k)|
    double max_inclusion = 0;       // (Δ^k; γ^k) ∈ ∂_v L_σ(v^{k+1}; x^k) + T (v^{k+1} - v^k)
    double max_range = 0;           // distance of γ^k from range(G)
    double min_eig = 0;             // λmin(1/2 P + σ B B* + T)
    double sum_eps_hat = 0;
};

/// Reconstructs the ALM-view residuals of an sGS-ADMM trace at fixed σ.
inline AlmView reconstruct_alm_view(const MultiBlockProblem& P, const SGSDecomposition& dec, const Reformulation& R,
                                    const AdmmTrace& tr) {
    if (tr.x.empty()) throw Misuse("reconstruct_alm_view needs recorded iterates");
    for (double s : tr.sigma)
        if (s != dec.sigma()) throw Misuse("reconstruct_alm_view needs a fixed-sigma trace");
    AlmView view;
    const double sigma = dec.sigma();
    const double tau = tr.tau;
    const int K = tr.iterations(), ny = P.dim_y(), nz = P.dim_z();
    view.min_eig = alm_view_min_eig(R, sigma);
    Mat FGpinv = nz > 0 ? Mat(R.F * R.G.transpose() * R.GGpinv) : Mat(Mat::Zero(ny, 0));

    // x^{-1} and γ^{-1} make the k = 0 correction vanish
    Vec x_prev = tr.x[0] - tau * sigma * P.constraint(tr.y[0], tr.z[0]);
    Vec g_prev = nz > 0 ? Vec(-P.b + P.Gx(x_prev) + sigma * P.Gx(P.constraint(tr.y[0], tr.z[0]))) : Vec();
    for (int k = 0; k < K; ++k) {
        Vec dsgs = aggregate_error(dec, tr.delta[k], tr.delta_tilde[k]);
        Vec Delta = dsgs;
        if (nz > 0) Delta -= FGpinv * (g_prev - tr.gamma[k] - P.Gx(Vec(x_prev - tr.x[k])));
        view.Delta.push_back(Delta);
        view.gamma.push_back(tr.gamma[k]);
        double e = std::sqrt(Delta.squaredNorm() + (nz > 0 ? tr.gamma[k].squaredNorm() : 0.0));
        view.eps_hat.push_back(e);
        view.sum_eps_hat += e;

        // inclusion in the v coordinates
        const Vec &xk = tr.x[k], &yk = tr.y[k], &yn = tr.y[k + 1], &zn = tr.z[k + 1];
        Vec cons = P.constraint(yn, zn);
        Vec gy = P.f->gradient(yk) + P.f->sigma_hat()->apply(Vec(yn - yk)) + P.Fx(xk) + sigma * P.Fx(cons) +
                 R.T.topLeftCorner(ny, ny) * (yn - yk);
        const int n1 = P.blocks[0];
        double inc = inclusion_residual(P.p, yn.head(n1), Vec(Delta.head(n1) - gy.head(n1)));
        inc = std::max(inc, (Delta.tail(ny - n1) - gy.tail(ny - n1)).norm());
        if (nz > 0) {
            Vec gz = -P.b + P.Gx(xk) + sigma * P.Gx(cons);
            inc = std::max(inc, (tr.gamma[k] - gz).norm());
            Vec proj = R.U * (R.U.transpose() * tr.gamma[k]);
            view.max_range = std::max(view.max_range, (tr.gamma[k] - proj).norm());
        }
        view.max_inclusion = std::max(view.max_inclusion, inc);
        x_prev = xk;
        g_prev = nz > 0 ? tr.gamma[k] : Vec();
    }
    return view;
}

/// x^0 with G x^0 = b (minimum norm) and z^0 from the Step-3 equation at y^0, so that the ALM-view
/// correction vanishes for exact solves.
inline KKTPoint consistent_start(const MultiBlockProblem& P, const Vec& y0, double sigma) {
    KKTPoint u;
    u.y = y0;
    const int nz = P.dim_z();
    if (nz == 0) {
        u.x = Vec::Zero(P.dim_x());
        u.z = Vec();
        return u;
    }
    Mat G = P.G->to_dense();
    Mat pinv = dense_pinv_sym(Mat(G * G.transpose()));
    u.x = G.transpose() * (pinv * P.b);
    Vec r = (P.b - G * u.x) / sigma - G * (P.Fstar(y0) - P.c);
    u.z = pinv * r;
    return u;
}

struct EquivalenceReport {
    double max_dx = 0, max_dy = 0, max_dz = 0;  // |x - x'|, |y - y'|, |Π z - U ζ'| over all k
    int iterations = 0;
    AlmView view;
    bool passed = false;
};

/// Runs sGS-ADMM for `iters` steps at fixed σ and the generic iteration on the reformulation from the
/// same start. With `inject`, the reconstructed (Δ^k; U'γ^k) are fed to the generic iteration, which
/// then reproduces an arbitrary start as well.
inline EquivalenceReport run_equivalence(const MultiBlockProblem& P, ADMMConfig cfg, const KKTPoint& u0, int iters,
                                         bool inject, double tol = 1e-9) {
    cfg.adaptive.enabled = false;
    cfg.stop_tol = 0.0;
    cfg.max_iter = iters;
    cfg.record_iterates = true;
    AdmmResult ar = run_admm(P, cfg, u0.x, u0.y, u0.z);
    DecompositionOptions dopt = cfg.decomp;
    if (cfg.mode == AdmmMode::exact) dopt.iterative_blocks = false;
    SGSDecomposition dec(P, build_D(P, cfg, cfg.sigma), cfg.sigma, dopt);
    Reformulation R = build_reformulation(P, dec);
    EquivalenceReport rep;
    rep.view = reconstruct_alm_view(P, dec, R, ar.trace);

    IPALMConfig ic;
    ic.sigma = cfg.sigma;
    ic.tau = cfg.tau;
    ic.S = dense_map(R.T);
    ic.max_iter = iters;
    ic.stop_tol = -1.0;
    if (inject) {
        const AlmView* view = &rep.view;
        const Reformulation* RR = &R;
        ic.inject = [view, RR](int k) {
            Vec d(RR->ny + RR->r);
            d.head(RR->ny) = view->Delta[k];
            if (RR->r > 0) d.tail(RR->r) = RR->U.transpose() * view->gamma[k];
            return d;
        };
    }
    IpalmResult ir = run_ipalm(R.gp, ic, u0.x, to_v(R, u0.y, u0.z));
    rep.iterations = std::min(ar.trace.iterations(), ir.trace.iterations());
    for (int k = 0; k <= rep.iterations; ++k) {
        rep.max_dx = std::max(rep.max_dx, (ar.trace.x[k] - ir.trace.x[k]).norm());
        rep.max_dy = std::max(rep.max_dy, (ar.trace.y[k] - ir.trace.w[k].head(R.ny)).norm());
        if (R.r > 0) {
            Vec pz = R.U * (R.U.transpose() * ar.trace.z[k]);
            rep.max_dz = std::max(rep.max_dz, (pz - R.U * ir.trace.w[k].tail(R.r)).norm());
        }
    }
    rep.passed = rep.iterations == iters && rep.max_dx <= tol && rep.max_dy <= tol && rep.max_dz <= tol;
    return rep;
}

}  // namespace ipadmm
