#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ipadmm/apps/basis_pursuit.hpp"
#include "ipadmm/apps/lasso.hpp"
#include "ipadmm/apps/qsdp.hpp"
#include "ipadmm/apps/sdp.hpp"
#include "ipadmm/ipalm/ipalm.hpp"

namespace ipadmm {

namespace gen {

inline Mat gaussian(std::mt19937_64& rng, int r, int c) {
    std::normal_distribution<double> nd;
    Mat m(r, c);
    for (int j = 0; j < c; ++j)
        for (int i = 0; i < r; ++i) m(i, j) = nd(rng);
    return m;
}

inline Vec gaussian(std::mt19937_64& rng, int n) { return gaussian(rng, n, 1).col(0); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random PSD matrix of the given rank.
inline Mat psd_of_rank(std::mt19937_64& rng, int n, int rank) {
    Mat U = gaussian(rng, n, rank);
    return U * U.transpose() / std::max(1, rank);
}

inline Mat spd(std::mt19937_64& rng, int n, double shift) {
    Mat U = gaussian(rng, n, n);
    return U * U.transpose() / n + shift * Mat::Identity(n, n);
}

}  // namespace gen

/// A_1 = I and A_2..A_m random sparse symmetric matrices; b = A X0 and C = A* z0 + S0 for
/// planted X0, S0 ≻ 0, so both sides are strictly feasible.
inline SdpInstance gen_random_sdp(int n, int m, std::uint64_t seed) {
    if (n < 2) throw InvalidInput("sdp generator needs n >= 2");
    if (m < 1 || m > svec_dim(n)) throw InvalidInput("sdp generator needs 1 <= m <= n(n+1)/2");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::normal_distribution<double> nd;
    const int nv = svec_dim(n);
    SdpInstance inst;
    inst.blocks = {n};
    inst.name = "rand-sdp-n" + std::to_string(n) + "-m" + std::to_string(m) + "-s" + std::to_string(seed);
    for (int attempt = 0;; ++attempt) {
        Mat A = Mat::Zero(m, nv);
        A.row(0) = svec(Mat(Mat::Identity(n, n))).transpose();
        for (int i = 1; i < m; ++i) {
            Mat Ai = Mat::Zero(n, n);
            const int nnz = std::max(2, n / 2 + 1);
            for (int t = 0; t < nnz; ++t) {
                int r = pick(rng), c = pick(rng);
                double v = nd(rng);
                Ai(r, c) += v;
                if (r != c) Ai(c, r) += v;
            }
            A.row(i) = svec(Ai).transpose();
        }
        Mat AAt = A * A.transpose();
        bool ok = true;
        try {
            CholeskyHandle h(AAt, 1e-10);
        } catch (const RankDeficiency&) {
            ok = false;
        }
        if (!ok && attempt < 50) continue;
        if (!ok) throw NumericalFailure("sdp generator could not draw independent constraints", attempt);
        inst.A = A.sparseView();
        inst.A.makeCompressed();
        break;
    }
    Mat X0 = gen::spd(rng, n, 0.5);
    Mat S0 = gen::spd(rng, n, 0.5);
    Vec z0 = gen::gaussian(rng, m);
    inst.feasible_X = svec(X0);
    inst.feasible_z = z0;
    inst.b = inst.A * inst.feasible_X;
    inst.C = Vec(inst.A.transpose() * z0) + svec(S0);
    return inst;
}

/// QSDP relaxation of a binary integer quadratic program on n - 1 variables: the last index of the
/// order-n matrix carries the constant 1. Equalities diag(X̄) = x and X_nn = 1; per pair i < j the
/// inequalities x_i - X̄_ij >= 0, x_j - X̄_ij >= 0, X̄_ij - x_i - x_j >= -1. Q(X) = 1/2 (A X B + B X A)
/// with random PSD A, B of ranks rank_A, rank_B.
inline QsdpInstance gen_biq_qsdp(int n, int rank_A, int rank_B, std::uint64_t seed) {
    if (n < 2) throw InvalidInput("biq generator needs n >= 2");
    if (rank_A < 0 || rank_B < 0 || rank_A > n || rank_B > n) throw InvalidInput("biq generator: rank out of range");
    std::mt19937_64 rng(seed);
    const int p = n - 1, last = n - 1, nv = svec_dim(n);
    auto unit = [n](int i, int j) {
        Mat E = Mat::Zero(n, n);
        E(i, j) += 0.5;
        E(j, i) += 0.5;
        return E;
    };
    QsdpInstance inst;
    inst.n = n;
    inst.name = "biq-qsdp-n" + std::to_string(n) + "-s" + std::to_string(seed);
    inst.AE = Mat(n, nv);
    inst.bE = Vec::Zero(n);
    for (int i = 0; i < p; ++i) inst.AE.row(i) = svec(Mat(unit(i, i) - unit(i, last))).transpose();
    inst.AE.row(p) = svec(unit(last, last)).transpose();
    inst.bE[p] = 1.0;
    const int mI = 3 * p * (p - 1) / 2;
    inst.AI = Mat(mI, nv);
    inst.bI = Vec(mI);
    int r = 0;
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) {
            inst.AI.row(r) = svec(Mat(unit(i, last) - unit(i, j))).transpose();
            inst.bI[r++] = 0.0;
            inst.AI.row(r) = svec(Mat(unit(j, last) - unit(i, j))).transpose();
            inst.bI[r++] = 0.0;
            inst.AI.row(r) = svec(Mat(unit(i, j) - unit(i, last) - unit(j, last))).transpose();
            inst.bI[r++] = -1.0;
        }
    Mat Qb = gen::gaussian(rng, p, p);
    Qb = 0.5 * (Qb + Qb.transpose());
    Vec cb = gen::gaussian(rng, p);
    Mat C = Mat::Zero(n, n);
    C.topLeftCorner(p, p) = -0.5 * Qb;
    C.block(0, last, p, 1) = -0.5 * cb;
    C.block(last, 0, 1, p) = -0.5 * cb.transpose();
    inst.C = svec(C);
    inst.QA = rank_A > 0 ? gen::psd_of_rank(rng, n, rank_A) : Mat(Mat::Zero(n, n));
    inst.QB = rank_B > 0 ? gen::psd_of_rank(rng, n, rank_B) : Mat(Mat::Zero(n, n));
    inst.Q = make_kron_q(inst.QA, inst.QB);
    Mat X = Mat::Zero(n, n);
    X.topLeftCorner(p, p) = 0.25 * Mat::Ones(p, p) + 0.25 * Mat::Identity(p, p);
    X.block(0, last, p, 1).setConstant(0.5);
    X.block(last, 0, 1, p).setConstant(0.5);
    X(last, last) = 1.0;
    inst.feasible_X = svec(X);
    return inst;
}

/// Random constrained lasso whose constraints hold strictly at a planted point.
inline LassoInstance gen_random_lasso(int n, int mE, int mI, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    LassoInstance inst;
    inst.Phi = gen::gaussian(rng, n + 2, n);
    inst.eta = gen::gaussian(rng, n + 2);
    inst.lambda = gen::uniform(rng, 0.2, 1.0);
    Vec x0 = gen::gaussian(rng, n);
    if (mE > 0) {
        inst.AE = gen::gaussian(rng, mE, n);
        inst.bE = inst.AE * x0;
    }
    if (mI > 0) {
        inst.AI = gen::gaussian(rng, mI, n);
        inst.bI = inst.AI * x0;
        for (int i = 0; i < mI; ++i) inst.bI[i] -= gen::uniform(rng, 0.1, 1.0);
    }
    inst.name = "rand-lasso-n" + std::to_string(n) + "-s" + std::to_string(seed);
    return inst;
}

struct BasisPursuitInstance {
    Mat G;
    Vec b;
};

inline BasisPursuitInstance gen_random_basis_pursuit(int m, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    BasisPursuitInstance inst;
    inst.G = gen::gaussian(rng, m, n);
    Vec x0 = Vec::Zero(n);
    for (int i = 0; i < std::max(1, m / 2); ++i) x0[i * 2 % n] = gen::uniform(rng, -2.0, 2.0);
    inst.b = inst.G * x0;
    return inst;
}

struct PlantedProblem {
    MultiBlockProblem P;
    KKTPoint solution;
};

/// Random multi-block instance with a planted KKT point: p = nonneg on y_1, f = 1/2<y,Qy> + <q,y>
/// with a singular PSD Q coupling all blocks, dense F_i and G. With rank_deficient_G the last row of
/// G is the sum of the first two.
inline PlantedProblem gen_random_multiblock(const std::vector<int>& dims, int nx, int nz, std::uint64_t seed,
                                            bool rank_deficient_G = false) {
    if (dims.empty()) throw InvalidInput("multi-block generator needs at least one block");
    for (int d : dims)
        if (d < 1 || d > nx) throw InvalidInput("multi-block generator needs 1 <= block size <= dim x");
    if (rank_deficient_G && nz < 3) throw InvalidInput("rank-deficient G needs nz >= 3");
    std::mt19937_64 rng(seed);
    PlantedProblem out;
    MultiBlockProblem& P = out.P;
    P.blocks = dims;
    const int ny = P.dim_y(), n1 = dims[0];
    for (int d : dims) P.F.push_back(dense_map(gen::gaussian(rng, d, nx) / std::sqrt(double(nx))));
    Mat G = gen::gaussian(rng, nz, nx) / std::sqrt(double(nx));
    if (rank_deficient_G) G.row(nz - 1) = G.row(0) + G.row(1);
    P.G = nz > 0 ? dense_map(G) : zero_map(0, nx);
    Mat L = gen::gaussian(rng, ny, std::max(1, ny / 2)) / std::sqrt(double(ny));
    Mat Q = L * L.transpose();

    Vec xs = gen::gaussian(rng, nx);
    Vec ys = gen::gaussian(rng, ny);
    Vec r1 = Vec::Zero(n1);
    for (int j = 0; j < n1; ++j) {
        if (j % 2 == 0) {
            ys[j] = 0.0;
            r1[j] = gen::uniform(rng, 0.1, 1.0);
        } else {
            ys[j] = gen::uniform(rng, 0.1, 1.0);
        }
    }
    Vec zs = gen::gaussian(rng, nz);
    if (nz > 0) zs = G * (G.transpose() * zs) / 2.0;  // in range(G)
    P.p = ProxFn::nonneg();
    P.c = Vec::Zero(nx);
    P.c = P.Fstar(ys) + (nz > 0 ? Vec(G.transpose() * zs) : Vec(Vec::Zero(nx)));
    P.b = nz > 0 ? Vec(G * xs) : Vec();
    Vec q = -Q * ys - P.Fx(xs);
    q.head(n1) += r1;
    P.f = std::make_shared<QuadraticSmooth>(symmetric_map(Q), q);
    P.name = "rand-multiblock-s" + std::to_string(seed);
    P.validate(true);
    out.solution = {xs, ys, zs};
    return out;
}

struct PlantedGeneric {
    GenericProblem gp;
    Vec x, w;
};

/// Random instance of the generic model with a planted solution: φ = nonneg on the first phi_dim
/// coordinates, h = 1/2<w,Hw> + <g,w> with singular PSD H, plus a log-sum-exp term on the tail
/// when `nonquadratic` (majorized by H + I there).
inline PlantedGeneric gen_random_generic(int nw, int nx, int phi_dim, std::uint64_t seed, bool nonquadratic = false) {
    if (phi_dim < 0 || phi_dim > nw || nx < 1 || nx > nw) throw InvalidInput("generic generator: bad dimensions");
    std::mt19937_64 rng(seed);
    PlantedGeneric out;
    Mat A = gen::gaussian(rng, nw, nx) / std::sqrt(double(nw));
    Mat L = gen::gaussian(rng, nw, std::max(1, nw / 2)) / std::sqrt(double(nw));
    Mat H = L * L.transpose();
    Vec ws = gen::gaussian(rng, nw), xs = gen::gaussian(rng, nx);
    Vec r = Vec::Zero(nw);
    for (int j = 0; j < phi_dim; ++j) {
        if (j % 2 == 0) {
            ws[j] = 0.0;
            r[j] = gen::uniform(rng, 0.1, 1.0);
        } else {
            ws[j] = gen::uniform(rng, 0.1, 1.0);
        }
    }
    const int tail = nw - phi_dim;
    auto lse = std::make_shared<LogSumExp>(std::max(tail, 1));
    Vec glse = Vec::Zero(nw);
    if (nonquadratic && tail > 0) glse.tail(tail) = lse->gradient(ws.tail(tail));
    Vec g = -H * ws - glse - A * xs + r;
    Mat Sig = H;
    if (nonquadratic && tail > 0) Sig.bottomRightCorner(tail, tail) += Mat::Identity(tail, tail);
    bool nq = nonquadratic && tail > 0;
    auto value = [H, g, lse, nq, tail](const Vec& w) {
        double v = 0.5 * w.dot(H * w) + g.dot(w);
        if (nq) v += lse->value(w.tail(tail));
        return v;
    };
    auto grad = [H, g, lse, nq, tail](const Vec& w) {
        Vec d = H * w + g;
        if (nq) d.tail(tail) += lse->gradient(w.tail(tail));
        return d;
    };
    out.gp.phi = ProxFn::nonneg();
    out.gp.phi_dim = phi_dim;
    out.gp.h = nq ? SmoothPtr(std::make_shared<CallableSmooth>(nw, value, grad, symmetric_map(Sig)))
                  : SmoothPtr(std::make_shared<QuadraticSmooth>(symmetric_map(H), g));
    out.gp.A = dense_map(A);
    out.gp.c = A.transpose() * ws;
    out.gp.name = "rand-generic-s" + std::to_string(seed);
    out.x = xs;
    out.w = ws;
    return out;
}

}  // namespace ipadmm
