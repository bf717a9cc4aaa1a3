#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "ipadmm/apps/lasso.hpp"
#include "ipadmm/apps/qsdp.hpp"
#include "ipadmm/apps/sdp.hpp"

namespace ipadmm {

/// Brute-force ground truth for desk-scale instances. None of these routines call the splitting solvers.

struct OracleResult {
    Vec x;
    double value = std::numeric_limits<double>::infinity();
    long candidates = 0;  // subproblems examined
    bool found = false;
};

/// min 1/2 x'Hx + g'x  s.t.  A x = b, through the dense KKT system; nullopt if that system is inconsistent.
inline std::optional<Vec> solve_eq_qp(const Mat& H, const Vec& g, const Mat& A, const Vec& b) {
    const int n = int(H.rows()), m = int(A.rows());
    Mat K = Mat::Zero(n + m, n + m);
    K.topLeftCorner(n, n) = H;
    if (m > 0) {
        K.topRightCorner(n, m) = A.transpose();
        K.bottomLeftCorner(m, n) = A;
    }
    Vec rhs(n + m);
    rhs.head(n) = -g;
    if (m > 0) rhs.tail(m) = b;
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(K);
    Vec sol = cod.solve(rhs);
    if ((K * sol - rhs).norm() > 1e-9 * (1.0 + rhs.norm() + K.norm() * sol.norm() * 1e-3)) return std::nullopt;
    return Vec(sol.head(n));
}

/// min 1/2 x'Hx + g'x  s.t.  A_eq x = b_eq,  A_in x >= b_in, for convex H, by enumerating all active
/// subsets of the inequality rows.
inline OracleResult oracle_small_qp(const Mat& H, const Vec& g, const Mat& Aeq, const Vec& beq, const Mat& Ain,
                                    const Vec& bin, double feas_tol = 1e-9) {
    const int n = int(H.rows()), me = int(beq.size()), mi = int(bin.size());
    if (n + me > 24 || mi > 16 || n > 12) throw SizeLimit("oracle_small_qp: instance exceeds the enumeration cap");
    OracleResult best;
    for (long mask = 0; mask < (1L << mi); ++mask) {
        std::vector<int> act;
        for (int i = 0; i < mi; ++i)
            if (mask & (1L << i)) act.push_back(i);
        Mat A(me + int(act.size()), n);
        Vec b(me + int(act.size()));
        if (me > 0) {
            A.topRows(me) = Aeq;
            b.head(me) = beq;
        }
        for (size_t k = 0; k < act.size(); ++k) {
            A.row(me + int(k)) = Ain.row(act[k]);
            b[me + int(k)] = bin[act[k]];
        }
        ++best.candidates;
        auto x = solve_eq_qp(H, g, A, b);
        if (!x) continue;
        if (mi > 0 && (Ain * *x - bin).minCoeff() < -feas_tol * (1.0 + bin.norm())) continue;
        if (me > 0 && (Aeq * *x - beq).norm() > feas_tol * (1.0 + beq.norm())) continue;
        double v = 0.5 * x->dot(H * *x) + g.dot(*x);
        if (v < best.value) {
            best.value = v;
            best.x = *x;
            best.found = true;
        }
    }
    return best;
}

/// Constrained lasso by enumerating sign patterns {-,0,+}^n and active inequality subsets; each
/// pattern gives an equality-constrained least-squares problem on the free coordinates.
inline OracleResult oracle_lasso(const LassoInstance& inst, double feas_tol = 1e-9) {
    validate_lasso(inst);
    const int n = inst.n(), me = inst.mE(), mi = inst.mI();
    if (n > 8 || mi > 6) throw SizeLimit("oracle_lasso: instance exceeds the enumeration cap");
    long patterns = 1;
    for (int i = 0; i < n; ++i) patterns *= 3;
    const Mat Q = inst.Phi.transpose() * inst.Phi;
    const Vec r = inst.Phi.transpose() * inst.eta;
    OracleResult best;
    std::vector<int> sign(n);
    for (long code = 0; code < patterns; ++code) {
        long c = code;
        std::vector<int> freeidx;
        for (int i = 0; i < n; ++i) {
            sign[i] = int(c % 3) - 1;
            c /= 3;
            if (sign[i] != 0) freeidx.push_back(i);
        }
        const int nf = int(freeidx.size());
        Mat Hf(nf, nf);
        Vec gf(nf);
        for (int a = 0; a < nf; ++a) {
            gf[a] = -r[freeidx[a]] + inst.lambda * sign[freeidx[a]];
            for (int b2 = 0; b2 < nf; ++b2) Hf(a, b2) = Q(freeidx[a], freeidx[b2]);
        }
        for (long mask = 0; mask < (1L << mi); ++mask) {
            std::vector<int> act;
            for (int i = 0; i < mi; ++i)
                if (mask & (1L << i)) act.push_back(i);
            const int ma = me + int(act.size());
            Mat A(ma, nf);
            Vec b(ma);
            for (int k = 0; k < me; ++k) {
                for (int a = 0; a < nf; ++a) A(k, a) = inst.AE(k, freeidx[a]);
                b[k] = inst.bE[k];
            }
            for (size_t k = 0; k < act.size(); ++k) {
                for (int a = 0; a < nf; ++a) A(me + int(k), a) = inst.AI(act[k], freeidx[a]);
                b[me + int(k)] = inst.bI[act[k]];
            }
            ++best.candidates;
            std::optional<Vec> xf;
            if (nf == 0) {
                if (b.size() > 0 && b.norm() > feas_tol) continue;
                xf = Vec();
            } else {
                xf = solve_eq_qp(Hf, gf, A, b);
            }
            if (!xf) continue;
            Vec x = Vec::Zero(n);
            bool ok = true;
            for (int a = 0; a < nf; ++a) {
                x[freeidx[a]] = (*xf)[a];
                if (sign[freeidx[a]] * (*xf)[a] < -1e-12) ok = false;
            }
            if (!ok) continue;
            if (me > 0 && (inst.AE * x - inst.bE).norm() > feas_tol * (1.0 + inst.bE.norm())) continue;
            if (mi > 0 && (inst.AI * x - inst.bI).minCoeff() < -feas_tol * (1.0 + inst.bI.norm())) continue;
            double v = lasso_objective(inst, x);
            if (v < best.value) {
                best.value = v;
                best.x = x;
                best.found = true;
            }
        }
    }
    return best;
}

/// min |x|_1  s.t.  G x = b as the LP  min 1'u  s.t.  [G, -G] u = b, u >= 0, by enumerating bases.
inline OracleResult oracle_basis_pursuit(const Mat& G, const Vec& b, double tol = 1e-10) {
    const int m = int(G.rows()), n = int(G.cols());
    if (n > 8 || m > 6) throw SizeLimit("oracle_basis_pursuit: instance exceeds the enumeration cap");
    Mat W(m, 2 * n);
    W << G, -G;
    Eigen::FullPivLU<Mat> lu(G);
    const int r = int(lu.rank());
    OracleResult best;
    if (b.norm() <= tol) {
        best.x = Vec::Zero(n);
        best.value = 0.0;
        best.found = true;
        return best;
    }
    std::vector<int> cols(r);
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == r) {
            Mat B(m, r);
            for (int k = 0; k < r; ++k) B.col(k) = W.col(cols[k]);
            ++best.candidates;
            Eigen::ColPivHouseholderQR<Mat> qr(B);
            if (qr.rank() < r) return;
            Vec u = qr.solve(b);
            if ((B * u - b).norm() > 1e-9 * (1.0 + b.norm())) return;
            if (u.minCoeff() < -tol) return;
            Vec x = Vec::Zero(n);
            for (int k = 0; k < r; ++k) x[cols[k] % n] += cols[k] < n ? u[k] : -u[k];
            double v = u.sum();
            if (v < best.value) {
                best.value = v;
                best.x = x;
                best.found = true;
            }
            return;
        }
        for (int c = start; c < 2 * n; ++c) {
            cols[depth] = c;
            rec(c + 1, depth + 1);
        }
    };
    rec(0, 0);
    return best;
}

/// Largest t with level(t) >= 0 on [lo, hi] for a function that is nonnegative at lo.
template <class Fn>
inline double bisect_level(Fn feasible, double lo, double hi, int iters = 200) {
    for (int it = 0; it < iters && hi - lo > 1e-13 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
        double mid = 0.5 * (lo + hi);
        if (feasible(mid)) lo = mid;
        else hi = mid;
    }
    return lo;
}

/// Dual value of a linear SDP with m <= 2: bisection on the level V of <b, z>, where the slice
/// {b'z = V} is feasible iff max over the slice of λmin(C - A*z) is >= 0 (a point for m = 1, a line
/// searched by golden section for m = 2). Needs strictly feasible feasible_X and feasible_z.
inline OracleResult oracle_small_sdp(const SdpInstance& inst) {
    validate_sdp(inst);
    const int m = inst.m();
    if (m > 2 || inst.order() > 6) throw SizeLimit("oracle_small_sdp: needs m <= 2 and order <= 6");
    if (inst.feasible_X.size() != inst.nvec() || inst.feasible_z.size() != m)
        throw InvalidInput("oracle_small_sdp needs strictly feasible primal and dual points");
    Mat A = Mat(inst.A);
    auto lam = [&](const Vec& z) { return block_min_eigenvalue(inst.blocks, Vec(inst.C - A.transpose() * z)); };
    OracleResult res;
    const double bn = inst.b.norm();
    if (bn == 0.0) {
        res.value = 0.0;
        res.found = true;
        return res;
    }
    const Vec& z0 = inst.feasible_z;
    const double scale = 1.0 + z0.norm() + inst.C.norm() + A.norm();
    const double T = 1e3 * scale;
    Vec bu = inst.b / bn;
    Vec perp = m == 2 ? Vec((Vec(2) << -bu[1], bu[0]).finished()) : Vec();
    Vec best_z = z0;
    auto slice_max = [&](double V, Vec* arg) {
        Vec zp = bu * (V / bn);
        if (m == 1) {
            if (arg) *arg = zp;
            return lam(zp);
        }
        double tbest = 0;
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = -T, b = T;
        double c = b - gr * (b - a), d = a + gr * (b - a);
        double fc = lam(Vec(zp + c * perp)), fd = lam(Vec(zp + d * perp));
        for (int it = 0; it < 300 && b - a > 1e-14 * T; ++it) {
            if (fc > fd) {
                b = d; d = c; fd = fc; c = b - gr * (b - a); fc = lam(Vec(zp + c * perp));
            } else {
                a = c; c = d; fc = fd; d = a + gr * (b - a); fd = lam(Vec(zp + d * perp));
            }
        }
        tbest = fc > fd ? c : d;
        if (arg) *arg = zp + tbest * perp;
        return std::max(fc, fd);
    };
    double lo = inst.b.dot(z0);
    double hi = inst.C.dot(inst.feasible_X);
    if (!(lam(z0) > 0.0)) throw InvalidInput("oracle_small_sdp: feasible_z is not strictly feasible");
    res.value = bisect_level([&](double V) { return slice_max(V, nullptr) >= 0.0; }, lo, hi);
    res.candidates = 200;
    slice_max(res.value, &best_z);
    res.x = best_z;
    res.found = true;
    return res;
}

/// Linear SDP (single block) written as a QSDP with Q = 0: min <C,X> is min -<(-C),X>.
inline QsdpInstance sdp_as_qsdp(const SdpInstance& inst) {
    if (inst.blocks.size() != 1 || inst.blocks[0] <= 0) throw Unsupported("sdp_as_qsdp needs a single PSD block");
    QsdpInstance q;
    q.n = inst.blocks[0];
    q.QA = Mat::Zero(q.n, q.n);
    q.QB = Mat::Zero(q.n, q.n);
    q.Q = make_kron_q(q.QA, q.QB);
    q.AE = Mat(inst.A);
    q.bE = inst.b;
    q.AI = Mat(0, inst.nvec());
    q.bI = Vec();
    q.C = -inst.C;
    q.feasible_X = inst.feasible_X;
    q.name = inst.name;
    return q;
}

struct BarrierResult {
    Vec X;
    double value = 0;
    double gap_bound = 0;  // (n + m_I) / t at exit
    int newton_steps = 0;
    bool certified = false;
};

/// Primal log-barrier path following for the QSDP
///   min 1/2<X,QX> - <C,X>  s.t.  A_E X = b_E, A_I X >= b_I, X ⪰ 0
/// from the strictly feasible inst.feasible_X, with equality-constrained Newton steps in svec space.
/// Exits once the central-path gap bound (n + m_I)/t is <= gap_tol.
inline BarrierResult oracle_small_qsdp(const QsdpInstance& inst, double gap_tol = 1e-9) {
    validate_qsdp(inst);
    const int n = inst.n, nv = inst.nvec(), mE = inst.mE(), mI = inst.mI();
    if (n > 8) throw SizeLimit("oracle_small_qsdp: order exceeds 8");
    if (inst.feasible_X.size() != nv) throw InvalidInput("oracle_small_qsdp needs a strictly feasible start");
    Mat Qd = inst.Q->to_dense();
    Qd = 0.5 * (Qd + Qd.transpose());
    Vec X = inst.feasible_X;
    auto slack = [&](const Vec& x) { return mI > 0 ? Vec(inst.AI * x - inst.bI) : Vec(); };
    auto objective = [&](const Vec& x) { return 0.5 * x.dot(Qd * x) - inst.C.dot(x); };
    auto barrier_ok = [&](const Vec& x) {
        Eigen::LLT<Mat> llt(smat(x));
        if (llt.info() != Eigen::Success) return false;
        const Mat& L = llt.matrixLLT();
        for (int i = 0; i < n; ++i)
            if (!(L(i, i) > 0.0)) return false;
        return mI == 0 || slack(x).minCoeff() > 0.0;
    };
    if (!barrier_ok(X)) throw InvalidInput("oracle_small_qsdp: start is not strictly feasible");
    if (mE > 0 && (inst.AE * X - inst.bE).norm() > 1e-9 * (1.0 + inst.bE.norm()))
        throw InvalidInput("oracle_small_qsdp: start violates the equalities");
    auto phi = [&](const Vec& x, double t) {
        Eigen::LLT<Mat> llt(smat(x));
        double ld = 0;
        const Mat& L = llt.matrixLLT();
        for (int i = 0; i < n; ++i) ld += 2.0 * std::log(L(i, i));
        double v = t * objective(x) - ld;
        if (mI > 0) v -= slack(x).array().log().sum();
        return v;
    };
    // Newton steps live in the null space of A_E, so the equalities hold along the whole path
    Mat Z = Mat::Identity(nv, nv);
    if (mE > 0) {
        Eigen::JacobiSVD<Mat> svd(inst.AE, Eigen::ComputeFullV);
        const int r = int(svd.rank());
        Z = svd.matrixV().rightCols(nv - r);
    }
    BarrierResult out;
    const double nu = n + mI;
    double t = 1.0;
    for (int outer = 0; outer < 200; ++outer) {
        for (int it = 0; it < 200; ++it) {
            Mat Xm = smat(X);
            Mat Xi = Xm.ldlt().solve(Mat::Identity(n, n));
            Xi = 0.5 * (Xi + Xi.transpose());
            Vec grad = t * (Qd * X - inst.C) - svec(Xi);
            Mat H = t * Qd;
            for (int k = 0; k < nv; ++k) {
                Vec e = Vec::Zero(nv);
                e[k] = 1.0;
                H.col(k) += svec(Mat(Xi * smat(e) * Xi));
            }
            if (mI > 0) {
                Vec s = slack(X);
                Vec inv = s.cwiseInverse();
                grad -= inst.AI.transpose() * inv;
                H += inst.AI.transpose() * inv.cwiseAbs2().asDiagonal() * inst.AI;
            }
            H = 0.5 * (H + H.transpose());
            Mat Hr = Z.transpose() * H * Z;
            Vec dx = Z * Vec(Hr.ldlt().solve(Vec(-Z.transpose() * grad)));
            double dec2 = dx.dot(H * dx);
            ++out.newton_steps;
            if (dec2 / 2.0 <= 1e-12) break;
            double alpha = 1.0, f0 = phi(X, t), slope = grad.dot(dx);
            while (alpha > 1e-16) {
                Vec Xn = X + alpha * dx;
                if (barrier_ok(Xn) && phi(Xn, t) <= f0 + 0.25 * alpha * slope) break;
                alpha *= 0.5;
            }
            if (alpha <= 1e-16) break;
            X += alpha * dx;
        }
        out.gap_bound = nu / t;
        if (out.gap_bound <= gap_tol) break;
        t *= 8.0;
    }
    out.X = X;
    out.value = objective(X);
    out.certified = out.gap_bound <= gap_tol;
    return out;
}

}  // namespace ipadmm
