#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "ipadmm/core/linear_map.hpp"
#include "ipadmm/core/sym_matrix.hpp"

namespace ipadmm {

/// Dense Cholesky factorization with a relative pivot tolerance.
class CholeskyHandle {
public:
    CholeskyHandle() = default;
    explicit CholeskyHandle(const Mat& a, double pivot_tol = 1e-12) { factorize(a, pivot_tol); }

    void factorize(const Mat& a, double pivot_tol = 1e-12) {
        const int n = int(a.rows());
        if (a.cols() != n) throw InvalidInput("cholesky: matrix is not square");
        if (!a.allFinite()) throw InvalidInput("cholesky: non-finite entries");
        Mat sym = 0.5 * (a + a.transpose());
        n_ = n;
        if (n == 0) return;
        const double scale = std::max(sym.diagonal().cwiseAbs().maxCoeff(), 0.0);
        llt_.compute(sym);
        int bad = -1;
        if (llt_.info() == Eigen::Success) {
            const Mat& l = llt_.matrixLLT();
            for (int j = 0; j < n; ++j) {
                double d = l(j, j) * l(j, j);
                if (!(d > pivot_tol * scale) || !(d > 0.0)) { bad = j; break; }
            }
        } else {
            bad = first_bad_pivot(sym, pivot_tol * scale);
        }
        if (bad >= 0) throw RankDeficiency("cholesky: matrix is not positive definite", bad);
    }

    int size() const { return n_; }

    Vec solve(const Vec& rhs) const {
        if (rhs.size() != n_) throw InvalidInput("cholesky solve: rhs has wrong size");
        if (n_ == 0) return rhs;
        return llt_.solve(rhs);
    }
    Mat solve(const Mat& rhs) const {
        if (n_ == 0) return rhs;
        return llt_.solve(rhs);
    }
    Mat matrix_l() const { return llt_.matrixL(); }

private:
    static int first_bad_pivot(const Mat& a, double thresh) {
        const int n = int(a.rows());
        Mat l = Mat::Zero(n, n);
        for (int j = 0; j < n; ++j) {
            double d = a(j, j) - l.row(j).head(j).squaredNorm();
            if (!(d > thresh) || !(d > 0.0)) return j;
            l(j, j) = std::sqrt(d);
            for (int i = j + 1; i < n; ++i) l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
        }
        return 0;
    }

    int n_ = 0;
    Eigen::LLT<Mat> llt_;
};

inline Vec solve_spd(const CholeskyHandle& f, const Vec& rhs) { return f.solve(rhs); }

struct PcgResult {
    Vec x;
    double relres = 0.0;
    int iters = 0;
    bool converged = false;
};

/// Preconditioned conjugate gradients. relres = |Ax - rhs| / (1 + |rhs|), evaluated on the true residual.
/// `precond` approximates the inverse of A; null means none.
inline PcgResult pcg(const LinearMap& a, const Vec& rhs, const LinearMap* precond, double tol, int maxit,
                     const Vec* x0 = nullptr) {
    if (!(tol > 0.0)) throw InvalidInput("pcg: tol must be positive");
    if (a.rows() != a.cols()) throw InvalidInput("pcg: operator must be square");
    const int n = int(rhs.size());
    const double denom = 1.0 + rhs.norm();
    PcgResult res;
    res.x = x0 ? *x0 : Vec::Zero(n);
    Vec r = rhs - a.apply(res.x);
    res.relres = r.norm() / denom;
    if (res.relres <= tol) {
        res.converged = true;
        return res;
    }
    auto precondition = [&](const Vec& v) { return precond ? precond->apply(v) : v; };
    Vec z = precondition(r);
    Vec p = z;
    double rz = r.dot(z);
    for (int it = 0; it < maxit; ++it) {
        Vec ap = a.apply(p);
        double pap = p.dot(ap);
        if (!(pap > 0.0)) {
            if (pap < -1e-10 * p.norm() * ap.norm()) throw IndefiniteOperator("pcg: negative curvature detected");
            break;  // stagnation on a singular direction
        }
        double alpha = rz / pap;
        res.x += alpha * p;
        r -= alpha * ap;
        res.iters = it + 1;
        if (r.norm() / denom <= tol) {
            Vec rt = rhs - a.apply(res.x);
            res.relres = rt.norm() / denom;
            if (res.relres <= tol) {
                res.converged = true;
                return res;
            }
            r = rt;  // recursive residual drifted, restart from the true one
            z = precondition(r);
            p = z;
            rz = r.dot(z);
            continue;
        }
        z = precondition(r);
        double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    res.relres = (rhs - a.apply(res.x)).norm() / denom;
    res.converged = res.relres <= tol;
    return res;
}

inline PcgResult pcg(const LinearMap& a, const Vec& rhs, const MapPtr& precond, double tol, int maxit,
                     const Vec* x0 = nullptr) {
    return pcg(a, rhs, precond.get(), tol, maxit, x0);
}

namespace detail {

inline double power_iteration(const LinearMap& a, Vec v, double tol, int maxit) {
    double nv = v.norm();
    if (nv == 0.0) return 0.0;
    v /= nv;
    double lam = 0.0;
    for (int it = 0; it < maxit; ++it) {
        Vec w = a.apply_adjoint(a.apply(v));
        double nw = w.norm();
        if (nw == 0.0) return 0.0;
        double lam_new = v.dot(w);
        v = w / nw;
        if (it > 0 && std::abs(lam_new - lam) <= tol * lam_new) return lam_new;
        lam = lam_new;
    }
    return lam;
}

}  // namespace detail

/// Largest singular value by power iteration on A*A. Deterministic: starts from the ones vector and
/// from a seed-0 Gaussian vector, keeping the larger estimate.
inline double operator_norm(const LinearMap& a, double tol = 1e-10, int maxit = 1000) {
    if (!(tol > 0.0)) throw InvalidInput("operator_norm: tol must be positive");
    if (a.cols() == 0 || a.rows() == 0 || a.kind() == MapKind::zero) return 0.0;
    double lam = detail::power_iteration(a, Vec::Ones(a.cols()), tol, maxit);
    std::mt19937 gen(0);
    std::normal_distribution<double> nd;
    Vec r(a.cols());
    for (auto& x : r) x = nd(gen);
    lam = std::max(lam, detail::power_iteration(a, r, tol, maxit));
    return std::sqrt(std::max(lam, 0.0));
}

/// Spectral norm of a dense matrix through its singular values.
inline double spectral_norm(const Mat& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(a);
    return svd.singularValues()(0);
}

/// Smallest Ritz value of a self-adjoint operator after `steps` Lanczos steps with full
/// reorthogonalization.
inline double lanczos_min_ritz(const LinearMap& a, int steps = 20, unsigned seed = 0) {
    const int n = a.cols();
    if (n == 0) return 0.0;
    const int k = std::min(steps, n);
    std::mt19937 gen(seed);
    std::normal_distribution<double> nd;
    Mat V(n, k + 1);
    Vec q(n);
    for (auto& x : q) x = nd(gen);
    V.col(0) = q / q.norm();
    Vec alpha = Vec::Zero(k), beta = Vec::Zero(k);
    int m = k;
    for (int j = 0; j < k; ++j) {
        Vec w = a.apply(V.col(j));
        alpha[j] = V.col(j).dot(w);
        w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
        w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
        beta[j] = w.norm();
        if (beta[j] <= 1e-14 * (std::abs(alpha[j]) + 1.0)) {
            m = j + 1;
            break;
        }
        V.col(j + 1) = w / beta[j];
    }
    Mat T = Mat::Zero(m, m);
    for (int j = 0; j < m; ++j) {
        T(j, j) = alpha[j];
        if (j + 1 < m) T(j, j + 1) = T(j + 1, j) = beta[j];
    }
    return min_eigenvalue(T);
}

/// Orthogonal projection of z onto range(G), computed as G w with w from CG on G*G w = G*z.
inline Vec project_range(const MapPtr& g, const Vec& z, double tol = 1e-12) {
    if (z.size() != g->rows()) throw InvalidInput("project_range: vector has wrong size");
    if (g->cols() == 0) return Vec::Zero(z.size());
    MapPtr gtg = compose(adjoint(g), g, true);
    Vec rhs = g->apply_adjoint(z);
    PcgResult r = pcg(*gtg, rhs, nullptr, tol, std::max(200, 20 * g->cols()));
    if (!r.converged) throw NumericalFailure("project_range: CG did not converge", r.iters);
    return g->apply(r.x);
}

/// Minimum-norm solution of M x = projection of r onto range(M), for self-adjoint PSD M.
/// Runs CG on M^2 x = M r from zero, which keeps the iterates in range(M).
inline Vec pinv_apply(const MapPtr& m, const Vec& r, double tol = 1e-12) {
    if (!m->self_adjoint()) throw InvalidInput("pinv_apply: operator must be self-adjoint");
    if (r.size() == 0) return r;
    MapPtr m2 = compose(m, m, true);
    Vec rhs = m->apply(r);
    if (rhs.norm() == 0.0) return Vec::Zero(r.size());
    PcgResult res = pcg(*m2, rhs, nullptr, tol, std::max(200, 20 * m->cols()));
    if (!res.converged) throw NumericalFailure("pinv_apply: CG did not converge", res.iters);
    return res.x;
}

// ---- dense helpers for desk-scale assembly ---------------------------------

/// Pseudoinverse of a symmetric PSD matrix; eigenvalues below rtol * max are treated as zero.
inline Mat dense_pinv_sym(const Mat& a, double rtol = 1e-12) {
    const int n = int(a.rows());
    if (n == 0) return a;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
    const Vec& lam = es.eigenvalues();
    double top = std::max(std::abs(lam[0]), std::abs(lam[n - 1]));
    Vec inv = Vec::Zero(n);
    for (int i = 0; i < n; ++i)
        if (lam[i] > rtol * top) inv[i] = 1.0 / lam[i];
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

/// Orthonormal basis of range(G) for a dense matrix G, from the eigenvectors of G Gᵀ.
inline Mat range_basis(const Mat& g, double rtol = 1e-10) {
    const int n = int(g.rows());
    if (n == 0 || g.cols() == 0) return Mat(n, 0);
    Mat ggt = g * g.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (ggt + ggt.transpose()));
    const Vec& lam = es.eigenvalues();
    double top = lam[n - 1];
    if (top <= 0.0) return Mat(n, 0);
    int r = 0;
    for (int i = 0; i < n; ++i) r += lam[i] > rtol * top;
    return es.eigenvectors().rightCols(r);
}

/// matrix function f applied to the eigenvalues of a symmetric matrix
template <class F>
inline Mat sym_apply(const Mat& a, F f) {
    if (a.rows() == 0) return a;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
    Vec lam = es.eigenvalues().unaryExpr(f);
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace ipadmm
