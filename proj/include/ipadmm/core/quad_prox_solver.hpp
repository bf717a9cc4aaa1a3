#pragma once

#include <cmath>
#include <limits>

#include "ipadmm/core/linsolve.hpp"
#include "ipadmm/core/prox.hpp"

namespace ipadmm {

/// Result of minimizing phi(w_head) + 1/2 <w, M w> + <q, w>.
/// `d` is an element of  ∂phi(w_head) x {0} + M w + q,  the certified optimality residual.
struct QuadProxResult {
    Vec w;
    Vec d;
    bool exact = false;  // finite-termination solve (direct or verified active set)
    int iterations = 0;
};

struct QuadProxOptions {
    double eps = 0.0;        // target |d|; 0 asks for an exact solve
    int max_iter = 200000;
    int polish_every = 25;
    double kkt_tol = 1e-12;
};

namespace detail {

/// Smallest-norm element of sep-subdifferential + grad at u, coordinatewise; grad excludes `lin`.
inline Vec separable_min_residual(const SeparablePieces& s, const Vec& u, const Vec& grad) {
    const int n = int(u.size());
    Vec d(n);
    for (int i = 0; i < n; ++i) {
        double a = 0.0, b = 0.0;
        if (u[i] > 0.0) a = b = s.l1[i];
        else if (u[i] < 0.0) a = b = -s.l1[i];
        else { a = -s.l1[i]; b = s.l1[i]; }
        if (u[i] <= s.lo[i]) a = -std::numeric_limits<double>::infinity();
        if (u[i] >= s.hi[i]) b = std::numeric_limits<double>::infinity();
        double gi = grad[i] + s.lin[i];
        double sub = std::min(std::max(-gi, a), b);
        d[i] = gi + sub;
    }
    return d;
}

/// Try to finish a separable polyhedral problem exactly: fix coordinates at kinks and bounds as
/// suggested by u, solve the remaining equality system and accept if the KKT conditions hold.
inline bool polish_separable(const SeparablePieces& s, const Mat& H, const Vec& h, Vec& u, double tol) {
    const int n = int(u.size());
    const double atol = 1e-9 * (1.0 + u.lpNorm<Eigen::Infinity>());
    Vec fixed_val = Vec::Zero(n);
    std::vector<int> free_idx;
    std::vector<char> is_fixed(n, 0);
    Vec sign = Vec::Zero(n);
    for (int i = 0; i < n; ++i) {
        if (std::isfinite(s.lo[i]) && u[i] - s.lo[i] <= atol) { is_fixed[i] = 1; fixed_val[i] = s.lo[i]; }
        else if (std::isfinite(s.hi[i]) && s.hi[i] - u[i] <= atol) { is_fixed[i] = 1; fixed_val[i] = s.hi[i]; }
        else if (s.l1[i] > 0.0 && std::abs(u[i]) <= atol) { is_fixed[i] = 1; fixed_val[i] = 0.0; }
        else {
            free_idx.push_back(i);
            sign[i] = s.l1[i] > 0.0 ? (u[i] > 0.0 ? 1.0 : -1.0) : 0.0;
        }
    }
    Vec cand = fixed_val;
    const int nf = int(free_idx.size());
    if (nf > 0) {
        Mat Hff(nf, nf);
        Vec rhs(nf);
        for (int a = 0; a < nf; ++a) {
            int i = free_idx[a];
            double r = -h[i] - s.lin[i] - s.l1[i] * sign[i];
            for (int j = 0; j < n; ++j)
                if (is_fixed[j]) r -= H(i, j) * fixed_val[j];
            rhs[a] = r;
            for (int b = 0; b < nf; ++b) Hff(a, b) = H(i, free_idx[b]);
        }
        Eigen::LLT<Mat> llt(Hff);
        if (llt.info() != Eigen::Success) return false;
        Vec uf = llt.solve(rhs);
        for (int a = 0; a < nf; ++a) {
            int i = free_idx[a];
            if (uf[a] < s.lo[i] || uf[a] > s.hi[i]) return false;
            if (sign[i] != 0.0 && uf[a] * sign[i] < 0.0) return false;
            cand[i] = uf[a];
        }
    }
    Vec grad = H * cand + h;
    Vec d = separable_min_residual(s, cand, grad);
    if (d.norm() > tol * (1.0 + h.norm() + grad.norm())) return false;
    u = cand;
    return true;
}

}  // namespace detail

/// Minimize phi(w_head) + 1/2 <w, M w> + <q, w> where phi acts on the leading n_head coordinates and
/// M is symmetric positive definite. The trailing coordinates are eliminated through a Schur
/// complement; the reduced composite problem runs accelerated proximal gradient with restart,
/// finished by an active-set solve when phi is separable and polyhedral.
inline QuadProxResult solve_quad_prox(const ProxFn& phi, int n_head, const Mat& M, const Vec& q,
                                      const QuadProxOptions& opt = {}) {
    const int n = int(q.size());
    if (M.rows() != n || M.cols() != n) throw InvalidInput("solve_quad_prox: M has wrong size");
    if (n_head < 0 || n_head > n) throw InvalidInput("solve_quad_prox: bad head dimension");
    QuadProxResult res;
    res.d = Vec::Zero(n);
    const int n2 = n - n_head;

    const bool smooth_head = phi.tag == ProxTag::zero || phi.tag == ProxTag::linear || phi.tag == ProxTag::quadratic;
    if (n_head == 0 || smooth_head) {
        Mat A = M;
        Vec rhs = -q;
        if (n_head > 0 && phi.tag == ProxTag::linear) rhs.head(n_head) -= phi.g;
        if (n_head > 0 && phi.tag == ProxTag::quadratic) {
            A.topLeftCorner(n_head, n_head) += phi.Q->to_dense();
            rhs.head(n_head) -= phi.g;
        }
        CholeskyHandle ch(A);
        res.w = ch.solve(rhs);
        res.exact = true;
        return res;
    }

    // Schur complement onto the head block
    Mat H = M.topLeftCorner(n_head, n_head);
    Vec h = q.head(n_head);
    CholeskyHandle ch22;
    Mat K;  // M22^{-1} M21
    Vec k0; // M22^{-1} q2
    if (n2 > 0) {
        ch22.factorize(M.bottomRightCorner(n2, n2));
        K = ch22.solve(Mat(M.bottomLeftCorner(n2, n_head)));
        k0 = ch22.solve(Vec(q.tail(n2)));
        H -= M.topRightCorner(n_head, n2) * K;
        h -= M.topRightCorner(n_head, n2) * k0;
    }
    H = 0.5 * (H + H.transpose());
    const double L = std::max(max_eigenvalue(H), 1e-300);

    auto seps = separable_pieces(phi, n_head);
    auto residual_at = [&](const Vec& u, const Vec& y) -> Vec {
        Vec grad = H * u + h;
        if (seps) return detail::separable_min_residual(*seps, u, grad);
        // element from the prox step: L(y-u) - (Hy+h) ∈ ∂phi(u)
        return (L * (y - u) - (H * y + h)) + grad;
    };

    Vec y0 = Vec::Zero(n_head);
    Vec u = prox(phi, Vec(y0 - h / L), L);
    Vec d1 = residual_at(u, y0);
    Vec y = u, u_prev = u;
    double t = 1.0;
    int it = 0;
    bool done = false;
    for (; it < opt.max_iter; ++it) {
        Vec grad_y = H * y + h;
        Vec u_new = prox(phi, Vec(y - grad_y / L), L);
        Vec dn = residual_at(u_new, y);
        // gradient restart
        if ((y - u_new).dot(u_new - u) > 0.0) {
            t = 1.0;
            y = u;
            u_prev = u;
            continue;
        }
        u_prev = u;
        u = u_new;
        d1 = dn;
        double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = u + ((t - 1.0) / t_new) * (u - u_prev);
        t = t_new;
        if (opt.eps > 0.0 && d1.norm() <= opt.eps) { done = true; break; }
        if (seps && opt.polish_every > 0 && (it + 1) % opt.polish_every == 0) {
            Vec up = u;
            if (detail::polish_separable(*seps, H, h, up, opt.kkt_tol)) {
                u = up;
                res.exact = true;
                done = true;
                break;
            }
        }
        if (opt.eps == 0.0 && !seps && d1.norm() <= 1e-14 * (1.0 + h.norm())) { done = true; break; }
    }
    if (!done && seps) {
        Vec up = u;
        if (detail::polish_separable(*seps, H, h, up, opt.kkt_tol)) {
            u = up;
            res.exact = true;
        }
    }
    res.iterations = it;
    res.w = Vec(n);
    res.w.head(n_head) = u;
    if (n2 > 0) res.w.tail(n2) = -(K * u + k0);
    if (!res.exact) res.d.head(n_head) = seps ? residual_at(u, u) : d1;
    return res;
}

/// Smallest computable residual norm certifying w for phi(w_head) + 1/2<w,Mw> + <q,w>, evaluated from
/// scratch: smooth coordinates give M w + q exactly, the head uses the prox characterization.
inline double quad_prox_reeval(const ProxFn& phi, int n_head, const Mat& M, const Vec& q, const Vec& w, const Vec& d) {
    Vec grad = M * w + q;
    const int n = int(w.size());
    double tail = (n > n_head) ? (d.tail(n - n_head) - grad.tail(n - n_head)).norm() : 0.0;
    double head = 0.0;
    if (n_head > 0) {
        Vec s = d.head(n_head) - grad.head(n_head);  // must lie in ∂phi(w_head)
        head = inclusion_residual(phi, w.head(n_head), s);
    }
    return std::hypot(head, tail);
}

}  // namespace ipadmm
