#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "ipadmm/core/linear_map.hpp"
#include "ipadmm/core/sym_matrix.hpp"

namespace ipadmm {

enum class ProxTag { zero, l1, nonneg, psd, box, linear, quadratic, custom, product };

inline const char* to_string(ProxTag t) {
    switch (t) {
        case ProxTag::zero: return "zero";
        case ProxTag::l1: return "l1";
        case ProxTag::nonneg: return "indicator-nonneg";
        case ProxTag::psd: return "indicator-psd";
        case ProxTag::box: return "indicator-box";
        case ProxTag::linear: return "linear";
        case ProxTag::quadratic: return "quadratic";
        case ProxTag::custom: return "custom";
        case ProxTag::product: return "product";
    }
    return "?";
}

/// Closed proper convex function with a computable proximal mapping.
struct ProxFn {
    using CustomProx = std::function<Vec(const Vec& v, const Vec& w)>;
    using CustomValue = std::function<double(const Vec& u)>;

    ProxTag tag = ProxTag::zero;
    double lambda = 0.0;        // l1
    Vec lower, upper;           // box; size 1 broadcasts
    Vec g;                      // linear, quadratic
    MapPtr Q;                   // quadratic
    CustomProx custom_prox;     // custom
    CustomValue custom_value;   // custom
    std::vector<std::pair<int, ProxFn>> pieces;  // product: (dim, function)

    static ProxFn zero() { return {}; }
    static ProxFn l1(double lambda) {
        if (!(lambda >= 0.0)) throw InvalidInput("l1 weight must be nonnegative");
        ProxFn f;
        f.tag = ProxTag::l1;
        f.lambda = lambda;
        return f;
    }
    static ProxFn nonneg() { ProxFn f; f.tag = ProxTag::nonneg; return f; }
    static ProxFn psd() { ProxFn f; f.tag = ProxTag::psd; return f; }
    static ProxFn box(Vec lo, Vec hi) {
        if (lo.size() != hi.size()) throw InvalidInput("box bounds have different sizes");
        for (int i = 0; i < lo.size(); ++i)
            if (!(lo[i] <= hi[i])) throw InvalidInput("box with lower > upper");
        ProxFn f;
        f.tag = ProxTag::box;
        f.lower = std::move(lo);
        f.upper = std::move(hi);
        return f;
    }
    static ProxFn box(double lo, double hi) { return box(Vec::Constant(1, lo), Vec::Constant(1, hi)); }
    static ProxFn linear(Vec g) { ProxFn f; f.tag = ProxTag::linear; f.g = std::move(g); return f; }
    static ProxFn quadratic(MapPtr Q, Vec g) {
        if (!Q->self_adjoint()) throw InvalidInput("quadratic prox needs a self-adjoint Q");
        ProxFn f;
        f.tag = ProxTag::quadratic;
        f.Q = std::move(Q);
        f.g = std::move(g);
        return f;
    }
    static ProxFn custom(CustomProx prox, CustomValue value) {
        ProxFn f;
        f.tag = ProxTag::custom;
        f.custom_prox = std::move(prox);
        f.custom_value = std::move(value);
        return f;
    }
    static ProxFn product(std::vector<std::pair<int, ProxFn>> pieces) {
        ProxFn f;
        f.tag = ProxTag::product;
        f.pieces = std::move(pieces);
        return f;
    }
    int product_dim() const {
        int s = 0;
        for (auto& p : pieces) s += p.first;
        return s;
    }
};

namespace detail {

inline double bound_at(const Vec& b, int i) { return b.size() == 1 ? b[0] : b[i]; }

inline bool scalar_weights(const Vec& w) {
    if (w.size() == 0) return true;
    const double w0 = w[0];
    for (int i = 1; i < w.size(); ++i)
        if (std::abs(w[i] - w0) > 1e-14 * std::abs(w0)) return false;
    return true;
}

}  // namespace detail

/// argmin_u f(u) + 1/2 |u - v|^2_W for a diagonal positive metric W = diag(w).
inline Vec prox(const ProxFn& f, const Vec& v, const Vec& w) {
    const int n = int(v.size());
    if (w.size() != n) throw InvalidInput("prox: metric has wrong size");
    for (int i = 0; i < n; ++i)
        if (!(w[i] > 0.0)) throw InvalidInput("prox: metric must be positive definite");
    switch (f.tag) {
        case ProxTag::zero: return v;
        case ProxTag::l1: {
            Vec u(n);
            for (int i = 0; i < n; ++i) {
                double t = f.lambda / w[i];
                u[i] = v[i] > t ? v[i] - t : (v[i] < -t ? v[i] + t : 0.0);
            }
            return u;
        }
        case ProxTag::nonneg: return v.cwiseMax(0.0);
        case ProxTag::box: {
            if (f.lower.size() != 1 && f.lower.size() != n) throw InvalidInput("prox: box bounds have wrong size");
            Vec u(n);
            for (int i = 0; i < n; ++i)
                u[i] = std::min(std::max(v[i], detail::bound_at(f.lower, i)), detail::bound_at(f.upper, i));
            return u;
        }
        case ProxTag::psd: {
            if (!detail::scalar_weights(w)) throw Unsupported("prox: PSD projection needs a scalar metric");
            return project_psd_svec(v);
        }
        case ProxTag::linear: {
            if (f.g.size() != n) throw InvalidInput("prox: linear term has wrong size");
            return v - f.g.cwiseQuotient(w);
        }
        case ProxTag::quadratic: {
            if (f.Q->rows() != n || f.g.size() != n) throw InvalidInput("prox: quadratic has wrong size");
            Mat H = f.Q->to_dense();
            H.diagonal() += w;
            return H.ldlt().solve(w.cwiseProduct(v) - f.g);
        }
        case ProxTag::custom: {
            if (!f.custom_prox) throw Unsupported("prox: custom function without a registered solver");
            return f.custom_prox(v, w);
        }
        case ProxTag::product: {
            if (f.product_dim() != n) throw InvalidInput("prox: product pieces do not cover the vector");
            Vec u(n);
            int off = 0;
            for (auto& p : f.pieces) {
                u.segment(off, p.first) = prox(p.second, v.segment(off, p.first), w.segment(off, p.first));
                off += p.first;
            }
            return u;
        }
    }
    throw Unsupported("prox: unknown tag");
}

inline Vec prox(const ProxFn& f, const Vec& v, double w = 1.0) { return prox(f, v, Vec::Constant(v.size(), w)); }

/// General metric form. Diagonal metrics use the closed forms; quadratic, linear and zero functions
/// accept any positive definite W.
inline Vec prox(const ProxFn& f, const Vec& v, const LinearMap& W) {
    if (W.kind() == MapKind::diagonal) return prox(f, v, static_cast<const DiagonalMap&>(W).values());
    Mat Wd = W.to_dense();
    Mat off = Wd;
    off.diagonal().setZero();
    if (off.cwiseAbs().maxCoeff() == 0.0) return prox(f, v, Vec(Wd.diagonal()));
    switch (f.tag) {
        case ProxTag::zero: return v;
        case ProxTag::linear: return Wd.ldlt().solve(Wd * v - f.g);
        case ProxTag::quadratic: return (f.Q->to_dense() + Wd).ldlt().solve(Wd * v - f.g);
        default: throw Unsupported(std::string("prox: ") + to_string(f.tag) + " needs a diagonal metric");
    }
}

/// Value of f at u; +inf outside the effective domain (membership tested to tol).
inline double prox_value(const ProxFn& f, const Vec& u, double tol = 1e-10) {
    const double inf = std::numeric_limits<double>::infinity();
    const int n = int(u.size());
    const double slack = tol * (1.0 + u.lpNorm<Eigen::Infinity>());
    switch (f.tag) {
        case ProxTag::zero: return 0.0;
        case ProxTag::l1: return f.lambda * u.lpNorm<1>();
        case ProxTag::nonneg: return (n == 0 || u.minCoeff() >= -slack) ? 0.0 : inf;
        case ProxTag::box:
            for (int i = 0; i < n; ++i)
                if (u[i] < detail::bound_at(f.lower, i) - slack || u[i] > detail::bound_at(f.upper, i) + slack)
                    return inf;
            return 0.0;
        case ProxTag::psd: return min_eigenvalue(smat(u)) >= -tol * (1.0 + u.norm()) ? 0.0 : inf;
        case ProxTag::linear: return f.g.dot(u);
        case ProxTag::quadratic: return 0.5 * u.dot(f.Q->apply(u)) + f.g.dot(u);
        case ProxTag::custom:
            if (!f.custom_value) throw Unsupported("value: custom function without a registered evaluator");
            return f.custom_value(u);
        case ProxTag::product: {
            double s = 0.0;
            int off = 0;
            for (auto& p : f.pieces) {
                s += prox_value(p.second, u.segment(off, p.first), tol);
                off += p.first;
            }
            return s;
        }
    }
    throw Unsupported("value: unknown tag");
}

/// Distance-type residual of the inclusion s ∈ ∂f(u): |u - prox_f(u + s)|, zero iff the inclusion holds.
inline double inclusion_residual(const ProxFn& f, const Vec& u, const Vec& s) {
    return (u - prox(f, Vec(u + s), 1.0)).norm();
}

/// Coordinatewise description f(u) = sum_i l1_i |u_i| + lin_i u_i + indicator(lo_i <= u_i <= hi_i),
/// available for polyhedral separable functions.
struct SeparablePieces {
    Vec l1, lin, lo, hi;
};

inline std::optional<SeparablePieces> separable_pieces(const ProxFn& f, int n) {
    const double inf = std::numeric_limits<double>::infinity();
    SeparablePieces s{Vec::Zero(n), Vec::Zero(n), Vec::Constant(n, -inf), Vec::Constant(n, inf)};
    switch (f.tag) {
        case ProxTag::zero: return s;
        case ProxTag::l1: s.l1.setConstant(f.lambda); return s;
        case ProxTag::nonneg: s.lo.setZero(); return s;
        case ProxTag::box:
            for (int i = 0; i < n; ++i) {
                s.lo[i] = detail::bound_at(f.lower, i);
                s.hi[i] = detail::bound_at(f.upper, i);
            }
            return s;
        case ProxTag::linear: s.lin = f.g; return s;
        case ProxTag::product: {
            int off = 0;
            for (auto& p : f.pieces) {
                auto sub = separable_pieces(p.second, p.first);
                if (!sub) return std::nullopt;
                s.l1.segment(off, p.first) = sub->l1;
                s.lin.segment(off, p.first) = sub->lin;
                s.lo.segment(off, p.first) = sub->lo;
                s.hi.segment(off, p.first) = sub->hi;
                off += p.first;
            }
            return s;
        }
        default: return std::nullopt;
    }
}

}  // namespace ipadmm
