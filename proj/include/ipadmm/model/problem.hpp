#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "ipadmm/core/linsolve.hpp"
#include "ipadmm/core/prox.hpp"

namespace ipadmm {

/// Smooth convex function with an exact gradient and a self-adjoint PSD majorizer Σ̂:
/// f(y) <= f(y') + <∇f(y'), y - y'> + 1/2 |y - y'|^2_Σ̂.
class SmoothFn {
public:
    explicit SmoothFn(int dim) : dim_(dim) {}
    virtual ~SmoothFn() = default;
    int dim() const { return dim_; }
    virtual double value(const Vec& y) const = 0;
    virtual Vec gradient(const Vec& y) const = 0;
    virtual MapPtr sigma_hat() const = 0;
    /// True when f is quadratic with Hessian Σ̂, in which case f̂(·, y') == f.
    virtual bool quadratic_exact() const { return false; }

    /// Majorized value f̂(y, y') = f(y') + <∇f(y'), y - y'> + 1/2 |y - y'|^2_Σ̂.
    double majorized(const Vec& y, const Vec& anchor) const {
        Vec d = y - anchor;
        return value(anchor) + gradient(anchor).dot(d) + 0.5 * d.dot(sigma_hat()->apply(d));
    }

private:
    int dim_;
};

using SmoothPtr = std::shared_ptr<const SmoothFn>;

class ZeroSmooth final : public SmoothFn {
public:
    explicit ZeroSmooth(int n) : SmoothFn(n), zero_(zero_map(n)) {}
    double value(const Vec&) const override { return 0.0; }
    Vec gradient(const Vec& y) const override { return Vec::Zero(y.size()); }
    MapPtr sigma_hat() const override { return zero_; }
    bool quadratic_exact() const override { return true; }

private:
    MapPtr zero_;
};

/// f(y) = 1/2 <y, Q y> + <q, y>, majorized by Σ̂ = Q.
class QuadraticSmooth final : public SmoothFn {
public:
    QuadraticSmooth(MapPtr Q, Vec q) : SmoothFn(Q->cols()), Q_(std::move(Q)), q_(std::move(q)) {
        if (!Q_->self_adjoint()) throw InvalidInput("quadratic smooth term needs a self-adjoint Q");
        if (q_.size() != Q_->cols()) throw InvalidInput("quadratic smooth term: linear part has wrong size");
    }
    double value(const Vec& y) const override { return 0.5 * y.dot(Q_->apply(y)) + q_.dot(y); }
    Vec gradient(const Vec& y) const override { return Q_->apply(y) + q_; }
    MapPtr sigma_hat() const override { return Q_; }
    bool quadratic_exact() const override { return true; }
    const MapPtr& Q() const { return Q_; }
    const Vec& q() const { return q_; }

private:
    MapPtr Q_;
    Vec q_;
};

/// log(sum exp(y_i)), majorized by a multiple of the identity.
class LogSumExp final : public SmoothFn {
public:
    explicit LogSumExp(int n, double sigma = 1.0) : SmoothFn(n), sig_(identity_map(n, sigma)) {}
    double value(const Vec& y) const override {
        double m = y.maxCoeff();
        return m + std::log((y.array() - m).exp().sum());
    }
    Vec gradient(const Vec& y) const override {
        double m = y.maxCoeff();
        Eigen::ArrayXd e = (y.array() - m).exp();
        return (e / e.sum()).matrix();
    }
    MapPtr sigma_hat() const override { return sig_; }

private:
    MapPtr sig_;
};

/// Generic smooth term given by callables.
class CallableSmooth final : public SmoothFn {
public:
    using ValueFn = std::function<double(const Vec&)>;
    using GradFn = std::function<Vec(const Vec&)>;
    CallableSmooth(int n, ValueFn v, GradFn g, MapPtr sigma)
        : SmoothFn(n), v_(std::move(v)), g_(std::move(g)), sig_(std::move(sigma)) {}
    double value(const Vec& y) const override { return v_(y); }
    Vec gradient(const Vec& y) const override { return g_(y); }
    MapPtr sigma_hat() const override { return sig_; }

private:
    ValueFn v_;
    GradFn g_;
    MapPtr sig_;
};

/// The multi-block composite problem
///   min p(y_1) + f(y) - <b, z>   s.t.  F* y + G* z = c,
/// with y = (y_1; ...; y_s), F = (F_1; ...; F_s), F_i: X -> Y_i and G: X -> Z.
struct MultiBlockProblem {
    std::vector<int> blocks;
    ProxFn p;
    SmoothPtr f;
    std::vector<MapPtr> F;
    MapPtr G;
    Vec b;
    Vec c;
    std::string name;

    int num_blocks() const { return int(blocks.size()); }
    int dim_x() const { return int(c.size()); }
    int dim_y() const { return BlockMap::total(blocks); }
    int dim_z() const { return int(b.size()); }
    int offset(int i) const {
        int o = 0;
        for (int j = 0; j < i; ++j) o += blocks[j];
        return o;
    }

    /// F* y = sum_i F_i* y_i
    Vec Fstar(const Vec& y) const {
        Vec out = Vec::Zero(dim_x());
        int off = 0;
        for (int i = 0; i < num_blocks(); ++i) {
            out += F[i]->apply_adjoint(y.segment(off, blocks[i]));
            off += blocks[i];
        }
        return out;
    }
    /// F x = (F_1 x; ...; F_s x)
    Vec Fx(const Vec& x) const {
        Vec out(dim_y());
        int off = 0;
        for (int i = 0; i < num_blocks(); ++i) {
            out.segment(off, blocks[i]) = F[i]->apply(x);
            off += blocks[i];
        }
        return out;
    }
    Vec Gstar(const Vec& z) const { return G->apply_adjoint(z); }
    Vec Gx(const Vec& x) const { return G->apply(x); }
    Vec constraint(const Vec& y, const Vec& z) const { return Fstar(y) + Gstar(z) - c; }

    /// F as one map X -> Y.
    MapPtr F_stacked() const {
        std::vector<std::vector<MapPtr>> rows(num_blocks(), std::vector<MapPtr>(1));
        for (int i = 0; i < num_blocks(); ++i) rows[i][0] = F[i];
        return block_map(blocks, {dim_x()}, rows);
    }

    void validate(bool check_range = true) const {
        if (blocks.empty()) throw InvalidInput("problem needs at least one y block");
        for (int d : blocks)
            if (d <= 0) throw InvalidInput("block dimensions must be positive");
        if (int(F.size()) != num_blocks()) throw InvalidInput("one F_i per block is required");
        if (!f) throw InvalidInput("smooth term missing");
        if (f->dim() != dim_y()) throw InvalidInput("smooth term dimension does not match the y partition");
        MapPtr sig = f->sigma_hat();
        if (sig->rows() != dim_y() || sig->cols() != dim_y())
            throw InvalidInput("majorizer dimension does not match the y partition");
        for (int i = 0; i < num_blocks(); ++i)
            if (F[i]->rows() != blocks[i] || F[i]->cols() != dim_x())
                throw InvalidInput("F_" + std::to_string(i + 1) + " has wrong dimensions");
        if (!G || G->cols() != dim_x() || G->rows() != dim_z()) throw InvalidInput("G has wrong dimensions");
        if (!b.allFinite() || !c.allFinite()) throw InvalidInput("non-finite problem data");
        if (check_range && dim_z() > 0) {
            Vec pb = project_range(G, b, 1e-13);
            if ((b - pb).norm() > 1e-10 * (1.0 + b.norm())) throw InvalidInput("b is not in the range of G");
        }
    }
};

/// (x, y, z) for the multi-block problem; also used for (x, w) of the generic problem with z empty.
struct KKTPoint {
    Vec x, y, z;
};

}  // namespace ipadmm
