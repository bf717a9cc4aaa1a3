#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ipadmm/core/errors.hpp"

namespace ipadmm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;

enum class MapKind { dense, sparse, diagonal, zero, sum, product, block, function };

inline const char* to_string(MapKind k) {
    switch (k) {
        case MapKind::dense: return "dense";
        case MapKind::sparse: return "sparse";
        case MapKind::diagonal: return "diagonal";
        case MapKind::zero: return "zero";
        case MapKind::sum: return "composite-sum";
        case MapKind::product: return "composite-product";
        case MapKind::block: return "block";
        case MapKind::function: return "function";
    }
    return "?";
}

/// Linear operator from a domain of dimension cols() to a codomain of dimension rows().
/// Immutable after construction.
class LinearMap {
public:
    LinearMap(int rows, int cols, MapKind kind, bool self_adjoint)
        : rows_(rows), cols_(cols), kind_(kind), self_adjoint_(self_adjoint) {
        if (rows < 0 || cols < 0) throw InvalidInput("negative operator dimension");
        if (self_adjoint && rows != cols) throw InvalidInput("self-adjoint map must be square");
    }
    virtual ~LinearMap() = default;

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int domain_dim() const { return cols_; }
    int codomain_dim() const { return rows_; }
    MapKind kind() const { return kind_; }
    bool self_adjoint() const { return self_adjoint_; }

    virtual Vec apply(const Vec& v) const = 0;
    virtual Vec apply_adjoint(const Vec& u) const = 0;

    virtual Mat to_dense() const {
        Mat out(rows_, cols_);
        Vec e = Vec::Zero(cols_);
        for (int j = 0; j < cols_; ++j) {
            e[j] = 1.0;
            out.col(j) = apply(e);
            e[j] = 0.0;
        }
        return out;
    }

    /// Diagonal of a square map, by default through unit vectors.
    virtual Vec diagonal() const {
        if (rows_ != cols_) throw Misuse("diagonal of a non-square map");
        Vec d(cols_);
        Vec e = Vec::Zero(cols_);
        for (int j = 0; j < cols_; ++j) {
            e[j] = 1.0;
            d[j] = apply(e)[j];
            e[j] = 0.0;
        }
        return d;
    }

protected:
    void check_in(const Vec& v) const {
        if (v.size() != cols_)
            throw InvalidInput("operator input has size " + std::to_string(v.size()) + ", expected " +
                               std::to_string(cols_));
    }
    void check_out(const Vec& u) const {
        if (u.size() != rows_)
            throw InvalidInput("adjoint input has size " + std::to_string(u.size()) + ", expected " +
                               std::to_string(rows_));
    }

private:
    int rows_;
    int cols_;
    MapKind kind_;
    bool self_adjoint_;
};

using MapPtr = std::shared_ptr<const LinearMap>;

class DenseMap final : public LinearMap {
public:
    DenseMap(Mat m, bool self_adjoint)
        : LinearMap(int(m.rows()), int(m.cols()), MapKind::dense, self_adjoint), m_(std::move(m)) {}
    Vec apply(const Vec& v) const override { check_in(v); return m_ * v; }
    Vec apply_adjoint(const Vec& u) const override { check_out(u); return m_.transpose() * u; }
    Mat to_dense() const override { return m_; }
    Vec diagonal() const override { return m_.diagonal(); }
    const Mat& matrix() const { return m_; }

private:
    Mat m_;
};

class SparseMap final : public LinearMap {
public:
    SparseMap(SpMat m, bool self_adjoint)
        : LinearMap(int(m.rows()), int(m.cols()), MapKind::sparse, self_adjoint), m_(std::move(m)) {
        m_.makeCompressed();
    }
    Vec apply(const Vec& v) const override { check_in(v); return m_ * v; }
    Vec apply_adjoint(const Vec& u) const override { check_out(u); return m_.transpose() * u; }
    Mat to_dense() const override { return Mat(m_); }
    Vec diagonal() const override { return m_.diagonal(); }
    const SpMat& matrix() const { return m_; }

private:
    SpMat m_;
};

class DiagonalMap final : public LinearMap {
public:
    explicit DiagonalMap(Vec d) : LinearMap(int(d.size()), int(d.size()), MapKind::diagonal, true), d_(std::move(d)) {}
    Vec apply(const Vec& v) const override { check_in(v); return d_.cwiseProduct(v); }
    Vec apply_adjoint(const Vec& u) const override { return apply(u); }
    Mat to_dense() const override { return d_.asDiagonal(); }
    Vec diagonal() const override { return d_; }
    const Vec& values() const { return d_; }

private:
    Vec d_;
};

class ZeroMap final : public LinearMap {
public:
    ZeroMap(int rows, int cols) : LinearMap(rows, cols, MapKind::zero, rows == cols) {}
    Vec apply(const Vec& v) const override { check_in(v); return Vec::Zero(rows()); }
    Vec apply_adjoint(const Vec& u) const override { check_out(u); return Vec::Zero(cols()); }
    Mat to_dense() const override { return Mat::Zero(rows(), cols()); }
    Vec diagonal() const override { return Vec::Zero(cols()); }
};

/// Linear combination sum_i coef_i * A_i.
class SumMap final : public LinearMap {
public:
    SumMap(std::vector<std::pair<double, MapPtr>> terms, bool self_adjoint)
        : LinearMap(terms.at(0).second->rows(), terms.at(0).second->cols(), MapKind::sum, self_adjoint),
          terms_(std::move(terms)) {
        for (auto& t : terms_)
            if (t.second->rows() != rows() || t.second->cols() != cols())
                throw InvalidInput("sum of maps with mismatched dimensions");
    }
    Vec apply(const Vec& v) const override {
        check_in(v);
        Vec out = Vec::Zero(rows());
        for (auto& t : terms_) out += t.first * t.second->apply(v);
        return out;
    }
    Vec apply_adjoint(const Vec& u) const override {
        check_out(u);
        Vec out = Vec::Zero(cols());
        for (auto& t : terms_) out += t.first * t.second->apply_adjoint(u);
        return out;
    }
    Mat to_dense() const override {
        Mat out = Mat::Zero(rows(), cols());
        for (auto& t : terms_) out += t.first * t.second->to_dense();
        return out;
    }
    Vec diagonal() const override {
        Vec out = Vec::Zero(cols());
        for (auto& t : terms_) out += t.first * t.second->diagonal();
        return out;
    }

private:
    std::vector<std::pair<double, MapPtr>> terms_;
};

/// Composition A∘B (B applied first).
class ProductMap final : public LinearMap {
public:
    ProductMap(MapPtr a, MapPtr b, bool self_adjoint)
        : LinearMap(a->rows(), b->cols(), MapKind::product, self_adjoint), a_(std::move(a)), b_(std::move(b)) {
        if (a_->cols() != b_->rows()) throw InvalidInput("composition of maps with mismatched dimensions");
    }
    Vec apply(const Vec& v) const override { check_in(v); return a_->apply(b_->apply(v)); }
    Vec apply_adjoint(const Vec& u) const override { check_out(u); return b_->apply_adjoint(a_->apply_adjoint(u)); }

private:
    MapPtr a_;
    MapPtr b_;
};

class AdjointMap final : public LinearMap {
public:
    explicit AdjointMap(MapPtr a)
        : LinearMap(a->cols(), a->rows(), a->kind(), a->self_adjoint()), a_(std::move(a)) {}
    Vec apply(const Vec& v) const override { check_in(v); return a_->apply_adjoint(v); }
    Vec apply_adjoint(const Vec& u) const override { check_out(u); return a_->apply(u); }
    Mat to_dense() const override { return a_->to_dense().transpose(); }

private:
    MapPtr a_;
};

/// Block operator with row partition r and column partition c; null entries are zero blocks.
class BlockMap final : public LinearMap {
public:
    BlockMap(std::vector<int> row_dims, std::vector<int> col_dims, std::vector<std::vector<MapPtr>> blocks,
             bool self_adjoint)
        : LinearMap(total(row_dims), total(col_dims), MapKind::block, self_adjoint),
          row_dims_(std::move(row_dims)), col_dims_(std::move(col_dims)), blocks_(std::move(blocks)) {
        if (blocks_.size() != row_dims_.size()) throw InvalidInput("block map: wrong number of block rows");
        for (size_t i = 0; i < blocks_.size(); ++i) {
            if (blocks_[i].size() != col_dims_.size()) throw InvalidInput("block map: wrong number of block columns");
            for (size_t j = 0; j < col_dims_.size(); ++j) {
                const auto& b = blocks_[i][j];
                if (b && (b->rows() != row_dims_[i] || b->cols() != col_dims_[j]))
                    throw InvalidInput("block map: block (" + std::to_string(i) + "," + std::to_string(j) +
                                       ") has wrong dimensions");
            }
        }
        row_off_ = offsets(row_dims_);
        col_off_ = offsets(col_dims_);
    }
    Vec apply(const Vec& v) const override {
        check_in(v);
        Vec out = Vec::Zero(rows());
        for (size_t i = 0; i < row_dims_.size(); ++i)
            for (size_t j = 0; j < col_dims_.size(); ++j)
                if (blocks_[i][j])
                    out.segment(row_off_[i], row_dims_[i]) +=
                        blocks_[i][j]->apply(v.segment(col_off_[j], col_dims_[j]));
        return out;
    }
    Vec apply_adjoint(const Vec& u) const override {
        check_out(u);
        Vec out = Vec::Zero(cols());
        for (size_t i = 0; i < row_dims_.size(); ++i)
            for (size_t j = 0; j < col_dims_.size(); ++j)
                if (blocks_[i][j])
                    out.segment(col_off_[j], col_dims_[j]) +=
                        blocks_[i][j]->apply_adjoint(u.segment(row_off_[i], row_dims_[i]));
        return out;
    }
    Mat to_dense() const override {
        Mat out = Mat::Zero(rows(), cols());
        for (size_t i = 0; i < row_dims_.size(); ++i)
            for (size_t j = 0; j < col_dims_.size(); ++j)
                if (blocks_[i][j])
                    out.block(row_off_[i], col_off_[j], row_dims_[i], col_dims_[j]) = blocks_[i][j]->to_dense();
        return out;
    }
    const MapPtr& block(int i, int j) const { return blocks_.at(i).at(j); }
    const std::vector<int>& row_dims() const { return row_dims_; }
    const std::vector<int>& col_dims() const { return col_dims_; }

    static int total(const std::vector<int>& d) {
        int s = 0;
        for (int x : d) s += x;
        return s;
    }
    static std::vector<int> offsets(const std::vector<int>& d) {
        std::vector<int> o(d.size() + 1, 0);
        for (size_t i = 0; i < d.size(); ++i) o[i + 1] = o[i] + d[i];
        return o;
    }

private:
    std::vector<int> row_dims_, col_dims_;
    std::vector<std::vector<MapPtr>> blocks_;
    std::vector<int> row_off_, col_off_;
};

class FunctionMap final : public LinearMap {
public:
    using Fn = std::function<Vec(const Vec&)>;
    FunctionMap(int rows, int cols, Fn fwd, Fn adj, bool self_adjoint)
        : LinearMap(rows, cols, MapKind::function, self_adjoint), fwd_(std::move(fwd)), adj_(std::move(adj)) {
        if (self_adjoint && !adj_) adj_ = fwd_;
    }
    Vec apply(const Vec& v) const override { check_in(v); return fwd_(v); }
    Vec apply_adjoint(const Vec& u) const override {
        check_out(u);
        if (!adj_) throw Unsupported("function map has no adjoint");
        return adj_(u);
    }

private:
    Fn fwd_, adj_;
};

// ---- factories ------------------------------------------------------------

inline MapPtr dense_map(Mat m, bool self_adjoint = false) {
    return std::make_shared<DenseMap>(std::move(m), self_adjoint);
}
inline MapPtr symmetric_map(Mat m) {
    Mat s = 0.5 * (m + m.transpose());
    return std::make_shared<DenseMap>(std::move(s), true);
}
inline MapPtr sparse_map(SpMat m, bool self_adjoint = false) {
    return std::make_shared<SparseMap>(std::move(m), self_adjoint);
}
inline MapPtr diagonal_map(Vec d) { return std::make_shared<DiagonalMap>(std::move(d)); }
inline MapPtr identity_map(int n, double alpha = 1.0) { return diagonal_map(Vec::Constant(n, alpha)); }
inline MapPtr zero_map(int rows, int cols) { return std::make_shared<ZeroMap>(rows, cols); }
inline MapPtr zero_map(int n) { return zero_map(n, n); }

inline MapPtr adjoint(const MapPtr& a) {
    if (a->self_adjoint()) return a;
    if (a->kind() == MapKind::zero) return zero_map(a->cols(), a->rows());
    if (auto d = std::dynamic_pointer_cast<const DenseMap>(a)) return dense_map(d->matrix().transpose());
    if (auto s = std::dynamic_pointer_cast<const SparseMap>(a)) return sparse_map(SpMat(s->matrix().transpose()));
    return std::make_shared<AdjointMap>(a);
}

inline MapPtr linear_combination(std::vector<std::pair<double, MapPtr>> terms) {
    if (terms.empty()) throw InvalidInput("empty linear combination");
    bool sa = true;
    std::vector<std::pair<double, MapPtr>> kept;
    for (auto& t : terms) {
        sa = sa && t.second->self_adjoint();
        if (t.second->kind() != MapKind::zero && t.first != 0.0) kept.push_back(t);
    }
    if (kept.empty()) return zero_map(terms[0].second->rows(), terms[0].second->cols());
    if (kept.size() == 1 && kept[0].first == 1.0) return kept[0].second;
    return std::make_shared<SumMap>(std::move(kept), sa);
}
inline MapPtr add(const MapPtr& a, const MapPtr& b) { return linear_combination({{1.0, a}, {1.0, b}}); }
inline MapPtr subtract(const MapPtr& a, const MapPtr& b) { return linear_combination({{1.0, a}, {-1.0, b}}); }
inline MapPtr scale(double alpha, const MapPtr& a) { return linear_combination({{alpha, a}}); }

inline MapPtr compose(const MapPtr& a, const MapPtr& b, bool self_adjoint = false) {
    if (a->kind() == MapKind::zero || b->kind() == MapKind::zero) return zero_map(a->rows(), b->cols());
    return std::make_shared<ProductMap>(a, b, self_adjoint);
}
/// A∘A*, always self-adjoint.
inline MapPtr gram(const MapPtr& a) { return compose(a, adjoint(a), true); }

inline MapPtr block_map(std::vector<int> row_dims, std::vector<int> col_dims, std::vector<std::vector<MapPtr>> blocks,
                        bool self_adjoint = false) {
    return std::make_shared<BlockMap>(std::move(row_dims), std::move(col_dims), std::move(blocks), self_adjoint);
}
inline MapPtr block_diagonal(const std::vector<MapPtr>& diag) {
    std::vector<int> dims;
    bool sa = true;
    for (auto& d : diag) {
        if (d->rows() != d->cols()) throw InvalidInput("block diagonal entries must be square");
        dims.push_back(d->rows());
        sa = sa && d->self_adjoint();
    }
    std::vector<std::vector<MapPtr>> blocks(diag.size(), std::vector<MapPtr>(diag.size()));
    for (size_t i = 0; i < diag.size(); ++i) blocks[i][i] = diag[i];
    return block_map(dims, dims, std::move(blocks), sa);
}
inline MapPtr function_map(int rows, int cols, FunctionMap::Fn fwd, FunctionMap::Fn adj, bool self_adjoint = false) {
    return std::make_shared<FunctionMap>(rows, cols, std::move(fwd), std::move(adj), self_adjoint);
}

/// Worst relative adjoint mismatch |<Av,u> - <v,A*u>| / (1 + |u||v|) over random pairs.
inline double adjoint_mismatch(const LinearMap& a, int trials = 100, unsigned seed = 0) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> nd;
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        Vec v(a.cols()), u(a.rows());
        for (auto& x : v) x = nd(gen);
        for (auto& x : u) x = nd(gen);
        double lhs = a.apply(v).dot(u);
        double rhs = v.dot(a.apply_adjoint(u));
        worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + u.norm() * v.norm()));
        if (a.self_adjoint()) {
            double sym = v.dot(a.apply(u));
            worst = std::max(worst, std::abs(lhs - sym) / (1.0 + u.norm() * v.norm()));
        }
    }
    return worst;
}

}  // namespace ipadmm
