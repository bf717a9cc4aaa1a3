#pragma once

#include <cmath>

#include "ipadmm/core/linear_map.hpp"

namespace ipadmm {

inline int svec_dim(int n) { return n * (n + 1) / 2; }

/// Matrix order n with svec_dim(n) == d, or -1.
inline int svec_order(int d) {
    int n = int(std::lround((std::sqrt(8.0 * d + 1.0) - 1.0) / 2.0));
    return svec_dim(n) == d ? n : -1;
}

/// Scaled vectorization of the upper triangle, column by column; off-diagonals carry a factor sqrt(2)
/// so that the Euclidean inner product of svecs is the trace inner product.
inline Vec svec(const Mat& s) {
    const int n = int(s.rows());
    if (s.cols() != n) throw InvalidInput("svec of a non-square matrix");
    const double r2 = std::sqrt(2.0);
    Vec v(svec_dim(n));
    int k = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= j; ++i) v[k++] = (i == j) ? s(i, j) : r2 * 0.5 * (s(i, j) + s(j, i));
    return v;
}

inline Mat smat(const Vec& v) {
    const int n = svec_order(int(v.size()));
    if (n < 0) throw InvalidInput("vector length " + std::to_string(v.size()) + " is not a triangular number");
    const double r2 = std::sqrt(2.0);
    Mat s(n, n);
    int k = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= j; ++i) {
            double x = v[k++];
            if (i == j) {
                s(i, i) = x;
            } else {
                s(i, j) = x / r2;
                s(j, i) = s(i, j);
            }
        }
    return s;
}

/// Index of entry (i,j), i <= j, inside svec.
inline int svec_index(int i, int j) {
    if (i > j) std::swap(i, j);
    return j * (j + 1) / 2 + i;
}

/// Symmetric matrix held in svec storage.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(int n) : n_(n), data_(Vec::Zero(svec_dim(n))) {}
    static SymMatrix from_svec(Vec v) {
        SymMatrix s;
        s.n_ = svec_order(int(v.size()));
        if (s.n_ < 0) throw InvalidInput("svec length is not a triangular number");
        s.data_ = std::move(v);
        return s;
    }
    static SymMatrix from_dense(const Mat& m) { return from_svec(svec(m)); }
    static SymMatrix identity(int n) { return from_dense(Mat::Identity(n, n)); }

    int n() const { return n_; }
    const Vec& data() const { return data_; }
    Vec& data() { return data_; }
    Mat dense() const { return smat(data_); }
    double norm() const { return data_.norm(); }
    double dot(const SymMatrix& o) const { return data_.dot(o.data_); }
    bool operator==(const SymMatrix& o) const { return n_ == o.n_ && data_ == o.data_; }

private:
    int n_ = 0;
    Vec data_;
};

inline Vec svec(const SymMatrix& s) { return s.data(); }
inline SymMatrix smat_sym(const Vec& v) { return SymMatrix::from_svec(v); }

/// Eigenvalue clipping on a dense symmetric matrix; the input is symmetrized first.
inline Mat project_psd_dense(const Mat& s) {
    if (!s.allFinite()) throw InvalidInput("project_psd: non-finite entries");
    const int n = int(s.rows());
    if (n == 0) return s;
    Mat sym = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(sym);
    if (es.info() != Eigen::Success) throw NumericalFailure("project_psd: eigensolver did not converge", 30 * n);
    const Vec& lam = es.eigenvalues();
    const Mat& q = es.eigenvectors();
    int npos = 0;
    for (int i = 0; i < n; ++i) npos += lam[i] > 0.0;
    if (npos == 0) return Mat::Zero(n, n);
    if (npos == n) return sym;
    // eigenvalues ascending: keep the trailing positive part
    Mat qp = q.rightCols(npos);
    Mat out = qp * lam.tail(npos).asDiagonal() * qp.transpose();
    return 0.5 * (out + out.transpose());
}

inline SymMatrix project_psd(const SymMatrix& s) { return SymMatrix::from_dense(project_psd_dense(s.dense())); }

inline Vec project_psd_svec(const Vec& v) { return svec(project_psd_dense(smat(v))); }

inline double min_eigenvalue(const Mat& sym) {
    if (sym.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (sym + sym.transpose()), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalFailure("eigensolver did not converge", 30 * int(sym.rows()));
    return es.eigenvalues()[0];
}

inline double max_eigenvalue(const Mat& sym) {
    if (sym.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (sym + sym.transpose()), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalFailure("eigensolver did not converge", 30 * int(sym.rows()));
    return es.eigenvalues()[sym.rows() - 1];
}

}  // namespace ipadmm
