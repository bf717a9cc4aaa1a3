#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "ipadmm/core/linsolve.hpp"
#include "ipadmm/core/quad_prox_solver.hpp"
#include "ipadmm/model/problem.hpp"

namespace ipadmm {

enum class BlockSolve {
    prox_diagonal,   // block 1, N_11 diagonal: closed-form prox
    prox_iterative,  // block 1, general N_11: accelerated prox-gradient with certificate
    direct,          // Cholesky of the dense block
    iterative        // pcg with diagonal preconditioner
};

inline const char* to_string(BlockSolve b) {
    switch (b) {
        case BlockSolve::prox_diagonal: return "prox-diagonal";
        case BlockSolve::prox_iterative: return "prox-iterative";
        case BlockSolve::direct: return "direct";
        case BlockSolve::iterative: return "iterative";
    }
    return "?";
}

struct DecompositionOptions {
    int dense_cap = 2000;         // blocks up to this size are assembled densely
    bool iterative_blocks = false; // force pcg on blocks i >= 2
    double pivot_tol = 1e-12;
    int pcg_maxit = 5000;
    int lanczos_steps = 20;
};

struct BlockHandle {
    int offset = 0;
    int dim = 0;
    BlockSolve kind = BlockSolve::direct;
    MapPtr Nii;
    Mat dense;        // assembled N_ii when kind is direct or prox_iterative
    CholeskyHandle chol;
    Vec diag;         // diagonal of N_ii
    MapPtr precond;   // inverse diagonal
};

/// N = Σ̂ + σ F F* + D split into its block diagonal N_d and strict upper part N_u.
class SGSDecomposition {
public:
    SGSDecomposition(const MultiBlockProblem& P, std::vector<MapPtr> D, double sigma, DecompositionOptions opt = {})
        : blocks_(P.blocks), F_(P.F), sigma_(sigma), opt_(opt) {
        if (!(sigma > 0.0)) throw InvalidInput("sigma must be positive");
        const int s = P.num_blocks();
        if (D.empty()) D.resize(s);
        if (int(D.size()) != s) throw InvalidInput("one proximal term per block is required");
        sig_ = P.f->sigma_hat();
        ny_ = P.dim_y();
        nx_ = P.dim_x();
        D_.resize(s);
        for (int i = 0; i < s; ++i) {
            D_[i] = D[i] ? D[i] : zero_map(blocks_[i]);
            if (D_[i]->rows() != blocks_[i] || D_[i]->cols() != blocks_[i])
                throw InvalidInput("D_" + std::to_string(i + 1) + " has wrong dimensions");
            if (!D_[i]->self_adjoint()) throw InvalidInput("D_" + std::to_string(i + 1) + " must be self-adjoint");
        }
        N_ = function_map(ny_, ny_, [this](const Vec& y) { return apply_N(y); }, nullptr, true);
        handles_.resize(s);
        for (int i = 0; i < s; ++i) build_block(i, P);
    }

    SGSDecomposition(const SGSDecomposition&) = delete;
    SGSDecomposition& operator=(const SGSDecomposition&) = delete;

    int num_blocks() const { return int(blocks_.size()); }
    const std::vector<int>& blocks() const { return blocks_; }
    double sigma() const { return sigma_; }
    const MapPtr& N() const { return N_; }
    const BlockHandle& handle(int i) const { return handles_.at(i); }
    const std::vector<MapPtr>& D() const { return D_; }
    const DecompositionOptions& options() const { return opt_; }
    int dim_y() const { return ny_; }

    Vec segment(const Vec& y, int i) const { return y.segment(handles_[i].offset, handles_[i].dim); }

    Vec apply_N(const Vec& y) const {
        Vec fty = Vec::Zero(nx_);
        int off = 0;
        for (size_t i = 0; i < blocks_.size(); ++i) {
            fty += F_[i]->apply_adjoint(y.segment(off, blocks_[i]));
            off += blocks_[i];
        }
        Vec out = sig_->apply(y);
        off = 0;
        for (size_t i = 0; i < blocks_.size(); ++i) {
            out.segment(off, blocks_[i]) += sigma_ * F_[i]->apply(fty) + D_[i]->apply(y.segment(off, blocks_[i]));
            off += blocks_[i];
        }
        return out;
    }

    /// (N y)_i
    Vec N_row(int i, const Vec& y) const {
        Vec fty = Vec::Zero(nx_);
        int off = 0;
        for (size_t j = 0; j < blocks_.size(); ++j) {
            fty += F_[j]->apply_adjoint(y.segment(off, blocks_[j]));
            off += blocks_[j];
        }
        const auto& h = handles_[i];
        Vec out = sig_->apply(y).segment(h.offset, h.dim);
        out += sigma_ * F_[i]->apply(fty) + D_[i]->apply(y.segment(h.offset, h.dim));
        return out;
    }

    /// N_u v: block i collects sum_{j>i} N_ij v_j
    Vec apply_Nu(const Vec& v) const {
        Vec out = Vec::Zero(ny_);
        for (int i = 0; i + 1 < num_blocks(); ++i) {
            Vec masked = v;
            masked.head(handles_[i + 1].offset).setZero();
            out.segment(handles_[i].offset, handles_[i].dim) = N_row(i, masked);
        }
        return out;
    }

    /// N_u* v: block j collects sum_{i<j} N_ji v_i
    Vec apply_Nu_adjoint(const Vec& v) const {
        Vec out = Vec::Zero(ny_);
        for (int j = 1; j < num_blocks(); ++j) {
            Vec masked = Vec::Zero(ny_);
            masked.head(handles_[j].offset) = v.head(handles_[j].offset);
            out.segment(handles_[j].offset, handles_[j].dim) = N_row(j, masked);
        }
        return out;
    }

    /// Solve N_ii u = r to high accuracy.
    Vec solve_block(int i, const Vec& r) const {
        const auto& h = handles_[i];
        switch (h.kind) {
            case BlockSolve::prox_diagonal: return r.cwiseQuotient(h.diag);
            case BlockSolve::direct:
            case BlockSolve::prox_iterative: return h.chol.solve(r);
            case BlockSolve::iterative: {
                PcgResult res = pcg(*h.Nii, r, h.precond, 1e-14, opt_.pcg_maxit);
                if (res.relres > 1e-10) throw NumericalFailure("block solve did not converge", res.iters);
                return res.x;
            }
        }
        throw Unsupported("unknown block solver");
    }

    Vec apply_Nd_inverse(const Vec& v) const {
        Vec out(ny_);
        for (int i = 0; i < num_blocks(); ++i)
            out.segment(handles_[i].offset, handles_[i].dim) = solve_block(i, segment(v, i));
        return out;
    }

    /// N_sGS = N_u N_d^{-1} N_u*
    MapPtr sgs_operator() const {
        return function_map(
            ny_, ny_, [this](const Vec& v) { return apply_Nu(apply_Nd_inverse(apply_Nu_adjoint(v))); }, nullptr, true);
    }

    /// Dense N for verification; refuses beyond `cap`.
    Mat dense_N(int cap = 500) const {
        if (ny_ > cap) throw SizeLimit("dense assembly of N exceeds the size cap");
        Mat n = N_->to_dense();
        return 0.5 * (n + n.transpose());
    }

private:
    void build_block(int i, const MultiBlockProblem& P) {
        auto& h = handles_[i];
        h.offset = P.offset(i);
        h.dim = blocks_[i];
        const int off = h.offset, dim = h.dim;
        MapPtr sig_ii = function_map(
            dim, dim,
            [this, off, dim](const Vec& v) {
                Vec y = Vec::Zero(ny_);
                y.segment(off, dim) = v;
                return Vec(sig_->apply(y).segment(off, dim));
            },
            nullptr, true);
        MapPtr ff = scale(sigma_, gram(F_[i]));
        h.Nii = linear_combination({{1.0, sig_ii}, {1.0, ff}, {1.0, D_[i]}});
        MapPtr cond = linear_combination({{0.5, sig_ii}, {1.0, ff}, {1.0, D_[i]}});
        const std::string name = "block " + std::to_string(i + 1);

        // strict positive definiteness of 1/2 Σ̂_ii + σ F_i F_i* + D_i
        if (dim <= opt_.dense_cap) {
            Mat c = cond->to_dense();
            try {
                CholeskyHandle test(0.5 * (c + c.transpose()), opt_.pivot_tol);
            } catch (const RankDeficiency& e) {
                throw AssumptionViolation(name, "1/2 Σ̂_ii + σ F_i F_i* + D_i is not positive definite (pivot " +
                                                    std::to_string(e.pivot()) + ")");
            }
        } else {
            double ritz = lanczos_min_ritz(*cond, opt_.lanczos_steps);
            double top = operator_norm(*cond, 1e-6, 200);
            if (!(ritz > 1e-12 * std::max(top, 1.0)))
                throw AssumptionViolation(name, "1/2 Σ̂_ii + σ F_i F_i* + D_i has a nonpositive Ritz value");
        }

        h.diag = h.Nii->diagonal();
        for (int k = 0; k < dim; ++k)
            if (!(h.diag[k] > 0.0)) throw AssumptionViolation(name, "N_ii has a nonpositive diagonal entry");
        h.precond = diagonal_map(h.diag.cwiseInverse());

        if (i == 0) {
            if (is_diagonal(*h.Nii, h.diag)) {
                h.kind = BlockSolve::prox_diagonal;
                return;
            }
            if (dim > opt_.dense_cap) throw Unsupported("block 1 with a large non-diagonal N_11");
            h.kind = BlockSolve::prox_iterative;
        } else {
            h.kind = (dim <= opt_.dense_cap && !opt_.iterative_blocks) ? BlockSolve::direct : BlockSolve::iterative;
            if (h.kind == BlockSolve::iterative) return;
        }
        Mat nd = h.Nii->to_dense();
        h.dense = 0.5 * (nd + nd.transpose());
        try {
            h.chol.factorize(h.dense, opt_.pivot_tol);
        } catch (const RankDeficiency& e) {
            throw AssumptionViolation(name, "N_ii is not positive definite (pivot " + std::to_string(e.pivot()) + ")");
        }
    }

    static bool is_diagonal(const LinearMap& a, const Vec& diag) {
        std::mt19937 gen(7);
        std::normal_distribution<double> nd;
        const double scale = diag.cwiseAbs().maxCoeff();
        for (int t = 0; t < 3; ++t) {
            Vec r(a.cols());
            for (auto& x : r) x = nd(gen);
            if ((a.apply(r) - diag.cwiseProduct(r)).norm() > 1e-13 * scale * r.norm()) return false;
        }
        return true;
    }

    std::vector<int> blocks_;
    std::vector<MapPtr> F_;
    double sigma_;
    DecompositionOptions opt_;
    MapPtr sig_;
    int ny_ = 0, nx_ = 0;
    std::vector<MapPtr> D_;
    MapPtr N_;
    std::vector<BlockHandle> handles_;
};

inline SGSDecomposition build_decomposition(const MultiBlockProblem& P, std::vector<MapPtr> D, double sigma,
                                            DecompositionOptions opt = {}) {
    return SGSDecomposition(P, std::move(D), sigma, opt);
}

inline MapPtr sgs_operator(const SGSDecomposition& dec) { return dec.sgs_operator(); }

/// δ_sGS = δ + N_u N_d^{-1} (δ - δ̃)
inline Vec aggregate_error(const SGSDecomposition& dec, const Vec& delta, const Vec& delta_tilde) {
    if (delta.size() != dec.dim_y() || delta_tilde.size() != dec.dim_y())
        throw InvalidInput("aggregate_error: dimension mismatch");
    return delta + dec.apply_Nu(dec.apply_Nd_inverse(delta - delta_tilde));
}

}  // namespace ipadmm
