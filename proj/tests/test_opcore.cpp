#include <gtest/gtest.h>

#include <random>

#include "ipadmm/core/linear_map.hpp"
#include "ipadmm/core/linsolve.hpp"
#include "ipadmm/core/prox.hpp"
#include "ipadmm/core/quad_prox_solver.hpp"
#include "ipadmm/core/sym_matrix.hpp"

using namespace ipadmm;

namespace {

Mat random_mat(int r, int c, unsigned seed) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> nd;
    Mat m(r, c);
    for (int j = 0; j < c; ++j)
        for (int i = 0; i < r; ++i) m(i, j) = nd(gen);
    return m;
}

Mat random_spd(int n, unsigned seed) {
    Mat a = random_mat(n, n, seed);
    return a * a.transpose() + Mat::Identity(n, n);
}

Vec v2(double a, double b) { return Eigen::Vector2d(a, b); }
Vec v3(double a, double b, double c) { return Eigen::Vector3d(a, b, c); }

Mat sym2(double a, double b, double c) {
    Mat m(2, 2);
    m << a, b, b, c;
    return m;
}

}  // namespace

TEST(ProjectPsd, ClipsNegativeEigenvalue) {
    Mat s = v2(2, -3).asDiagonal();
    Mat p = project_psd_dense(s);
    EXPECT_NEAR((p - Mat(v2(2, 0).asDiagonal())).norm(), 0.0, 1e-14);
}

TEST(ProjectPsd, FixesPsdInput) {
    Mat s = random_spd(5, 3);
    EXPECT_LE((project_psd_dense(s) - s).norm(), 1e-12 * s.norm());
}

TEST(ProjectPsd, OffDiagonalExchange) {
    // eigenpairs (1, (1,1)/√2) and (-1, (1,-1)/√2)
    Mat p = project_psd_dense(sym2(0, 1, 0));
    EXPECT_NEAR((p - sym2(0.5, 0.5, 0.5)).norm(), 0.0, 1e-14);
}

TEST(ProjectPsd, RejectsNonFinite) {
    Mat s = sym2(1, std::nan(""), 1);
    EXPECT_THROW(project_psd_dense(s), InvalidInput);
}

TEST(ProjectPsd, Idempotent) {
    for (unsigned seed = 0; seed < 10; ++seed) {
        Mat a = random_mat(6, 6, seed);
        Mat s = a + a.transpose();
        Mat p = project_psd_dense(s);
        EXPECT_LE((project_psd_dense(p) - p).norm(), 1e-12 * (1.0 + p.norm()));
        EXPECT_GE(min_eigenvalue(p), -1e-12);
    }
}

TEST(ProjectPsd, NearestInFrobenius) {
    Mat a = random_mat(4, 4, 9);
    Mat s = a + a.transpose();
    Mat p = project_psd_dense(s);
    double best = (p - s).norm();
    for (unsigned t = 0; t < 200; ++t) {
        Mat b = random_mat(4, 4, 100 + t);
        Mat cand = p + 0.1 * b * b.transpose();
        EXPECT_GE((cand - s).norm(), best - 1e-12);
    }
}

TEST(SymMatrix, SvecRoundTripBitExact) {
    Mat a = random_mat(5, 5, 1);
    Mat s = a + a.transpose();
    SymMatrix m = SymMatrix::from_dense(s);
    SymMatrix back = SymMatrix::from_svec(svec(smat(m.data())));
    EXPECT_TRUE(back == m);
}

TEST(SymMatrix, SvecNormMatchesFrobenius) {
    for (unsigned seed = 0; seed < 10; ++seed) {
        Mat a = random_mat(6, 6, seed);
        Mat s = a + a.transpose();
        EXPECT_NEAR(svec(s).norm(), s.norm(), 1e-14 * s.norm());
    }
}

TEST(SymMatrix, SvecInnerProductMatchesTrace) {
    Mat a = random_mat(4, 4, 2), b = random_mat(4, 4, 3);
    Mat s = a + a.transpose(), t = b + b.transpose();
    EXPECT_NEAR(svec(s).dot(svec(t)), (s * t).trace(), 1e-12);
}

TEST(Prox, SoftThreshold) {
    Vec v = Vec::Constant(1, 2.0);
    EXPECT_DOUBLE_EQ(prox(ProxFn::l1(0.5), v, 1.0)[0], 1.5);
}

TEST(Prox, SoftThresholdScaledMetric) {
    // W = σI thresholds at λ/σ
    Vec v = Vec::Constant(1, 2.0);
    EXPECT_DOUBLE_EQ(prox(ProxFn::l1(0.5), v, 2.0)[0], 1.75);
}

TEST(Prox, NonnegProjection) {
    Vec v = Vec::Constant(1, -1.0);
    EXPECT_DOUBLE_EQ(prox(ProxFn::nonneg(), v, 1.0)[0], 0.0);
}

TEST(Prox, QuadraticScalar) {
    // argmin 1/2 u^2 + 1/2 (u-3)^2
    Vec v = Vec::Constant(1, 3.0);
    ProxFn f = ProxFn::quadratic(identity_map(1), Vec::Zero(1));
    EXPECT_NEAR(prox(f, v, 1.0)[0], 1.5, 1e-15);
}

TEST(Prox, ZeroIsIdentity) {
    Vec v = random_mat(5, 1, 4).col(0);
    EXPECT_EQ(prox(ProxFn::zero(), v, 1.0), v);
}

TEST(Prox, CustomWithoutSolverIsUnsupported) {
    ProxFn f = ProxFn::custom(nullptr, nullptr);
    EXPECT_THROW(prox(f, Vec::Zero(2), 1.0), Unsupported);
}

TEST(Prox, OutputInDomain) {
    Vec v = random_mat(6, 1, 5).col(0);
    EXPECT_EQ(prox_value(ProxFn::nonneg(), prox(ProxFn::nonneg(), v, 1.0)), 0.0);
    EXPECT_EQ(prox_value(ProxFn::box(-0.5, 0.5), prox(ProxFn::box(-0.5, 0.5), v, 1.0)), 0.0);
    Mat a = random_mat(3, 3, 6);
    Vec sv = svec(Mat(a + a.transpose()));
    EXPECT_EQ(prox_value(ProxFn::psd(), prox(ProxFn::psd(), sv, 1.0)), 0.0);
}

TEST(Prox, FirmlyNonexpansiveSpotCheck) {
    std::vector<ProxFn> fns = {ProxFn::l1(0.3), ProxFn::nonneg(), ProxFn::box(-1, 2), ProxFn::zero()};
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> ud(0.5, 3.0);
    for (auto& f : fns)
        for (unsigned t = 0; t < 50; ++t) {
            Vec u = random_mat(5, 1, 10 + t).col(0), v = random_mat(5, 1, 500 + t).col(0);
            Vec w(5);
            for (auto& e : w) e = ud(gen);
            Vec pu = prox(f, u, w), pv = prox(f, v, w);
            auto wn = [&](const Vec& a) { return std::sqrt(a.dot(w.cwiseProduct(a))); };
            EXPECT_LE(wn(pu - pv), wn(u - v) + 1e-12);
            EXPECT_GE((pu - pv).dot(w.cwiseProduct(u - v)) - std::pow(wn(pu - pv), 2), -1e-12);
        }
}

TEST(Prox, PsdFirmlyNonexpansive) {
    for (unsigned t = 0; t < 20; ++t) {
        Mat a = random_mat(4, 4, t), b = random_mat(4, 4, 50 + t);
        Vec u = svec(Mat(a + a.transpose())), v = svec(Mat(b + b.transpose()));
        Vec pu = prox(ProxFn::psd(), u, 1.0), pv = prox(ProxFn::psd(), v, 1.0);
        EXPECT_LE((pu - pv).norm(), (u - v).norm() + 1e-12);
    }
}

TEST(SolveSpd, Identity) {
    Vec b = v3(1, 2, 3);
    CholeskyHandle h(Mat::Identity(3, 3));
    EXPECT_EQ(solve_spd(h, b), b);
}

TEST(SolveSpd, Diagonal) {
    CholeskyHandle h(Mat(v2(2, 4).asDiagonal()));
    Vec x = solve_spd(h, v2(2, 8));
    EXPECT_NEAR(x[0], 1.0, 1e-15);
    EXPECT_NEAR(x[1], 2.0, 1e-15);
}

TEST(SolveSpd, DenseTwoByTwo) {
    CholeskyHandle h(sym2(4, 1, 3));
    Vec x = solve_spd(h, v2(1, 2));
    EXPECT_NEAR(x[0], 1.0 / 11.0, 1e-15);
    EXPECT_NEAR(x[1], 7.0 / 11.0, 1e-15);
    Vec r = sym2(4, 1, 3) * x - v2(1, 2);
    EXPECT_LE(r.norm(), 1e-12 * (1 + std::sqrt(5.0)));
}

TEST(SolveSpd, NonPdReportsPivot) {
    Mat a = Mat::Identity(3, 3);
    a(2, 2) = -1.0;
    try {
        CholeskyHandle h(a);
        FAIL() << "expected RankDeficiency";
    } catch (const RankDeficiency& e) {
        EXPECT_EQ(e.pivot(), 2);
    }
}

TEST(Pcg, IdentityOneIteration) {
    Vec b = v3(1, -2, 3);
    MapPtr I = identity_map(3);
    PcgResult r = pcg(*I, b, nullptr, 1e-12, 10);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.iters, 1);
    EXPECT_NEAR((r.x - b).norm(), 0.0, 1e-14);
}

TEST(Pcg, PerfectPreconditioner) {
    MapPtr A = diagonal_map(v2(1, 10));
    MapPtr P = diagonal_map(v2(1, 0.1));
    PcgResult r = pcg(*A, v2(1, 10), P.get(), 1e-12, 10);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.iters, 2);
    EXPECT_NEAR(r.x[0], 1.0, 1e-12);
    EXPECT_NEAR(r.x[1], 1.0, 1e-12);
}

TEST(Pcg, MatchesDenseSolve) {
    MapPtr A = symmetric_map(sym2(4, 1, 3));
    PcgResult r = pcg(*A, v2(1, 2), nullptr, 1e-12, 50);
    EXPECT_NEAR(r.x[0], 1.0 / 11.0, 1e-12);
    EXPECT_NEAR(r.x[1], 7.0 / 11.0, 1e-12);
}

TEST(Pcg, RandomSpdMatchesCholesky) {
    for (unsigned seed = 0; seed < 5; ++seed) {
        Mat a = random_spd(12, seed);
        Vec b = random_mat(12, 1, 40 + seed).col(0);
        MapPtr A = symmetric_map(a);
        PcgResult r = pcg(*A, b, nullptr, 1e-14, 500);
        Vec x = CholeskyHandle(a).solve(b);
        EXPECT_LE((r.x - x).norm(), 1e-10 * x.norm());
    }
}

TEST(Pcg, DetectsIndefinite) {
    MapPtr A = diagonal_map(v2(1, -1));
    EXPECT_THROW(pcg(*A, v2(0, 1), nullptr, 1e-12, 10), IndefiniteOperator);
}

TEST(Pcg, CapReturnsBestIterate) {
    Mat a = random_spd(30, 8);
    Vec b = Vec::Ones(30);
    MapPtr A = symmetric_map(a);
    PcgResult r = pcg(*A, b, nullptr, 1e-15, 2);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.iters, 2);
    EXPECT_LT(r.relres, 1.0);
}

TEST(OperatorNorm, Diagonal) { EXPECT_NEAR(operator_norm(*diagonal_map(v2(1, 3))), 3.0, 1e-9); }

TEST(OperatorNorm, ZeroMap) { EXPECT_EQ(operator_norm(*zero_map(3, 4)), 0.0); }

TEST(OperatorNorm, NilpotentTwoByTwo) {
    Mat a(2, 2);
    a << 0, 2, 0, 0;
    EXPECT_NEAR(operator_norm(*dense_map(a)), 2.0, 1e-9);
}

TEST(OperatorNorm, Deterministic) {
    MapPtr a = dense_map(random_mat(7, 5, 2));
    EXPECT_EQ(operator_norm(*a), operator_norm(*a));
    EXPECT_NEAR(operator_norm(*a), spectral_norm(random_mat(7, 5, 2)), 1e-8);
}

TEST(ProjectRange, SurjectiveIsIdentity) {
    MapPtr G = dense_map(random_spd(3, 1));
    Vec z = v3(1, -1, 2);
    EXPECT_LE((project_range(G, z) - z).norm(), 1e-10);
}

TEST(ProjectRange, CoordinateLine) {
    Mat g(2, 2);
    g << 1, 0, 0, 0;
    Vec p = project_range(dense_map(g), v2(1, 1));
    EXPECT_NEAR(p[0], 1.0, 1e-12);
    EXPECT_NEAR(p[1], 0.0, 1e-12);
}

TEST(ProjectRange, DiagonalLine) {
    Mat g(2, 1);
    g << 1, 1;
    Vec p = project_range(dense_map(g), v2(2, 0));
    EXPECT_NEAR(p[0], 1.0, 1e-12);
    EXPECT_NEAR(p[1], 1.0, 1e-12);
}

TEST(ProjectRange, OrthogonalResidual) {
    Mat g = random_mat(6, 3, 4);
    MapPtr G = dense_map(g);
    Vec z = random_mat(6, 1, 5).col(0);
    Vec p = project_range(G, z);
    for (unsigned t = 0; t < 10; ++t) {
        Vec u = random_mat(3, 1, 20 + t).col(0);
        EXPECT_NEAR((z - p).dot(g * u), 0.0, 1e-10);
    }
}

TEST(PinvApply, Identity) {
    Vec r = v2(3, 4);
    EXPECT_LE((pinv_apply(identity_map(2), r) - r).norm(), 1e-12);
}

TEST(PinvApply, SingularDiagonal) {
    Vec x = pinv_apply(diagonal_map(v2(2, 0)), v2(4, 5));
    EXPECT_NEAR(x[0], 2.0, 1e-12);
    EXPECT_NEAR(x[1], 0.0, 1e-12);
}

TEST(PinvApply, RankOne) {
    Vec x = pinv_apply(symmetric_map(sym2(2, 2, 2)), v2(2, 2));
    EXPECT_NEAR(x[0], 0.5, 1e-12);
    EXPECT_NEAR(x[1], 0.5, 1e-12);
}

TEST(PinvApply, MatchesDensePseudoinverse) {
    Mat g = random_mat(5, 3, 11);
    Mat ggt = g * g.transpose();
    Vec r = random_mat(5, 1, 12).col(0);
    Vec x = pinv_apply(symmetric_map(ggt), r);
    Vec ref = dense_pinv_sym(ggt) * r;
    EXPECT_LE((x - ref).norm(), 1e-9 * (1 + ref.norm()));
}

class AdjointConsistency : public ::testing::TestWithParam<int> {};

TEST_P(AdjointConsistency, RandomPairs) {
    const int which = GetParam();
    Mat a = random_mat(4, 3, 1), b = random_mat(3, 5, 2);
    SpMat sp(4, 3);
    sp.insert(0, 1) = 2.0;
    sp.insert(3, 2) = -1.0;
    MapPtr m;
    switch (which) {
        case 0: m = dense_map(a); break;
        case 1: m = sparse_map(sp); break;
        case 2: m = diagonal_map(v3(1, -2, 3)); break;
        case 3: m = zero_map(4, 3); break;
        case 4: m = linear_combination({{2.0, dense_map(a)}, {-1.0, sparse_map(sp)}}); break;
        case 5: m = compose(dense_map(a), dense_map(b)); break;
        case 6: m = adjoint(dense_map(a)); break;
        case 7: m = block_map({4, 3}, {3, 5}, {{dense_map(a), nullptr}, {nullptr, dense_map(b)}}); break;
        case 8: m = gram(dense_map(a)); break;
        case 9: {
            Mat aa = a;
            m = function_map(4, 3, [aa](const Vec& v) { return Vec(aa * v); },
                             [aa](const Vec& v) { return Vec(aa.transpose() * v); });
            break;
        }
    }
    EXPECT_LE(adjoint_mismatch(*m, 100, 7), 1e-12);
    if (m->self_adjoint()) {
        EXPECT_EQ(m->rows(), m->cols());
        Mat d = m->to_dense();
        EXPECT_LE((d - d.transpose()).norm(), 1e-12 * (1 + d.norm()));
    }
}

INSTANTIATE_TEST_SUITE_P(AllKinds, AdjointConsistency, ::testing::Range(0, 10));

TEST(QuadProx, SmoothDirectIsExact) {
    Mat M = random_spd(4, 3);
    Vec q = Vec::Ones(4);
    QuadProxResult r = solve_quad_prox(ProxFn::zero(), 2, M, q);
    EXPECT_TRUE(r.exact);
    EXPECT_LE((M * r.w + q).norm(), 1e-12);
    EXPECT_EQ(r.d.norm(), 0.0);
}

TEST(QuadProx, ResidualCertifiesInclusion) {
    Mat M = random_spd(6, 4);
    Vec q = random_mat(6, 1, 5).col(0);
    QuadProxOptions opt;
    opt.eps = 1e-3;
    opt.polish_every = 0;
    QuadProxResult r = solve_quad_prox(ProxFn::l1(0.7), 4, M, q, opt);
    EXPECT_LE(r.d.norm(), 1e-3);
    EXPECT_LE(quad_prox_reeval(ProxFn::l1(0.7), 4, M, q, r.w, r.d), 1e-10);
}

TEST(QuadProx, PolishedSolveMatchesReference) {
    Mat M = random_spd(5, 2);
    Vec q = 3.0 * random_mat(5, 1, 1).col(0);
    QuadProxResult r = solve_quad_prox(ProxFn::nonneg(), 5, M, q);
    EXPECT_TRUE(r.exact);
    // KKT: w >= 0, g = Mw+q >= 0, w.g = 0
    Vec g = M * r.w + q;
    EXPECT_GE(r.w.minCoeff(), -1e-12);
    EXPECT_GE(g.minCoeff(), -1e-10);
    EXPECT_LE(std::abs(r.w.dot(g)), 1e-10);
}
