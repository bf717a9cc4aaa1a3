#include <gtest/gtest.h>

#include <random>

#include "ipadmm/apps/generators.hpp"
#include "ipadmm/apps/sdp.hpp"
#include "ipadmm/model/majorization.hpp"
#include "ipadmm/model/metrics.hpp"

using namespace ipadmm;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

/// min 1/2 y^2  s.t.  y = 1, as a one-block problem without z.
MultiBlockProblem tiny_qp() {
    MultiBlockProblem P;
    P.blocks = {1};
    P.p = ProxFn::zero();
    P.f = std::make_shared<QuadraticSmooth>(symmetric_map(Mat::Identity(1, 1)), Vec::Zero(1));
    P.F = {identity_map(1)};
    P.G = zero_map(0, 1);
    P.b = Vec();
    P.c = v1(1.0);
    return P;
}

Mat diag2(double a, double b) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

KKTPoint toy_optimum() { return {svec(diag2(1, 0)), svec(diag2(0, 1)), v1(1.0)}; }

}  // namespace

TEST(AugLag, FeasiblePointWithZeroMultiplier) {
    MultiBlockProblem P = build_sdp_dual(toy_sdp());
    KKTPoint u = toy_optimum();
    double v = eval_majorized_auglag(P, u.y, u.z, Vec::Zero(3), u.y, 1.0);
    EXPECT_NEAR(v, -1.0, 1e-14);  // p(S) + 0 - <b,z>
}

TEST(AugLag, AllZeroData) {
    MultiBlockProblem P;
    P.blocks = {2};
    P.p = ProxFn::zero();
    P.f = std::make_shared<ZeroSmooth>(2);
    P.F = {identity_map(2)};
    P.G = dense_map(Mat::Identity(1, 2));
    P.b = Vec::Zero(1);
    P.c = Vec::Zero(2);
    EXPECT_EQ(eval_majorized_auglag(P, Vec::Zero(2), Vec::Zero(1), Vec::Zero(2), Vec::Zero(2), 1.0), 0.0);
}

TEST(AugLag, TinyQpAtOrigin) {
    MultiBlockProblem P = tiny_qp();
    EXPECT_NEAR(eval_majorized_auglag(P, Vec::Zero(1), Vec(), Vec::Zero(1), Vec::Zero(1), 1.0), 0.5, 1e-15);
}

TEST(AugLag, OutsideDomainIsInfinite) {
    MultiBlockProblem P = build_sdp_dual(toy_sdp());
    double v = eval_majorized_auglag(P, svec(diag2(-1, 0)), v1(0), Vec::Zero(3), Vec::Zero(3), 1.0);
    EXPECT_TRUE(std::isinf(v));
}

TEST(AugLag, MatchesStraightLineEvaluation) {
    PlantedProblem pp = gen_random_multiblock({3, 2, 2}, 4, 2, 5);
    const auto& P = pp.P;
    std::mt19937 gen(1);
    std::normal_distribution<double> nd;
    auto draw = [&](int n) {
        Vec v(n);
        for (auto& e : v) e = nd(gen);
        return v;
    };
    for (int t = 0; t < 5; ++t) {
        Vec y = draw(P.dim_y()).cwiseAbs(), z = draw(P.dim_z()), x = draw(P.dim_x());
        const double sigma = 1.7;
        // h(w) + <x, F*y + G*z - c> + σ/2 |F*y + G*z - c|^2 with w = (y, z), spelled out by hand
        Mat F(P.dim_y(), P.dim_x());
        int off = 0;
        for (int i = 0; i < P.num_blocks(); ++i) {
            F.middleRows(off, P.blocks[i]) = P.F[i]->to_dense();
            off += P.blocks[i];
        }
        Vec r = F.transpose() * y + P.G->to_dense().transpose() * z - P.c;
        double ref = P.f->value(y) - P.b.dot(z) + x.dot(r) + 0.5 * sigma * r.squaredNorm();
        EXPECT_NEAR(eval_majorized_auglag(P, y, z, x, y, sigma), ref, 1e-12 * (1 + std::abs(ref)));
    }
}

TEST(KktResidual, ZeroAtToyOptimum) {
    MultiBlockProblem P = build_sdp_dual(toy_sdp());
    EXPECT_LE(kkt_residual(P, toy_optimum()).norm(), 1e-12);
}

TEST(KktResidual, FeasibilitySlotIsLinearInX) {
    MultiBlockProblem P = build_sdp_dual(toy_sdp());
    KKTPoint u = toy_optimum();
    Vec delta = (Vec(3) << 0.3, -0.2, 0.1).finished();
    u.x += delta;
    Vec R = kkt_residual(P, u);
    EXPECT_NEAR((R.tail(1) - P.Gx(delta)).norm(), 0.0, 1e-15);
}

TEST(KktResidual, ZeroAtPlantedPoint) {
    for (unsigned s = 0; s < 5; ++s) {
        PlantedProblem pp = gen_random_multiblock({4, 3, 2}, 6, 3, s, s % 2 == 1);
        EXPECT_LE(kkt_residual_norm(pp.P, pp.solution), 1e-10) << "seed " << s;
    }
}

TEST(EtaSdp, OptimalToyIsZero) {
    SdpInstance inst = toy_sdp();
    KKTPoint u = toy_optimum();
    EtaSdp e = sdp_eta(inst, u.x, u.z, u.y);
    EXPECT_LE(e.max, 1e-12);
    EXPECT_LE(std::abs(e.gap), 1e-12);
}

TEST(EtaSdp, NegativeIdentityHasConeDistance) {
    SdpInstance inst = toy_sdp();
    KKTPoint u = toy_optimum();
    Vec X = svec(Mat(-Mat::Identity(2, 2)));
    EtaSdp e = sdp_eta(inst, X, u.z, u.y);
    const double nI = std::sqrt(2.0);
    EXPECT_GE(e.S, nI / (1 + nI) - 1e-15);
}

TEST(EtaSdp, DoubledPrimalHalfFeasibility) {
    SdpInstance inst = toy_sdp();
    KKTPoint u = toy_optimum();
    EtaSdp e = sdp_eta(inst, Vec(2.0 * u.x), u.z, u.y);
    EXPECT_NEAR(e.P, 0.5, 1e-15);
}

TEST(EtaQsdp, ExactTupleIsZero) {
    // the toy SDP as a QSDP with Q = 0: min -<-C, X>
    SdpInstance inst = toy_sdp();
    DenseMap AE(Mat(inst.A), false), AI(Mat(0, 3), false);
    KKTPoint u = toy_optimum();
    EtaQsdp e = eta_qsdp(*zero_map(3), 0.0, AE, inst.b, AI, Vec(), Vec(-inst.C), u.x, Vec::Zero(3), u.y, u.z, Vec());
    EXPECT_LE(e.max, 1e-12);
    EXPECT_LE(std::abs(e.gap), 1e-12);
}

TEST(EtaQsdp, ConsistentWWithZeroQ) {
    SdpInstance inst = toy_sdp();
    DenseMap AE(Mat(inst.A), false), AI(Mat(0, 3), false);
    KKTPoint u = toy_optimum();
    EtaQsdp e = eta_qsdp(*zero_map(3), 0.0, AE, inst.b, AI, Vec(), Vec(-inst.C), u.x, u.x, u.y, u.z, Vec());
    EXPECT_EQ(e.W, 0.0);
}

TEST(EtaQsdp, NegativeInequalityMultiplier) {
    SdpInstance inst = toy_sdp();
    Mat AIm = Mat::Zero(2, 3);
    AIm(0, 0) = 1.0;
    AIm(1, 2) = 1.0;
    DenseMap AE(Mat(inst.A), false), AI(AIm, false);
    KKTPoint u = toy_optimum();
    Vec zI = (Vec(2) << -0.1, std::sqrt(1 - 0.01)).finished();
    EtaQsdp e = eta_qsdp(*zero_map(3), 0.0, AE, inst.b, AI, Vec::Zero(2), Vec(-inst.C), u.x, u.x, u.y, u.z, zI);
    EXPECT_GE(e.I, 0.1 / 2 - 1e-15);
}

TEST(Majorization, ExactQuadraticPasses) {
    Mat B = Mat::Random(4, 4);
    Mat H = B * B.transpose();
    QuadraticSmooth f(symmetric_map(H), Vec::Ones(4));
    MajorizationReport r = check_majorization(f, 100, 3);
    EXPECT_TRUE(r.passed);
    EXPECT_GE(r.worst_majorization_slack, -1e-12);
    EXPECT_GE(r.worst_gradient_slack, -1e-12);
}

TEST(Majorization, HalfHessianFails) {
    Mat H = Mat::Identity(3, 3) * 2.0;
    H(0, 1) = H(1, 0) = 0.5;
    QuadraticSmooth exact(symmetric_map(H), Vec::Zero(3));
    auto grad = [H](const Vec& y) { return Vec(H * y); };
    auto val = [H](const Vec& y) { return 0.5 * y.dot(H * y); };
    CallableSmooth under(3, val, grad, symmetric_map(Mat(0.5 * H)));
    EXPECT_FALSE(check_majorization(under, 100, 4).passed);
}

TEST(Majorization, LogSumExpWithIdentity) {
    LogSumExp f(2, 1.0);
    EXPECT_TRUE(check_majorization(f, 100, 5, 3.0).passed);
    // independent bound: the Hessian diag(p) - pp' has norm <= 1 over a grid
    double worst = 0;
    for (double a = -5; a <= 5; a += 0.25)
        for (double b = -5; b <= 5; b += 0.25) {
            Vec p = f.gradient(Vec((Vec(2) << a, b).finished()));
            Mat Hs = Mat(p.asDiagonal()) - p * p.transpose();
            worst = std::max(worst, max_eigenvalue(Hs));
        }
    EXPECT_LE(worst, 1.0);
}

TEST(Majorization, AnchorConsistency) {
    LogSumExp f(3, 1.0);
    Vec y = Vec::LinSpaced(3, -1, 2);
    EXPECT_EQ(f.majorized(y, y), f.value(y));
}

TEST(ProblemValidation, RejectsRhsOutsideRange) {
    MultiBlockProblem P;
    P.blocks = {2};
    P.p = ProxFn::zero();
    P.f = std::make_shared<ZeroSmooth>(2);
    P.F = {identity_map(2)};
    Mat G(2, 2);
    G << 1, 0, 1, 0;
    P.G = dense_map(G);
    P.b = (Vec(2) << 1, 0).finished();
    P.c = Vec::Zero(2);
    EXPECT_THROW(P.validate(true), InvalidInput);
    P.b = (Vec(2) << 1, 1).finished();
    EXPECT_NO_THROW(P.validate(true));
}

TEST(ProblemValidation, RejectsBlockMismatch) {
    MultiBlockProblem P = tiny_qp();
    P.blocks = {2};
    EXPECT_THROW(P.validate(true), InvalidInput);
}
