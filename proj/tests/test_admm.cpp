#include <gtest/gtest.h>

#include <random>

#include "ipadmm/admm/equivalence.hpp"
#include "ipadmm/apps/basis_pursuit.hpp"
#include "ipadmm/apps/generators.hpp"
#include "ipadmm/apps/sdp.hpp"

using namespace ipadmm;

namespace {

Mat diag2(double a, double b) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

Vec randn(std::mt19937& gen, int n) {
    std::normal_distribution<double> nd;
    Vec v(n);
    for (auto& e : v) e = nd(gen);
    return v;
}

ADMMConfig base_cfg(double tau, double sigma = 1.0) {
    ADMMConfig c;
    c.tau = tau;
    c.sigma = sigma;
    return c;
}

MultiBlockProblem scalar_blocks(const Mat& S) {
    MultiBlockProblem P;
    const int s = int(S.rows());
    P.blocks.assign(s, 1);
    P.p = ProxFn::zero();
    P.f = std::make_shared<QuadraticSmooth>(symmetric_map(S), Vec::Zero(s));
    for (int i = 0; i < s; ++i) P.F.push_back(zero_map(1, 1));
    P.G = zero_map(0, 1);
    P.c = Vec::Zero(1);
    return P;
}

}  // namespace

TEST(AssumptionP, PassesWithDefiniteCoupling) {
    PlantedProblem pp = gen_random_multiblock({3, 2}, 6, 2, 1);
    AssumptionPReport r = check_assumption_p(pp.P, {}, 1.0);
    EXPECT_TRUE(r.passed);
    EXPECT_EQ(r.block_min_eig.size(), 2u);
}

TEST(AssumptionP, RejectsFullNegativeShift) {
    Mat S = Mat::Identity(2, 2) * 2.0;
    MultiBlockProblem P = scalar_blocks(S);
    // D_1 = -Σ̂_11 but block 2 still definite through a positive D_2 large enough to pass the first test
    P.F = {identity_map(1), zero_map(1, 1)};
    try {
        check_assumption_p(P, {identity_map(1, -2.0), nullptr}, 2.0);
        FAIL() << "expected an assumption violation";
    } catch (const AssumptionViolation& e) {
        EXPECT_NE(std::string(e.what()).find("D >= -1/2 Sigma_f"), std::string::npos);
    }
}

TEST(AssumptionP, ScalarHalfShiftPasses) {
    MultiBlockProblem P = scalar_blocks(diag2(2, 2));
    AssumptionPReport r = check_assumption_p(P, {identity_map(1, -0.5), identity_map(1, -0.5)}, 1.0);
    EXPECT_TRUE(r.passed);
    EXPECT_NEAR(r.block_min_eig[0], 0.5, 1e-15);
    EXPECT_NEAR(r.second_min_eig, 0.5, 1e-15);
}

TEST(AssumptionP, NamesFailingBlock) {
    MultiBlockProblem P = scalar_blocks(diag2(2, 2));
    try {
        check_assumption_p(P, {nullptr, identity_map(1, -1.0)}, 1.0);
        FAIL() << "expected an assumption violation";
    } catch (const AssumptionViolation& e) {
        EXPECT_NE(std::string(e.what()).find("block 2"), std::string::npos);
    }
}

TEST(AdmmStep, ToySdpHandStep) {
    SdpInstance inst = toy_sdp();
    MultiBlockProblem P = build_sdp_dual(inst);
    for (double tau : {1.0, 1.618}) {
        ADMMConfig c = base_cfg(tau);
        SGSDecomposition dec(P, {}, 1.0);
        ZSolver zs(P.G, false, 2000);
        AdmmStepResult st = admm_step(P, c, dec, zs, Vec::Zero(3), Vec::Zero(3), Vec::Zero(1), 0.0);
        EXPECT_LE((st.y - svec(diag2(1, 2))).norm(), 1e-14);
        EXPECT_NEAR(st.z[0], 0.5, 1e-14);
        EXPECT_LE((st.x - svec(diag2(0.5 * tau, 0.5 * tau))).norm(), 1e-14);
        EXPECT_EQ(st.gamma.norm(), 0.0);
    }
}

TEST(AdmmStep, PcgGammaIsAttainedResidual) {
    PlantedProblem pp = gen_random_multiblock({3, 2}, 6, 4, 2);
    const auto& P = pp.P;
    ADMMConfig c = base_cfg(1.5);
    c.mode = AdmmMode::inexact;
    SGSDecomposition dec(P, {}, 1.0);
    ZSolver zs(P.G, true, 2000);
    std::mt19937 gen(3);
    Vec x = randn(gen, 6), y = randn(gen, 5).cwiseAbs(), z = randn(gen, 4);
    AdmmStepResult st = admm_step(P, c, dec, zs, x, y, z, 1e-4);
    Vec gam = P.Gx(x) - P.b + P.Gx(P.constraint(st.y, st.z));
    EXPECT_LE((gam - st.gamma).norm(), 1e-12);
    EXPECT_LE(st.gamma.norm(), 1e-4);
}

TEST(RunAdmm, ToySdpConverges) {
    MultiBlockProblem P = build_sdp_dual(toy_sdp());
    for (double tau : {1.618, 1.99}) {
        ADMMConfig c = base_cfg(tau);
        c.stop_tol = 1e-8;
        AdmmResult r = run_admm(P, c, Vec::Zero(3), Vec::Zero(3), Vec::Zero(1));
        EXPECT_TRUE(r.converged) << "tau " << tau;
        EXPECT_LE((r.x - svec(diag2(1, 0))).norm(), 1e-6);
        EXPECT_LE((r.y - svec(diag2(0, 1))).norm(), 1e-6);
        EXPECT_NEAR(r.z[0], 1.0, 1e-6);
    }
}

TEST(RunAdmm, StartAtOptimumStops) {
    MultiBlockProblem P = build_sdp_dual(toy_sdp());
    AdmmResult r = run_admm(P, base_cfg(1.9), svec(diag2(1, 0)), svec(diag2(0, 1)), Vec::Ones(1));
    EXPECT_EQ(r.iterations, 0);
    EXPECT_TRUE(r.converged);
}

TEST(RunAdmm, ClassicMatchesRunAdmmExactly) {
    MultiBlockProblem P = build_sdp_dual(toy_sdp());
    ADMMConfig c = base_cfg(1.9);
    c.max_iter = 30;
    c.stop_tol = 0;
    AdmmResult a = run_admm(P, c, Vec::Zero(3), Vec::Zero(3), Vec::Zero(1));
    AdmmResult b = classic_admm_2block(P, c, Vec::Zero(3), Vec::Zero(3), Vec::Zero(1));
    for (int k = 0; k <= 30; ++k) {
        EXPECT_EQ(a.trace.x[k], b.trace.x[k]);
        EXPECT_EQ(a.trace.y[k], b.trace.y[k]);
    }
}

TEST(RunAdmm, ClassicRejectsMultiBlock) {
    PlantedProblem pp = gen_random_multiblock({2, 2}, 4, 1, 0);
    EXPECT_THROW(classic_admm_2block(pp.P, base_cfg(1.0), Vec::Zero(4), Vec::Zero(4), Vec::Zero(1)), Misuse);
    PlantedProblem one = gen_random_multiblock({3}, 4, 1, 0);
    EXPECT_THROW(classic_admm_2block(one.P, base_cfg(1.0), Vec::Zero(4), Vec::Zero(3), Vec::Zero(1)), Misuse);
}

TEST(RunAdmm, RejectsBadInput) {
    MultiBlockProblem P = build_sdp_dual(toy_sdp());
    EXPECT_THROW(run_admm(P, base_cfg(2.0), Vec::Zero(3), Vec::Zero(3), Vec::Zero(1)), InvalidInput);
    EXPECT_THROW(run_admm(P, base_cfg(0.0), Vec::Zero(3), Vec::Zero(3), Vec::Zero(1)), InvalidInput);
    EXPECT_THROW(run_admm(P, base_cfg(1.0), Vec::Zero(3), svec(diag2(-1, 0)), Vec::Zero(1)), InvalidInput);
}

TEST(RunAdmm, PlantedMultiBlockConvergesAcrossTau) {
    for (double tau : {0.5, 1.0, 1.618, 1.9, 1.99}) {
        for (unsigned s = 0; s < 3; ++s) {
            PlantedProblem pp = gen_random_multiblock({3, 3, 2}, 6, 3, 10 + s, s == 1);
            ADMMConfig c = base_cfg(tau);
            c.stop_tol = 1e-9;
            c.max_iter = 50000;
            c.record_iterates = false;
            AdmmResult r = run_admm(pp.P, c, Vec::Zero(6), Vec::Zero(8), Vec::Zero(3));
            EXPECT_TRUE(r.converged) << "tau " << tau << " seed " << s << " metric " << r.metric;
            EXPECT_LE(pp.P.constraint(r.y, r.z).norm(), 1e-6);
        }
    }
}

TEST(Feasibility, IdentityHoldsEveryStep) {
    PlantedProblem pp = gen_random_multiblock({3, 2}, 5, 3, 4);
    ADMMConfig c = base_cfg(1.7);
    c.max_iter = 40;
    c.stop_tol = 0;
    AdmmResult r = run_admm(pp.P, c, Vec::Ones(5), Vec::Zero(5), Vec::Zero(3));
    XiReport xr = xi_bound_certificate(pp.P, r.trace, 1.7);
    EXPECT_LE(xr.identity_residual, 1e-12);
    EXPECT_TRUE(xr.passed);
}

TEST(XiBound, UnitStepExactSolves) {
    PlantedProblem pp = gen_random_multiblock({3, 2}, 5, 3, 5);
    ADMMConfig c = base_cfg(1.0);
    c.max_iter = 20;
    c.stop_tol = 0;
    AdmmResult r = run_admm(pp.P, c, Vec::Ones(5), Vec::Zero(5), Vec::Zero(3));
    XiReport xr = xi_bound_certificate(pp.P, r.trace, 1.0);
    for (size_t k = 1; k < xr.xi.size(); ++k) {
        EXPECT_EQ(xr.xi[k], 0.0);
        EXPECT_LE(r.trace.feasibility[k], 1e-12);
    }
}

TEST(XiBound, GeometricDefinition) {
    // ξ_0 = 1, ε̃ = 0 so ξ_k = 0.618^k
    MultiBlockProblem P;
    P.blocks = {1};
    P.p = ProxFn::zero();
    P.f = std::make_shared<ZeroSmooth>(1);
    P.F = {identity_map(1)};
    P.G = identity_map(1);
    P.b = Vec::Ones(1);
    P.c = Vec::Zero(1);
    AdmmTrace tr;
    tr.feasibility = {1.0, 0.5, 0.2, 0.1};
    tr.eps = {0.0, 0.0, 0.0};
    XiReport xr = xi_bound_certificate(P, tr, 1.618);
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(xr.xi[k], std::pow(0.618, k), 1e-15);
}

TEST(XiBound, InexactRunsStayBelow) {
    for (unsigned s = 0; s < 4; ++s) {
        PlantedProblem pp = gen_random_multiblock({3, 4}, 6, 4, 20 + s);
        ADMMConfig c = base_cfg(1.9);
        c.mode = AdmmMode::inexact;
        c.decomp.iterative_blocks = true;
        c.iterative_z = true;
        c.tol = EpsSchedule::geometric(1e-2, 0.9);
        c.max_iter = 80;
        c.stop_tol = 0;
        AdmmResult r = run_admm(pp.P, c, Vec::Ones(6), Vec::Zero(7), Vec::Zero(4));
        XiReport xr = xi_bound_certificate(pp.P, r.trace, 1.9);
        EXPECT_TRUE(xr.passed) << "seed " << s << " slack " << xr.worst_slack;
        EXPECT_LE(xr.identity_residual, 1e-12);
        AdmmReeval re = reevaluate_admm_trace(pp.P, c, r.trace);
        EXPECT_TRUE(re.passed) << re.max_discrepancy << " " << re.max_bound_excess;
    }
}

TEST(Reevaluation, DetectsTamperedLog) {
    PlantedProblem pp = gen_random_multiblock({3, 4}, 6, 4, 3);
    ADMMConfig c = base_cfg(1.5);
    c.mode = AdmmMode::inexact;
    c.decomp.iterative_blocks = true;
    c.iterative_z = true;
    c.tol = EpsSchedule::geometric(1e-2, 0.9);
    c.max_iter = 20;
    c.stop_tol = 0;
    AdmmResult r = run_admm(pp.P, c, Vec::Ones(6), Vec::Zero(7), Vec::Zero(4));
    ASSERT_TRUE(reevaluate_admm_trace(pp.P, c, r.trace).passed);
    r.trace.gamma[5][0] += 1e-6;
    EXPECT_FALSE(reevaluate_admm_trace(pp.P, c, r.trace).passed);
}

TEST(AdaptSigma, PolicyExamples) {
    AdaptiveSigma pol;
    pol.enabled = true;
    EXPECT_DOUBLE_EQ(adapt_sigma(10.0, 1.0, 2.0, pol), 2.5);
    EXPECT_DOUBLE_EQ(adapt_sigma(1.0, 1.0, 2.0, pol), 2.0);
    EXPECT_DOUBLE_EQ(adapt_sigma(1.0, 10.0, 2.0, pol), 1.6);
    EXPECT_DOUBLE_EQ(adapt_sigma(10.0, 1.0, 1e6, pol), 1e6);
    EXPECT_DOUBLE_EQ(adapt_sigma(1.0, 10.0, 1e-4, pol), 1e-4);
    pol.enabled = false;
    EXPECT_DOUBLE_EQ(adapt_sigma(10.0, 1.0, 2.0, pol), 2.0);
}

TEST(AdaptSigma, RunRebuildsAndStillConverges) {
    PlantedProblem pp = gen_random_multiblock({3, 2}, 5, 2, 6);
    ADMMConfig c = base_cfg(1.618, 1e3);
    c.adaptive.enabled = true;
    c.stop_tol = 1e-8;
    c.max_iter = 50000;
    AdmmResult r = run_admm(pp.P, c, Vec::Zero(5), Vec::Zero(5), Vec::Zero(2));
    EXPECT_TRUE(r.converged);
    EXPECT_GT(r.sigma_changes, 0);
    EXPECT_LT(r.sigma_final, 1e3);
    EXPECT_EQ(r.trace.segment.back(), r.sigma_changes);
    AdmmReeval re = reevaluate_admm_trace(pp.P, c, r.trace);
    EXPECT_TRUE(re.passed);
}

TEST(Equivalence, ConsistentStartMatchesGeneric) {
    for (unsigned s = 0; s < 4; ++s) {
        PlantedProblem pp = gen_random_multiblock({4, 3, 2}, 7, 3, 30 + s, s % 2 == 1);
        ADMMConfig c = base_cfg(1.618, 1.3);
        std::mt19937 gen(s);
        KKTPoint u0 = consistent_start(pp.P, randn(gen, 9).cwiseAbs(), c.sigma);
        EquivalenceReport rep = run_equivalence(pp.P, c, u0, 60, false);
        EXPECT_TRUE(rep.passed) << "seed " << s << " dx " << rep.max_dx << " dy " << rep.max_dy << " dz " << rep.max_dz;
        EXPECT_EQ(rep.iterations, 60);
        EXPECT_LE(rep.view.max_inclusion, 1e-9);
        EXPECT_LE(rep.view.max_range, 1e-10);
        EXPECT_GT(rep.view.min_eig, 0.0);
    }
}

TEST(Equivalence, ArbitraryStartWithInjectedResiduals) {
    for (unsigned s = 0; s < 4; ++s) {
        PlantedProblem pp = gen_random_multiblock({3, 3, 2}, 6, 3, 40 + s, s == 2);
        ADMMConfig c = base_cfg(1.9, 0.8);
        std::mt19937 gen(s + 9);
        KKTPoint u0{randn(gen, 6), randn(gen, 8).cwiseAbs(), randn(gen, 3)};
        EquivalenceReport rep = run_equivalence(pp.P, c, u0, 50, true);
        EXPECT_TRUE(rep.passed) << "seed " << s << " dx " << rep.max_dx << " dy " << rep.max_dy << " dz " << rep.max_dz;
        EXPECT_LE(rep.view.max_inclusion, 1e-9);
    }
}

TEST(Equivalence, InexactRunInclusionAndRange) {
    PlantedProblem pp = gen_random_multiblock({3, 4, 3}, 7, 4, 51, true);
    ADMMConfig c = base_cfg(1.618);
    c.mode = AdmmMode::inexact;
    c.decomp.iterative_blocks = true;
    c.iterative_z = true;
    c.tol = EpsSchedule::geometric(1e-3, 0.9);
    c.max_iter = 40;
    c.stop_tol = 0;
    AdmmResult r = run_admm(pp.P, c, Vec::Zero(7), Vec::Zero(10), Vec::Zero(4));
    SGSDecomposition dec(pp.P, {}, c.sigma);
    Reformulation R = build_reformulation(pp.P, dec);
    AlmView view = reconstruct_alm_view(pp.P, dec, R, r.trace);
    EXPECT_LE(view.max_inclusion, 1e-9);
    EXPECT_LE(view.max_range, 1e-10);
    EXPECT_TRUE(std::isfinite(view.sum_eps_hat));
}

TEST(Equivalence, VanishingCorrectionForFeasibleExactStart) {
    PlantedProblem pp = gen_random_multiblock({3, 2}, 5, 2, 60);
    ADMMConfig c = base_cfg(1.3);
    c.max_iter = 15;
    c.stop_tol = 0;
    KKTPoint u0 = consistent_start(pp.P, Vec::Ones(5), c.sigma);
    AdmmResult r = run_admm(pp.P, c, u0.x, u0.y, u0.z);
    SGSDecomposition dec(pp.P, {}, c.sigma);
    Reformulation R = build_reformulation(pp.P, dec);
    AlmView view = reconstruct_alm_view(pp.P, dec, R, r.trace);
    Mat FGp = R.F * R.G.transpose() * R.GGpinv * R.G;
    for (int k = 1; k < 15; ++k) {
        EXPECT_EQ(view.gamma[k].norm(), 0.0);
        Vec ref = FGp * (r.trace.x[k - 1] - r.trace.x[k]);
        EXPECT_LE((view.Delta[k] - ref).norm(), 1e-10);
    }
}

TEST(Equivalence, SurjectiveGKeepsZ) {
    PlantedProblem pp = gen_random_multiblock({3, 2}, 6, 3, 61);
    SGSDecomposition dec(pp.P, {}, 1.0);
    Reformulation R = build_reformulation(pp.P, dec);
    ASSERT_EQ(R.r, 3);
    Vec z = Vec::LinSpaced(3, -1, 1);
    EXPECT_LE((R.U * to_v(R, Vec::Zero(5), z).tail(3) - z).norm(), 1e-12);
}

TEST(Equivalence, AlmViewDefiniteUnderAssumption) {
    for (unsigned s = 0; s < 5; ++s) {
        PlantedProblem pp = gen_random_multiblock({2, 3, 3}, 5, 3, 70 + s, s % 2 == 0);
        ASSERT_TRUE(check_assumption_p(pp.P, {}, 0.5 + s).passed);
        SGSDecomposition dec(pp.P, {}, 0.5 + s);
        Reformulation R = build_reformulation(pp.P, dec);
        EXPECT_GT(alm_view_min_eig(R, 0.5 + s), 1e-12);
    }
}

TEST(BasisPursuit, ToyDualSolution) {
    // min |x|_1 s.t. x_1 + x_2 = 1: primal value 1, z* = 1
    Mat G(1, 2);
    G << 1, 1;
    ADMMConfig c = base_cfg(1.618);
    c.stop_tol = 1e-10;
    BasisPursuitSolution s = solve_basis_pursuit(G, Vec::Ones(1), c);
    EXPECT_TRUE(s.converged);
    EXPECT_NEAR(s.z[0], 1.0, 1e-8);
    EXPECT_NEAR(s.primal_obj, 1.0, 1e-8);
    EXPECT_NEAR(s.dual_obj, 1.0, 1e-8);
}
