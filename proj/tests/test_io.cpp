#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "ipadmm/io/commands.hpp"

using namespace ipadmm;

namespace {

const char* kMinimal = "1\n1\n2\n1.0\n0 1 1 1 1.0\n1 1 1 1 1.0\n";

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("ipadmm_test_" + name)).string();
}

int parse_line(const std::string& text) {
    try {
        parse_sdpa_string(text);
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

RunConfig toy_cfg() {
    RunConfig c;
    c.generator = "toy";
    c.timing = false;
    return c;
}

double dense_entry(const SdpInstance& s, int row, int i, int j) {
    Vec v = s.A.row(row).transpose();
    return smat(v)(i, j);
}

}  // namespace

TEST(SdpaParse, MinimalExample) {
    SdpaData d = parse_sdpa_string(kMinimal);
    EXPECT_EQ(d.m, 1);
    ASSERT_EQ(d.blocks, std::vector<int>{2});
    EXPECT_EQ(d.b, Vec::Constant(1, 1.0));
    SdpInstance s = to_instance(d);
    Mat C = smat(s.C), e11 = Mat::Zero(2, 2);
    e11(0, 0) = 1.0;
    EXPECT_EQ(C, e11);
    Vec a1 = s.A.row(0).transpose();
    EXPECT_EQ(smat(a1), e11);
}

TEST(SdpaParse, CommentsAndSeparators) {
    SdpaData d = parse_sdpa_string("\"demo instance\n* more\n1 =mdim\n2 =nblocks\n{2, -3}\n{1.0}\n"
                                   "0 1 1 2 0.5\n1 2 3 3 -1\n");
    EXPECT_EQ(d.name, "demo instance");
    EXPECT_EQ(d.blocks, (std::vector<int>{2, -3}));
    ASSERT_EQ(d.entries.size(), 2u);
    SdpInstance s = to_instance(d);
    EXPECT_EQ(s.nvec(), 3 + 3);
    EXPECT_NEAR(smat(s.C.head(3))(0, 1), 0.5, 1e-15);
    EXPECT_EQ(s.A.coeff(0, 3 + 2), -1.0);
}

TEST(SdpaParse, HeaderMaySpanLines) {
    SdpaData d = parse_sdpa_string("2\n2\n2\n1\n1.0\n2.0\n1 1 1 1 1\n2 2 1 1 1\n");
    EXPECT_EQ(d.blocks, (std::vector<int>{2, 1}));
    EXPECT_EQ(d.b[1], 2.0);
}

TEST(SdpaParse, RejectsWithLineNumbers) {
    struct Case {
        const char* name;
        std::string text;
        int line;
    };
    const std::vector<Case> cases = {
        {"non-integer m", "x\n1\n2\n1.0\n", 1},
        {"zero blocks", "1\n0\n2\n1.0\n", 2},
        {"zero block size", "1\n1\n0\n1.0\n", 3},
        {"missing b", "1\n1\n2\n", 3},
        {"extra token after b", "1\n1\n2\n1.0 2.0\n", 4},
        {"bad b value", "1\n1\n2\nfoo\n", 4},
        {"lower triangle", "1\n1\n2\n1.0\n0 1 2 1 1.0\n", 5},
        {"duplicate", "1\n1\n2\n1.0\n0 1 1 1 1.0\n1 1 1 1 1.0\n0 1 1 1 2.0\n", 7},
        {"matno range", "1\n1\n2\n1.0\n2 1 1 1 1.0\n", 5},
        {"blkno range", "1\n1\n2\n1.0\n1 2 1 1 1.0\n", 5},
        {"index range", "1\n1\n2\n1.0\n1 1 1 3 1.0\n", 5},
        {"off-diagonal in diagonal block", "1\n1\n-2\n1.0\n1 1 1 2 1.0\n", 5},
        {"four fields", "1\n1\n2\n1.0\n1 1 1 1\n", 5},
        {"infinite value", "1\n1\n2\n1.0\n1 1 1 1 1e400\n", 5},
        {"nan value", "1\n1\n2\n1.0\n1 1 1 1 nan\n", 5},
        {"trailing garbage", "1\n1\n2\n1.0\n1 1 1 1 1.0x\n", 5},
        {"empty file", "", 1},
    };
    for (const auto& c : cases) EXPECT_EQ(parse_line(c.text), c.line) << c.name;
}

TEST(SdpaParse, SizeCapIsAParseError) {
    SdpaLimits lim;
    lim.max_order = 10;
    EXPECT_THROW(parse_sdpa_string("1\n1\n11\n1.0\n", lim), ParseError);
}

TEST(SdpaParse, ZeroEntriesAreDropped) {
    SdpaData d = parse_sdpa_string("1\n1\n2\n1.0\n0 1 1 1 0.0\n1 1 1 1 1.0\n");
    EXPECT_EQ(d.entries.size(), 1u);
}

TEST(SdpaRoundTrip, WriteParseIsCanonical) {
    SdpaData d = parse_sdpa_string("\"x\n1\n1\n{2}\n{1.0}\n1 1 2 2 3.5\n0 1 1 2 0.25\n");
    std::string canon = to_sdpa_string(d);
    EXPECT_EQ(to_sdpa_string(parse_sdpa_string(canon)), canon);
    EXPECT_EQ(parse_sdpa_string(canon), d);
}

TEST(SdpaRoundTrip, GeneratedInstanceSurvives) {
    SdpInstance s = gen_random_sdp(6, 8, 3);
    SdpaData d = from_instance(s);
    SdpaData back = parse_sdpa_string(to_sdpa_string(d));
    EXPECT_EQ(back, d);
    SdpInstance t = to_instance(back);
    ASSERT_EQ(t.nvec(), s.nvec());
    EXPECT_LE((Mat(t.A) - Mat(s.A)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE((t.C - s.C).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(t.b, s.b);
    EXPECT_NEAR(dense_entry(t, 0, 0, 1), dense_entry(s, 0, 0, 1), 1e-15);
}

TEST(SdpaRoundTrip, FileSolveMatchesInMemory) {
    const std::string path = tmp_path("toy.dat-s");
    write_sdpa_file(path, from_instance(toy_sdp()));
    RunConfig a = toy_cfg();
    RunConfig b = toy_cfg();
    b.generator.clear();
    b.input = path;
    Instance ia = load_instance(a), ib = load_instance(b);
    Model ma = build_model(ia, a), mb = build_model(ib, b);
    RunOutcome oa = run_solver(ma, a), ob = run_solver(mb, b);
    EXPECT_EQ(oa.iterations, ob.iterations);
    EXPECT_LE((oa.x - ob.x).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(ma.evaluate(oa.x, oa.y, oa.z).primal_obj, mb.evaluate(ob.x, ob.y, ob.z).primal_obj, 1e-10);
    std::filesystem::remove(path);
}

TEST(SdpaFuzz, ByteFlipsNeverCrashOrCorrupt) {
    const std::vector<std::string> seeds = {kMinimal, to_sdpa_string(from_instance(gen_random_sdp(3, 4, 1))),
                                            "\"c\n2\n2\n{2,-2}\n1 2\n0 1 1 2 1\n1 2 2 2 1\n2 1 2 2 1\n"};
    SdpaLimits lim;
    lim.max_order = 200;
    std::mt19937_64 rng(7);
    int accepted = 0, rejected = 0;
    for (int t = 0; t < 10000; ++t) {
        std::string s = seeds[size_t(t) % seeds.size()];
        const int flips = 1 + int(rng() % 3);
        for (int f = 0; f < flips; ++f) {
            size_t pos = rng() % s.size();
            s[pos] = static_cast<char>(s[pos] ^ (1u << (rng() % 8)));
        }
        try {
            SdpaData d = parse_sdpa_string(s, lim);
            ++accepted;
            std::string w = to_sdpa_string(d);
            ASSERT_EQ(parse_sdpa_string(w, lim), d) << "case " << t;
            ASSERT_EQ(to_sdpa_string(parse_sdpa_string(w, lim)), w);
            for (const auto& e : d.entries) {
                ASSERT_LE(e.i, e.j);
                ASSERT_TRUE(std::isfinite(e.value));
            }
        } catch (const ParseError&) {
            ++rejected;
        }
    }
    EXPECT_GT(accepted, 0);
    EXPECT_GT(rejected, 0);
}

TEST(Config, RejectsTauOutsideOpenInterval) {
    RunConfig c = toy_cfg();
    c.tau = 2.0;
    EXPECT_THROW(c.validate(), InvalidInput);
    c.tau = 0.0;
    EXPECT_THROW(c.validate(), InvalidInput);
    c.tau = 1.99;
    EXPECT_NO_THROW(c.validate());
    c.stop_tol = 0.0;
    EXPECT_THROW(c.validate(), InvalidInput);
}

TEST(Config, GeneratorSpecParses) {
    GeneratorSpec g = GeneratorSpec::parse("multiblock:dims=4x3x2,nx=6");
    EXPECT_EQ(g.kind, "multiblock");
    EXPECT_EQ(g.get_dims("dims", {}), (std::vector<int>{4, 3, 2}));
    EXPECT_EQ(g.get_int("nx", 0), 6);
    EXPECT_EQ(g.get_int("nz", 9), 9);
    EXPECT_THROW(GeneratorSpec::parse("sdp:n"), InvalidInput);
    EXPECT_THROW(GeneratorSpec::parse("sdp:n=x").get_int("n", 1), InvalidInput);
    EXPECT_EQ(GeneratorSpec::parse(g.str()).params, g.params);
}

TEST(Result, JsonRoundTripIsLossless) {
    ResultRecord r;
    r.status = "converged";
    r.instance = "toy";
    r.kind = "sdp";
    r.solver = "sgs-ipadmm";
    r.iterations = 12;
    r.eta_max = 0.1 + 0.2;
    r.primal_obj = -1.0 / 3.0;
    r.sigma_final = 1.5;
    r.certificates.push_back({"fejer", false, 1e-3, 4, "x"});
    r.config = config_json(toy_cfg());
    r.x = {1.0 / 7.0, -2.5e-300};
    r.message = "with \"quotes\"";
    ResultRecord back = result_from_json(nlohmann::json::parse(to_json(r).dump()));
    EXPECT_EQ(back, r);
    EXPECT_TRUE(std::isnan(back.eta_gap));
}

TEST(Result, TraceCsvHasDocumentedColumns) {
    std::ostringstream s;
    TraceRow row;
    row.eta_gap = std::numeric_limits<double>::quiet_NaN();
    write_trace_csv(s, {row});
    std::string head = s.str().substr(0, s.str().find('\n'));
    for (const char* col : {"k", "eta_max", "eta_gap", "sigma", "tau", "step_norm", "gamma_norm", "d_norm"})
        EXPECT_NE(head.find(col), std::string::npos) << col;
    EXPECT_NE(s.str().find("0,0,,0"), std::string::npos);
}

TEST(Native, InstancesRoundTrip) {
    for (const char* spec : {"toy", "biq:n=3", "lasso:n=4", "bp:m=2,n=4", "multiblock"}) {
        Instance a = generate_instance(spec, 5);
        Instance b = instance_from_json(nlohmann::json::parse(instance_to_json(a).dump()));
        EXPECT_EQ(instance_to_json(b), instance_to_json(a)) << spec;
    }
}

TEST(Native, MalformedIsInvalidInput) {
    EXPECT_THROW(instance_from_json(nlohmann::json::parse(R"({"schema_version":1,"kind":"bp","G":3})")), InvalidInput);
    EXPECT_THROW(instance_from_json(nlohmann::json::parse(R"({"schema_version":2,"kind":"bp"})")), InvalidInput);
}

TEST(SolveCommand, ToyConverges) {
    RunConfig c = toy_cfg();
    std::ostringstream out, err;
    ASSERT_EQ(solve_command(c, out, err), exit_ok) << err.str();
    ResultRecord r = result_from_json(nlohmann::json::parse(out.str()));
    EXPECT_EQ(r.status, "converged");
    EXPECT_LE(r.eta_max, 1e-6);
    EXPECT_NEAR(r.primal_obj, 1.0, 1e-4);
}

TEST(SolveCommand, TauTwoExitsOne) {
    RunConfig c = toy_cfg();
    c.tau = 2.0;
    std::ostringstream out, err;
    EXPECT_EQ(solve_command(c, out, err), exit_error);
    EXPECT_NE(err.str().find("tau"), std::string::npos);
    EXPECT_TRUE(out.str().empty());
}

TEST(SolveCommand, MissingFileExitsOne) {
    RunConfig c;
    c.input = tmp_path("does-not-exist.dat-s");
    std::ostringstream out, err;
    EXPECT_EQ(solve_command(c, out, err), exit_error);
    EXPECT_FALSE(err.str().empty());
}

TEST(SolveCommand, IterationCapPersistsBestIterate) {
    RunConfig c = toy_cfg();
    c.generator = "sdp:n=8,m=12";
    c.max_iter = 1;
    std::ostringstream out, err;
    EXPECT_EQ(solve_command(c, out, err), exit_cap);
    ResultRecord r = result_from_json(nlohmann::json::parse(out.str()));
    EXPECT_EQ(r.status, "max_iter");
    EXPECT_EQ(r.iterations, 1);
    EXPECT_EQ(r.x.size(), size_t(36));
    EXPECT_TRUE(std::isfinite(r.eta_max));
}

TEST(SolveCommand, ReproducibleModuloTime) {
    RunConfig c = toy_cfg();
    c.generator = "biq:n=3";
    c.seed = 4;
    std::ostringstream a, b, err;
    solve_command(c, a, err);
    solve_command(c, b, err);
    EXPECT_EQ(a.str(), b.str());
}

TEST(SolveCommand, WritesTrace) {
    RunConfig c = toy_cfg();
    c.trace = tmp_path("trace.csv");
    std::ostringstream out, err;
    ASSERT_EQ(solve_command(c, out, err), exit_ok);
    ResultRecord r = result_from_json(nlohmann::json::parse(out.str()));
    std::ifstream f(c.trace);
    int lines = 0;
    for (std::string s; std::getline(f, s);) ++lines;
    EXPECT_EQ(lines, r.iterations + 2);
    std::filesystem::remove(c.trace);
}

TEST(SolveCommand, EverySolverOnEveryKind) {
    for (const char* spec : {"toy", "biq:n=3", "lasso:n=4", "bp:m=2,n=4", "multiblock"})
        for (SolverKind s : {SolverKind::sgs_ipadmm, SolverKind::ipalm, SolverKind::directly_extended}) {
            RunConfig c = toy_cfg();
            c.generator = spec;
            c.solver = s;
            c.max_iter = 20000;
            std::ostringstream out, err;
            EXPECT_EQ(solve_command(c, out, err), exit_ok) << spec << " " << solver_name(s) << err.str();
        }
}

TEST(SolveCommand, ClassicAdmmNeedsTwoBlocks) {
    RunConfig c = toy_cfg();
    c.solver = SolverKind::classic_admm;
    std::ostringstream out, err;
    EXPECT_EQ(solve_command(c, out, err), exit_ok);
    c.generator = "multiblock";
    EXPECT_EQ(solve_command(c, out, err), exit_error);
}

TEST(SolveCommand, InexactScheduleConverges) {
    RunConfig c = toy_cfg();
    c.generator = "biq:n=4";
    c.schedule = "geometric";
    c.eps0 = 1e-3;
    c.eps_rate = 0.9;
    std::ostringstream out, err;
    EXPECT_EQ(solve_command(c, out, err), exit_ok) << err.str();
}

TEST(Profile, SingleCellIsConstantOne) {
    BenchCell c;
    c.solver = "sgs-ipadmm";
    c.tau = 1.618;
    c.seed = 1;
    c.iterations = 17;
    c.converged = true;
    for (const auto& p : performance_profile({c}, {1.0, 2.0, 10.0}, false)) EXPECT_EQ(p.fraction, 1.0);
}

TEST(Profile, HandComputedRatios) {
    // seed 1: a=10, b=20; seed 2: a fails, b=5
    std::vector<BenchCell> cells(4);
    cells[0] = {"i", "a", "converged", "", 1, 1.0, 10, 0, 0, 0, true};
    cells[1] = {"i", "b", "converged", "", 1, 1.0, 20, 0, 0, 0, true};
    cells[2] = {"i", "a", "max_iter", "", 2, 1.0, 99, 0, 0, 0, false};
    cells[3] = {"i", "b", "converged", "", 2, 1.0, 5, 0, 0, 0, true};
    auto p = performance_profile(cells, {1.0, 2.0}, false);
    ASSERT_EQ(p.size(), 4u);
    EXPECT_EQ(p[0].variant, variant_name("a", 1.0));
    EXPECT_DOUBLE_EQ(p[0].fraction, 0.5);
    EXPECT_DOUBLE_EQ(p[1].fraction, 0.5);
    EXPECT_DOUBLE_EQ(p[2].fraction, 0.5);
    EXPECT_DOUBLE_EQ(p[3].fraction, 1.0);
}

TEST(BenchCommand, ToyGridHasEightyConvergedRows) {
    BenchConfig bc;
    bc.base = toy_cfg();
    bc.base.timing = false;
    bc.seeds.clear();
    for (std::uint64_t s = 1; s <= 20; ++s) bc.seeds.push_back(s);
    std::ostringstream out, err;
    ASSERT_EQ(bench_command(bc, out, err), exit_ok) << err.str();
    std::string text = out.str();
    std::string table = text.substr(0, text.find("\n\n") + 1);
    int rows = -1, converged = 0;
    std::istringstream in(table);
    for (std::string s; std::getline(in, s);) {
        ++rows;
        if (s.find(",converged,") != std::string::npos) ++converged;
    }
    EXPECT_EQ(rows, 80);
    EXPECT_EQ(converged, 80);
    std::ostringstream again;
    bench_command(bc, again, err);
    EXPECT_EQ(again.str(), text);
}

TEST(BenchCommand, FailuresStayInTheirRows) {
    BenchConfig bc;
    bc.base = toy_cfg();
    bc.base.timing = false;
    bc.taus = {1.618};
    bc.solvers = {SolverKind::sgs_ipadmm, SolverKind::classic_admm};
    bc.generator = "multiblock";
    std::ostringstream out, err;
    EXPECT_EQ(bench_command(bc, out, err), exit_cap);
    EXPECT_NE(out.str().find(",error,"), std::string::npos);
    EXPECT_NE(out.str().find(",converged,"), std::string::npos);
}

TEST(VerifyCommand, ThreeBlockInstancePasses) {
    RunConfig c = toy_cfg();
    c.generator = "multiblock:dims=4x3x2,nx=6,nz=3";
    std::ostringstream out, err;
    EXPECT_EQ(verify_command(c, {}, out, err), exit_ok) << out.str() << err.str();
    EXPECT_EQ(out.str().find("FAIL"), std::string::npos);
}

TEST(VerifyCommand, CorruptedTraceFailsFejerAtFirstStep) {
    RunConfig c = toy_cfg();
    c.generator = "multiblock:dims=4x3x2,nx=6,nz=3";
    for (std::uint64_t seed : {1, 2, 3}) {
        c.seed = seed;
        VerifyOptions vo;
        vo.corrupt = true;
        std::ostringstream out, err;
        EXPECT_EQ(verify_command(c, vo, out, err), exit_certificate);
        EXPECT_NE(out.str().find("FAIL fejer"), std::string::npos) << out.str();
        std::string line = out.str().substr(out.str().find("FAIL fejer"));
        line = line.substr(0, line.find('\n'));
        EXPECT_NE(line.find(" k=1 "), std::string::npos) << line;
    }
}

TEST(VerifyCommand, SingleBlockLemmaIsZero) {
    RunConfig c = toy_cfg();
    c.generator = "multiblock:dims=3,nx=4,nz=2";
    Instance inst = load_instance(c);
    Model M = build_model(inst, c);
    VerifyReport r = verify_model(M, c, {});
    auto it = std::find_if(r.certificates.begin(), r.certificates.end(),
                           [](const CertificateSummary& s) { return s.name == "sgs_lemma"; });
    ASSERT_NE(it, r.certificates.end());
    EXPECT_TRUE(it->passed);
    EXPECT_EQ(it->worst, 0.0);
}

TEST(GenCommand, SdpaForSdpKindsOnly) {
    RunConfig c = toy_cfg();
    c.format = "sdpa";
    std::ostringstream out, err;
    ASSERT_EQ(gen_command(c, out, err), exit_ok);
    EXPECT_EQ(parse_sdpa_string(out.str()), from_instance(toy_sdp()));
    c.generator = "lasso";
    std::ostringstream o2;
    EXPECT_EQ(gen_command(c, o2, err), exit_error);
    c.format = "native";
    std::ostringstream o3;
    EXPECT_EQ(gen_command(c, o3, err), exit_ok);
    EXPECT_EQ(nlohmann::json::parse(o3.str())["kind"], "lasso");
}
