#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ipadmm/io/commands.hpp"

using namespace ipadmm;

namespace {

std::string env(const char* flag) {
    std::string s = "IPADMM_";
    for (const char* p = flag; *p; ++p) s += *p == '-' ? '_' : char(std::toupper(static_cast<unsigned char>(*p)));
    return s;
}

void add_run_flags(CLI::App* app, RunConfig& c, std::string& solver, bool with_solver = true) {
    app->add_option("--tau", c.tau, "dual step length in (0, 2)")->envname(env("tau"));
    app->add_option("--sigma", c.sigma, "penalty parameter")->envname(env("sigma"));
    app->add_option("--tol", c.stop_tol, "stopping tolerance")->envname(env("tol"));
    app->add_option("--max-iter", c.max_iter, "iteration cap")->envname(env("max-iter"));
    if (with_solver)
        app->add_option("--solver", solver, "ipalm | sgs-ipadmm | classic-admm | directly-extended")
            ->envname(env("solver"));
    app->add_option("--seed", c.seed, "generator seed")->envname(env("seed"));
    app->add_flag("--adaptive-sigma", c.adaptive_sigma, "adapt sigma to the residual balance")
        ->envname(env("adaptive-sigma"));
    app->add_option("--schedule", c.schedule, "exact | geometric | polynomial")->envname(env("schedule"));
    app->add_option("--eps0", c.eps0, "first tolerance of the geometric schedule")->envname(env("eps0"));
    app->add_option("--eps-rate", c.eps_rate, "ratio of the geometric schedule")->envname(env("eps-rate"));
    app->add_option("--gen", c.generator, "generator spec, e.g. sdp:n=10,m=20")->envname(env("gen"));
    app->add_option("--format", c.format, "sdpa | native")->envname(env("format"));
    app->add_option("-o,--output", c.output, "output path (default stdout)")->envname(env("output"));
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string t;
    while (std::getline(ss, t, ','))
        if (!t.empty()) out.push_back(t);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ipadmm: sGS-iPADMM and iPALM solvers with convergence certificates"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string solver = solver_name(cfg.solver);
    bool no_timing = false;

    auto* solve = app.add_subcommand("solve", "solve one instance and write a result record");
    add_run_flags(solve, cfg, solver);
    solve->add_option("--trace", cfg.trace, "per-iteration CSV path")->envname(env("trace"));
    solve->add_flag("--no-timing", no_timing, "write zero wall times");
    solve->add_option("input", cfg.input, "instance file (.dat-s or native JSON)");

    VerifyOptions vo;
    auto* verify = app.add_subcommand("verify", "run every certificate on one fixed-sigma run");
    add_run_flags(verify, cfg, solver);
    verify->add_flag("--corrupt", vo.corrupt, "perturb x^1 of the recorded trace");
    verify->add_option("--equivalence-iters", vo.equivalence_iters, "iterations of the iPALM comparison");
    verify->add_option("input", cfg.input, "instance file");

    auto* gen = app.add_subcommand("gen", "write a generated instance");
    add_run_flags(gen, cfg, solver, false);

    BenchConfig bc;
    std::string seeds = "1", taus = "1,1.618,1.9,1.99", solvers = "sgs-ipadmm";
    bool timing = false;
    auto* bench = app.add_subcommand("bench", "run a grid of seeds, step lengths and solvers");
    add_run_flags(bench, cfg, solver, false);
    bench->add_option("--seeds", seeds, "seeds: 1,2,3 or 1-20")->envname(env("seeds"));
    bench->add_option("--taus", taus, "comma-separated step lengths")->envname(env("taus"));
    bench->add_option("--solvers", solvers, "comma-separated solvers")->envname(env("solvers"));
    bench->add_option("--profile", bc.profile, "performance-profile CSV path")->envname(env("profile"));
    bench->add_flag("--timing", timing, "add a time_ms column and profile on time");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : exit_error;
    }

    try {
        cfg.solver = parse_solver(solver);
        if (*bench) {
            bc.base = cfg;
            bc.base.timing = timing;
            bc.generator = cfg.generator.empty() ? "toy" : cfg.generator;
            bc.csv = cfg.output;
            bc.seeds.clear();
            for (const auto& s : split(seeds)) {
                auto dash = s.find('-');
                if (dash != std::string::npos) {
                    std::uint64_t lo = std::stoull(s.substr(0, dash)), hi = std::stoull(s.substr(dash + 1));
                    for (std::uint64_t k = lo; k <= hi; ++k) bc.seeds.push_back(k);
                } else {
                    bc.seeds.push_back(std::stoull(s));
                }
            }
            bc.taus.clear();
            for (const auto& t : split(taus)) bc.taus.push_back(std::stod(t));
            bc.solvers.clear();
            for (const auto& s : split(solvers)) bc.solvers.push_back(parse_solver(s));
            return bench_command(bc, std::cout, std::cerr);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_error;
    }
    cfg.timing = !no_timing;
    if (*solve) return solve_command(cfg, std::cout, std::cerr);
    if (*verify) return verify_command(cfg, vo, std::cout, std::cerr);
    return gen_command(cfg, std::cout, std::cerr);
}
