#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "ipadmm/admm/equivalence.hpp"
#include "ipadmm/io/instance.hpp"
#include "ipadmm/io/result.hpp"
#include "ipadmm/ipalm/certificates.hpp"

namespace ipadmm {

enum ExitCode { exit_ok = 0, exit_error = 1, exit_cap = 2, exit_certificate = 3 };

/// Objective-side numbers at a point. NaN where the instance class does not define them.
struct Evaluation {
    double eta_max = 0;
    double eta_gap = std::numeric_limits<double>::quiet_NaN();
    double primal_obj = std::numeric_limits<double>::quiet_NaN();
    double dual_obj = std::numeric_limits<double>::quiet_NaN();
};

/// An instance in the multi-block form together with its proximal terms and metrics.
struct Model {
    MultiBlockProblem P;
    DBuilder D;
    StopMetric metric;  // empty: relative KKT residual
    std::function<Evaluation(const Vec&, const Vec&, const Vec&)> evaluate;
    std::optional<KKTPoint> reference;  // known KKT point, when planted
};

inline AdmmMode mode_of(const RunConfig& cfg) { return cfg.schedule == "exact" ? AdmmMode::exact : AdmmMode::inexact; }

inline Model build_model(const Instance& inst, const RunConfig& cfg) {
    Model M;
    if (inst.kind == "sdp") {
        auto s = std::make_shared<SdpInstance>(*inst.sdp);
        M.P = build_sdp_dual(*s);
        auto A = std::make_shared<SparseMap>(s->A, false);
        ProxFn cone = sdp_cone(s->blocks);
        M.metric = [s, A, cone](const Vec& x, const Vec& y, const Vec& z) {
            return eta_sdp(*A, s->b, s->C, x, z, y, cone).max;
        };
        M.evaluate = [s, A, cone](const Vec& x, const Vec& y, const Vec& z) {
            EtaSdp e = eta_sdp(*A, s->b, s->C, x, z, y, cone);
            return Evaluation{e.max, e.gap, s->C.dot(x), s->b.dot(z)};
        };
    } else if (inst.kind == "qsdp") {
        auto q = std::make_shared<QsdpInstance>(*inst.qsdp);
        auto qm = std::make_shared<QsdpModel>(build_qsdp_dual(*q));
        M.P = qm->P;
        M.D = qsdp_proximal_terms(*q, qm->layout, mode_of(cfg));
        M.metric = [q, qm](const Vec& x, const Vec& y, const Vec& z) { return qsdp_eta(*q, *qm, x, y, z).max; };
        M.evaluate = [q, qm](const Vec& x, const Vec& y, const Vec& z) {
            EtaQsdp e = qsdp_eta(*q, *qm, x, y, z);
            return Evaluation{e.max, e.gap, e.primal_obj, e.dual_obj};
        };
    } else if (inst.kind == "lasso") {
        auto l = std::make_shared<LassoInstance>(*inst.lasso);
        M.P = build_constrained_lasso(*l);
        M.D = lasso_proximal_terms(*l);
        auto Pc = std::make_shared<MultiBlockProblem>(M.P);
        M.evaluate = [l, Pc](const Vec& x, const Vec& y, const Vec& z) {
            Evaluation e;
            e.eta_max = relative_kkt(*Pc, x, y, z);
            e.primal_obj = lasso_objective(*l, x.head(l->n()));
            return e;
        };
    } else if (inst.kind == "bp") {
        auto bp = std::make_shared<BasisPursuitInstance>(*inst.bp);
        M.P = build_basis_pursuit_dual(bp->G, bp->b);
        auto Pc = std::make_shared<MultiBlockProblem>(M.P);
        M.evaluate = [bp, Pc](const Vec& x, const Vec& y, const Vec& z) {
            Evaluation e;
            e.eta_max = relative_kkt(*Pc, x, y, z);
            e.primal_obj = x.lpNorm<1>();
            e.dual_obj = bp->b.dot(z);
            e.eta_gap = (e.primal_obj - e.dual_obj) / (1.0 + std::abs(e.primal_obj) + std::abs(e.dual_obj));
            return e;
        };
    } else if (inst.kind == "multiblock") {
        M.P = inst.planted->P;
        M.reference = inst.planted->solution;
        auto Pc = std::make_shared<MultiBlockProblem>(M.P);
        M.evaluate = [Pc](const Vec& x, const Vec& y, const Vec& z) {
            Evaluation e;
            e.eta_max = relative_kkt(*Pc, x, y, z);
            return e;
        };
    } else {
        throw InvalidInput("unknown instance kind " + inst.kind);
    }
    return M;
}

inline ADMMConfig admm_config(const Model& M, const RunConfig& cfg) {
    ADMMConfig a;
    a.sigma = cfg.sigma;
    a.tau = cfg.tau;
    a.D = M.D;
    a.mode = mode_of(cfg);
    a.tol = cfg.eps_schedule(1.0 + M.P.c.norm());
    a.adaptive.enabled = cfg.adaptive_sigma;
    a.stop_metric = M.metric;
    a.stop_tol = cfg.stop_tol;
    a.max_iter = cfg.max_iter;
    a.record_iterates = !cfg.trace.empty();
    if (cfg.solver == SolverKind::directly_extended) a.sweep.kind = SweepKind::forward_only;
    return a;
}

struct RunOutcome {
    Vec x, y, z;  // best iterate
    bool converged = false;
    int iterations = 0;
    double wall_ms = 0, sigma_final = 0;
    int sigma_changes = 0;
    std::vector<TraceRow> rows;
};

namespace detail {

inline double nan() { return std::numeric_limits<double>::quiet_NaN(); }

inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

inline std::vector<TraceRow> admm_rows(const Model& M, const AdmmTrace& tr) {
    std::vector<TraceRow> rows;
    const int K = tr.iterations();
    const bool full = !tr.x.empty();
    for (int k = 0; k <= K; ++k) {
        TraceRow r;
        r.k = k;
        r.eta_max = tr.metric[size_t(k)];
        r.eta_gap = full ? M.evaluate(tr.x[size_t(k)], tr.y[size_t(k)], tr.z[size_t(k)]).eta_gap : nan();
        r.tau = tr.tau;
        r.residual = tr.residual[size_t(k)];
        r.feasibility = tr.feasibility[size_t(k)];
        r.d_norm = nan();
        if (k < K) {
            r.sigma = tr.sigma[size_t(k)];
            r.step_norm = tr.step_norm[size_t(k)];
            r.eps = tr.eps[size_t(k)];
            r.gamma_norm = tr.gamma[size_t(k)].norm();
            r.delta_norm = full ? tr.delta[size_t(k)].norm() : nan();
            r.delta_tilde_norm = full ? tr.delta_tilde[size_t(k)].norm() : nan();
        } else {
            r.sigma = K > 0 ? tr.sigma.back() : nan();
            r.step_norm = r.eps = r.gamma_norm = r.delta_norm = r.delta_tilde_norm = nan();
        }
        rows.push_back(r);
    }
    return rows;
}

}  // namespace detail

/// Runs the selected solver from the origin. iPALM runs on the dense reformulation of the instance.
inline RunOutcome run_solver(const Model& M, const RunConfig& cfg) {
    const auto& P = M.P;
    RunOutcome out;
    if (cfg.solver == SolverKind::ipalm) {
        if (cfg.adaptive_sigma) throw Unsupported("adaptive sigma is not available for ipalm");
        ADMMConfig a = admm_config(M, cfg);
        DecompositionOptions dopt;
        SGSDecomposition dec(P, build_D(P, a, cfg.sigma), cfg.sigma, dopt);
        Reformulation R = build_reformulation(P, dec);
        IPALMConfig ic;
        ic.sigma = cfg.sigma;
        ic.tau = cfg.tau;
        ic.S = dense_map(R.T);
        // the reformulated φ carries the whole cone, so an exact inner solve is not always reachable
        ic.eps = cfg.schedule == "exact" ? EpsSchedule::polynomial(1.0 + R.gp.c.norm()) : a.tol;
        ic.max_iter = cfg.max_iter;
        ic.stop_tol = cfg.stop_tol;
        ic.record_iterates = !cfg.trace.empty();
        IpalmResult ir = run_ipalm(R.gp, ic, Vec::Zero(P.dim_x()), Vec::Zero(R.ny + R.r));
        out.x = ir.best_x;
        out.y = ir.best_w.head(R.ny);
        out.z = R.r > 0 ? Vec(R.U * ir.best_w.tail(R.r)) : Vec(Vec::Zero(P.dim_z()));
        out.converged = ir.converged;
        out.iterations = ir.iterations;
        out.wall_ms = ir.wall_ms;
        out.sigma_final = cfg.sigma;
        const double scale = 1.0 + R.gp.c.norm();
        for (int k = 0; k <= ir.iterations; ++k) {
            TraceRow r;
            r.k = k;
            r.eta_max = ir.trace.residual[size_t(k)] / scale;
            r.eta_gap = detail::nan();
            r.sigma = cfg.sigma;
            r.tau = cfg.tau;
            r.residual = ir.trace.residual[size_t(k)];
            r.feasibility = r.delta_norm = r.delta_tilde_norm = r.gamma_norm = detail::nan();
            r.step_norm = detail::nan();
            if (k < ir.iterations) {
                r.d_norm = ir.trace.d[size_t(k)].size() ? ir.trace.d[size_t(k)].norm() : detail::nan();
                r.eps = ir.trace.eps[size_t(k)];
                if (!ir.trace.x.empty()) {
                    const auto& t = ir.trace;
                    r.step_norm = std::sqrt((t.x[size_t(k + 1)] - t.x[size_t(k)]).squaredNorm() +
                                            (t.w[size_t(k + 1)] - t.w[size_t(k)]).squaredNorm());
                }
            } else {
                r.d_norm = r.eps = detail::nan();
            }
            out.rows.push_back(r);
        }
        return out;
    }
    ADMMConfig a = admm_config(M, cfg);
    Vec x0 = Vec::Zero(P.dim_x()), y0 = Vec::Zero(P.dim_y()), z0 = Vec::Zero(P.dim_z());
    AdmmResult r = cfg.solver == SolverKind::classic_admm ? classic_admm_2block(P, a, x0, y0, z0)
                                                          : run_admm(P, a, x0, y0, z0);
    out.x = r.best_x;
    out.y = r.best_y;
    out.z = r.best_z;
    out.converged = r.converged;
    out.iterations = r.iterations;
    out.wall_ms = r.wall_ms;
    out.sigma_final = r.sigma_final;
    out.sigma_changes = r.sigma_changes;
    out.rows = detail::admm_rows(M, r.trace);
    return out;
}

inline ResultRecord make_record(const std::string& command, const Instance& inst, const Model& M, const RunConfig& cfg,
                                const RunOutcome& o) {
    ResultRecord rec;
    rec.command = command;
    rec.status = o.converged ? "converged" : "max_iter";
    rec.instance = inst.name;
    rec.kind = inst.kind;
    rec.solver = solver_name(cfg.solver);
    rec.iterations = o.iterations;
    rec.wall_ms = cfg.timing ? o.wall_ms : 0.0;
    Evaluation e = M.evaluate(o.x, o.y, o.z);
    rec.eta_max = e.eta_max;
    rec.eta_gap = e.eta_gap;
    rec.primal_obj = e.primal_obj;
    rec.dual_obj = e.dual_obj;
    rec.kkt_residual = relative_kkt(M.P, o.x, o.y, o.z);
    rec.sigma_final = o.sigma_final;
    rec.sigma_changes = o.sigma_changes;
    rec.config = config_json(cfg);
    rec.x = to_std(o.x);
    rec.y = to_std(o.y);
    rec.z = to_std(o.z);
    return rec;
}

namespace detail {

/// Writes to `path`, or to `fallback` when the path is empty.
template <class Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& fn) {
    if (path.empty()) {
        fn(fallback);
        return;
    }
    std::ofstream f(path);
    if (!f) throw InvalidInput("cannot write " + path);
    fn(f);
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_error;
    }
}

}  // namespace detail

/// Exit 0 on convergence, 2 on the iteration cap (best iterate still written), 1 on errors.
inline int solve_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        cfg.validate();
        RunConfig c = cfg;
        Instance inst = load_instance(c);
        Model M = build_model(inst, c);
        RunOutcome o = run_solver(M, c);
        ResultRecord rec = make_record("solve", inst, M, c, o);
        detail::emit(c.output, out, [&](std::ostream& s) { s << to_json(rec).dump(2) << '\n'; });
        if (!c.trace.empty()) detail::emit(c.trace, out, [&](std::ostream& s) { write_trace_csv(s, o.rows); });
        return o.converged ? exit_ok : exit_cap;
    });
}

// ---------------------------------------------------------------- bench

struct BenchConfig {
    RunConfig base;  // solver, tau and seed are overridden per cell
    std::string generator = "toy";
    std::vector<std::uint64_t> seeds = {1};
    std::vector<double> taus = {1.0, 1.618, 1.9, 1.99};
    std::vector<SolverKind> solvers = {SolverKind::sgs_ipadmm};
    std::string csv;      // empty: stdout
    std::string profile;  // empty: stdout after the rows
    std::vector<double> rhos = {1.0, 1.1, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0};
};

struct BenchCell {
    std::string instance, solver, status, message;
    std::uint64_t seed = 0;
    double tau = 0;
    int iterations = 0;
    double time_ms = 0, eta_max = 0, eta_gap = 0;
    bool converged = false;
};

struct ProfilePoint {
    std::string variant;
    double rho = 0, fraction = 0;
};

inline std::string variant_name(const std::string& solver, double tau) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s@%.6g", solver.c_str(), tau);
    return buf;
}

/// Fraction of instances each variant solves within a factor ρ of the best variant on that instance.
/// The cost is the iteration count (or the time with `use_time`); failures never count as solved.
inline std::vector<ProfilePoint> performance_profile(const std::vector<BenchCell>& cells, const std::vector<double>& rhos,
                                                     bool use_time) {
    std::map<std::string, std::map<std::uint64_t, double>> cost;
    std::map<std::uint64_t, double> best;
    std::vector<std::string> order;
    for (const auto& c : cells) {
        std::string v = variant_name(c.solver, c.tau);
        if (!cost.count(v)) order.push_back(v);
        double t = c.converged ? std::max(use_time ? c.time_ms : double(c.iterations), 1.0)
                               : std::numeric_limits<double>::infinity();
        cost[v][c.seed] = t;
        auto it = best.find(c.seed);
        if (it == best.end() || t < it->second) best[c.seed] = t;
    }
    std::vector<ProfilePoint> out;
    for (const auto& v : order) {
        const auto& cv = cost[v];
        for (double rho : rhos) {
            int solved = 0;
            for (const auto& [seed, t] : cv)
                if (std::isfinite(t) && t <= rho * best[seed]) ++solved;
            out.push_back({v, rho, cv.empty() ? 0.0 : double(solved) / double(cv.size())});
        }
    }
    return out;
}

inline std::vector<BenchCell> run_bench(const BenchConfig& bc) {
    std::vector<BenchCell> cells;
    for (std::uint64_t seed : bc.seeds)
        for (SolverKind s : bc.solvers)
            for (double tau : bc.taus) {
                BenchCell cell;
                cell.seed = seed;
                cell.tau = tau;
                cell.solver = solver_name(s);
                RunConfig c = bc.base;
                c.solver = s;
                c.tau = tau;
                c.seed = seed;
                c.generator = bc.generator;
                c.input.clear();
                c.trace.clear();
                try {
                    c.validate();
                    Instance inst = generate_instance(c.generator, seed);
                    cell.instance = inst.name;
                    Model M = build_model(inst, c);
                    RunOutcome o = run_solver(M, c);
                    Evaluation e = M.evaluate(o.x, o.y, o.z);
                    cell.converged = o.converged;
                    cell.status = o.converged ? "converged" : "max_iter";
                    cell.iterations = o.iterations;
                    cell.time_ms = o.wall_ms;
                    cell.eta_max = e.eta_max;
                    cell.eta_gap = e.eta_gap;
                } catch (const std::exception& ex) {
                    cell.status = "error";
                    cell.message = ex.what();
                    cell.eta_max = cell.eta_gap = detail::nan();
                }
                cells.push_back(cell);
            }
    return cells;
}

inline void write_bench_csv(std::ostream& out, const std::vector<BenchCell>& cells, bool timing) {
    char buf[64];
    auto g = [&](double v) -> std::string {
        if (std::isnan(v)) return "";
        std::snprintf(buf, sizeof buf, "%.6e", v);
        return buf;
    };
    auto quoted = [](const std::string& s) {
        std::string q = "\"";
        for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        return q + "\"";
    };
    out << "instance,seed,solver,tau,status,iterations," << (timing ? "time_ms," : "") << "eta_max,eta_gap,message\n";
    for (const auto& c : cells) {
        std::snprintf(buf, sizeof buf, "%.6g", c.tau);
        std::string tau = buf;
        out << c.instance << ',' << c.seed << ',' << c.solver << ',' << tau << ',' << c.status << ',' << c.iterations << ',';
        if (timing) {
            std::snprintf(buf, sizeof buf, "%.3f", c.time_ms);
            out << buf << ',';
        }
        out << g(c.eta_max) << ',' << g(c.eta_gap) << ',' << (c.message.empty() ? "" : quoted(c.message)) << '\n';
    }
}

inline void write_profile_csv(std::ostream& out, const std::vector<ProfilePoint>& prof) {
    out << "variant,rho,fraction\n";
    char buf[96];
    for (const auto& p : prof) {
        std::snprintf(buf, sizeof buf, "%.6g,%.6f", p.rho, p.fraction);
        out << p.variant << ',' << buf << '\n';
    }
}

/// Exit 0 when every cell converged, 2 otherwise; failures are recorded in their rows.
inline int bench_command(const BenchConfig& bc, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        if (bc.seeds.empty() || bc.taus.empty() || bc.solvers.empty()) throw InvalidInput("bench grid is empty");
        for (double t : bc.taus)
            if (!(t > 0.0 && t < 2.0)) throw InvalidInput("tau must lie in (0, 2)");
        std::vector<BenchCell> cells = run_bench(bc);
        auto prof = performance_profile(cells, bc.rhos, bc.base.timing);
        detail::emit(bc.csv, out, [&](std::ostream& s) { write_bench_csv(s, cells, bc.base.timing); });
        if (bc.profile.empty()) {
            out << '\n';
            write_profile_csv(out, prof);
        } else {
            detail::emit(bc.profile, out, [&](std::ostream& s) { write_profile_csv(s, prof); });
        }
        bool all = std::all_of(cells.begin(), cells.end(), [](const BenchCell& c) { return c.converged; });
        return all ? exit_ok : exit_cap;
    });
}

// ---------------------------------------------------------------- verify

struct VerifyOptions {
    bool corrupt = false;       // perturb x^1 of the recorded trace before the Fejér check
    int equivalence_iters = 50;
    double reference_tol = 1e-9;
};

struct VerifyReport {
    std::vector<CertificateSummary> certificates;
    bool passed = false;
};

/// Reference KKT point: planted when known, otherwise a long exact run certified to reference_tol.
inline KKTPoint reference_point(const Model& M, const RunConfig& cfg, double tol) {
    if (M.reference) return *M.reference;
    ADMMConfig a;
    a.sigma = cfg.sigma;
    a.tau = 1.618;
    a.D = M.D;
    a.stop_tol = 1e-3 * tol;
    a.max_iter = 200000;
    a.record_iterates = false;
    const auto& P = M.P;
    AdmmResult r = run_admm(P, a, Vec::Zero(P.dim_x()), Vec::Zero(P.dim_y()), Vec::Zero(P.dim_z()));
    return {r.x, r.y, r.z};
}

/// All certificates on one fixed-σ run: Assumption checks, the sGS lemma at every step, the ALM-view
/// inclusion, the ξ feasibility bound, residual re-evaluation, Fejér and complexity on the ALM view,
/// and the step-by-step equivalence with iPALM on the reformulation.
inline VerifyReport verify_model(const Model& M, const RunConfig& cfg, const VerifyOptions& vo) {
    const auto& P = M.P;
    VerifyReport rep;
    auto add = [&rep](std::string name, bool ok, double worst, int first, std::string detail = {}) {
        rep.certificates.push_back({std::move(name), ok, worst, first, std::move(detail)});
    };
    ADMMConfig a = admm_config(M, cfg);
    a.adaptive.enabled = false;
    a.record_iterates = true;
    a.sweep.kind = SweepKind::symmetric;
    const double sigma = cfg.sigma;

    AssumptionPReport ap = check_assumption_p(P, build_D(P, a, sigma), sigma);
    double ap_worst = ap.second_min_eig;
    for (double e : ap.block_min_eig) ap_worst = std::min(ap_worst, e);
    add("assumption_p", ap.passed, ap_worst, -1, "smallest eigenvalue over both conditions");

    AdmmResult ar = run_admm(P, a, Vec::Zero(P.dim_x()), Vec::Zero(P.dim_y()), Vec::Zero(P.dim_z()));
    const AdmmTrace& tr = ar.trace;
    const int K = tr.iterations();
    DecompositionOptions dopt = a.decomp;
    if (a.mode == AdmmMode::exact) dopt.iterative_blocks = false;
    SGSDecomposition dec(P, build_D(P, a, sigma), sigma, dopt);

    {
        double worst = 0, ident = 0;
        int first = -1;
        for (int k = 0; k < K; ++k) {
            Vec dsgs = aggregate_error(dec, tr.delta[size_t(k)], tr.delta_tilde[size_t(k)]);
            LemmaCheck lc = verify_sgs_lemma(dec, P, tr.z[size_t(k)], tr.x[size_t(k)], tr.y[size_t(k)], sigma,
                                             tr.y[size_t(k + 1)], dsgs);
            if (lc.violation > 1e-9 * (1.0 + tr.y[size_t(k + 1)].norm()) && first < 0) first = k;
            worst = std::max(worst, lc.violation);
            ident = std::max(ident, lc.identity_residual);
        }
        add("sgs_lemma", first < 0 && ident <= 1e-12, worst, first,
            dec.num_blocks() == 1 ? "single block: no decomposition" : "identity residual " + detail::sci(ident));
    }

    Reformulation R = build_reformulation(P, dec);
    AlmView view = reconstruct_alm_view(P, dec, R, tr);
    add("alm_inclusion", view.max_inclusion <= 1e-9 && view.max_range <= 1e-10 && view.min_eig > 0, view.max_inclusion,
        -1, "range residual " + detail::sci(view.max_range));

    XiReport xr = xi_bound_certificate(P, tr, cfg.tau);
    add("xi_bound", xr.passed, xr.worst_slack, xr.first_violation);

    AdmmReeval re = reevaluate_admm_trace(P, a, tr);
    add("reevaluation", re.passed, std::max(re.max_discrepancy, re.max_bound_excess), -1);

    // the run seen as iPALM on the reformulation
    IPALMConfig ic;
    ic.sigma = sigma;
    ic.tau = cfg.tau;
    ic.S = dense_map(R.T);
    IpalmTrace it;
    it.sigma = sigma;
    it.tau = cfg.tau;
    for (int k = 0; k <= K; ++k) {
        it.x.push_back(tr.x[size_t(k)]);
        it.w.push_back(to_v(R, tr.y[size_t(k)], tr.z[size_t(k)]));
    }
    for (int k = 0; k < K; ++k) {
        Vec d(R.ny + R.r);
        d.head(R.ny) = view.Delta[size_t(k)];
        if (R.r > 0) d.tail(R.r) = R.U.transpose() * view.gamma[size_t(k)];
        it.d.push_back(d);
        it.eps.push_back(view.eps_hat[size_t(k)]);
        it.exact.push_back(0);
    }
    KKTPoint ref = reference_point(M, cfg, vo.reference_tol);
    Vec w_star = to_v(R, ref.y, ref.z);
    const double ref_res = kkt_residual(R.gp, ref.x, w_star).norm();
    add("reference", ref_res <= vo.reference_tol, ref_res, -1, "|R(u*)| of the reference point");

    if (vo.corrupt && K >= 2) {
        // push x^1 along the direction that raises the k = 1 Fejér slack the most
        const double c = (2.0 - cfg.tau) / (3.0 * cfg.tau);
        Vec g = (it.x[1] - ref.x) + c * (it.x[2] - it.x[1]);
        if (g.norm() == 0.0) g = Vec::Ones(g.size());
        const double t = c < 1.0 ? 1.0 / (1.0 - c) : 1.0;
        it.x[1] -= t * g;
    }
    for (int k = 0; k <= K; ++k) it.residual.push_back(kkt_residual(R.gp, it.x[size_t(k)], it.w[size_t(k)]).norm());

    FejerReport fr = fejer_certificate(R.gp, ic, it, ref.x, w_star);
    add("fejer", fr.passed, fr.worst_slack / fr.scale, fr.first_violation, "slack relative to the scale");

    ComplexityReport cr = complexity_certificate(R.gp, ic, it, ref.x, w_star);
    add("complexity", cr.passed, cr.worst_ratio, cr.first_violation,
        std::string(cr.bounded ? "bounded" : "unbounded") + (cr.trending ? ", trending" : ", not trending"));

    if (a.mode == AdmmMode::exact) {
        ADMMConfig ea = a;
        EquivalenceReport er = run_equivalence(P, ea, {Vec::Zero(P.dim_x()), Vec::Zero(P.dim_y()), Vec::Zero(P.dim_z())},
                                               vo.equivalence_iters, true);
        add("equivalence", er.passed, std::max({er.max_dx, er.max_dy, er.max_dz}), -1,
            std::to_string(er.iterations) + " iterations");
    }
    rep.passed = std::all_of(rep.certificates.begin(), rep.certificates.end(),
                             [](const CertificateSummary& c) { return c.passed; });
    return rep;
}

/// Prints one PASS/FAIL line per certificate; exit 0 iff all pass, 3 otherwise.
inline int verify_command(const RunConfig& cfg, const VerifyOptions& vo, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        cfg.validate();
        if (cfg.adaptive_sigma) throw Unsupported("verify runs at fixed sigma");
        Instance inst = load_instance(cfg);
        Model M = build_model(inst, cfg);
        VerifyReport vr = verify_model(M, cfg, vo);
        char buf[256];
        for (const auto& c : vr.certificates) {
            std::snprintf(buf, sizeof buf, "%s %-14s worst=%.3e", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.worst);
            out << buf;
            if (c.first_failure >= 0) out << " k=" << c.first_failure;
            if (!c.detail.empty()) out << "  (" << c.detail << ")";
            out << '\n';
        }
        if (!cfg.output.empty()) {
            ResultRecord rec;
            rec.command = "verify";
            rec.status = vr.passed ? "certified" : "certificate_failure";
            rec.instance = inst.name;
            rec.kind = inst.kind;
            rec.solver = solver_name(cfg.solver);
            rec.certificates = vr.certificates;
            rec.config = config_json(cfg);
            detail::emit(cfg.output, out, [&](std::ostream& s) { s << to_json(rec).dump(2) << '\n'; });
        }
        return vr.passed ? exit_ok : exit_certificate;
    });
}

// ---------------------------------------------------------------- gen

/// Writes a generated instance: SDPA for SDP kinds when asked (or when the path ends in .dat-s),
/// native JSON otherwise.
inline int gen_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return detail::guarded(err, [&] {
        if (cfg.generator.empty()) throw InvalidInput("gen needs --gen");
        Instance inst = generate_instance(cfg.generator, cfg.seed);
        std::string fmt = cfg.format;
        if (fmt == "auto") {
            const std::string& p = cfg.output;
            fmt = (p.size() >= 6 && p.substr(p.size() - 6) == ".dat-s") ? "sdpa" : "native";
        }
        if (fmt == "sdpa") {
            if (inst.kind != "sdp") throw Unsupported("SDPA output needs an SDP instance");
            SdpaData d = from_instance(*inst.sdp);
            detail::emit(cfg.output, out, [&](std::ostream& s) { write_sdpa(s, d); });
        } else if (fmt == "native") {
            detail::emit(cfg.output, out, [&](std::ostream& s) { s << instance_to_json(inst).dump(1) << '\n'; });
        } else {
            throw InvalidInput("format must be sdpa or native");
        }
        return exit_ok;
    });
}

}  // namespace ipadmm
