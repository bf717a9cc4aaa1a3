#pragma once

#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "ipadmm/apps/basis_pursuit.hpp"
#include "ipadmm/apps/generators.hpp"
#include "ipadmm/apps/lasso.hpp"
#include "ipadmm/apps/qsdp.hpp"
#include "ipadmm/apps/sdp.hpp"
#include "ipadmm/io/config.hpp"
#include "ipadmm/io/sdpa.hpp"

namespace ipadmm {

using json = nlohmann::json;

/// Any instance the CLI can load. `kind` is one of sdp, qsdp, lasso, bp, multiblock.
struct Instance {
    std::string kind, name;
    std::optional<SdpInstance> sdp;
    std::optional<QsdpInstance> qsdp;
    std::optional<LassoInstance> lasso;
    std::optional<BasisPursuitInstance> bp;
    std::optional<PlantedProblem> planted;
    std::string generator;  // spec when generated
    std::uint64_t seed = 0;
};

inline Instance generate_instance(const std::string& spec_text, std::uint64_t seed) {
    GeneratorSpec g = GeneratorSpec::parse(spec_text);
    Instance out;
    out.generator = g.str();
    out.seed = seed;
    if (g.kind == "toy") {
        out.kind = "sdp";
        out.sdp = toy_sdp();
    } else if (g.kind == "sdp") {
        out.kind = "sdp";
        out.sdp = gen_random_sdp(g.get_int("n", 10), g.get_int("m", 20), seed);
    } else if (g.kind == "biq") {
        out.kind = "qsdp";
        int n = g.get_int("n", 5);
        out.qsdp = gen_biq_qsdp(n, g.get_int("ra", std::min(2, n)), g.get_int("rb", std::min(2, n)), seed);
    } else if (g.kind == "lasso") {
        out.kind = "lasso";
        out.lasso = gen_random_lasso(g.get_int("n", 6), g.get_int("me", 1), g.get_int("mi", 2), seed);
    } else if (g.kind == "bp") {
        out.kind = "bp";
        out.bp = gen_random_basis_pursuit(g.get_int("m", 3), g.get_int("n", 6), seed);
    } else if (g.kind == "multiblock") {
        out.kind = "multiblock";
        out.planted = gen_random_multiblock(g.get_dims("dims", {4, 3, 2}), g.get_int("nx", 6), g.get_int("nz", 3), seed,
                                            g.get_int("rankdef", 0) != 0);
    } else {
        throw InvalidInput("unknown generator '" + g.kind + "' (toy, sdp, biq, lasso, bp, multiblock)");
    }
    if (out.sdp) out.name = out.sdp->name;
    else if (out.qsdp) out.name = out.qsdp->name;
    else if (out.lasso) out.name = out.lasso->name;
    if (out.name.empty()) out.name = g.kind + "-s" + std::to_string(seed);
    return out;
}

namespace native {

inline json vec(const Vec& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

inline json mat(const Mat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) rows.push_back(vec(Vec(m.row(i).transpose())));
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

inline Vec to_vec(const json& j, const char* what) {
    if (!j.is_array()) throw InvalidInput(std::string("native: ") + what + " must be an array");
    Vec v(j.size());
    for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw InvalidInput(std::string("native: ") + what + " must hold numbers");
        v[Eigen::Index(i)] = j[i].get<double>();
    }
    if (!v.allFinite()) throw InvalidInput(std::string("native: ") + what + " is not finite");
    return v;
}

inline Mat to_mat(const json& j, const char* what) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
        throw InvalidInput(std::string("native: ") + what + " needs rows, cols and data");
    const long r = j["rows"].get<long>(), c = j["cols"].get<long>();
    const json& d = j["data"];
    if (r < 0 || c < 0 || !d.is_array() || long(d.size()) != r) throw InvalidInput(std::string("native: ") + what + " has wrong shape");
    Mat m(r, c);
    for (long i = 0; i < r; ++i) {
        Vec row = to_vec(d[size_t(i)], what);
        if (row.size() != c) throw InvalidInput(std::string("native: ") + what + " has a ragged row");
        m.row(i) = row.transpose();
    }
    return m;
}

inline json sparse(const SpMat& A) {
    json t = json::array();
    for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it) t.push_back(json::array({it.row(), it.col(), it.value()}));
    return json{{"rows", A.rows()}, {"cols", A.cols()}, {"triplets", t}};
}

inline SpMat to_sparse(const json& j) {
    const long r = j.at("rows").get<long>(), c = j.at("cols").get<long>();
    if (r < 0 || c < 0) throw InvalidInput("native: sparse matrix has negative shape");
    std::vector<Eigen::Triplet<double>> trip;
    for (const auto& t : j.at("triplets")) {
        long i = t.at(0).get<long>(), k = t.at(1).get<long>();
        double v = t.at(2).get<double>();
        if (i < 0 || i >= r || k < 0 || k >= c || !std::isfinite(v)) throw InvalidInput("native: bad triplet");
        trip.emplace_back(int(i), int(k), v);
    }
    SpMat A(r, c);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    return A;
}

}  // namespace native

/// Self-describing JSON form. Generated multi-block instances are stored by their spec and seed.
inline json instance_to_json(const Instance& inst) {
    using namespace native;
    json j{{"schema_version", 1}, {"kind", inst.kind}, {"name", inst.name}};
    if (inst.kind == "sdp") {
        const auto& s = *inst.sdp;
        j["blocks"] = s.blocks;
        j["A"] = sparse(s.A);
        j["b"] = vec(s.b);
        j["C"] = vec(s.C);
        if (s.feasible_X.size()) j["feasible_X"] = vec(s.feasible_X);
        if (s.feasible_z.size()) j["feasible_z"] = vec(s.feasible_z);
    } else if (inst.kind == "qsdp") {
        const auto& q = *inst.qsdp;
        j["n"] = q.n;
        j["QA"] = mat(q.QA);
        j["QB"] = mat(q.QB);
        j["AE"] = mat(q.AE);
        j["bE"] = vec(q.bE);
        j["AI"] = mat(q.AI);
        j["bI"] = vec(q.bI);
        j["C"] = vec(q.C);
        if (q.feasible_X.size()) j["feasible_X"] = vec(q.feasible_X);
    } else if (inst.kind == "lasso") {
        const auto& l = *inst.lasso;
        j["Phi"] = mat(l.Phi);
        j["eta"] = vec(l.eta);
        j["lambda"] = l.lambda;
        j["AE"] = mat(l.AE);
        j["bE"] = vec(l.bE);
        j["AI"] = mat(l.AI);
        j["bI"] = vec(l.bI);
    } else if (inst.kind == "bp") {
        j["G"] = mat(inst.bp->G);
        j["b"] = vec(inst.bp->b);
    } else if (inst.kind == "multiblock") {
        j["generator"] = inst.generator;
        j["seed"] = inst.seed;
    } else {
        throw InvalidInput("unknown instance kind " + inst.kind);
    }
    return j;
}

inline Instance instance_from_json(const json& j) {
    using namespace native;
    try {
        if (j.at("schema_version").get<int>() != 1) throw InvalidInput("native: unsupported schema_version");
        Instance inst;
        inst.kind = j.at("kind").get<std::string>();
        inst.name = j.value("name", std::string());
        if (inst.kind == "sdp") {
            SdpInstance s;
            s.blocks = j.at("blocks").get<std::vector<int>>();
            s.A = to_sparse(j.at("A"));
            s.b = to_vec(j.at("b"), "b");
            s.C = to_vec(j.at("C"), "C");
            if (j.contains("feasible_X")) s.feasible_X = to_vec(j["feasible_X"], "feasible_X");
            if (j.contains("feasible_z")) s.feasible_z = to_vec(j["feasible_z"], "feasible_z");
            s.name = inst.name;
            validate_sdp(s);
            inst.sdp = s;
        } else if (inst.kind == "qsdp") {
            QsdpInstance q;
            q.n = j.at("n").get<int>();
            q.QA = to_mat(j.at("QA"), "QA");
            q.QB = to_mat(j.at("QB"), "QB");
            if (q.QA.rows() != q.n || q.QA.cols() != q.n || q.QB.rows() != q.n || q.QB.cols() != q.n)
                throw InvalidInput("native: QA and QB must be n x n");
            q.Q = make_kron_q(q.QA, q.QB);
            q.AE = to_mat(j.at("AE"), "AE");
            q.bE = to_vec(j.at("bE"), "bE");
            q.AI = to_mat(j.at("AI"), "AI");
            q.bI = to_vec(j.at("bI"), "bI");
            q.C = to_vec(j.at("C"), "C");
            if (j.contains("feasible_X")) q.feasible_X = to_vec(j["feasible_X"], "feasible_X");
            q.name = inst.name;
            validate_qsdp(q);
            inst.qsdp = q;
        } else if (inst.kind == "lasso") {
            LassoInstance l;
            l.Phi = to_mat(j.at("Phi"), "Phi");
            l.eta = to_vec(j.at("eta"), "eta");
            l.lambda = j.at("lambda").get<double>();
            l.AE = to_mat(j.at("AE"), "AE");
            l.bE = to_vec(j.at("bE"), "bE");
            l.AI = to_mat(j.at("AI"), "AI");
            l.bI = to_vec(j.at("bI"), "bI");
            l.name = inst.name;
            validate_lasso(l);
            inst.lasso = l;
        } else if (inst.kind == "bp") {
            BasisPursuitInstance b;
            b.G = to_mat(j.at("G"), "G");
            b.b = to_vec(j.at("b"), "b");
            if (b.G.rows() != b.b.size()) throw InvalidInput("native: G and b disagree");
            inst.bp = b;
        } else if (inst.kind == "multiblock") {
            Instance g = generate_instance(j.at("generator").get<std::string>(), j.at("seed").get<std::uint64_t>());
            g.name = inst.name.empty() ? g.name : inst.name;
            return g;
        } else {
            throw InvalidInput("native: unknown kind " + inst.kind);
        }
        return inst;
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("native: ") + e.what());
    }
}

inline Instance sdp_instance(SdpInstance s) {
    Instance inst;
    inst.kind = "sdp";
    inst.name = s.name;
    inst.sdp = std::move(s);
    return inst;
}

/// Loads the instance named by cfg: a file (format from the flag or the extension) or a generator.
inline Instance load_instance(const RunConfig& cfg) {
    if (cfg.input.empty()) return generate_instance(cfg.generator, cfg.seed);
    std::string fmt = cfg.format;
    if (fmt == "auto") {
        const std::string& p = cfg.input;
        fmt = (p.size() >= 6 && p.substr(p.size() - 6) == ".dat-s") ? "sdpa" : "native";
    }
    if (fmt == "sdpa") {
        SdpInstance s = to_instance(read_sdpa_file(cfg.input));
        if (s.name.empty()) s.name = cfg.input;
        validate_sdp(s);
        return sdp_instance(std::move(s));
    }
    std::ifstream in(cfg.input);
    if (!in) throw InvalidInput("cannot open " + cfg.input);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("native: ") + e.what());
    }
    return instance_from_json(j);
}

}  // namespace ipadmm
