#pragma once

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "ipadmm/apps/sdp.hpp"

namespace ipadmm {

/// One nonzero of an SDPA sparse file, 1-based as written, upper triangle (i <= j).
struct SdpaEntry {
    int mat = 0, blk = 0, i = 0, j = 0;
    double value = 0;

    auto key() const { return std::make_tuple(mat, blk, i, j); }
    bool operator==(const SdpaEntry&) const = default;
};

/// File-level view of an SDPA sparse instance. Entries are kept sorted by (mat, blk, i, j).
struct SdpaData {
    std::string name;  // first comment line, without the leading '"' or '*'
    int m = 0;
    std::vector<int> blocks;  // negative = diagonal block
    Vec b;
    std::vector<SdpaEntry> entries;

    bool operator==(const SdpaData& o) const {
        return name == o.name && m == o.m && blocks == o.blocks && b.size() == o.b.size() && b == o.b &&
               entries == o.entries;
    }
};

struct SdpaLimits {
    int max_m = 100000;
    int max_blocks = 10000;
    long max_order = 20000;        // sum of |block sizes|
    long max_svec = 20000000;      // total svec length
    long max_entries = 50000000;
};

namespace detail {

struct Token {
    std::string text;
    int line;
};

inline bool is_sep(char c, bool header) {
    auto u = static_cast<unsigned char>(c);
    if (std::isspace(u)) return true;
    return header && (c == ',' || c == '{' || c == '}' || c == '(' || c == ')');
}

inline std::vector<std::string> split(const std::string& s, bool header) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_sep(s[i], header)) ++i;
        size_t j = i;
        while (j < s.size() && !is_sep(s[j], header)) ++j;
        if (j > i) out.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline long long to_int(const std::string& t, int line, const char* what) {
    long long v = 0;
    const char* e = t.data() + t.size();
    auto [p, ec] = std::from_chars(t.data(), e, v);
    if (ec != std::errc() || p != e) throw ParseError(std::string("expected an integer for ") + what + ", got '" + t + "'", line);
    return v;
}

inline double to_real(const std::string& t, int line, const char* what) {
    double v = 0;
    const char* s = t.data();
    const char* e = t.data() + t.size();
    if (s != e && *s == '+') ++s;
    auto [p, ec] = std::from_chars(s, e, v);
    if (ec != std::errc() || p != e) throw ParseError(std::string("expected a number for ") + what + ", got '" + t + "'", line);
    if (!std::isfinite(v)) throw ParseError(std::string("non-finite value for ") + what, line);
    return v;
}

}  // namespace detail

/// SDPA sparse format (.dat-s): optional comment lines starting with '"' or '*', then m, nblocks,
/// the block sizes, the m entries of b, and 5-tuples (matno, blkno, i, j, value) with i <= j.
/// Header fields may be separated by ',', '{', '}', '(' or ')'; anything after the first token of
/// the m and nblocks lines is ignored. Zero-valued entries are accepted and dropped.
inline SdpaData parse_sdpa(std::istream& in, const SdpaLimits& lim = {}) {
    SdpaData d;
    std::vector<std::pair<std::string, int>> lines;
    {
        std::string s;
        int ln = 0;
        while (std::getline(in, s)) {
            ++ln;
            if (!s.empty() && s.back() == '\r') s.pop_back();
            lines.emplace_back(std::move(s), ln);
        }
    }
    size_t li = 0;
    bool named = false;
    while (li < lines.size()) {
        const std::string& s = lines[li].first;
        if (!s.empty() && (s[0] == '"' || s[0] == '*')) {
            if (!named) {
                d.name = s.substr(1);
                named = true;
            }
            ++li;
            continue;
        }
        if (detail::split(s, true).empty()) {
            ++li;
            continue;
        }
        break;
    }
    const int last_line = lines.empty() ? 1 : lines.back().second;
    // first token of the next non-blank line
    auto head_int = [&](const char* what) {
        while (li < lines.size()) {
            auto t = detail::split(lines[li].first, true);
            if (!t.empty()) {
                long long v = detail::to_int(t[0], lines[li].second, what);
                ++li;
                return std::make_pair(v, lines[li - 1].second);
            }
            ++li;
        }
        throw ParseError(std::string("unexpected end of file, expected ") + what, last_line);
    };
    // `count` tokens that may span lines; the last line must not carry extra tokens
    auto head_list = [&](long long count, const char* what) {
        std::vector<detail::Token> out;
        while (static_cast<long long>(out.size()) < count) {
            if (li >= lines.size())
                throw ParseError(std::string("unexpected end of file in ") + what, last_line);
            auto t = detail::split(lines[li].first, true);
            for (auto& x : t) {
                if (static_cast<long long>(out.size()) == count)
                    throw ParseError(std::string("extra token '") + x + "' after " + what, lines[li].second);
                out.push_back({x, lines[li].second});
            }
            ++li;
        }
        return out;
    };

    auto [m, mline] = head_int("m");
    if (m < 0) throw ParseError("m must be nonnegative", mline);
    if (m > lim.max_m) throw ParseError("m exceeds the limit", mline);
    d.m = int(m);
    auto [nb, nbline] = head_int("nblocks");
    if (nb < 1) throw ParseError("nblocks must be positive", nbline);
    if (nb > lim.max_blocks) throw ParseError("nblocks exceeds the limit", nbline);
    long order = 0, nvec = 0;
    for (const auto& t : head_list(nb, "block sizes")) {
        long long bs = detail::to_int(t.text, t.line, "block size");
        if (bs == 0) throw ParseError("block size 0", t.line);
        if (std::llabs(bs) > lim.max_order) throw ParseError("block size exceeds the limit", t.line);
        order += long(std::llabs(bs));
        nvec += bs > 0 ? long(bs * (bs + 1) / 2) : long(-bs);
        if (order > lim.max_order || nvec > lim.max_svec) throw ParseError("instance exceeds the size limit", t.line);
        d.blocks.push_back(int(bs));
    }
    d.b = Vec(d.m);
    {
        auto bt = head_list(m, "b");
        for (int k = 0; k < d.m; ++k) d.b[k] = detail::to_real(bt[k].text, bt[k].line, "b");
    }
    std::vector<std::pair<SdpaEntry, int>> raw;
    for (; li < lines.size(); ++li) {
        const int ln = lines[li].second;
        auto t = detail::split(lines[li].first, false);
        if (t.empty()) continue;
        if (t.size() != 5) throw ParseError("entry lines need 5 fields, got " + std::to_string(t.size()), ln);
        long long mat = detail::to_int(t[0], ln, "matno"), blk = detail::to_int(t[1], ln, "blkno");
        long long i = detail::to_int(t[2], ln, "row"), j = detail::to_int(t[3], ln, "column");
        double v = detail::to_real(t[4], ln, "value");
        if (mat < 0 || mat > m) throw ParseError("matno out of range", ln);
        if (blk < 1 || blk > nb) throw ParseError("blkno out of range", ln);
        const long long bs = std::llabs(d.blocks[size_t(blk - 1)]);
        if (i < 1 || j < 1 || i > bs || j > bs) throw ParseError("entry index out of block range", ln);
        if (i > j) throw ParseError("lower-triangle entry (i > j)", ln);
        if (d.blocks[size_t(blk - 1)] < 0 && i != j) throw ParseError("off-diagonal entry in a diagonal block", ln);
        if (static_cast<long>(raw.size()) >= lim.max_entries) throw ParseError("entry count exceeds the limit", ln);
        raw.push_back({SdpaEntry{int(mat), int(blk), int(i), int(j), v}, ln});
    }
    std::stable_sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.first.key() < b.first.key(); });
    for (size_t k = 1; k < raw.size(); ++k)
        if (raw[k].first.key() == raw[k - 1].first.key())
            throw ParseError("duplicate entry", std::max(raw[k].second, raw[k - 1].second));
    for (auto& [e, ln] : raw)
        if (e.value != 0.0) d.entries.push_back(e);
    return d;
}

inline SdpaData parse_sdpa_string(const std::string& text, const SdpaLimits& lim = {}) {
    std::istringstream in(text);
    return parse_sdpa(in, lim);
}

inline SdpaData read_sdpa_file(const std::string& path, const SdpaLimits& lim = {}) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path);
    return parse_sdpa(in, lim);
}

/// Canonical form: one header item per line, b on one line, entries sorted, %.17g for reals.
inline void write_sdpa(std::ostream& out, const SdpaData& d) {
    char buf[64];
    auto real = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    if (!d.name.empty()) out << '"' << d.name << '\n';
    out << d.m << '\n' << d.blocks.size() << '\n';
    for (size_t k = 0; k < d.blocks.size(); ++k) out << (k ? " " : "") << d.blocks[k];
    out << '\n';
    for (int k = 0; k < d.b.size(); ++k) out << (k ? " " : "") << real(d.b[k]);
    out << '\n';
    for (const auto& e : d.entries) out << e.mat << ' ' << e.blk << ' ' << e.i << ' ' << e.j << ' ' << real(e.value) << '\n';
}

inline std::string to_sdpa_string(const SdpaData& d) {
    std::ostringstream out;
    write_sdpa(out, d);
    return out.str();
}

inline void write_sdpa_file(const std::string& path, const SdpaData& d) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path);
    write_sdpa(out, d);
}

namespace detail {

/// Offsets of every block in the stacked svec vector.
inline std::vector<int> block_offsets(const std::vector<int>& blocks) {
    std::vector<int> off;
    int o = 0;
    for (int bs : blocks) {
        off.push_back(o);
        o += bs > 0 ? svec_dim(bs) : -bs;
    }
    return off;
}

}  // namespace detail

/// C = F_0 and A_i = F_i in svec coordinates, so the instance reads min <F_0, X> s.t. <F_i, X> = b_i.
inline SdpInstance to_instance(const SdpaData& d) {
    SdpInstance inst;
    inst.blocks = d.blocks;
    inst.b = d.b;
    inst.name = d.name;
    const int nv = block_svec_dim(d.blocks);
    inst.C = Vec::Zero(nv);
    auto off = detail::block_offsets(d.blocks);
    const double r2 = std::sqrt(2.0);
    std::vector<Eigen::Triplet<double>> trip;
    for (const auto& e : d.entries) {
        const int bs = d.blocks[size_t(e.blk - 1)];
        int pos;
        double v = e.value;
        if (bs > 0) {
            pos = off[size_t(e.blk - 1)] + svec_index(e.i - 1, e.j - 1);
            if (e.i != e.j) v *= r2;
        } else {
            pos = off[size_t(e.blk - 1)] + e.i - 1;
        }
        if (e.mat == 0) inst.C[pos] = v;
        else trip.emplace_back(e.mat - 1, pos, v);
    }
    inst.A = SpMat(d.m, nv);
    inst.A.setFromTriplets(trip.begin(), trip.end());
    inst.A.makeCompressed();
    return inst;
}

inline SdpaData from_instance(const SdpInstance& inst) {
    if (block_svec_dim(inst.blocks) != inst.nvec()) throw InvalidInput("C does not match the block structure");
    SdpaData d;
    d.name = inst.name;
    d.m = inst.m();
    d.blocks = inst.blocks;
    d.b = inst.b;
    // position in the svec vector -> (blk, i, j), 1-based
    std::vector<std::tuple<int, int, int>> where(size_t(inst.nvec()));
    auto off = detail::block_offsets(inst.blocks);
    for (size_t k = 0; k < inst.blocks.size(); ++k) {
        const int bs = inst.blocks[k];
        if (bs > 0) {
            for (int j = 0; j < bs; ++j)
                for (int i = 0; i <= j; ++i) where[size_t(off[k] + svec_index(i, j))] = {int(k) + 1, i + 1, j + 1};
        } else {
            for (int i = 0; i < -bs; ++i) where[size_t(off[k] + i)] = {int(k) + 1, i + 1, i + 1};
        }
    }
    const double r2 = std::sqrt(2.0);
    auto push = [&](int mat, int pos, double v) {
        if (v == 0.0) return;
        auto [blk, i, j] = where[size_t(pos)];
        d.entries.push_back({mat, blk, i, j, i == j ? v : v / r2});
    };
    for (int p = 0; p < inst.nvec(); ++p) push(0, p, inst.C[p]);
    for (int k = 0; k < inst.A.outerSize(); ++k)
        for (SpMat::InnerIterator it(inst.A, k); it; ++it) push(int(it.row()) + 1, int(it.col()), it.value());
    std::sort(d.entries.begin(), d.entries.end(), [](const auto& a, const auto& b) { return a.key() < b.key(); });
    return d;
}

}  // namespace ipadmm
