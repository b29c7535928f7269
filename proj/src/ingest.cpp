#include "capnorm/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <regex>
#include <sstream>

namespace capnorm {

namespace {

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            if (!cur.empty() && cur.back() == '\r') cur.pop_back();
            lines.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    return lines;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

std::vector<unsigned long long> parse_bracket_list(const std::string& body, const std::string& where) {
    std::vector<unsigned long long> out;
    std::string token;
    auto flush = [&]() {
        if (token.empty()) return;
        try {
            out.push_back(std::stoull(token));
        } catch (const std::exception&) {
            throw ParseError(where + ": non-integer token '" + token + "'");
        }
        token.clear();
    };
    for (char c : body) {
        if (c == ',') {
            flush();
        } else if (c == ' ' || c == '\t') {
            if (!token.empty()) flush();
        } else {
            token += c;
        }
    }
    flush();
    return out;
}

struct RawLayer {
    std::vector<unsigned long long> full;
    std::optional<std::vector<unsigned long long>> ppart;
    std::map<unsigned long, std::vector<unsigned long long>> rows;  // j (1-based) -> i=1 vector
    std::map<unsigned long, std::vector<unsigned long long>> norms; // component -> vector
    std::optional<std::string> verdict;
};

unsigned long vp_ull(unsigned long long x, unsigned long p) {
    unsigned long v = 0;
    while (x % p == 0) {
        x /= p;
        ++v;
    }
    return v;
}

// Layer assembly shared by both parsers once the raw pieces are collected.
LayerRecord build_layer(unsigned long p, unsigned long n, const RawLayer& raw) {
    const std::string where = "layer " + std::to_string(n);
    const std::size_t full_rank = raw.full.size();

    std::vector<unsigned long> exps(full_rank);
    std::vector<std::size_t> kept;
    for (std::size_t j = 0; j < full_rank; ++j) {
        if (raw.full[j] == 0) throw ParseError(where + ": zero generator order");
        exps[j] = vp_ull(raw.full[j], p);
        if (exps[j] > 0) kept.push_back(j);
    }
    if (raw.ppart) {
        std::vector<unsigned long> dual;
        for (unsigned long long x : *raw.ppart) {
            const unsigned long v = vp_ull(x, p);
            if (x != 1 && pow_ul(p, v) != x)
                throw ParseError(where + ": p-part bracket entry is not a power of p");
            dual.push_back(v);
        }
        std::vector<unsigned long> nonzero;
        for (std::size_t j : kept) nonzero.push_back(exps[j]);
        if (nonzero != dual)
            throw ParseError(where + ": p-part bracket disagrees with the structure entries");
    }

    LayerRecord layer;
    layer.n = n;
    for (std::size_t j : kept) layer.orders.push_back(exps[j]);
    for (std::size_t a = 0; a + 1 < layer.orders.size(); ++a)
        if (layer.orders[a] < layer.orders[a + 1])
            throw ParseError(where + ": p-part orders are not non-increasing");
    const std::size_t rank = kept.size();

    auto map_vector = [&](const std::vector<unsigned long long>& v,
                          const std::string& what) -> ExpVec {
        ExpVec out(rank);
        if (v.size() == full_rank) {
            for (std::size_t a = 0; a < rank; ++a) out[a] = static_cast<Exp>(v[kept[a]]);
        } else if (v.size() == rank) {
            for (std::size_t a = 0; a < rank; ++a) out[a] = static_cast<Exp>(v[a]);
        } else {
            throw ParseError(where + ": " + what + " vector length " + std::to_string(v.size()) +
                             " matches neither the structure rank " + std::to_string(full_rank) +
                             " nor the p-part rank " + std::to_string(rank));
        }
        for (std::size_t a = 0; a < rank; ++a) out[a] %= pow_ul(p, layer.orders[a]);
        return out;
    };

    if (!raw.rows.empty() || rank == 0) {
        ExpMat d(rank, ExpVec(rank, 0));
        for (std::size_t a = 0; a < rank; ++a) {
            const unsigned long j = static_cast<unsigned long>(kept[a]) + 1;
            const auto it = raw.rows.find(j);
            if (it == raw.rows.end())
                throw ParseError(where + ": missing h_" + std::to_string(j) +
                                 "^[(S-1)^1] row; module underdetermined");
            d[a] = map_vector(it->second, "action");
        }
        for (const auto& [j, v] : raw.rows) {
            if (j < 1 || j > full_rank)
                throw ParseError(where + ": action row index h_" + std::to_string(j) +
                                 " out of range");
            map_vector(v, "action"); // length check also for rows of trivial generators
        }
        try {
            layer.module = make_module(p, layer.orders, d, std::max<unsigned long>(n, 1));
        } catch (const std::invalid_argument& err) {
            throw ParseError(where + ": " + err.what());
        }
    }

    if (!raw.norms.empty()) {
        std::vector<ExpVec> norms(rank);
        for (std::size_t a = 0; a < rank; ++a) {
            const unsigned long j = static_cast<unsigned long>(kept[a]) + 1;
            const auto it = raw.norms.find(j);
            if (it == raw.norms.end())
                throw ParseError(where + ": missing norm line for component " + std::to_string(j));
            norms[a] = map_vector(it->second, "norm");
        }
        for (const auto& [j, v] : raw.norms) {
            if (j < 1 || j > full_rank)
                throw ParseError(where + ": norm component " + std::to_string(j) + " out of range");
            map_vector(v, "norm");
        }
        layer.printed_norms = std::move(norms);
    }

    layer.verdict_text = raw.verdict;
    return layer;
}

void check_increasing_orders(const TowerData& tower) {
    std::vector<unsigned long> seq;
    if (tower.base) seq.push_back(*tower.base_order_v());
    for (const LayerRecord& layer : tower.layers) seq.push_back(layer.order_v());
    for (std::size_t i = 0; i + 1 < seq.size(); ++i)
        if (seq[i + 1] < seq[i])
            throw ParseError("orders decrease along the tower (v_p " + std::to_string(seq[i]) +
                             " -> " + std::to_string(seq[i + 1]) +
                             "); the increasing-order law rejects this data");
}

} // namespace

ParseResult parse_transcript(const std::string& text) {
    static const std::regex structure_re(R"(\bCK(\d+)=\[([0-9,\s]*)\](?:=\[([0-9,\s]*)\])?)");
    static const std::regex action_re(R"(\bh_(\d+)\^\[\(S-1\)\^(\d+)\]=\[([0-9,\s]*)\])");
    static const std::regex norm_re(
        R"(\bnorm in K(\d+)/K of (?:the component (\d+) of )?CK\d+\s*:\s*\[([0-9,\s]*)\])");
    static const std::regex header_re(R"((?:^|\s)(p|ell|r|Nn|N|f|PK|mKn)=(\S+))");
    static const std::regex verdict_re(R"(^(Complete|Incomplete|No)\s+capitulation\b.*)");

    ParseResult result;
    TowerData& tower = result.tower;

    std::optional<unsigned long> p_seen;
    std::map<unsigned long, RawLayer> raw;
    std::optional<unsigned long> current; // layer the most recent CKn line opened
    std::vector<std::pair<std::string, std::string>> label_parts;

    const std::vector<std::string> lines = split_lines(text);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const std::string& line = lines[ln];
        const std::string where = "line " + std::to_string(ln + 1);

        for (auto it = std::sregex_iterator(line.begin(), line.end(), structure_re);
             it != std::sregex_iterator(); ++it) {
            const unsigned long n = std::stoul((*it)[1].str());
            RawLayer& slot = raw[n];
            if (!slot.full.empty())
                throw ParseError(where + ": duplicate CK" + std::to_string(n) + " block");
            slot.full = parse_bracket_list((*it)[2].str(), where);
            if (slot.full.empty())
                slot.full.push_back(1); // "[]" = trivial group
            if ((*it)[3].matched) slot.ppart = parse_bracket_list((*it)[3].str(), where);
            current = n;
        }
        for (auto it = std::sregex_iterator(line.begin(), line.end(), action_re);
             it != std::sregex_iterator(); ++it) {
            const unsigned long j = std::stoul((*it)[1].str());
            const unsigned long i = std::stoul((*it)[2].str());
            if (i != 1) continue; // higher powers are recomputable consistency data
            if (!current || *current == 0)
                throw ParseError(where + ": action row outside a layer block");
            RawLayer& slot = raw[*current];
            if (!slot.rows.emplace(j, parse_bracket_list((*it)[3].str(), where)).second)
                throw ParseError(where + ": duplicate action row h_" + std::to_string(j));
        }
        for (auto it = std::sregex_iterator(line.begin(), line.end(), norm_re);
             it != std::sregex_iterator(); ++it) {
            const unsigned long n = std::stoul((*it)[1].str());
            const unsigned long j = (*it)[2].matched ? std::stoul((*it)[2].str()) : 1;
            if (raw.find(n) == raw.end())
                throw ParseError(where + ": norm line for unknown layer K" + std::to_string(n));
            RawLayer& slot = raw[n];
            if (!slot.norms.emplace(j, parse_bracket_list((*it)[3].str(), where)).second)
                throw ParseError(where + ": duplicate norm line for component " + std::to_string(j));
        }
        const std::string trimmed = trim(line);
        if (std::regex_match(trimmed, verdict_re)) {
            if (current && *current > 0 && !raw[*current].verdict)
                raw[*current].verdict = trimmed;
            continue;
        }
        for (auto it = std::sregex_iterator(line.begin(), line.end(), header_re);
             it != std::sregex_iterator(); ++it) {
            const std::string key = (*it)[1].str();
            const std::string value = (*it)[2].str();
            try {
                if (key == "p" && !p_seen) p_seen = std::stoul(value);
                else if (key == "ell" && !tower.ell) tower.ell = std::stoul(value);
                else if (key == "r" && !tower.r) tower.r = std::stoul(value);
                else if (key == "f" || key == "PK") label_parts.emplace_back(key, value);
            } catch (const std::exception&) {
                throw ParseError(where + ": bad " + key + "= token '" + value + "'");
            }
        }
    }

    if (!p_seen) throw ParseError("no p= header found");
    require_prime(*p_seen);
    tower.p = *p_seen;
    if (!label_parts.empty()) {
        std::string label;
        for (const auto& [k, v] : label_parts) {
            if (!label.empty()) label += " ";
            label += k + "=" + v;
        }
        tower.label = label;
    }

    if (const auto it = raw.find(0); it != raw.end()) {
        std::vector<unsigned long> base;
        for (unsigned long long x : it->second.full) {
            if (x == 0) throw ParseError("CK0: zero generator order");
            const unsigned long v = vp_ull(x, tower.p);
            if (v > 0) base.push_back(v);
        }
        std::sort(base.begin(), base.end(), std::greater<>());
        tower.base = std::move(base);
        raw.erase(it);
    }

    if (raw.empty()) throw ParseError("no layers found");
    unsigned long expect = 1;
    for (const auto& [n, slot] : raw) {
        if (n != expect)
            throw ParseError("layer indices not contiguous from 1 (found CK" + std::to_string(n) +
                             ", expected CK" + std::to_string(expect) + ")");
        ++expect;
        tower.layers.push_back(build_layer(tower.p, n, slot));
    }
    tower.N = tower.layers.back().n;

    check_increasing_orders(tower);
    return result;
}

std::string to_canonical(const TowerData& tower) {
    std::ostringstream os;
    os << "capnorm-tower v1\n";
    os << "p " << tower.p << "\n";
    if (tower.ell) os << "ell " << *tower.ell << "\n";
    if (tower.r) os << "r " << *tower.r << "\n";
    if (tower.label) os << "label " << *tower.label << "\n";
    if (tower.base) {
        os << "base";
        for (unsigned long e : *tower.base) os << " " << e;
        os << "\n";
    }
    for (const LayerRecord& layer : tower.layers) {
        os << "layer " << layer.n << "\n";
        os << "orders";
        for (unsigned long e : layer.orders) os << " " << e;
        os << "\n";
        if (layer.module) {
            os << "sigma\n";
            for (const ExpVec& row : layer.module->sigma_delta) {
                for (std::size_t t = 0; t < row.size(); ++t) os << (t ? " " : "") << row[t];
                os << "\n";
            }
        }
        if (layer.printed_norms) {
            os << "norms\n";
            for (const ExpVec& row : *layer.printed_norms) {
                for (std::size_t t = 0; t < row.size(); ++t) os << (t ? " " : "") << row[t];
                os << "\n";
            }
        }
        if (layer.verdict_text) os << "verdict " << *layer.verdict_text << "\n";
    }
    return os.str();
}

namespace {

std::vector<unsigned long long> parse_number_row(const std::string& line, const std::string& where) {
    std::istringstream is(line);
    std::vector<unsigned long long> out;
    std::string tok;
    while (is >> tok) {
        try {
            out.push_back(std::stoull(tok));
        } catch (const std::exception&) {
            throw ParseError(where + ": non-integer token '" + tok + "'");
        }
    }
    return out;
}

} // namespace

ParseResult parse_canonical(const std::string& text) {
    ParseResult result;
    TowerData& tower = result.tower;

    const std::vector<std::string> lines = split_lines(text);
    std::size_t pos = 0;
    auto next_line = [&]() -> std::optional<std::pair<std::size_t, std::string>> {
        while (pos < lines.size()) {
            const std::string t = trim(lines[pos]);
            ++pos;
            if (t.empty() || t[0] == '#') continue;
            return std::make_pair(pos, t); // 1-based line number
        }
        return std::nullopt;
    };

    auto first = next_line();
    if (!first || first->second != "capnorm-tower v1")
        throw ParseError("line 1: expected header 'capnorm-tower v1'");

    std::optional<unsigned long> p_seen;
    struct PendingLayer {
        unsigned long n;
        std::vector<unsigned long> orders;
        std::optional<ExpMat> sigma;
        std::optional<std::vector<ExpVec>> norms;
        std::optional<std::string> verdict;
    };
    std::vector<PendingLayer> pending;

    auto read_block = [&](std::size_t rows, const std::string& what,
                          const std::string& where) -> std::vector<std::vector<unsigned long long>> {
        std::vector<std::vector<unsigned long long>> out;
        for (std::size_t i = 0; i < rows; ++i) {
            auto l = next_line();
            if (!l) throw ParseError(where + ": unexpected end of file inside " + what + " block");
            out.push_back(parse_number_row(l->second, "line " + std::to_string(l->first)));
        }
        return out;
    };

    while (auto l = next_line()) {
        const std::string where = "line " + std::to_string(l->first);
        std::istringstream is(l->second);
        std::string key;
        is >> key;
        std::string rest;
        std::getline(is, rest);
        rest = trim(rest);

        auto require_value = [&]() {
            if (rest.empty()) throw ParseError(where + ": '" + key + "' needs a value");
        };

        if (key == "p") {
            require_value();
            p_seen = std::stoul(rest);
        } else if (key == "ell") {
            require_value();
            tower.ell = std::stoul(rest);
        } else if (key == "r") {
            require_value();
            tower.r = std::stoul(rest);
        } else if (key == "label") {
            require_value();
            tower.label = rest;
        } else if (key == "base") {
            std::vector<unsigned long> base;
            for (unsigned long long x : parse_number_row(rest, where))
                base.push_back(static_cast<unsigned long>(x));
            tower.base = std::move(base);
        } else if (key == "layer") {
            require_value();
            PendingLayer layer;
            layer.n = std::stoul(rest);
            auto ol = next_line();
            if (!ol) throw ParseError(where + ": layer without an orders line");
            std::istringstream ois(ol->second);
            std::string okey;
            ois >> okey;
            if (okey != "orders")
                throw ParseError("line " + std::to_string(ol->first) +
                                 ": expected 'orders' after 'layer'");
            std::string orest;
            std::getline(ois, orest);
            for (unsigned long long x :
                 parse_number_row(trim(orest), "line " + std::to_string(ol->first)))
                layer.orders.push_back(static_cast<unsigned long>(x));
            pending.push_back(std::move(layer));
        } else if (key == "sigma" || key == "norms") {
            if (pending.empty()) throw ParseError(where + ": '" + key + "' before any layer");
            PendingLayer& layer = pending.back();
            const auto block = read_block(layer.orders.size(), key, where);
            std::vector<ExpVec> rows;
            for (const auto& r : block) {
                if (r.size() != layer.orders.size())
                    throw ParseError(where + ": " + key + " row length " + std::to_string(r.size()) +
                                     " != rank " + std::to_string(layer.orders.size()));
                rows.emplace_back(r.begin(), r.end());
            }
            if (key == "sigma") layer.sigma = std::move(rows);
            else layer.norms = std::move(rows);
        } else if (key == "verdict") {
            if (pending.empty()) throw ParseError(where + ": 'verdict' before any layer");
            pending.back().verdict = rest;
        } else {
            throw ParseError(where + ": unknown directive '" + key + "'");
        }
    }

    if (!p_seen) throw ParseError("missing 'p' directive");
    require_prime(*p_seen);
    tower.p = *p_seen;
    if (pending.empty()) throw ParseError("no layers found");

    if (tower.base && !std::is_sorted(tower.base->begin(), tower.base->end(), std::greater<>())) {
        std::sort(tower.base->begin(), tower.base->end(), std::greater<>());
        result.warnings.push_back("base exponents re-sorted non-increasing");
    }

    unsigned long expect = 1;
    for (PendingLayer& pl : pending) {
        if (pl.n != expect)
            throw ParseError("layer indices not contiguous from 1 (found layer " +
                             std::to_string(pl.n) + ", expected " + std::to_string(expect) + ")");
        ++expect;

        // canonical order: generators sorted by non-increasing exponent, the
        // same permutation applied to sigma rows/columns and norm vectors
        std::vector<std::size_t> perm(pl.orders.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::stable_sort(perm.begin(), perm.end(),
                         [&](std::size_t a, std::size_t b) { return pl.orders[a] > pl.orders[b]; });
        bool permuted = false;
        for (std::size_t i = 0; i < perm.size(); ++i) permuted = permuted || perm[i] != i;
        if (permuted)
            result.warnings.push_back("layer " + std::to_string(pl.n) +
                                      ": generators permuted to sort orders non-increasing");
        auto apply_perm_vec = [&](const ExpVec& v) {
            ExpVec out(v.size());
            for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[perm[i]];
            return out;
        };

        LayerRecord layer;
        layer.n = pl.n;
        for (std::size_t i = 0; i < perm.size(); ++i) layer.orders.push_back(pl.orders[perm[i]]);
        for (unsigned long e : layer.orders)
            if (e == 0)
                throw ParseError("layer " + std::to_string(pl.n) + ": zero exponent in orders");

        if (pl.sigma) {
            ExpMat d(perm.size());
            for (std::size_t i = 0; i < perm.size(); ++i) d[i] = apply_perm_vec((*pl.sigma)[perm[i]]);
            try {
                layer.module = make_module(tower.p, layer.orders, d, std::max<unsigned long>(pl.n, 1));
            } catch (const std::invalid_argument& err) {
                throw ParseError("layer " + std::to_string(pl.n) + ": " + err.what());
            }
        } else if (layer.orders.empty()) {
            layer.module = make_module(tower.p, {}, {}, std::max<unsigned long>(pl.n, 1));
        }
        if (pl.norms) {
            std::vector<ExpVec> norms;
            for (std::size_t i = 0; i < perm.size(); ++i) {
                ExpVec v = apply_perm_vec((*pl.norms)[perm[i]]);
                for (std::size_t t = 0; t < v.size(); ++t) v[t] %= pow_ul(tower.p, layer.orders[t]);
                norms.push_back(std::move(v));
            }
            layer.printed_norms = std::move(norms);
        }
        layer.verdict_text = pl.verdict;
        tower.layers.push_back(std::move(layer));
    }
    tower.N = tower.layers.back().n;

    check_increasing_orders(tower);
    return result;
}

ParseResult parse_tower_auto(const std::string& text) {
    for (const std::string& line : split_lines(text)) {
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t == "capnorm-tower v1") return parse_canonical(text);
        break;
    }
    return parse_transcript(text);
}

ParseResult parse_tower_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_tower_auto(os.str());
}

} // namespace capnorm
