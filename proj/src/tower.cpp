#include "capnorm/tower.hpp"

#include <algorithm>
#include <sstream>

namespace capnorm {

unsigned long LayerRecord::order_v() const {
    unsigned long s = 0;
    for (unsigned long nj : orders) s += nj;
    return s;
}

std::optional<unsigned long> TowerData::base_order_v() const {
    if (!base) return std::nullopt;
    unsigned long s = 0;
    for (unsigned long nj : *base) s += nj;
    return s;
}

std::vector<unsigned long> TowerData::order_sequence() const {
    if (!base)
        throw std::domain_error("order_sequence: base structure unknown");
    std::vector<unsigned long> seq;
    seq.push_back(*base_order_v());
    for (const LayerRecord& layer : layers) seq.push_back(layer.order_v());
    return seq;
}

const LayerRecord& TowerData::layer(unsigned long n) const {
    for (const LayerRecord& l : layers)
        if (l.n == n) return l;
    throw std::out_of_range("tower has no layer " + std::to_string(n));
}

std::optional<unsigned long> stability_index(const TowerData& tower) {
    const std::vector<unsigned long> seq = tower.order_sequence();
    if (seq.size() < 2)
        throw std::domain_error("stability_index needs at least two consecutive orders");
    for (unsigned long n = 0; n + 1 < seq.size(); ++n)
        if (seq[n + 1] == seq[n]) return n;
    return std::nullopt;
}

std::optional<StabilityPrediction> predict_from_stability(const TowerData& tower) {
    const auto n0 = stability_index(tower);
    if (!n0) return std::nullopt;
    StabilityPrediction pred;
    pred.n0 = *n0;
    pred.base_exponent = tower.base->empty() ? 0 : (*tower.base)[0];
    for (unsigned long e = 1; e <= pred.base_exponent; ++e)
        pred.schedule.emplace_back(e, pred.n0 + e);
    const unsigned long target = pred.n0 + pred.base_exponent;
    if (target <= tower.N) pred.complete_at = target;
    return pred;
}

bool NormCheckReport::all_match() const {
    return std::all_of(entries.begin(), entries.end(),
                       [](const NormCheckEntry& e) { return e.match; });
}

NormCheckReport verify_norm_vectors(const TowerData& tower) {
    NormCheckReport report;
    for (const LayerRecord& layer : tower.layers) {
        if (!layer.printed_norms || !layer.module) {
            report.skipped_layers.push_back(layer.n);
            continue;
        }
        const PGroupModule& mod = *layer.module;
        if (layer.printed_norms->size() != mod.rank())
            throw std::invalid_argument("verify_norm_vectors: printed norms do not match rank in layer " +
                                        std::to_string(layer.n));
        const ExpMat nu_mat = mat_geometric_sum(mod, matrix_of_sigma(mod), pow_ul(mod.p, mod.N));
        for (unsigned long j = 0; j < mod.rank(); ++j) {
            NormCheckEntry entry;
            entry.layer = layer.n;
            entry.component = j + 1;
            entry.recomputed = apply_endo(mod, mod.generator(j), nu_mat);
            entry.printed = mod.reduce((*layer.printed_norms)[j]);
            if (entry.printed.size() != mod.rank())
                throw std::invalid_argument("verify_norm_vectors: norm vector length mismatch in layer " +
                                            std::to_string(layer.n));
            entry.match = entry.recomputed == entry.printed;
            report.entries.push_back(std::move(entry));
        }
    }
    return report;
}

unsigned long chevalley_herbrand(unsigned long hK, unsigned long r, unsigned long n,
                                 unsigned long norm_index) {
    if (r < 1)
        throw std::domain_error("chevalley_herbrand requires r >= 1");
    const unsigned long ramified = n * (r - 1);
    if (norm_index > ramified)
        throw std::domain_error("chevalley_herbrand: norm_index exceeds n(r-1)");
    return hK + ramified - norm_index;
}

LedgerCheck genus_ledger_check(const GenusLedger& ledger) {
    if (ledger.r < 1)
        throw std::domain_error("genus_ledger_check requires r >= 1");
    LedgerCheck check;
    const long lhs = static_cast<long>(ledger.j_image + ledger.ram_order + ledger.unit_quotient);
    const long rhs = static_cast<long>(ledger.hK + ledger.n * (ledger.r - 1));
    check.residual = lhs - rhs;
    check.pass = check.residual == 0;
    return check;
}

std::vector<GrowthViolation> nocap_growth_check(
    const std::vector<unsigned long>& orders_v,
    const std::function<unsigned long(unsigned long, unsigned long)>& torsion_v) {
    if (orders_v.size() < 2)
        throw std::domain_error("nocap_growth_check needs at least two layers");
    std::vector<GrowthViolation> violations;
    for (unsigned long n = 0; n < orders_v.size(); ++n)
        for (unsigned long h = 1; n + h < orders_v.size(); ++h) {
            const unsigned long bound = orders_v[n] + torsion_v(n, h);
            if (orders_v[n + h] < bound)
                violations.push_back({n, h, orders_v[n + h], bound});
        }
    return violations;
}

unsigned long torsion_order_v(const std::vector<unsigned long>& structure, unsigned long h) {
    unsigned long s = 0;
    for (unsigned long nj : structure) s += std::min(nj, h);
    return s;
}

IwasawaFit iwasawa_fit(const std::vector<unsigned long>& orders_v, unsigned long p) {
    if (orders_v.size() < 3)
        throw std::domain_error("iwasawa_fit needs at least three layers");
    const std::size_t last = orders_v.size() - 1;
    // rows n = last-2, last-1, last of [n, p^n, 1] | v_n
    mpq_class a[3][4];
    for (int i = 0; i < 3; ++i) {
        const unsigned long n = static_cast<unsigned long>(last - 2 + i);
        mpz_class pn;
        mpz_ui_pow_ui(pn.get_mpz_t(), p, n);
        a[i][0] = static_cast<long>(n);
        a[i][1] = mpq_class(pn);
        a[i][2] = 1;
        a[i][3] = static_cast<long>(orders_v[n]);
    }
    // Gaussian elimination over Q
    for (int col = 0; col < 3; ++col) {
        int piv = -1;
        for (int i = col; i < 3; ++i)
            if (a[i][col] != 0) {
                piv = i;
                break;
            }
        if (piv < 0)
            throw std::domain_error("iwasawa_fit: singular system");
        for (int t = 0; t < 4; ++t) std::swap(a[col][t], a[piv][t]);
        const mpq_class d = a[col][col];
        for (int t = col; t < 4; ++t) a[col][t] /= d;
        for (int i = 0; i < 3; ++i) {
            if (i == col || a[i][col] == 0) continue;
            const mpq_class f = a[i][col];
            for (int t = col; t < 4; ++t) a[i][t] -= f * a[col][t];
        }
    }
    IwasawaFit fit;
    fit.lambda = a[0][3];
    fit.mu = a[1][3];
    fit.nu = a[2][3];
    fit.integral = fit.lambda.get_den() == 1 && fit.mu.get_den() == 1 && fit.nu.get_den() == 1;
    fit.nonnegative = fit.lambda >= 0 && fit.mu >= 0 && fit.nu >= 0;
    fit.zero_residuals = true;
    for (unsigned long n = 0; n < orders_v.size(); ++n) {
        mpz_class pn;
        mpz_ui_pow_ui(pn.get_mpz_t(), p, n);
        mpq_class predicted = fit.lambda * static_cast<long>(n) + fit.mu * mpq_class(pn) + fit.nu;
        mpq_class res = mpq_class(static_cast<long>(orders_v[n])) - predicted;
        if (res != 0) fit.zero_residuals = false;
        fit.residuals.push_back(res);
    }
    return fit;
}

GrandetJaulentResult grandet_jaulent_check(const TowerData& tower, unsigned long lambda) {
    if (!tower.base)
        throw std::domain_error("grandet_jaulent_check: base structure unknown");
    GrandetJaulentResult result;
    result.holds = true;
    for (const LayerRecord& layer : tower.layers) {
        std::vector<unsigned long> expected = *tower.base;
        for (unsigned long i = 0; i < lambda; ++i) expected.push_back(layer.n);
        std::sort(expected.begin(), expected.end(), std::greater<>());
        std::vector<unsigned long> actual = layer.orders;
        std::sort(actual.begin(), actual.end(), std::greater<>());
        if (expected != actual) {
            result.holds = false;
            result.first_bad_layer = layer.n;
            break;
        }
    }
    return result;
}

CapitulationVerdict layer_verdict(const TowerData& tower, unsigned long n) {
    const LayerRecord& layer = tower.layer(n);
    if (layer.module) return nu_image(*layer.module, tower.base_order_v());
    if (layer.printed_norms) {
        // no sigma data: judge from the ingested norm vectors alone
        PGroupModule shell;
        shell.p = tower.p;
        shell.orders = layer.orders;
        shell.N = std::max<unsigned long>(n, 1);
        CapitulationVerdict verdict;
        verdict.rule = VerdictRule::IngestedNorms;
        verdict.witnesses = *layer.printed_norms;
        verdict.witness_order_v = subgroup_order_v(shell, verdict.witnesses);
        verdict.kernel_order_v = shell.order_v() - verdict.witness_order_v;
        const bool all_zero =
            std::all_of(verdict.witnesses.begin(), verdict.witnesses.end(), is_zero_vec);
        const auto base = tower.base_order_v();
        if (all_zero)
            verdict.kind = CapitulationKind::Complete;
        else if (base && verdict.witness_order_v == *base)
            verdict.kind = CapitulationKind::None;
        else
            verdict.kind = CapitulationKind::Partial;
        return verdict;
    }
    throw std::domain_error("layer " + std::to_string(n) +
                            " has neither sigma data nor printed norms");
}

std::string verdict_line(const TowerData& tower, unsigned long n) {
    const LayerRecord& layer = tower.layer(n);
    const CapitulationVerdict verdict = layer_verdict(tower, n);
    std::ostringstream os;
    os << kind_word(verdict.kind) << " capitulation";
    if (layer.module) {
        const ModuleInvariants inv = invariants(*layer.module);
        os << ", m(K" << n << ")=" << inv.m << ", e(K" << n << ")=" << inv.e;
    } else {
        os << " in K" << n;
    }
    return os.str();
}

namespace {

std::string vec_str(const ExpVec& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s + "]";
}

std::string seq_str(const std::vector<unsigned long>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += " ";
        s += std::to_string(v[i]);
    }
    return s;
}

} // namespace

std::string render_tower_report(const TowerData& tower, const ReportOptions& opts) {
    std::ostringstream os;
    const char* sep = opts.machine ? " " : " = ";
    auto kv = [&](const std::string& key, const std::string& value) {
        os << key << sep << value << "\n";
    };

    if (!opts.machine) {
        os << "tower";
        if (tower.label) os << " " << *tower.label;
        os << " (p=" << tower.p;
        if (tower.ell) os << ", ell=" << *tower.ell;
        if (tower.r) os << ", r=" << *tower.r;
        os << ", layers=" << tower.N << ")\n";
    } else {
        kv("p", std::to_string(tower.p));
        if (tower.ell) kv("ell", std::to_string(*tower.ell));
        if (tower.r) kv("r", std::to_string(*tower.r));
        kv("layers", std::to_string(tower.N));
    }

    if (!tower.base) {
        std::vector<unsigned long> seq;
        for (const LayerRecord& layer : tower.layers) seq.push_back(layer.order_v());
        kv(opts.machine ? "orders_v" : "layer orders (v_p, base unknown)", seq_str(seq));
    }
    if (tower.base) {
        kv(opts.machine ? "base_type" : "base type", seq_str(*tower.base));
        kv(opts.machine ? "orders_v" : "layer orders (v_p)", seq_str(tower.order_sequence()));

        const auto n0 = stability_index(tower);
        kv("stability", n0 ? "from layer " + std::to_string(*n0) : "absent");
        if (const auto pred = predict_from_stability(tower)) {
            for (const auto& [e, at] : pred->schedule)
                kv(opts.machine ? "schedule" : "  torsion p^" + std::to_string(e),
                   opts.machine ? std::to_string(e) + " " + std::to_string(at)
                                : "capitulates by K" + std::to_string(at));
            kv(opts.machine ? "complete_at" : "  complete capitulation",
               pred->complete_at ? (opts.machine ? std::to_string(*pred->complete_at)
                                                 : "by K" + std::to_string(*pred->complete_at))
                                 : "beyond tower");
            if (!opts.machine)
                os << "  note: stability rule presumes class-group-like invariants"
                      " (surjective norms, total ramification)\n";
        }
    }

    for (const LayerRecord& layer : tower.layers) {
        const std::string key = "K" + std::to_string(layer.n);
        if (!layer.module && !layer.printed_norms) {
            kv(key, "order v=" + std::to_string(layer.order_v()) + " (structure only)");
            continue;
        }
        const CapitulationVerdict verdict = layer_verdict(tower, layer.n);
        std::string line = verdict_line(tower, layer.n);
        line += opts.machine ? "" : " [rule: " + std::string(rule_name(verdict.rule)) +
                                        ", kernel v=" + std::to_string(verdict.kernel_order_v) + "]";
        kv(key, line);
        if (layer.module) {
            const auto crit = check_sufficient_criterion(*layer.module);
            kv(opts.machine ? key + "_smooth" : "  smooth criterion",
               crit ? "fires (capitulation certain)" : "silent");
        }
    }

    const NormCheckReport norms = verify_norm_vectors(tower);
    if (!norms.entries.empty() || !norms.skipped_layers.empty()) {
        unsigned long ok = 0;
        for (const auto& e : norms.entries) ok += e.match;
        std::string summary = std::to_string(ok) + "/" + std::to_string(norms.entries.size()) +
                              " match";
        if (!norms.skipped_layers.empty()) {
            summary += "; skipped layers:";
            for (unsigned long n : norms.skipped_layers) summary += " " + std::to_string(n);
        }
        kv(opts.machine ? "norm_check" : "norm cross-check", summary);
        for (const auto& e : norms.entries)
            if (!e.match)
                kv(opts.machine ? "norm_mismatch" : "  MISMATCH",
                   "layer " + std::to_string(e.layer) + " component " + std::to_string(e.component) +
                       " recomputed " + vec_str(e.recomputed) + " printed " + vec_str(e.printed));
    }

    if (tower.base) {
        const std::vector<unsigned long> seq = tower.order_sequence();
        std::vector<std::vector<unsigned long>> structures;
        structures.push_back(*tower.base);
        for (const LayerRecord& layer : tower.layers) structures.push_back(layer.orders);
        const auto violations = nocap_growth_check(
            seq, [&](unsigned long n, unsigned long h) { return torsion_order_v(structures[n], h); });
        kv(opts.machine ? "growth_check" : "growth check",
           violations.empty() ? "no violations"
                              : std::to_string(violations.size()) +
                                    " violation(s): no-capitulation hypotheses fail");
        for (const auto& v : violations)
            kv(opts.machine ? "growth_violation" : "  violation",
               "n=" + std::to_string(v.n) + " h=" + std::to_string(v.h) + " v=" +
                   std::to_string(v.actual_v) + " < bound " + std::to_string(v.bound_v));

        if (seq.size() >= 3) {
            const IwasawaFit fit = iwasawa_fit(seq, tower.p);
            std::string s = "lambda=" + fit.lambda.get_str() + " mu=" + fit.mu.get_str() +
                            " nu=" + fit.nu.get_str();
            if (!fit.integral) s += " (non-integral)";
            if (!fit.nonnegative) s += " (negative parameter)";
            s += fit.zero_residuals ? "; residuals all zero" : "; nonzero residuals:";
            if (!fit.zero_residuals)
                for (std::size_t n = 0; n < fit.residuals.size(); ++n)
                    if (fit.residuals[n] != 0)
                        s += " n=" + std::to_string(n) + ":" + fit.residuals[n].get_str();
            kv(opts.machine ? "iwasawa_fit" : "iwasawa fit (last 3 layers)", s);
            if (fit.mu == 0 && fit.integral && fit.nonnegative) {
                const unsigned long lambda = fit.lambda.get_num().get_ui();
                const GrandetJaulentResult gj = grandet_jaulent_check(tower, lambda);
                kv(opts.machine ? "structure_law" : "structure law (mu=0)",
                   gj.holds ? "every layer is type(H_K) + (Z/p^n)^lambda"
                            : "fails at layer " + std::to_string(*gj.first_bad_layer));
            }
        }
    }

    for (const auto& [layer_n, ledger] : opts.ledgers) {
        const LedgerCheck check = genus_ledger_check(ledger);
        std::string s = check.pass ? "pass" : "FAIL";
        s += " residual=" + std::to_string(check.residual);
        if (!check.pass && !opts.machine)
            s += " (naive j+ram sum may overcount an intersection)";
        kv(opts.machine ? "ledger_" + std::to_string(layer_n)
                        : "genus ledger K" + std::to_string(layer_n),
           s);
    }

    return os.str();
}

} // namespace capnorm
