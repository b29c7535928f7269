// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Each criterion carries its runtime budget.

#include "capnorm/heuristics.hpp"
#include "capnorm/ingest.hpp"
#include "capnorm/normpoly.hpp"
#include "capnorm/tower.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <regex>
#include <tuple>

#include "testutil.hpp"

using namespace capnorm;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void criterion(int number, const std::string& name, double budget_seconds,
               const std::function<void()>& body) {
    const auto start = Clock::now();
    std::string error;
    try {
        body();
    } catch (const std::exception& e) {
        error = e.what();
    }
    const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    if (error.empty() && elapsed > budget_seconds)
        error = "runtime " + std::to_string(elapsed) + "s exceeds budget";
    std::printf("%s  %d  %-34s  (%.2fs)%s%s\n", error.empty() ? "PASS" : "FAIL", number,
                name.c_str(), elapsed, error.empty() ? "" : "  -- ", error.c_str());
    if (!error.empty()) ++failures;
}

void require(bool cond, const std::string& what) {
    if (!cond) throw std::runtime_error(what);
}

// ---- criterion 1 ------------------------------------------------------

void golden_nu() {
    const std::vector<std::pair<std::pair<unsigned long, unsigned long>, std::string>> ps = {
        {{2, 1}, "x+p"},
        {{3, 1}, "x^2+p*x+p"},
        {{2, 2}, "x^3+p^2*x^2+3*p*x+p^2"},
        {{3, 2}, "x^8+p^2*x^7+4*p^2*x^6+28*p*x^5+14*p^2*x^4+14*p^2*x^3+28*p*x^2+4*p^2*x+p^2"},
        {{2, 3}, "x^7+p^3*x^6+7*p^2*x^5+7*p^3*x^4+35*p*x^3+7*p^3*x^2+7*p^2*x+p^3"},
        {{2, 4},
         "x^15+p^4*x^14+15*p^3*x^13+35*p^4*x^12+455*p^2*x^11+273*p^4*x^10+1001*p^3*x^9"
         "+715*p^4*x^8+6435*p*x^7+715*p^4*x^6+1001*p^3*x^5+273*p^4*x^4+455*p^2*x^3"
         "+35*p^4*x^2+15*p^3*x+p^4"},
    };
    for (const auto& [pn, expected] : ps) {
        const NormPolynomial nu = build_nu(pn.first, pn.second);
        require(format_nu(nu) == expected,
                "P mismatch for p=" + std::to_string(pn.first) + " N=" + std::to_string(pn.second));
        // every k-decomposition reconstructs and carries the stated f(k)
        for (unsigned long k = 1; k < nu.order(); ++k) {
            const NuDecomposition d = decompose(nu, k);
            require(d.f_k == f_step(k, pn.second, pn.first), "f(k) mismatch");
        }
    }
    require(format_decomposition(decompose(build_nu(2, 1), 1)) == "P=x^1.A+p^1.B\nA=1\nB=1\n",
            "(2,1) k=1 block");
    require(format_decomposition(decompose(build_nu(3, 1), 1)) == "P=x^1.A+p^1.B\nA=x+p\nB=1\n",
            "(3,1) k=1 block");
    require(format_decomposition(decompose(build_nu(3, 1), 2)) == "P=x^2.A+p^1.B\nA=1\nB=x+1\n",
            "(3,1) k=2 block");
    require(format_nu_with_decompositions(build_nu(2, 2)) ==
                "P=x^3+p^2*x^2+3*p*x+p^2\n"
                "\nP=x^1.A+p^2.B\nA=x^2+p^2*x+3*p\nB=1\n"
                "\nP=x^2.A+p^1.B\nA=x+p^2\nB=3*x+p\n"
                "\nP=x^3.A+p^1.B\nA=1\nB=p*x^2+3*x+p\n",
            "(2,2) full block");
}

// ---- criterion 2 ------------------------------------------------------

void valuation_laws() {
    for (unsigned long p : {2UL, 3UL, 5UL}) {
        for (unsigned long N = 1; N <= 6; ++N) {
            const unsigned long pN = pow_ul(p, N);
            unsigned long running_min = binomial_valuation(pN, 1, p);
            for (unsigned long k = 1; k < pN; ++k) {
                const unsigned long s = floor_log(k, p);
                const unsigned long v = binomial_valuation(pN, k, p);
                require(v >= N - s, "lower bound fails");
                if (k == pow_ul(p, s)) require(v == N - s, "equality at k = p^s fails");
                running_min = std::min(running_min, v);
                require(f_step(k, N, p) == running_min, "f_step vs running-min oracle");
            }
        }
    }
}

// ---- criterion 3 ------------------------------------------------------

void smooth_annihilation() {
    for (unsigned long p : {2UL, 3UL, 5UL}) {
        for (unsigned long N = 1; N <= 3; ++N) {
            const NormPolynomial nu = build_nu(p, N);
            const unsigned long pN = pow_ul(p, N);
            for (unsigned long m = 1; m < pN; ++m)
                for (unsigned long e = 1; e <= N; ++e)
                    if (is_smooth(m, e, N, p))
                        require(is_zero_poly(reduce_mod_ideal(nu, m, e)),
                                "smooth pair does not annihilate");
            bool witness = false;
            for (unsigned long s = 0; s < N && !witness; ++s) {
                const unsigned long m = pow_ul(p, s);
                const unsigned long e = N - s + 1;
                witness = !is_smooth(m, e, N, p) && !is_zero_poly(reduce_mod_ideal(nu, m, e));
            }
            require(witness, "no non-smooth witness with nonzero residue");
        }
    }
}

// ---- criterion 4 ------------------------------------------------------

struct ExpectedVerdict {
    unsigned long layer;
    CapitulationKind kind;
    unsigned long m;
    unsigned long e;
};

const std::vector<std::pair<std::string, std::vector<ExpectedVerdict>>> kVerdicts = {
    {"f703_ell97.txt",
     {{1, CapitulationKind::None, 2, 1}, {2, CapitulationKind::Complete, 3, 2}}},
    {"f31923_ell257.txt",
     {{1, CapitulationKind::Partial, 2, 1}, {2, CapitulationKind::Complete, 3, 2}}},
    {"x2m32009_ell19.txt",
     {{1, CapitulationKind::Partial, 2, 2}, {2, CapitulationKind::Complete, 2, 2}}},
    {"f1951_ell17.txt",
     {{1, CapitulationKind::Complete, 2, 2},
      {2, CapitulationKind::Complete, 2, 2},
      {3, CapitulationKind::Complete, 3, 3}}},
    {"f703_ell17.txt",
     {{1, CapitulationKind::None, 2, 2},
      {2, CapitulationKind::None, 3, 3},
      {3, CapitulationKind::None, 4, 4}}},
    {"f1777_ell17.txt",
     {{1, CapitulationKind::None, 1, 3},
      {2, CapitulationKind::Partial, 1, 3},
      {3, CapitulationKind::Complete, 1, 3}}},
    {"x2m142_ell13.txt", {{1, CapitulationKind::Complete, 1, 1}}},
    {"x2m142_ell1123.txt", {{1, CapitulationKind::Complete, 2, 1}}},
    {"x2m142_ell208057.txt", {{1, CapitulationKind::Complete, 2, 1}}},
    {"x2m401_ell1231.txt", {{1, CapitulationKind::Complete, 1, 1}}},
    {"x2m401_ell1741.txt", {{1, CapitulationKind::Complete, 2, 1}}},
    {"x2m401_ell4871.txt", {{1, CapitulationKind::Complete, 3, 1}}},
    {"f20887_ell17.txt",
     {{1, CapitulationKind::Partial, 1, 3}, {2, CapitulationKind::Partial, 2, 4}}},
};

void fixture_verdicts() {
    const std::regex triple_re(R"((Complete|Incomplete|No) capitulation, m\(K\d+\)=(\d+), e\(K\d+\)=(\d+))");
    std::size_t fixtures = 0;
    for (const auto& [name, expectations] : kVerdicts) {
        const TowerData tower = testutil::load_fixture(name);
        ++fixtures;
        for (const ExpectedVerdict& expected : expectations) {
            const CapitulationVerdict verdict = layer_verdict(tower, expected.layer);
            const ModuleInvariants inv = invariants(*tower.layer(expected.layer).module);
            require(verdict.kind == expected.kind,
                    name + " K" + std::to_string(expected.layer) + ": verdict kind");
            require(inv.m == expected.m, name + " K" + std::to_string(expected.layer) + ": m");
            require(inv.e == expected.e, name + " K" + std::to_string(expected.layer) + ": e");
            const std::string n_str = std::to_string(expected.layer);
            const std::string want = std::string(kind_word(expected.kind)) +
                                     " capitulation, m(K" + n_str + ")=" +
                                     std::to_string(expected.m) + ", e(K" + n_str + ")=" +
                                     std::to_string(expected.e);
            require(verdict_line(tower, expected.layer) == want,
                    name + " K" + n_str + ": verdict line text");
            // where the fixture itself prints a verdict line, its triple must agree
            const auto& text = tower.layer(expected.layer).verdict_text;
            if (text) {
                std::smatch got;
                require(std::regex_search(*text, got, triple_re),
                        name + ": unparseable verdict line '" + *text + "'");
                require(got[1].str() == kind_word(expected.kind), name + ": printed kind");
                require(std::stoul(got[2].str()) == expected.m, name + ": printed m");
                require(std::stoul(got[3].str()) == expected.e, name + ": printed e");
            }
        }
    }
    require(fixtures >= 12, "fewer than 12 fixtures");
}

// ---- criterion 5 ------------------------------------------------------

void norm_cross_validation() {
    for (const auto& [name, expectations] : kVerdicts) {
        (void)expectations;
        const TowerData tower = testutil::load_fixture(name);
        const NormCheckReport report = verify_norm_vectors(tower);
        require(!report.entries.empty(), name + ": no norms checked");
        require(report.all_match(), name + ": recomputed norm differs from printed");
    }
    // spot value: f=31923 layer 1 component 3
    const TowerData t = testutil::load_fixture("f31923_ell257.txt");
    const NormCheckReport report = verify_norm_vectors(t);
    bool seen = false;
    for (const auto& e : report.entries)
        if (e.layer == 1 && e.component == 3) {
            require(e.recomputed == ExpVec{0, 1, 0, 0, 1, 0}, "component 3 value");
            seen = true;
        }
    require(seen, "component 3 not present");
}

// ---- criteria 6 and 7 -------------------------------------------------

void oracle_equivalence() {
    std::mt19937_64 rng(600613);
    int done = 0;
    while (done < 500) {
        const unsigned long p = std::vector<unsigned long>{2, 2, 3, 5}[rng() % 4];
        const unsigned long budget = p == 2 ? 12 : p == 3 ? 7 : 5;
        const PGroupModule mod = testutil::random_module(rng, p, budget);
        const Filtration a = filtration(mod, KernelMethod::Enumerate);
        const Filtration b = filtration(mod, KernelMethod::Echelon);
        require(a.m == b.m && a.subgroup_orders == b.subgroup_orders &&
                    a.quotient_orders == b.quotient_orders,
                "filtration routes disagree");
        const CapitulationVerdict u = nu_image(mod, {}, NuImageMethod::GeometricSum);
        const CapitulationVerdict v = nu_image(mod, {}, NuImageMethod::PolynomialHorner);
        require(u.witnesses == v.witnesses && u.kind == v.kind, "nu routes disagree");
        ++done;
    }
}

void criterion_soundness() {
    std::mt19937_64 rng(700717);
    int done = 0;
    while (done < 500) {
        const unsigned long p = std::vector<unsigned long>{2, 2, 3, 5}[rng() % 4];
        const unsigned long budget = p == 2 ? 10 : p == 3 ? 6 : 4;
        const PGroupModule mod = testutil::random_smooth_module(rng, p, budget);
        require(check_sufficient_criterion(mod).has_value(), "module not smooth");
        require(nu_image(mod).kind == CapitulationKind::Complete,
                "smooth module with nontrivial nu image");
        ++done;
    }
}

// ---- criterion 8 ------------------------------------------------------

void tower_diagnostics() {
    // x^2+199, ell=19, p=3: growth bound met with equality
    const TowerData t199 = testutil::load_fixture("x2p199_ell19.txt");
    const std::vector<unsigned long> seq = t199.order_sequence();
    require(seq == std::vector<unsigned long>{2, 3, 4}, "x2+199 orders");
    std::vector<std::vector<unsigned long>> structures = {*t199.base};
    for (const LayerRecord& l : t199.layers) structures.push_back(l.orders);
    const auto torsion = [&](unsigned long n, unsigned long h) {
        return torsion_order_v(structures[n], h);
    };
    require(nocap_growth_check(seq, torsion).empty(), "growth violation on x2+199");
    require(seq[1] == seq[0] + torsion(0, 1), "equality #H_{K_1} = #H_K * #H_K[3]");
    require(seq[2] == seq[1] + torsion(1, 1), "equality at the next layer");

    // exact recovery on synthetic sequences
    std::mt19937_64 rng(808080);
    for (int trial = 0; trial < 50; ++trial) {
        const unsigned long p = (trial % 2) ? 2 : 3;
        const unsigned long l = rng() % 4, m = rng() % 3, v = rng() % 5;
        std::vector<unsigned long> orders;
        for (unsigned long n = 0; n < 4 + rng() % 3; ++n)
            orders.push_back(l * n + m * pow_ul(p, n) + v);
        const IwasawaFit fit = iwasawa_fit(orders, p);
        require(fit.lambda == static_cast<long>(l) && fit.mu == static_cast<long>(m) &&
                    fit.nu == static_cast<long>(v) && fit.zero_residuals,
                "synthetic iwasawa recovery");
    }

    // f=703, ell=17 order sequence: lambda=2, mu=0, nu=2, zero residuals
    const TowerData t703 = testutil::load_fixture("f703_ell17.txt");
    const IwasawaFit fit = iwasawa_fit(t703.order_sequence(), 2);
    require(fit.lambda == 2 && fit.mu == 0 && fit.nu == 2, "f703 iwasawa parameters");
    require(fit.zero_residuals, "f703 residuals");
}

// ---- criterion 9 ------------------------------------------------------

void simulation_reproducibility() {
    SimulationConfig c;
    c.p = 2;
    c.N = 2;
    c.r = 2;
    c.hK = 1;
    c.trials = 100000;
    c.seed = 20260101;

    const SimulationReport a = simulate(c);
    const SimulationReport b = simulate(c);
    require(render_report(a) == render_report(b), "same seed, different report");

    const SimulationReport merged =
        merge(simulate_range(c, 0, 33333), simulate_range(c, 33333, 100000));
    require(render_report(merged) == render_report(a), "partition merge law");

    SimulationConfig trivial = c;
    trivial.hK = 0;
    trivial.trials = 100000;
    const SimulationReport t = simulate(trivial);
    require(t.capitulation_frequency() == 1.0, "hK=0 must capitulate always");
    require(t.m_distribution.at(0) == t.trials, "hK=0 m distribution");

    // statistical check at 3 sigma: closed-form collection law for the CDF of m
    for (unsigned long i = 1; i <= 8; ++i) {
        unsigned long long count = 0;
        for (const auto& [m, n] : a.m_distribution)
            if (m <= i) count += n;
        const double empirical = static_cast<double>(count) / static_cast<double>(a.trials);
        const double class_done = 1.0 - std::pow(0.5, i);
        const double norm_done = 1.0 - 2.0 * std::pow(0.75, i) + std::pow(0.5, i);
        const double expected = class_done * norm_done;
        const double sigma = std::sqrt(expected * (1.0 - expected) / a.trials);
        require(std::abs(empirical - expected) <= 3.0 * sigma + 1e-12,
                "CDF of m off by more than 3 sigma at i=" + std::to_string(i));
    }
}

} // namespace

int main() {
    criterion(1, "nu-decomposition golden outputs", 1.0, golden_nu);
    criterion(2, "binomial valuation laws", 5.0, valuation_laws);
    criterion(3, "smooth annihilation + witnesses", 5.0, smooth_annihilation);
    criterion(4, "fixture verdict reproduction", 10.0, fixture_verdicts);
    criterion(5, "norm cross-validation", 10.0, norm_cross_validation);
    criterion(6, "kernel/nu oracle equivalence x500", 60.0, oracle_equivalence);
    criterion(7, "smooth criterion soundness x500", 60.0, criterion_soundness);
    criterion(8, "tower growth + iwasawa fit", 5.0, tower_diagnostics);
    criterion(9, "simulation reproducibility", 60.0, simulation_reproducibility);
    if (failures) {
        std::printf("%d criterion(s) FAILED\n", failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
