#pragma once

#include "capnorm/pmodule.hpp"

#include <functional>
#include <string>

namespace capnorm {

// One layer K_n of a totally ramified cyclic p-tower.  `module` is present
// when the transcript carried the full (sigma-1) action rows; order-only
// layers keep just the group structure.  printed_norms are the transcript's
// "norm in Kn/K" vectors, one per (nontrivial) generator.
struct LayerRecord {
    unsigned long n = 1;
    std::vector<unsigned long> orders; // exponents of the layer group
    std::optional<PGroupModule> module;
    std::optional<std::vector<ExpVec>> printed_norms;
    std::optional<std::string> verdict_text; // preserved free text

    unsigned long order_v() const;

    bool operator==(const LayerRecord&) const = default;
};

struct TowerData {
    unsigned long p = 2;
    unsigned long N = 0; // tower height available (max layer index)
    std::optional<unsigned long> ell;
    std::optional<unsigned long> r;
    std::optional<std::vector<unsigned long>> base; // exponents of H_K
    std::optional<std::string> label;
    std::vector<LayerRecord> layers; // indices contiguous from 1

    std::optional<unsigned long> base_order_v() const;
    // v_p(#H_{K_n}) for n = 0..N (base first); base must be known.
    std::vector<unsigned long> order_sequence() const;
    const LayerRecord& layer(unsigned long n) const;

    bool operator==(const TowerData&) const = default;
};

// Smallest n0 with order(n0+1) == order(n0); absent if strictly increasing.
std::optional<unsigned long> stability_index(const TowerData& tower);

// Capitulation schedule implied by stability: the p^e-torsion of the base
// group dies at layer n0 + e.  Whole-group capitulation at n0 + e(K) when
// that is within the tower.
struct StabilityPrediction {
    unsigned long n0 = 0;
    unsigned long base_exponent = 0; // e(K)
    std::vector<std::pair<unsigned long, unsigned long>> schedule; // (e, n0 + e)
    std::optional<unsigned long> complete_at; // absent: beyond tower
};

std::optional<StabilityPrediction> predict_from_stability(const TowerData& tower);

struct NormCheckEntry {
    unsigned long layer = 0;
    unsigned long component = 0; // 1-based
    bool match = false;
    ExpVec recomputed;
    ExpVec printed;
};

struct NormCheckReport {
    std::vector<NormCheckEntry> entries;
    std::vector<unsigned long> skipped_layers; // no norms or no sigma data
    bool all_match() const;
};

NormCheckReport verify_norm_vectors(const TowerData& tower);

// Predicted v_p(#H^{G_n}) = hK + n(r-1) - norm_index.
unsigned long chevalley_herbrand(unsigned long hK, unsigned long r, unsigned long n,
                                 unsigned long norm_index);

// Order ledger of the capitulation exact sequence, all entries as exponents
// of p.  j_image is v_p(#J(H_K)) (hK minus the capitulation-kernel order
// when known); the left factor of the identity is taken as the naive sum
// j_image + ram_order, which overcounts when the two subgroups intersect —
// the signed residual exposes that.
struct GenusLedger {
    unsigned long hK = 0;
    unsigned long j_image = 0;
    unsigned long ram_order = 0;
    unsigned long unit_quotient = 0;
    unsigned long norm_index = 0;
    unsigned long n = 1;
    unsigned long r = 1;
};

struct LedgerCheck {
    bool pass = false;
    long residual = 0; // (j_image + ram + unit) - (hK + n(r-1))
};

LedgerCheck genus_ledger_check(const GenusLedger& ledger);

// Checks #X_{n+h} >= #X_n * #X_n[p^h] on valuations; a violation certifies
// that the no-capitulation hypotheses fail somewhere.
struct GrowthViolation {
    unsigned long n = 0;
    unsigned long h = 0;
    unsigned long actual_v = 0;
    unsigned long bound_v = 0;
};

std::vector<GrowthViolation> nocap_growth_check(
    const std::vector<unsigned long>& orders_v,
    const std::function<unsigned long(unsigned long n, unsigned long h)>& torsion_v);

// v_p(#X[p^h]) for the abelian type given by exponents.
unsigned long torsion_order_v(const std::vector<unsigned long>& structure, unsigned long h);

// Exact rational solve of v_n = lambda*n + mu*p^n + nu from the last three
// entries; residuals over the whole sequence.
struct IwasawaFit {
    mpq_class lambda, mu, nu;
    std::vector<mpq_class> residuals; // indexed by layer n = 0..
    bool integral = false;
    bool nonnegative = false;
    bool zero_residuals = false;
};

IwasawaFit iwasawa_fit(const std::vector<unsigned long>& orders_v, unsigned long p);

// true iff every layer's abelian type equals type(H_K) ⊕ (Z/p^n)^lambda.
struct GrandetJaulentResult {
    bool holds = false;
    std::optional<unsigned long> first_bad_layer;
};

GrandetJaulentResult grandet_jaulent_check(const TowerData& tower, unsigned long lambda);

// Verdict for layer n, resolved against the ingested base order: Complete
// when every nu-image vanishes, None when the witnesses generate a subgroup
// of order #H_K (transfer injective), Partial otherwise.  Falls back to the
// printed norm vectors (rule IngestedNorms) when sigma data is absent.
CapitulationVerdict layer_verdict(const TowerData& tower, unsigned long n);

// "Complete capitulation, m(K1)=2, e(K1)=2" (transcript phrasing); without m/e
// when the layer has no sigma data.
std::string verdict_line(const TowerData& tower, unsigned long n);

struct ReportOptions {
    bool machine = false;
    std::vector<std::pair<unsigned long, GenusLedger>> ledgers; // (layer, ledger)
};

std::string render_tower_report(const TowerData& tower, const ReportOptions& opts = {});

} // namespace capnorm
