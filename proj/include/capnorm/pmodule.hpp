#pragma once

#include "capnorm/normpoly.hpp"

#include <optional>
#include <vector>

namespace capnorm {

using Exp = std::uint64_t;
using ExpVec = std::vector<Exp>;
using ExpMat = std::vector<ExpVec>;

// Finite abelian p-group H = ⊕_j Z/p^{n_j} with an automorphism sigma of
// order dividing p^N.  `orders` holds the exponents n_1 >= n_2 >= ... >= n_r;
// sigma_delta is the matrix D of sigma - 1: row j is the exponent vector of
// h_j^{sigma-1}, entry in column t reduced mod p^{n_t}.  Elements are row
// vectors of exponents; the action is vector * matrix with per-column
// reduction.
struct PGroupModule {
    unsigned long p = 2;
    std::vector<unsigned long> orders;
    ExpMat sigma_delta;
    unsigned long N = 1;

    unsigned long rank() const { return orders.size(); }
    unsigned long order_v() const; // v_p(#H)
    bool trivial() const { return orders.empty(); }

    Exp column_modulus(unsigned long t) const { return pow_ul(p, orders[t]); }
    ExpVec reduce(ExpVec v) const;
    ExpVec generator(unsigned long j) const; // h_j as exponent vector (0-based)

    bool operator==(const PGroupModule&) const = default;
};

// Validates dimensions, sorting, entry ranges, the homomorphism condition
// v_p(D[j][t]) >= n_t - n_j, invertibility of M = I + D mod p, and
// M^{p^N} == I.  Throws std::invalid_argument on violation.
PGroupModule make_module(unsigned long p, std::vector<unsigned long> orders,
                         ExpMat sigma_delta, unsigned long N);

ExpMat identity_matrix(const PGroupModule& mod);
ExpMat matrix_of_sigma(const PGroupModule& mod); // M = I + D
ExpMat mat_mul(const PGroupModule& mod, const ExpMat& a, const ExpMat& b);
ExpMat mat_add(const PGroupModule& mod, const ExpMat& a, const ExpMat& b);
ExpMat mat_pow(const PGroupModule& mod, ExpMat a, unsigned long long e);
// I + M + ... + M^{t-1}
ExpMat mat_geometric_sum(const PGroupModule& mod, const ExpMat& m, unsigned long long t);

ExpVec apply_endo(const PGroupModule& mod, const ExpVec& v, const ExpMat& a);

// Evaluates an integer polynomial in x = sigma - 1 at the element (Horner
// over composition with D); poly[i] is the coefficient of x^i.
ExpVec apply_poly(const PGroupModule& mod, const ExpVec& element,
                  const std::vector<mpz_class>& poly);

enum class KernelMethod { Auto, Enumerate, Echelon };

// v_p of the order of the subgroup generated by the given elements.
unsigned long subgroup_order_v(const PGroupModule& mod,
                               const std::vector<ExpVec>& gens,
                               KernelMethod method = KernelMethod::Auto);

// v_p(#ker) of the endomorphism given by matrix a.
unsigned long kernel_order_v(const PGroupModule& mod, const ExpMat& a,
                             KernelMethod method = KernelMethod::Auto);

// The chain H^i = ker((sigma-1)^i); orders recorded as exponents of p.
struct Filtration {
    std::vector<unsigned long> subgroup_orders; // v_p(#H^i), i = 0..m
    std::vector<unsigned long> quotient_orders; // v_p(#(H^{i+1}/H^i)), i = 0..m-1
    unsigned long m = 0;
};

Filtration filtration(const PGroupModule& mod, KernelMethod method = KernelMethod::Auto);

struct ModuleInvariants {
    unsigned long order_v = 0; // v_p(#H)
    unsigned long p_rank = 0;
    unsigned long e = 0;       // p^e = exponent of H
    unsigned long m = 0;       // filtration length
    std::optional<unsigned long> s; // floor(log_p m) for m >= 1
};

ModuleInvariants invariants(const PGroupModule& mod, KernelMethod method = KernelMethod::Auto);

enum class CapitulationKind { Complete, Partial, None };
enum class VerdictRule { NuAnnihilation, SmoothCriterion, StabilityCriterion, IngestedNorms };

const char* kind_word(CapitulationKind k); // "Complete" / "Incomplete" / "No"
const char* rule_name(VerdictRule r);

struct CapitulationVerdict {
    CapitulationKind kind = CapitulationKind::Complete;
    unsigned long kernel_order_v = 0;         // v_p(#ker nu)
    std::vector<ExpVec> witnesses;            // nu(h_j) per generator
    VerdictRule rule = VerdictRule::NuAnnihilation;
    unsigned long witness_order_v = 0;        // v_p of the subgroup the witnesses generate
};

enum class NuImageMethod { Auto, GeometricSum, PolynomialHorner };

// nu(h_j) for every generator via sum_{i=0}^{p^N-1} M^i (or the polynomial
// route).  Complete iff all witnesses vanish.  With base_order_v supplied
// (v_p(#H_K) from ingested data), a witness subgroup of exactly that order
// means the transfer is injective: kind None.  Otherwise nonzero witnesses
// give Partial with kernel_order_v surfaced.
CapitulationVerdict nu_image(const PGroupModule& mod,
                             std::optional<unsigned long> base_order_v = {},
                             NuImageMethod method = NuImageMethod::Auto);

// Complete via the smooth-complexity test, or absent (criterion silent;
// never a proof of non-capitulation).
std::optional<CapitulationVerdict> check_sufficient_criterion(const PGroupModule& mod);

// Smooth test on the element's personal (m, e), then direct nu application.
bool element_capitulates(const PGroupModule& mod, const ExpVec& element);

// H / H^{p^t}: orders min(n_j, t), trivial generators dropped.
PGroupModule quotient_mod_pt(const PGroupModule& mod, unsigned long t);

// v_p of the order of an element; 0 for the zero vector.
unsigned long element_order_v(const PGroupModule& mod, const ExpVec& v);

bool is_zero_vec(const ExpVec& v);

} // namespace capnorm
