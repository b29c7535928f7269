#pragma once

#include "capnorm/padic.hpp"

#include <string>
#include <vector>

namespace capnorm {

// The algebraic norm of a cyclic extension of degree p^N, written as a
// polynomial in x = sigma - 1:  nu = sum_{i=1}^{p^N} C(p^N, i) x^{i-1}.
// coeffs[i] is the coefficient of x^i, i.e. C(p^N, i+1), kept in unit * p^v
// form (units are never reduced mod p).
struct NormPolynomial {
    unsigned long p = 2;
    unsigned long N = 1;
    std::vector<ValuedInteger> coeffs;

    unsigned long order() const { return coeffs.size(); } // p^N
    unsigned long degree() const { return coeffs.size() - 1; }

    bool operator==(const NormPolynomial&) const = default;
};

// Coefficient-count guard: p^N <= 2^16.
NormPolynomial build_nu(unsigned long p, unsigned long N);

// nu = x^k * A + p^{f_k} * B with A monic of degree p^N - 1 - k, deg B < k,
// and at least one coefficient of B a p-unit.
struct NuDecomposition {
    unsigned long k = 1;
    unsigned long f_k = 1;
    std::vector<ValuedInteger> A;
    std::vector<ValuedInteger> B;
};

NuDecomposition decompose(const NormPolynomial& nu, unsigned long k);

// Truncate nu below degree m and reduce coefficients into [0, p^e).
std::vector<mpz_class> reduce_mod_ideal(const NormPolynomial& nu, unsigned long m, unsigned long e);
bool is_zero_poly(const std::vector<mpz_class>& coeffs);

// Definition of smooth complexity: m = 0, or m <= p^N - 1 with
// e <= N - floor(log_p m).  m = 0 or e = 0 denotes the trivial module.
bool is_smooth(unsigned long m, unsigned long e, unsigned long N, unsigned long p);

// Text rendering in the exact transcript shape:
// terms by decreasing degree, coefficients as "c*p^v" with unit factors
// omitted, e.g. "x^3+p^2*x^2+3*p*x+p^2".
std::string format_poly(const std::vector<ValuedInteger>& coeffs, unsigned long p);
std::string format_nu(const NormPolynomial& nu);

// Three lines: "P=x^k.A+p^w.B", "A=...", "B=...".
std::string format_decomposition(const NuDecomposition& d);

// "P=<poly>" followed by one blank-line-separated block per k in [1, p^N-1].
std::string format_nu_with_decompositions(const NormPolynomial& nu);

} // namespace capnorm
