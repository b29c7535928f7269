#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>

namespace capnorm {

// Exact p-adic valuation arithmetic on arbitrary-precision integers.
// All functions validate p by trial division (desk-scale primes only)
// and throw std::invalid_argument / std::domain_error on bad input.

bool is_prime(unsigned long p);
void require_prime(unsigned long p);

// Largest v with p^v | n.  n = 0 is rejected (valuation undefined).
unsigned long valuation(const mpz_class& n, unsigned long p);
unsigned long valuation(unsigned long n, unsigned long p);

// Sum of the base-p digits of m >= 0.
unsigned long digit_sum(const mpz_class& m, unsigned long p);

// v(m!) by the Legendre digit formula (m - S(m)) / (p - 1); m! is never formed.
unsigned long factorial_valuation(const mpz_class& m, unsigned long p);
unsigned long factorial_valuation(unsigned long m, unsigned long p);

// v(C(n, k)) for 0 <= k <= n, via the factorial valuations.
unsigned long binomial_valuation(unsigned long n, unsigned long k, unsigned long p);

// C(n, k), exact multiplicative recurrence.
mpz_class binomial(unsigned long n, unsigned long k);

// floor(log_p m) for m >= 1.
unsigned long floor_log(unsigned long m, unsigned long p);

// p^e as unsigned long; throws std::overflow_error past 2^62.
unsigned long pow_ul(unsigned long p, unsigned long e);

// f(k) = N - floor(log_p k) for k in [1, p^N - 1]; equals the minimum of
// v(C(p^N, j)) over j in [1, k].
unsigned long f_step(unsigned long k, unsigned long N, unsigned long p);

// An integer recorded as unit * p^valuation with p not dividing unit.
// unit == 0 is the distinguished Zero value (valuation 0 by convention).
struct ValuedInteger {
    unsigned long valuation = 0;
    mpz_class unit = 0;

    static ValuedInteger zero() { return {}; }
    static ValuedInteger from_integer(const mpz_class& n, unsigned long p);

    bool is_zero() const { return unit == 0; }
    mpz_class reconstruct(unsigned long p) const;

    bool operator==(const ValuedInteger&) const = default;
};

} // namespace capnorm
