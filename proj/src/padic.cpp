#include "capnorm/padic.hpp"

namespace capnorm {

bool is_prime(unsigned long p) {
    if (p < 2) return false;
    if (p < 4) return true;
    if (p % 2 == 0) return false;
    for (unsigned long d = 3; d * d <= p; d += 2)
        if (p % d == 0) return false;
    return true;
}

void require_prime(unsigned long p) {
    if (!is_prime(p))
        throw std::invalid_argument("p must be a prime >= 2, got " + std::to_string(p));
}

unsigned long valuation(const mpz_class& n, unsigned long p) {
    require_prime(p);
    if (n == 0)
        throw std::domain_error("valuation(0, p) is undefined");
    mpz_class rest;
    const mpz_class pz = static_cast<unsigned long>(p);
    return mpz_remove(rest.get_mpz_t(), n.get_mpz_t(), pz.get_mpz_t());
}

unsigned long valuation(unsigned long n, unsigned long p) {
    return valuation(mpz_class(n), p);
}

unsigned long digit_sum(const mpz_class& m, unsigned long p) {
    require_prime(p);
    if (m < 0)
        throw std::domain_error("digit_sum requires m >= 0");
    mpz_class rest = m;
    unsigned long sum = 0;
    while (rest > 0) {
        sum += mpz_fdiv_ui(rest.get_mpz_t(), p);
        mpz_fdiv_q_ui(rest.get_mpz_t(), rest.get_mpz_t(), p);
    }
    return sum;
}

unsigned long factorial_valuation(const mpz_class& m, unsigned long p) {
    require_prime(p);
    if (m < 0)
        throw std::domain_error("factorial_valuation requires m >= 0");
    mpz_class v = (m - static_cast<long>(digit_sum(m, p))) / static_cast<long>(p - 1);
    return v.get_ui();
}

unsigned long factorial_valuation(unsigned long m, unsigned long p) {
    return factorial_valuation(mpz_class(m), p);
}

unsigned long binomial_valuation(unsigned long n, unsigned long k, unsigned long p) {
    require_prime(p);
    if (n < 1 || k > n)
        throw std::domain_error("binomial_valuation requires 0 <= k <= n, n >= 1");
    return factorial_valuation(n, p) - factorial_valuation(k, p) - factorial_valuation(n - k, p);
}

mpz_class binomial(unsigned long n, unsigned long k) {
    if (k > n)
        throw std::domain_error("binomial requires k <= n");
    if (k > n - k) k = n - k;
    mpz_class c = 1;
    for (unsigned long i = 1; i <= k; ++i) {
        c *= n - k + i;
        mpz_divexact_ui(c.get_mpz_t(), c.get_mpz_t(), i);
    }
    return c;
}

unsigned long floor_log(unsigned long m, unsigned long p) {
    require_prime(p);
    if (m < 1)
        throw std::domain_error("floor_log requires m >= 1");
    unsigned long s = 0;
    while (m >= p) {
        m /= p;
        ++s;
    }
    return s;
}

unsigned long pow_ul(unsigned long p, unsigned long e) {
    unsigned long r = 1;
    for (unsigned long i = 0; i < e; ++i) {
        if (r > (1UL << 62) / p)
            throw std::overflow_error("pow_ul overflow");
        r *= p;
    }
    return r;
}

unsigned long f_step(unsigned long k, unsigned long N, unsigned long p) {
    require_prime(p);
    if (N < 1)
        throw std::domain_error("f_step requires N >= 1");
    const unsigned long pN = pow_ul(p, N);
    if (k < 1 || k > pN - 1)
        throw std::domain_error("f_step requires k in [1, p^N - 1]");
    return N - floor_log(k, p);
}

ValuedInteger ValuedInteger::from_integer(const mpz_class& n, unsigned long p) {
    require_prime(p);
    if (n == 0) return zero();
    ValuedInteger r;
    const mpz_class pz = static_cast<unsigned long>(p);
    r.valuation = mpz_remove(r.unit.get_mpz_t(), n.get_mpz_t(), pz.get_mpz_t());
    return r;
}

mpz_class ValuedInteger::reconstruct(unsigned long p) const {
    if (is_zero()) return 0;
    mpz_class pw;
    mpz_ui_pow_ui(pw.get_mpz_t(), p, valuation);
    return unit * pw;
}

} // namespace capnorm
