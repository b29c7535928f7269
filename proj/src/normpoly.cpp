#include "capnorm/normpoly.hpp"

#include <algorithm>
#include <sstream>

namespace capnorm {

NormPolynomial build_nu(unsigned long p, unsigned long N) {
    require_prime(p);
    if (N < 1)
        throw std::domain_error("build_nu requires N >= 1");
    const unsigned long pN = pow_ul(p, N);
    if (pN > (1UL << 16))
        throw std::domain_error("build_nu: p^N exceeds the 2^16 coefficient bound");

    NormPolynomial nu;
    nu.p = p;
    nu.N = N;
    nu.coeffs.reserve(pN);
    mpz_class c = 1; // C(p^N, 0)
    for (unsigned long i = 1; i <= pN; ++i) {
        c *= pN - i + 1;
        mpz_divexact_ui(c.get_mpz_t(), c.get_mpz_t(), i);
        nu.coeffs.push_back(ValuedInteger::from_integer(c, p));
    }
    return nu;
}

NuDecomposition decompose(const NormPolynomial& nu, unsigned long k) {
    const unsigned long pN = nu.order();
    if (k < 1 || k > pN - 1)
        throw std::domain_error("decompose requires k in [1, p^N - 1]");

    NuDecomposition d;
    d.k = k;

    // w = min valuation among the coefficients of degree < k.
    unsigned long w = nu.coeffs[0].valuation;
    for (unsigned long i = 1; i < k; ++i)
        w = std::min(w, nu.coeffs[i].valuation);
    const unsigned long expected = f_step(k, nu.N, nu.p);
    if (w != expected)
        throw std::logic_error("decompose: extracted power disagrees with f(k)");
    d.f_k = w;

    d.B.reserve(k);
    for (unsigned long i = 0; i < k; ++i) {
        ValuedInteger c = nu.coeffs[i];
        c.valuation -= w;
        d.B.push_back(c);
    }
    d.A.assign(nu.coeffs.begin() + static_cast<long>(k), nu.coeffs.end());
    return d;
}

std::vector<mpz_class> reduce_mod_ideal(const NormPolynomial& nu, unsigned long m, unsigned long e) {
    if (m < 1 || e < 1)
        throw std::domain_error("reduce_mod_ideal requires m >= 1 and e >= 1");
    mpz_class pe;
    mpz_ui_pow_ui(pe.get_mpz_t(), nu.p, e);
    const unsigned long len = std::min<unsigned long>(m, nu.order());
    std::vector<mpz_class> out(len);
    for (unsigned long i = 0; i < len; ++i) {
        mpz_class v = nu.coeffs[i].reconstruct(nu.p);
        mpz_mod(out[i].get_mpz_t(), v.get_mpz_t(), pe.get_mpz_t());
    }
    return out;
}

bool is_zero_poly(const std::vector<mpz_class>& coeffs) {
    return std::all_of(coeffs.begin(), coeffs.end(), [](const mpz_class& c) { return c == 0; });
}

bool is_smooth(unsigned long m, unsigned long e, unsigned long N, unsigned long p) {
    require_prime(p);
    if (N < 1)
        throw std::domain_error("is_smooth requires N >= 1");
    if (m == 0) return true;
    if (m > pow_ul(p, N) - 1) return false;
    return e <= N - floor_log(m, p);
}

namespace {

std::string format_term(const ValuedInteger& c, unsigned long deg) {
    std::ostringstream os;
    bool lead = true;
    if (c.unit != 1 || (c.valuation == 0 && deg == 0)) {
        os << c.unit.get_str();
        lead = false;
    }
    if (c.valuation > 0) {
        if (!lead) os << "*";
        os << "p";
        if (c.valuation > 1) os << "^" << c.valuation;
        lead = false;
    }
    if (deg > 0) {
        if (!lead) os << "*";
        os << "x";
        if (deg > 1) os << "^" << deg;
    }
    return os.str();
}

} // namespace

std::string format_poly(const std::vector<ValuedInteger>& coeffs, unsigned long) {
    std::string out;
    for (unsigned long i = coeffs.size(); i-- > 0;) {
        if (coeffs[i].is_zero()) continue;
        if (!out.empty()) out += "+";
        out += format_term(coeffs[i], i);
    }
    if (out.empty()) out = "0";
    return out;
}

std::string format_nu(const NormPolynomial& nu) {
    return format_poly(nu.coeffs, nu.p);
}

std::string format_decomposition(const NuDecomposition& d) {
    std::ostringstream os;
    os << "P=x^" << d.k << ".A+p^" << d.f_k << ".B\n";
    os << "A=" << format_poly(d.A, 0) << "\n";
    os << "B=" << format_poly(d.B, 0) << "\n";
    return os.str();
}

std::string format_nu_with_decompositions(const NormPolynomial& nu) {
    std::ostringstream os;
    os << "P=" << format_nu(nu) << "\n";
    for (unsigned long k = 1; k <= nu.order() - 1; ++k)
        os << "\n" << format_decomposition(decompose(nu, k));
    return os.str();
}

} // namespace capnorm
