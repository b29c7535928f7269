#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "capnorm/normpoly.hpp"

using namespace capnorm;

namespace {

mpz_class pw(unsigned long p, unsigned long e) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), p, e);
    return r;
}

// plain integer coefficients of a ValuedInteger polynomial
std::vector<mpz_class> lift(const std::vector<ValuedInteger>& coeffs, unsigned long p) {
    std::vector<mpz_class> out;
    for (const ValuedInteger& c : coeffs) out.push_back(c.reconstruct(p));
    return out;
}

// x^k * A + p^f * B, expanded over Z
std::vector<mpz_class> expand(const NuDecomposition& d, unsigned long p, unsigned long len) {
    std::vector<mpz_class> out(len, 0);
    const auto a = lift(d.A, p);
    const auto b = lift(d.B, p);
    for (std::size_t i = 0; i < a.size(); ++i) out[d.k + i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += pw(p, d.f_k) * b[i];
    return out;
}

} // namespace

TEST_CASE("build_nu small cases print exactly") {
    CHECK(format_nu(build_nu(2, 1)) == "x+p");
    CHECK(format_nu(build_nu(3, 1)) == "x^2+p*x+p");
    CHECK(format_nu(build_nu(2, 2)) == "x^3+p^2*x^2+3*p*x+p^2");
    CHECK_THROWS_AS(build_nu(2, 17), std::domain_error);
    CHECK_THROWS_AS(build_nu(4, 1), std::invalid_argument);
}

TEST_CASE("build_nu coefficient structure") {
    for (unsigned long p : {2UL, 3UL, 5UL}) {
        for (unsigned long N = 1; N <= 3; ++N) {
            const NormPolynomial nu = build_nu(p, N);
            const unsigned long pN = pow_ul(p, N);
            REQUIRE(nu.coeffs.size() == pN);
            CHECK(nu.coeffs.back().unit == 1);
            CHECK(nu.coeffs.back().valuation == 0);
            CHECK(nu.coeffs[0].reconstruct(p) == pw(p, N));
            for (unsigned long i = 0; i < pN; ++i) {
                REQUIRE(nu.coeffs[i].reconstruct(p) == binomial(pN, i + 1));
                REQUIRE(nu.coeffs[i].valuation == binomial_valuation(pN, i + 1, p));
            }
        }
    }
}

TEST_CASE("decompose prints the golden blocks for p=2, N=2") {
    const NormPolynomial nu = build_nu(2, 2);

    const NuDecomposition d1 = decompose(nu, 1);
    CHECK(d1.f_k == 2);
    CHECK(format_poly(d1.A, 2) == "x^2+p^2*x+3*p");
    CHECK(format_poly(d1.B, 2) == "1");

    const NuDecomposition d2 = decompose(nu, 2);
    CHECK(d2.f_k == 1);
    CHECK(format_poly(d2.A, 2) == "x+p^2");
    CHECK(format_poly(d2.B, 2) == "3*x+p");
    CHECK(format_decomposition(d2) == "P=x^2.A+p^1.B\nA=x+p^2\nB=3*x+p\n");

    const NuDecomposition d3 = decompose(nu, 3);
    CHECK(d3.f_k == 1);
    CHECK(format_poly(d3.A, 2) == "1");
    CHECK(format_poly(d3.B, 2) == "p*x^2+3*x+p");

    CHECK_THROWS_AS(decompose(nu, 0), std::domain_error);
    CHECK_THROWS_AS(decompose(nu, 4), std::domain_error);
}

TEST_CASE("decomposition reconstructs nu exactly and is normalized") {
    for (unsigned long p : {2UL, 3UL}) {
        for (unsigned long N = 1; N <= 4; ++N) {
            const NormPolynomial nu = build_nu(p, N);
            const std::vector<mpz_class> reference = lift(nu.coeffs, p);
            unsigned long prev_f = N + 1;
            for (unsigned long k = 1; k < nu.order(); ++k) {
                const NuDecomposition d = decompose(nu, k);
                REQUIRE(expand(d, p, nu.order()) == reference);
                REQUIRE(d.f_k == f_step(k, N, p));
                REQUIRE(d.f_k <= prev_f);
                prev_f = d.f_k;
                // A monic of degree p^N - 1 - k
                REQUIRE(d.A.size() == nu.order() - k);
                REQUIRE(d.A.back().unit == 1);
                REQUIRE(d.A.back().valuation == 0);
                // B has a p-unit coefficient and degree < k
                REQUIRE(d.B.size() == k);
                bool unit_seen = false;
                for (const ValuedInteger& c : d.B) unit_seen = unit_seen || c.valuation == 0;
                REQUIRE(unit_seen);
            }
        }
    }
}

TEST_CASE("evaluation identities") {
    for (unsigned long p : {2UL, 3UL}) {
        for (unsigned long N = 1; N <= 3; ++N) {
            const NormPolynomial nu = build_nu(p, N);
            mpz_class at_zero = nu.coeffs[0].reconstruct(p);
            mpz_class at_one = 0;
            for (const ValuedInteger& c : nu.coeffs) at_one += c.reconstruct(p);
            CHECK(at_zero == pw(p, N));
            CHECK(at_one == pw(2, pow_ul(p, N)) - 1); // sum of binomials minus C(p^N, 0)
        }
    }
}

TEST_CASE("is_smooth") {
    CHECK(is_smooth(2, 1, 1, 3));
    CHECK_FALSE(is_smooth(3, 2, 2, 2));
    CHECK(is_smooth(0, 0, 1, 2));
    CHECK(is_smooth(0, 7, 1, 2));   // trivial module
    CHECK(is_smooth(1, 0, 1, 2));   // e = 0
    CHECK_FALSE(is_smooth(4, 1, 2, 2)); // m >= p^N
    CHECK_FALSE(is_smooth(100, 1, 2, 5));
}

TEST_CASE("reduce_mod_ideal") {
    const std::vector<mpz_class> r1 = reduce_mod_ideal(build_nu(2, 2), 3, 2);
    CHECK(r1 == std::vector<mpz_class>{0, 2, 0}); // the residue of 6x mod 4
    CHECK_FALSE(is_zero_poly(r1));

    CHECK(is_zero_poly(reduce_mod_ideal(build_nu(2, 1), 1, 1)));

    const std::vector<mpz_class> r3 = reduce_mod_ideal(build_nu(3, 2), 9, 2);
    CHECK_FALSE(is_zero_poly(r3)); // e=2 > N-s would need s <= 0, but m=9 has s=2

    CHECK_THROWS_AS(reduce_mod_ideal(build_nu(2, 1), 0, 1), std::domain_error);
}

TEST_CASE("smooth complexity forces annihilation; sharp otherwise") {
    for (unsigned long p : {2UL, 3UL, 5UL}) {
        for (unsigned long N = 1; N <= 3; ++N) {
            const NormPolynomial nu = build_nu(p, N);
            const unsigned long pN = pow_ul(p, N);
            for (unsigned long m = 1; m < pN; ++m)
                for (unsigned long e = 1; e <= N + 1; ++e)
                    if (is_smooth(m, e, N, p))
                        REQUIRE(is_zero_poly(reduce_mod_ideal(nu, m, e)));
            if (p <= 3) {
                for (unsigned long s = 0; s < N; ++s) {
                    const unsigned long m = pow_ul(p, s);
                    const unsigned long e = N - s + 1;
                    REQUIRE_FALSE(is_smooth(m, e, N, p));
                    REQUIRE_FALSE(is_zero_poly(reduce_mod_ideal(nu, m, e)));
                }
            }
        }
    }
}
