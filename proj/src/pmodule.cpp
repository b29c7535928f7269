#include "capnorm/pmodule.hpp"

#include <algorithm>
#include <set>

namespace capnorm {

namespace {

Exp mulmod(Exp a, Exp b, Exp m) {
    return static_cast<Exp>((static_cast<unsigned __int128>(a) * b) % m);
}

Exp addmod(Exp a, Exp b, Exp m) {
    return (a + b) % m;
}

unsigned long val_of(Exp x, unsigned long p, unsigned long cap) {
    if (x == 0) return cap;
    unsigned long v = 0;
    while (x % p == 0) {
        x /= p;
        ++v;
    }
    return std::min(v, cap);
}

Exp modinv(Exp a, Exp m) {
    // a invertible mod m (m a prime power, p not dividing a)
    __int128 t = 0, newt = 1;
    __int128 r = static_cast<__int128>(m), newr = static_cast<__int128>(a % m);
    while (newr != 0) {
        __int128 q = r / newr;
        __int128 tmp = t - q * newt;
        t = newt;
        newt = tmp;
        tmp = r - q * newr;
        r = newr;
        newr = tmp;
    }
    if (t < 0) t += m;
    return static_cast<Exp>(t);
}

// Number of elements of the module as u64 if <= limit, else nullopt.
std::optional<unsigned long long> size_if_at_most(const PGroupModule& mod, unsigned long long limit) {
    unsigned long long n = 1;
    for (unsigned long nj : mod.orders)
        for (unsigned long i = 0; i < nj; ++i) {
            if (n > limit / mod.p) return std::nullopt;
            n *= mod.p;
        }
    return n;
}

template <class F>
void for_each_element(const PGroupModule& mod, F f) {
    const unsigned long r = mod.rank();
    std::vector<Exp> moduli(r);
    for (unsigned long t = 0; t < r; ++t) moduli[t] = mod.column_modulus(t);
    ExpVec v(r, 0);
    while (true) {
        f(v);
        unsigned long j = 0;
        while (j < r) {
            if (++v[j] == moduli[j]) {
                v[j] = 0;
                ++j;
            } else {
                break;
            }
        }
        if (j == r) break;
        if (r == 0) break;
    }
}

// v_p of the size of the row-span of `rows` inside (Z/p^E)^c, computed by a
// Howell-style column reduction (annihilator rows included so sizes come out
// exactly over the non-field base ring).
unsigned long span_order_echelon(unsigned long p, unsigned long E, unsigned long cols,
                                 std::vector<ExpVec> rows) {
    if (E == 0 || cols == 0) return 0;
    const Exp m = pow_ul(p, E);
    unsigned long result = 0;
    for (unsigned long col = 0; col < cols; ++col) {
        std::size_t best = rows.size();
        unsigned long best_v = E;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            unsigned long v = val_of(rows[i][col], p, E);
            if (v < best_v) {
                best_v = v;
                best = i;
            }
        }
        if (best == rows.size()) continue;
        const unsigned long a = best_v;
        ExpVec pivot = rows[best];
        rows.erase(rows.begin() + static_cast<long>(best));
        // normalize the leading entry to p^a
        const Exp pa = pow_ul(p, a);
        const Exp unit = pivot[col] / pa;
        const Exp inv = modinv(unit % m, m);
        for (Exp& x : pivot) x = mulmod(x, inv, m);
        for (ExpVec& w : rows) {
            if (w[col] == 0) continue;
            const Exp q = w[col] / pa;
            for (unsigned long t = col; t < cols; ++t)
                w[t] = addmod(w[t], m - mulmod(q, pivot[t], m), m);
        }
        result += E - a;
        if (a > 0) {
            const Exp ann = pow_ul(p, E - a);
            ExpVec extra(cols, 0);
            bool nonzero = false;
            for (unsigned long t = col + 1; t < cols; ++t) {
                extra[t] = mulmod(ann, pivot[t], m);
                nonzero = nonzero || extra[t] != 0;
            }
            if (nonzero) rows.push_back(std::move(extra));
        }
    }
    return result;
}

// Embed ⊕ Z/p^{n_t} into (Z/p^E)^r, coordinate t scaled by p^{E - n_t}.
ExpVec embed(const PGroupModule& mod, const ExpVec& v, unsigned long E) {
    const Exp m = pow_ul(mod.p, E);
    ExpVec out(mod.rank());
    for (unsigned long t = 0; t < mod.rank(); ++t)
        out[t] = mulmod(v[t] % m, pow_ul(mod.p, E - mod.orders[t]), m);
    return out;
}

unsigned long subgroup_order_enumerate(const PGroupModule& mod, const std::vector<ExpVec>& gens) {
    std::set<ExpVec> seen;
    std::vector<ExpVec> frontier;
    ExpVec zero(mod.rank(), 0);
    seen.insert(zero);
    frontier.push_back(zero);
    while (!frontier.empty()) {
        ExpVec v = std::move(frontier.back());
        frontier.pop_back();
        for (const ExpVec& g : gens) {
            ExpVec w(mod.rank());
            for (unsigned long t = 0; t < mod.rank(); ++t)
                w[t] = addmod(v[t], g[t] % mod.column_modulus(t), mod.column_modulus(t));
            if (seen.insert(w).second) frontier.push_back(w);
        }
    }
    unsigned long long n = seen.size();
    unsigned long v = 0;
    while (n > 1) {
        n /= mod.p;
        ++v;
    }
    return v;
}

bool use_enumeration(const PGroupModule& mod, KernelMethod method) {
    switch (method) {
    case KernelMethod::Enumerate: return true;
    case KernelMethod::Echelon: return false;
    case KernelMethod::Auto: return size_if_at_most(mod, 1ULL << 20).has_value();
    }
    return true;
}

} // namespace

unsigned long PGroupModule::order_v() const {
    unsigned long s = 0;
    for (unsigned long nj : orders) s += nj;
    return s;
}

ExpVec PGroupModule::reduce(ExpVec v) const {
    for (unsigned long t = 0; t < rank(); ++t) v[t] %= column_modulus(t);
    return v;
}

ExpVec PGroupModule::generator(unsigned long j) const {
    ExpVec v(rank(), 0);
    v.at(j) = 1;
    return v;
}

PGroupModule make_module(unsigned long p, std::vector<unsigned long> orders,
                         ExpMat sigma_delta, unsigned long N) {
    require_prime(p);
    if (N < 1)
        throw std::invalid_argument("make_module: N must be >= 1");
    for (std::size_t j = 0; j + 1 < orders.size(); ++j)
        if (orders[j] < orders[j + 1])
            throw std::invalid_argument("make_module: orders must be non-increasing");
    for (unsigned long nj : orders)
        if (nj < 1)
            throw std::invalid_argument("make_module: generator orders must be positive");
    const unsigned long r = orders.size();
    if (sigma_delta.size() != r)
        throw std::invalid_argument("make_module: sigma_delta row count != rank");
    for (const ExpVec& row : sigma_delta)
        if (row.size() != r)
            throw std::invalid_argument("make_module: sigma_delta column count != rank");

    PGroupModule mod;
    mod.p = p;
    mod.orders = std::move(orders);
    mod.N = N;
    mod.sigma_delta.resize(r);
    for (unsigned long j = 0; j < r; ++j) mod.sigma_delta[j] = mod.reduce(sigma_delta[j]);

    // h_j has order p^{n_j}, so its image under sigma-1 must be killed by
    // p^{n_j}: v_p(D[j][t]) >= n_t - n_j.
    for (unsigned long j = 0; j < r; ++j)
        for (unsigned long t = 0; t < r; ++t) {
            if (mod.orders[t] <= mod.orders[j]) continue;
            const unsigned long need = mod.orders[t] - mod.orders[j];
            if (val_of(mod.sigma_delta[j][t], p, mod.orders[t]) < need)
                throw std::invalid_argument(
                    "make_module: sigma_delta is not a homomorphism (row " + std::to_string(j + 1) + ")");
        }

    // M = I + D invertible mod p (Gaussian elimination over F_p).
    if (r > 0) {
        ExpMat mm = matrix_of_sigma(mod);
        for (auto& row : mm)
            for (auto& x : row) x %= p;
        unsigned long rank_fp = 0;
        for (unsigned long col = 0; col < r && rank_fp < r; ++col) {
            std::size_t piv = r;
            for (std::size_t i = rank_fp; i < r; ++i)
                if (mm[i][col] % p != 0) {
                    piv = i;
                    break;
                }
            if (piv == r) continue;
            std::swap(mm[piv], mm[rank_fp]);
            const Exp inv = modinv(mm[rank_fp][col] % p, p);
            for (auto& x : mm[rank_fp]) x = mulmod(x, inv, p);
            for (std::size_t i = 0; i < r; ++i) {
                if (i == rank_fp || mm[i][col] % p == 0) continue;
                const Exp c = mm[i][col] % p;
                for (unsigned long t = 0; t < r; ++t)
                    mm[i][t] = addmod(mm[i][t], p - mulmod(c, mm[rank_fp][t], p), p);
            }
            ++rank_fp;
        }
        if (rank_fp != r)
            throw std::invalid_argument("make_module: sigma = 1 + D is not invertible mod p");
    }

    const ExpMat mpow = mat_pow(mod, matrix_of_sigma(mod), pow_ul(p, N));
    if (mpow != identity_matrix(mod))
        throw std::invalid_argument("make_module: sigma^(p^N) != 1");
    return mod;
}

ExpMat identity_matrix(const PGroupModule& mod) {
    const unsigned long r = mod.rank();
    ExpMat id(r, ExpVec(r, 0));
    for (unsigned long j = 0; j < r; ++j) id[j][j] = 1 % mod.column_modulus(j);
    return id;
}

ExpMat matrix_of_sigma(const PGroupModule& mod) {
    ExpMat m = mod.sigma_delta;
    for (unsigned long j = 0; j < mod.rank(); ++j)
        m[j][j] = addmod(m[j][j], 1, mod.column_modulus(j));
    return m;
}

ExpMat mat_mul(const PGroupModule& mod, const ExpMat& a, const ExpMat& b) {
    const unsigned long r = mod.rank();
    ExpMat c(r, ExpVec(r, 0));
    for (unsigned long j = 0; j < r; ++j)
        for (unsigned long t = 0; t < r; ++t) {
            unsigned __int128 acc = 0;
            for (unsigned long k = 0; k < r; ++k)
                acc += static_cast<unsigned __int128>(a[j][k]) * b[k][t];
            c[j][t] = static_cast<Exp>(acc % mod.column_modulus(t));
        }
    return c;
}

ExpMat mat_add(const PGroupModule& mod, const ExpMat& a, const ExpMat& b) {
    const unsigned long r = mod.rank();
    ExpMat c(r, ExpVec(r, 0));
    for (unsigned long j = 0; j < r; ++j)
        for (unsigned long t = 0; t < r; ++t)
            c[j][t] = addmod(a[j][t], b[j][t], mod.column_modulus(t));
    return c;
}

ExpMat mat_pow(const PGroupModule& mod, ExpMat a, unsigned long long e) {
    ExpMat result = identity_matrix(mod);
    while (e > 0) {
        if (e & 1) result = mat_mul(mod, result, a);
        e >>= 1;
        if (e > 0) a = mat_mul(mod, a, a);
    }
    return result;
}

ExpMat mat_geometric_sum(const PGroupModule& mod, const ExpMat& m, unsigned long long t) {
    if (t == 0) return ExpMat(mod.rank(), ExpVec(mod.rank(), 0));
    if (t == 1) return identity_matrix(mod);
    if (t % 2 == 0) {
        ExpMat half = mat_geometric_sum(mod, m, t / 2);
        return mat_add(mod, half, mat_mul(mod, half, mat_pow(mod, m, t / 2)));
    }
    return mat_add(mod, mat_geometric_sum(mod, m, t - 1), mat_pow(mod, m, t - 1));
}

ExpVec apply_endo(const PGroupModule& mod, const ExpVec& v, const ExpMat& a) {
    const unsigned long r = mod.rank();
    if (v.size() != r)
        throw std::invalid_argument("apply_endo: element dimension mismatch");
    ExpVec out(r, 0);
    for (unsigned long t = 0; t < r; ++t) {
        unsigned __int128 acc = 0;
        for (unsigned long k = 0; k < r; ++k)
            acc += static_cast<unsigned __int128>(v[k]) * a[k][t];
        out[t] = static_cast<Exp>(acc % mod.column_modulus(t));
    }
    return out;
}

ExpVec apply_poly(const PGroupModule& mod, const ExpVec& element,
                  const std::vector<mpz_class>& poly) {
    const unsigned long r = mod.rank();
    if (element.size() != r)
        throw std::invalid_argument("apply_poly: element dimension mismatch");
    if (r == 0) return {};
    // scalars act through Z/p^{n_1}
    mpz_class top;
    mpz_ui_pow_ui(top.get_mpz_t(), mod.p, mod.orders[0]);
    std::vector<Exp> scalars(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i) {
        mpz_class red;
        mpz_mod(red.get_mpz_t(), poly[i].get_mpz_t(), top.get_mpz_t());
        scalars[i] = red.get_ui();
    }
    ExpVec acc(r, 0);
    for (std::size_t i = scalars.size(); i-- > 0;) {
        acc = apply_endo(mod, acc, mod.sigma_delta);
        for (unsigned long t = 0; t < r; ++t)
            acc[t] = addmod(acc[t], mulmod(scalars[i], element[t] % mod.column_modulus(t),
                                           mod.column_modulus(t)),
                            mod.column_modulus(t));
    }
    return acc;
}

unsigned long subgroup_order_v(const PGroupModule& mod, const std::vector<ExpVec>& gens,
                               KernelMethod method) {
    if (mod.trivial()) return 0;
    if (use_enumeration(mod, method)) return subgroup_order_enumerate(mod, gens);
    const unsigned long E = mod.orders[0];
    std::vector<ExpVec> rows;
    rows.reserve(gens.size());
    for (const ExpVec& g : gens) rows.push_back(embed(mod, mod.reduce(g), E));
    return span_order_echelon(mod.p, E, mod.rank(), std::move(rows));
}

unsigned long kernel_order_v(const PGroupModule& mod, const ExpMat& a, KernelMethod method) {
    if (mod.trivial()) return 0;
    if (use_enumeration(mod, method)) {
        unsigned long long count = 0;
        for_each_element(mod, [&](const ExpVec& v) {
            if (is_zero_vec(apply_endo(mod, v, a))) ++count;
        });
        unsigned long v = 0;
        while (count > 1) {
            count /= mod.p;
            ++v;
        }
        return v;
    }
    std::vector<ExpVec> rows = a;
    return mod.order_v() - subgroup_order_v(mod, rows, KernelMethod::Echelon);
}

Filtration filtration(const PGroupModule& mod, KernelMethod method) {
    Filtration f;
    f.subgroup_orders.push_back(0);
    const unsigned long total = mod.order_v();
    if (total == 0) return f; // trivial module: m = 0
    ExpMat power = identity_matrix(mod);
    // the kernel chain grows strictly until it reaches H, so m <= v_p(#H)
    const unsigned long bound = total;
    for (unsigned long i = 1; i <= bound; ++i) {
        power = mat_mul(mod, power, mod.sigma_delta);
        const unsigned long ki = kernel_order_v(mod, power, method);
        f.quotient_orders.push_back(ki - f.subgroup_orders.back());
        f.subgroup_orders.push_back(ki);
        if (ki == total) {
            f.m = i;
            return f;
        }
    }
    throw std::logic_error("filtration did not terminate; module invalid");
}

ModuleInvariants invariants(const PGroupModule& mod, KernelMethod method) {
    ModuleInvariants inv;
    inv.order_v = mod.order_v();
    inv.p_rank = mod.rank();
    inv.e = mod.trivial() ? 0 : mod.orders[0];
    inv.m = filtration(mod, method).m;
    if (inv.m >= 1) inv.s = floor_log(inv.m, mod.p);
    return inv;
}

const char* kind_word(CapitulationKind k) {
    switch (k) {
    case CapitulationKind::Complete: return "Complete";
    case CapitulationKind::Partial: return "Incomplete";
    case CapitulationKind::None: return "No";
    }
    return "?";
}

const char* rule_name(VerdictRule r) {
    switch (r) {
    case VerdictRule::NuAnnihilation: return "NuAnnihilation";
    case VerdictRule::SmoothCriterion: return "SmoothCriterion";
    case VerdictRule::StabilityCriterion: return "StabilityCriterion";
    case VerdictRule::IngestedNorms: return "IngestedNorms";
    }
    return "?";
}

CapitulationVerdict nu_image(const PGroupModule& mod, std::optional<unsigned long> base_order_v,
                             NuImageMethod method) {
    CapitulationVerdict verdict;
    verdict.rule = VerdictRule::NuAnnihilation;
    if (mod.trivial()) {
        verdict.kind = CapitulationKind::Complete;
        return verdict;
    }
    if (method == NuImageMethod::PolynomialHorner) {
        const NormPolynomial nu = build_nu(mod.p, mod.N);
        std::vector<mpz_class> poly(nu.coeffs.size());
        for (std::size_t i = 0; i < poly.size(); ++i) poly[i] = nu.coeffs[i].reconstruct(mod.p);
        for (unsigned long j = 0; j < mod.rank(); ++j)
            verdict.witnesses.push_back(apply_poly(mod, mod.generator(j), poly));
    } else {
        const ExpMat nu_mat =
            mat_geometric_sum(mod, matrix_of_sigma(mod), pow_ul(mod.p, mod.N));
        verdict.witnesses = nu_mat;
    }
    verdict.witness_order_v = subgroup_order_v(mod, verdict.witnesses);
    verdict.kernel_order_v = mod.order_v() - verdict.witness_order_v;
    const bool all_zero =
        std::all_of(verdict.witnesses.begin(), verdict.witnesses.end(), is_zero_vec);
    if (all_zero)
        verdict.kind = CapitulationKind::Complete;
    else if (base_order_v && verdict.witness_order_v == *base_order_v)
        verdict.kind = CapitulationKind::None;
    else
        verdict.kind = CapitulationKind::Partial;
    return verdict;
}

std::optional<CapitulationVerdict> check_sufficient_criterion(const PGroupModule& mod) {
    const ModuleInvariants inv = invariants(mod);
    if (!is_smooth(inv.m, inv.e, mod.N, mod.p)) return std::nullopt;
    CapitulationVerdict verdict;
    verdict.kind = CapitulationKind::Complete;
    verdict.rule = VerdictRule::SmoothCriterion;
    verdict.kernel_order_v = mod.order_v();
    return verdict;
}

unsigned long element_order_v(const PGroupModule& mod, const ExpVec& v) {
    unsigned long e = 0;
    for (unsigned long t = 0; t < mod.rank(); ++t) {
        const Exp x = v[t] % mod.column_modulus(t);
        if (x == 0) continue;
        e = std::max(e, mod.orders[t] - val_of(x, mod.p, mod.orders[t]));
    }
    return e;
}

bool is_zero_vec(const ExpVec& v) {
    return std::all_of(v.begin(), v.end(), [](Exp x) { return x == 0; });
}

bool element_capitulates(const PGroupModule& mod, const ExpVec& element) {
    if (element.size() != mod.rank())
        throw std::invalid_argument("element_capitulates: element dimension mismatch");
    ExpVec v = mod.reduce(element);
    if (is_zero_vec(v)) return true;
    const unsigned long e = element_order_v(mod, v);
    // personal filtration length of the element
    unsigned long m = 0;
    ExpVec w = v;
    const unsigned long bound = mod.order_v() + 1;
    while (!is_zero_vec(w)) {
        if (m > bound) throw std::logic_error("element_capitulates: (sigma-1)-chain did not vanish");
        w = apply_endo(mod, w, mod.sigma_delta);
        ++m;
    }
    if (is_smooth(m, e, mod.N, mod.p)) return true;
    const ExpMat nu_mat = mat_geometric_sum(mod, matrix_of_sigma(mod), pow_ul(mod.p, mod.N));
    return is_zero_vec(apply_endo(mod, v, nu_mat));
}

PGroupModule quotient_mod_pt(const PGroupModule& mod, unsigned long t) {
    if (t < 1)
        throw std::invalid_argument("quotient_mod_pt requires t >= 1");
    std::vector<unsigned long> orders;
    std::vector<unsigned long> kept;
    for (unsigned long j = 0; j < mod.rank(); ++j) {
        const unsigned long nj = std::min(mod.orders[j], t);
        if (nj == 0) continue;
        orders.push_back(nj);
        kept.push_back(j);
    }
    ExpMat d(kept.size(), ExpVec(kept.size(), 0));
    for (std::size_t a = 0; a < kept.size(); ++a)
        for (std::size_t b = 0; b < kept.size(); ++b)
            d[a][b] = mod.sigma_delta[kept[a]][kept[b]] % pow_ul(mod.p, orders[b]);
    return make_module(mod.p, std::move(orders), std::move(d), mod.N);
}

} // namespace capnorm
