#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace heegner {

// Exact integers and rationals. mpq_class keeps values in lowest terms with
// a positive denominator as long as inputs are canonical, which every
// constructor below guarantees.
using Int = mpz_class;
using Rat = mpq_class;

class resource_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class precision_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class internal_error : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline Int make_int(const std::string& s) { return Int(s, 10); }

inline Rat make_rat(const Int& num, const Int& den) {
    if (den == 0) throw std::domain_error("rational with zero denominator");
    Rat r(num, den);
    r.canonicalize();
    return r;
}

/// Kronecker symbol (a|n). Standard extension of the Jacobi symbol,
/// with the supplement at 2: (a|2) = 0 for even a, +1 for a = ±1 (mod 8),
/// -1 for a = ±3 (mod 8).
inline int kronecker(const Int& a, const Int& n) {
    if (n == 0) throw std::domain_error("kronecker: modulus must be nonzero");
    return mpz_kronecker(a.get_mpz_t(), n.get_mpz_t());
}

namespace detail {

inline bool miller_rabin_witness(const Int& n, const Int& witness) {
    // n odd, n > 3. Returns true if `witness` proves n composite.
    Int a = witness % n;
    if (a == 0) return false;
    Int d = n - 1;
    unsigned long s = mpz_scan1(d.get_mpz_t(), 0);
    mpz_fdiv_q_2exp(d.get_mpz_t(), d.get_mpz_t(), s);
    Int x;
    mpz_powm(x.get_mpz_t(), a.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
    if (x == 1 || x == n - 1) return false;
    for (unsigned long i = 1; i < s; ++i) {
        mpz_powm_ui(x.get_mpz_t(), x.get_mpz_t(), 2, n.get_mpz_t());
        if (x == n - 1) return false;
        if (x == 1) return true;
    }
    return true;
}

inline const std::vector<unsigned long>& small_primes_1000() {
    static const std::vector<unsigned long> primes = [] {
        std::vector<unsigned long> out;
        std::vector<bool> comp(1001, false);
        for (unsigned long i = 2; i <= 1000; ++i) {
            if (comp[i]) continue;
            out.push_back(i);
            for (unsigned long j = i * i; j <= 1000; j += i) comp[j] = true;
        }
        return out;
    }();
    return primes;
}

} // namespace detail

/// Primality test. Deterministic for n < 2^64 (fixed Miller-Rabin witness
/// set 2..37), otherwise Miller-Rabin with 65 fixed prime witnesses
/// (error probability below 4^-65 < 2^-128). Always the same answer for
/// the same input.
inline bool is_prime(const Int& n) {
    if (n < 0) throw std::domain_error("is_prime: negative input");
    if (n < 2) return false;
    for (unsigned long p : detail::small_primes_1000()) {
        if (n == p) return true;
        if (mpz_divisible_ui_p(n.get_mpz_t(), p)) return false;
        if (p > 97) break;
    }
    static const unsigned long det_witnesses[] = {2,  3,  5,  7,  11, 13,
                                                  17, 19, 23, 29, 31, 37};
    const bool small = mpz_sizeinbase(n.get_mpz_t(), 2) <= 64;
    if (small) {
        for (unsigned long w : det_witnesses)
            if (detail::miller_rabin_witness(n, Int(w))) return false;
        return true;
    }
    std::size_t used = 0;
    for (unsigned long w : detail::small_primes_1000()) {
        if (detail::miller_rabin_witness(n, Int(w))) return false;
        if (++used == 65) break;
    }
    return true;
}

/// Chinese remainder theorem for pairwise coprime moduli.
/// Returns the unique solution in [0, prod(moduli)).
inline Int crt(const std::vector<std::pair<Int, Int>>& pairs) {
    if (pairs.empty()) throw std::domain_error("crt: empty input");
    Int x = 0, m = 1;
    for (const auto& [r, mod] : pairs) {
        if (mod <= 0) throw std::domain_error("crt: nonpositive modulus");
        Int g;
        mpz_gcd(g.get_mpz_t(), m.get_mpz_t(), mod.get_mpz_t());
        if (g != 1)
            throw std::domain_error("crt: moduli are not pairwise coprime");
        // x' = x + m * ((r - x)/1 * m^-1 mod mod)
        Int minv, t = r - x;
        if (mpz_invert(minv.get_mpz_t(), m.get_mpz_t(), mod.get_mpz_t()) == 0)
            throw std::domain_error("crt: moduli are not pairwise coprime");
        Int k = (t * minv) % mod;
        if (k < 0) k += mod;
        x += m * k;
        m *= mod;
    }
    x %= m;
    if (x < 0) x += m;
    return x;
}

/// Modular inverse; throws if gcd(a, m) != 1.
inline Int inv_mod(const Int& a, const Int& m) {
    Int r;
    if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()) == 0)
        throw std::domain_error("inv_mod: element not invertible");
    return r;
}

inline Int mod_pos(const Int& a, const Int& m) {
    Int r = a % m;
    if (r < 0) r += m;
    return r;
}

/// Prime factorization by trial division; intended for desk-scale inputs
/// (conductors, moduli). Throws resource_error when a cofactor resists
/// trial division up to 10^7 and is not a proven prime.
inline std::vector<std::pair<Int, unsigned>> factor(Int n) {
    if (n <= 0) throw std::domain_error("factor: input must be positive");
    std::vector<std::pair<Int, unsigned>> out;
    auto strip = [&](const Int& p) {
        unsigned e = 0;
        while (mpz_divisible_p(n.get_mpz_t(), p.get_mpz_t())) {
            n /= p;
            ++e;
        }
        if (e) out.emplace_back(p, e);
    };
    strip(2);
    for (Int p = 3; p * p <= n && p <= 10000000; p += 2) strip(p);
    if (n > 1) {
        if (!is_prime(n))
            throw resource_error("factor: composite cofactor beyond trial division range");
        out.emplace_back(n, 1);
    }
    return out;
}

/// Square root of a modulo an odd prime q (a assumed a residue; throws
/// domain_error otherwise). Brute-force scan: q here always divides a
/// conductor or is a small auxiliary prime, so this stays desk-scale.
inline Int sqrt_mod_prime(const Int& a_in, const Int& q) {
    Int a = mod_pos(a_in, q);
    if (a == 0) return 0;
    if (kronecker(a, q) != 1)
        throw std::domain_error("sqrt_mod_prime: not a quadratic residue");
    for (Int x = 1; x <= q / 2; ++x) {
        if (mod_pos(x * x, q) == a) return x;
    }
    throw internal_error("sqrt_mod_prime: residue with no root found");
}

/// Square root of a modulo q^e (q odd prime), by Hensel lifting from mod q.
inline Int sqrt_mod_prime_power(const Int& a, const Int& q, unsigned e) {
    Int x = sqrt_mod_prime(a, q);
    Int qk = q;
    for (unsigned k = 1; k < e; ++k) {
        // x -> x + t*q^k with (x^2 - a)/q^k + 2xt = 0 (mod q)
        Int qk1 = qk * q;
        Int num = mod_pos(a - x * x, qk1) / qk;
        Int t = mod_pos(num * inv_mod(mod_pos(2 * x, q), q), q);
        x = mod_pos(x + t * qk, qk1);
        qk = qk1;
    }
    return x;
}

/// Square root of a modulo 2^e for odd a (requires a = 1 mod min(2^e,8)).
inline Int sqrt_mod_power_of_two(const Int& a, unsigned e) {
    Int m = Int(1) << e;
    Int am = mod_pos(a, m);
    if (e == 1) return 1;
    if (e == 2) {
        if (am % 4 != 1) throw std::domain_error("sqrt mod 4: a != 1 (mod 4)");
        return 1;
    }
    if (am % 8 != 1) throw std::domain_error("sqrt mod 2^e: a != 1 (mod 8)");
    // lift from mod 8 (root 1) one bit at a time: x odd, x^2 = a (mod 2^k)
    Int x = 1;
    for (unsigned k = 3; k < e; ++k) {
        Int mk1 = Int(1) << (k + 1);
        if (mod_pos(x * x - a, mk1) != 0) x += Int(1) << (k - 1);
    }
    return mod_pos(x, m);
}

/// Smallest positive root of x^2 = a (mod m) given the factorization of m.
/// Used for the Heegner beta with m = 4N; factors come from the conductor.
inline Int sqrt_mod_factored(const Int& a, const std::vector<std::pair<Int, unsigned>>& fac) {
    std::vector<std::pair<Int, Int>> congs;
    for (const auto& [q, e] : fac) {
        Int mod;
        mpz_pow_ui(mod.get_mpz_t(), q.get_mpz_t(), e);
        Int root = (q == 2) ? sqrt_mod_power_of_two(a, e)
                            : sqrt_mod_prime_power(a, q, e);
        congs.emplace_back(root, mod);
    }
    Int m = 1;
    for (const auto& [r, mod] : congs) m *= mod;
    // try all sign combinations, keep the smallest positive representative
    Int best = -1;
    const std::size_t k = congs.size();
    for (std::size_t mask = 0; mask < (std::size_t(1) << k); ++mask) {
        std::vector<std::pair<Int, Int>> sel;
        for (std::size_t i = 0; i < k; ++i) {
            Int r = congs[i].first;
            if (mask & (std::size_t(1) << i)) r = mod_pos(-r, congs[i].second);
            sel.emplace_back(r, congs[i].second);
        }
        Int x = crt(sel);
        if (x == 0) x = m;
        if (best < 0 || x < best) best = x;
    }
    return best;
}

/// Primes up to `bound` (inclusive), by sieve.
inline std::vector<std::uint64_t> primes_up_to(std::uint64_t bound) {
    std::vector<std::uint64_t> out;
    if (bound < 2) return out;
    std::vector<bool> comp(bound + 1, false);
    for (std::uint64_t i = 2; i <= bound; ++i) {
        if (comp[i]) continue;
        out.push_back(i);
        if (i <= bound / i)
            for (std::uint64_t j = i * i; j <= bound; j += i) comp[j] = true;
    }
    return out;
}

} // namespace heegner
