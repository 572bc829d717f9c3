#pragma once

#include <optional>
#include <sstream>
#include <vector>

#include "heegner/arith.hpp"
#include "heegner/curve.hpp"

namespace heegner {

/// Per-(p, N) record of the Heegner-hypothesis checks plus the odd
/// class number criterion p = 3 (mod 4).
struct HypothesisCertificate {
    Int p;
    Int N;
    bool gcd_ok = false;
    std::vector<std::pair<Int, int>> split_witnesses; // (prime q | N, kronecker(-p, q))
    bool odd_class_number_criterion = false;

    bool valid() const {
        if (!gcd_ok || !odd_class_number_criterion) return false;
        for (const auto& [q, k] : split_witnesses)
            if (k != 1) return false;
        return true;
    }
};

/// The congruence class containing the prime family A_N:
/// p = rho (mod M) with M = 8 * (product of distinct odd primes of N),
/// a = M - 1, t = M + 1, rho = a t^2 mod M (= M - 1).
struct FamilyCongruence {
    Int modulus_M;
    Int residue_rho;
    Int a;
    Int t;
};

struct FamilyPrime {
    Int p;
    Int m_p; // (p - residue_rho) / modulus_M
    HypothesisCertificate heegner_cert;
};

/// Hypothesis checks for a prime p against conductor N: gcd(p, N) = 1 and
/// every prime q | N split in Q(sqrt(-p)). For odd q that is kronecker(-p, q) = 1;
/// for q = 2 it amounts to -p = 1 (mod 8), which is kronecker(-p, 2) = 1 for
/// p = 3 (mod 4). The p = 3 (mod 4) oddness criterion is recorded, not required.
inline HypothesisCertificate verify_hypothesis(const Int& p, const Int& N) {
    if (!is_prime(p)) throw std::domain_error("verify_hypothesis: p must be prime");
    if (N < 1) throw std::domain_error("verify_hypothesis: N must be >= 1");
    HypothesisCertificate cert;
    cert.p = p;
    cert.N = N;
    Int g;
    mpz_gcd(g.get_mpz_t(), p.get_mpz_t(), N.get_mpz_t());
    cert.gcd_ok = (g == 1);
    for (const auto& [q, e] : factor(N))
        cert.split_witnesses.emplace_back(q, kronecker(-p, q));
    cert.odd_class_number_criterion = (mod_pos(p, 4) == 3);
    return cert;
}

/// The family congruence class for conductor N. Uses the radical of N; a is
/// fixed to the minimal positive choice M - 1.
inline FamilyCongruence build_congruence(const Int& N) {
    if (N < 1) throw std::domain_error("build_congruence: N must be >= 1");
    Int M = 8;
    for (const auto& [q, e] : factor(N))
        if (q != 2) M *= q;
    FamilyCongruence cong;
    cong.modulus_M = M;
    cong.a = M - 1;
    cong.t = M + 1;
    cong.residue_rho = mod_pos(cong.a * cong.t * cong.t, M);
    return cong;
}

/// Every prime in the family congruence class satisfies by construction:
/// p = 3 (mod 4), -p = 1 (mod 8), and kronecker(-p, q) = 1 for all q | N.
/// A prime outside the class may still pass verify_hypothesis; membership in
/// these congruence conditions is what "family-eligible" means below.
inline bool family_eligible(const Int& p, const Int& N) {
    if (mod_pos(p, 8) != 7) return false;
    return verify_hypothesis(p, N).valid();
}

/// Smallest family prime p > after, p = rho (mod M). The hypothesis is
/// re-verified per prime; the congruence guarantees it, so a mismatch is a
/// fatal internal error. Throws resource_error once `budget` candidates in
/// the congruence class were examined without finding a prime.
inline FamilyPrime next_family_prime(const FamilyCongruence& cong, const Int& N,
                                     const Int& after, std::uint64_t budget = 10000000) {
    if (after < 0) throw std::domain_error("next_family_prime: after must be >= 0");
    const Int& M = cong.modulus_M;
    const Int& rho = cong.residue_rho;
    Int p = after - mod_pos(after, M) + rho;
    if (p <= after) p += M;
    for (std::uint64_t tried = 0; tried < budget; ++tried, p += M) {
        if (!is_prime(p)) continue;
        FamilyPrime fp;
        fp.p = p;
        fp.m_p = (p - rho) / M;
        fp.heegner_cert = verify_hypothesis(p, N);
        if (!fp.heegner_cert.valid() || mod_pos(p, 4) != 3)
            throw internal_error("family congruence produced a hypothesis-violating prime");
        return fp;
    }
    std::ostringstream os;
    os << "next_family_prime: no prime found in " << budget
       << " candidates of the class " << rho << " mod " << M << " above " << after;
    throw resource_error(os.str());
}

/// First `count` family primes for N after `after`, ascending.
inline std::vector<FamilyPrime> family_primes(const Int& N, std::size_t count,
                                              Int after = 0,
                                              std::uint64_t budget = 10000000) {
    FamilyCongruence cong = build_congruence(N);
    std::vector<FamilyPrime> out;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(next_family_prime(cong, N, after, budget));
        after = out.back().p;
    }
    return out;
}

} // namespace heegner
