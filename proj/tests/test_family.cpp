#include <catch2/catch_amalgamated.hpp>

#include "heegner/prime_family.hpp"
#include "heegner/quadform.hpp"
#include "oracles.hpp"

using namespace heegner;

TEST_CASE("congruence construction") {
    FamilyCongruence c37 = build_congruence(37);
    CHECK(c37.modulus_M == 296);
    CHECK(c37.residue_rho == 295);
    CHECK(c37.a == 295);
    CHECK(c37.t == 297);

    FamilyCongruence c1 = build_congruence(1);
    CHECK(c1.modulus_M == 8);
    CHECK(c1.residue_rho == 7);

    FamilyCongruence c8 = build_congruence(8); // radical collapses 2^3
    CHECK(c8.modulus_M == 8);
    CHECK(c8.residue_rho == 7);
}

TEST_CASE("first family primes") {
    FamilyCongruence c = build_congruence(37);
    FamilyPrime fp = next_family_prime(c, 37, 0);
    CHECK(fp.p == 887); // 295 = 5*59 and 591 = 3*197 are composite
    CHECK(fp.m_p == 2);
    CHECK(fp.heegner_cert.valid());
    CHECK(mod_pos(fp.p, 4) == 3);
    CHECK(kronecker(-fp.p, 37) == 1);

    FamilyPrime next = next_family_prime(c, 37, 887);
    CHECK(next.p == 2663); // sieve oracle
    // sieve oracle cross-check: smallest prime = 295 mod 296
    for (std::uint64_t q : oracle::sieve(3000)) {
        if (q % 296 == 295) {
            CHECK(Int(static_cast<unsigned long>(q)) == 887);
            break;
        }
    }

    auto n1 = family_primes(1, 3);
    REQUIRE(n1.size() == 3);
    CHECK(n1[0].p == 7);
    CHECK(n1[1].p == 23);
    CHECK(n1[2].p == 31);
}

TEST_CASE("verify_hypothesis") {
    CHECK(verify_hypothesis(887, 37).valid());
    CHECK_THROWS_AS(verify_hypothesis(295, 37), std::domain_error); // not prime
    // (3, 37): 37 is split in Q(sqrt(-3)) since -3 = 34 = 16^2 (mod 37), and
    // 3 = 3 (mod 4); the hypothesis holds even though 3 is far outside A_37.
    HypothesisCertificate h3 = verify_hypothesis(3, 37);
    CHECK(oracle::legendre_bruteforce(-3, 37) == 1);
    CHECK(h3.valid());
    CHECK_FALSE(family_eligible(3, 37)); // -3 != 1 (mod 8)

    HypothesisCertificate hdiv = verify_hypothesis(37, 37); // p | N
    CHECK_FALSE(hdiv.gcd_ok);
    CHECK_FALSE(hdiv.valid());
}

TEST_CASE("family invariants for N in {37, 43, 61, 389}") {
    for (long N : {37L, 43L, 61L, 389L}) {
        Int after = 0;
        FamilyCongruence cong = build_congruence(N);
        for (int i = 0; i < 50; ++i) {
            FamilyPrime fp = next_family_prime(cong, N, after);
            after = fp.p;
            REQUIRE(mod_pos(fp.p, 4) == 3);
            REQUIRE(mod_pos(-fp.p, 8) == 1);
            for (const auto& [q, e] : factor(N))
                REQUIRE(kronecker(-fp.p, q) == 1);
            REQUIRE(fp.p > 0);
        }
    }
}

TEST_CASE("generator and verifier agree on 200 primes") {
    Int after = 0;
    FamilyCongruence cong = build_congruence(37);
    Int prev = 0;
    for (int i = 0; i < 200; ++i) {
        FamilyPrime fp = next_family_prime(cong, 37, after);
        REQUIRE(fp.heegner_cert.valid());
        REQUIRE(fp.p > prev); // strictly increasing
        prev = fp.p;
        after = fp.p;
    }
    // determinism given (N, after)
    CHECK(next_family_prime(cong, 37, 0).p == next_family_prime(cong, 37, 0).p);
}

TEST_CASE("search budget exhaustion is a resource error") {
    FamilyCongruence cong = build_congruence(37);
    CHECK_THROWS_AS(next_family_prime(cong, 37, 0, 1), resource_error);
}

TEST_CASE("odd class number for every generated family prime") {
    Int after = 0;
    FamilyCongruence cong = build_congruence(37);
    for (int i = 0; i < 10; ++i) {
        FamilyPrime fp = next_family_prime(cong, 37, after);
        after = fp.p;
        CHECK(class_number(fp.p) % 2 == 1);
    }
}
