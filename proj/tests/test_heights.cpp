#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "heegner/heights.hpp"
#include "oracles.hpp"

using namespace heegner;

namespace {
const CurveSpec& E37() { return *find_builtin_curve("37a1"); }
RationalPoint gen37() { return RationalPoint::on(E37(), Rat(0), Rat(0)); }
} // namespace

TEST_CASE("exact group law") {
    const CurveSpec& E = E37();
    RationalPoint P = gen37();
    RationalPoint O = RationalPoint::identity();
    CHECK(add_points(E, P, O) == P);
    CHECK(add_points(E, P, negate(E, P)).infinity);
    RationalPoint P2 = add_points(E, P, P);
    CHECK(P2.x == Rat(1)); // hand chord-tangent computation: 2(0,0) = (1,0)
    CHECK(P2.y == Rat(0));
    CHECK(RationalPoint::satisfies_curve(E, P2.x, P2.y));
    CHECK(add_points(E, P2, P) == RationalPoint::on(E, Rat(-1), Rat(-1)));
    RationalPoint P3 = add_points(E, P2, P);
    CHECK(add_points(E, P3, negate(E, P2)) == P);
    CHECK_THROWS_AS(RationalPoint::on(E, Rat(1), Rat(1)), std::domain_error);
}

TEST_CASE("torsion tests") {
    const CurveSpec& E = E37();
    CHECK(is_torsion(E, RationalPoint::identity()));
    CHECK_FALSE(is_torsion(E, gen37()));
    // 11a1 has a rational 5-torsion point (5, 5)
    const CurveSpec& E11 = *find_builtin_curve("11a1");
    RationalPoint T = RationalPoint::on(E11, Rat(5), Rat(5));
    CHECK(is_torsion(E11, T));
    CHECK(mul_point(E11, 5, T).infinity);
}

TEST_CASE("canonical height of the 37a1 generator") {
    const mpfr_prec_t prec = 256;
    HeightReport rep = canonical_height(E37(), gen37(), prec);
    CHECK_FALSE(rep.torsion);
    // LMFDB/PARI normalization
    CHECK(std::abs(rep.hhat.to_double() - 0.0511114082399688) < 1e-12);
    // doubling-limit oracle in exact rationals
    double orc = oracle::doubling_height(E37(), gen37(), 11);
    CHECK(std::abs(rep.hhat.to_double() - orc) < 1e-6);
    CHECK(rep.naive.to_double() == 0.0); // x = 0
}

TEST_CASE("height is quadratic and satisfies the parallelogram law") {
    const mpfr_prec_t prec = 256;
    const CurveSpec& E = E37();
    RationalPoint P = gen37();
    Real tol = Real::pow2(-static_cast<long>(prec) / 4, prec);
    Real h1 = canonical_height(E, P, prec).hhat;
    Real h2 = canonical_height(E, mul_point(E, 2, P), prec).hhat;
    Real h3 = canonical_height(E, mul_point(E, 3, P), prec).hhat;
    CHECK(abs(h2 - h1 * 4) < tol);
    CHECK(abs(h3 - h1 * 9) < tol);

    std::mt19937_64 rng(41);
    int done = 0;
    while (done < 20) {
        long m = static_cast<long>(rng() % 11) - 5;
        long n = static_cast<long>(rng() % 11) - 5;
        if (m == 0 || n == 0 || m == n || m == -n) continue;
        ++done;
        RationalPoint Pm = mul_point(E, m, P), Pn = mul_point(E, n, P);
        RationalPoint S = add_points(E, Pm, Pn), D = add_points(E, Pm, negate(E, Pn));
        Real hs = S.infinity ? Real::of(0L, prec) : canonical_height(E, S, prec).hhat;
        Real hd = D.infinity ? Real::of(0L, prec) : canonical_height(E, D, prec).hhat;
        Real hm = canonical_height(E, Pm, prec).hhat;
        Real hn = canonical_height(E, Pn, prec).hhat;
        CAPTURE(m, n);
        CHECK(abs(hs + hd - (hm + hn) * 2) < tol);
    }
}

TEST_CASE("heights across curves, including negative discriminant and egg points") {
    const mpfr_prec_t prec = 256;
    // 11a1 generatorless (rank 0), use 43a1 rank-1 generator (0, 0)
    const CurveSpec& E43 = *find_builtin_curve("43a1");
    RationalPoint P43 = RationalPoint::on(E43, Rat(0), Rat(0));
    Real h43 = canonical_height(E43, P43, prec).hhat;
    double orc = oracle::doubling_height(E43, P43, 11);
    CHECK(std::abs(h43.to_double() - orc) < 1e-6);
    // consistency under doubling at a prime of bad reduction in denominators
    Real h2 = canonical_height(E43, mul_point(E43, 2, P43), prec).hhat;
    CHECK(abs(h2 - h43 * 4) < Real::pow2(-60, prec));

    const CurveSpec& E389 = *find_builtin_curve("389a1");
    RationalPoint Q1 = RationalPoint::on(E389, Rat(-1), Rat(1));
    RationalPoint Q2 = RationalPoint::on(E389, Rat(0), Rat(0));
    double o1 = oracle::doubling_height(E389, Q1, 11);
    double o2 = oracle::doubling_height(E389, Q2, 11);
    CHECK(std::abs(canonical_height(E389, Q1, prec).hhat.to_double() - o1) < 1e-6);
    CHECK(std::abs(canonical_height(E389, Q2, prec).hhat.to_double() - o2) < 1e-6);

    const CurveSpec& E61 = *find_builtin_curve("61a1");
    RationalPoint P61 = RationalPoint::on(E61, Rat(1), Rat(0));
    CHECK(std::abs(canonical_height(E61, P61, prec).hhat.to_double() -
                   oracle::doubling_height(E61, P61, 11)) < 1e-6);
}

TEST_CASE("cross-method agreement: positive height implies non-torsion") {
    const mpfr_prec_t prec = 128;
    const CurveSpec& E = E37();
    RationalPoint P = gen37();
    for (long m = 1; m <= 6; ++m) {
        RationalPoint Q = mul_point(E, m, P);
        HeightReport rep = canonical_height(E, Q, prec);
        CHECK(rep.hhat > Real::of(0.001, prec));
        CHECK_FALSE(rep.torsion);
        CHECK_FALSE(is_torsion(E, Q));
    }
}

TEST_CASE("torsion points get zero height and the flag") {
    const mpfr_prec_t prec = 128;
    const CurveSpec& E11 = *find_builtin_curve("11a1");
    RationalPoint T = RationalPoint::on(E11, Rat(5), Rat(5));
    HeightReport rep = canonical_height(E11, T, prec);
    CHECK(rep.torsion);
    CHECK(rep.hhat.is_zero());
    CHECK_THROWS_AS(canonical_height(E11, RationalPoint::identity(), prec),
                    std::domain_error);
}

TEST_CASE("height pairing: bilinearity on small multiples") {
    const mpfr_prec_t prec = 256;
    const CurveSpec& E = E37();
    RationalPoint P = gen37();
    Real h = canonical_height(E, P, prec).hhat;
    Real tol = Real::pow2(-static_cast<long>(prec) / 4, prec);
    auto pair = [&](const RationalPoint& A, const RationalPoint& B) {
        RationalPoint S = add_points(E, A, B);
        Real hs = S.infinity ? Real::of(0L, prec) : canonical_height(E, S, prec).hhat;
        return (hs - canonical_height(E, A, prec).hhat - canonical_height(E, B, prec).hhat) / 2;
    };
    for (long m = 1; m <= 4; ++m) {
        Real pm = pair(mul_point(E, m, P), mul_point(E, 2, P));
        CHECK(abs(pm - h * (2 * m)) < tol); // <mP, 2P> = 2m hhat(P)
    }
}

TEST_CASE("gram regulator") {
    const mpfr_prec_t prec = 192;
    const CurveSpec& E = E37();
    RationalPoint P = gen37();

    SECTION("single point: det = hhat") {
        GramReport rep = gram_regulator(E, {P}, prec);
        CHECK(abs(rep.det - canonical_height(E, P, prec).hhat) < Real::pow2(-40, prec));
        CHECK(rep.independent);
    }
    SECTION("(P, 2P) is dependent") {
        GramReport rep = gram_regulator(E, {P, mul_point(E, 2, P)}, prec);
        CHECK(abs(rep.det) < Real::of(1e-6, prec));
        CHECK_FALSE(rep.independent);
    }
    SECTION("random small multiples of one generator stay dependent") {
        GramReport rep = gram_regulator(E, {mul_point(E, 3, P), mul_point(E, -2, P)}, prec);
        CHECK(abs(rep.det) < Real::of(1e-6, prec));
        CHECK_FALSE(rep.independent);
    }
    SECTION("389a1 rank-2 pair is independent") {
        const CurveSpec& E389 = *find_builtin_curve("389a1");
        RationalPoint Q1 = RationalPoint::on(E389, Rat(-1), Rat(1));
        RationalPoint Q2 = RationalPoint::on(E389, Rat(0), Rat(0));
        GramReport rep = gram_regulator(E389, {Q1, Q2}, prec);
        CHECK(rep.independent);
        CHECK(rep.det > Real::of(0.1, prec)); // regulator of 389a1 is ~0.152
    }
    SECTION("torsion input is rejected") {
        const CurveSpec& E11 = *find_builtin_curve("11a1");
        RationalPoint T = RationalPoint::on(E11, Rat(5), Rat(5));
        CHECK_THROWS_AS(gram_regulator(E11, {T}, prec), std::domain_error);
    }
}
