#pragma once

#include <vector>

#include "heegner/prime_family.hpp"
#include "heegner/quadform.hpp"

namespace heegner {

/// A Heegner form of level N: a form (a, b, c) of discriminant -p with
/// N | a and b = beta (mod 2N), where beta^2 = -p (mod 4N). class_index is
/// the position of its reduced SL2(Z)-representative in the class group's
/// canonical form ordering.
struct HeegnerForm {
    QuadForm form;
    Int beta;
    std::size_t class_index;
};

namespace detail {

/// A representative (A, B, C) of the class of g with gcd(A, N) = 1, found by
/// scanning small proper representations. (1, 0) is tried first so that a
/// form whose own leading coefficient is coprime to N represents itself.
inline QuadForm representative_coprime_to(const QuadForm& g, const Int& N) {
    auto attempt = [&](long x, long y) -> std::optional<QuadForm> {
        if (x == 0 && y == 0) return std::nullopt;
        Int gx, gy(y);
        mpz_gcd(gx.get_mpz_t(), Int(x).get_mpz_t(), gy.get_mpz_t());
        if (gx != 1) return std::nullopt;
        Int A = g.eval(x, y);
        Int d;
        mpz_gcd(d.get_mpz_t(), A.get_mpz_t(), N.get_mpz_t());
        if (d != 1) return std::nullopt;
        // complete (x, y) to an SL2(Z) matrix (x u; y v), x v - y u = 1
        Int gg, v, u;
        mpz_gcdext(gg.get_mpz_t(), v.get_mpz_t(), u.get_mpz_t(), Int(x).get_mpz_t(),
                   Int(y).get_mpz_t());
        u = -u; // x v - y u = 1
        Int B = 2 * (g.a * x * u + g.c * y * v) + g.b * (x * v + y * u);
        Int C = g.eval(u, v);
        return QuadForm(A, B, C);
    };
    if (auto f = attempt(1, 0)) return *f;
    if (auto f = attempt(0, 1)) return *f;
    for (long box = 1; box <= 64; ++box) {
        for (long x = -box; x <= box; ++x) {
            for (long y = -box; y <= box; ++y) {
                if (std::max(std::abs(x), std::abs(y)) != box) continue;
                if (auto f = attempt(x, y)) return *f;
            }
        }
    }
    throw internal_error("no representative coprime to N found in search box");
}

} // namespace detail

/// Canonical square root beta of -p mod 4N: the smallest positive solution,
/// computed by factoring N, Hensel lifting and CRT.
inline Int heegner_beta(const Int& p, const Int& N) {
    auto fac = factor(4 * N);
    return sqrt_mod_factored(-p, fac);
}

/// All h Heegner forms of level N and discriminant -p, one per form class,
/// indexed by the class of their SL2(Z)-reduction. Requires a valid
/// hypothesis certificate. Construction: with n = (N, beta, *) the level
/// form, the class [c] is realized as the composite of a representative of
/// [c] * [n]^-1 coprime to N with n, glued along a common middle coefficient.
inline std::vector<HeegnerForm> heegner_forms(const FormClassGroup& G, const Int& N) {
    const Int& p = G.p();
    HypothesisCertificate cert = verify_hypothesis(p, N);
    if (!cert.valid())
        throw std::domain_error("heegner_forms: Heegner hypothesis fails for (p, N)");
    Int beta = heegner_beta(p, N); // exists by the split conditions
    Int base_c_num = beta * beta + p;
    if (!mpz_divisible_p(base_c_num.get_mpz_t(), Int(4 * N).get_mpz_t()))
        throw internal_error("heegner_forms: beta^2 != -p (mod 4N)");
    QuadForm base(N, beta, base_c_num / (4 * N));
    std::size_t base_idx = G.index_of(reduce(base));

    std::vector<HeegnerForm> out;
    out.reserve(G.h());
    for (std::size_t i = 0; i < G.h(); ++i) {
        // [g] = [c_i] * [base]^(-1)
        std::size_t gi = G.mul(i, G.inv(base_idx));
        QuadForm rep = detail::representative_coprime_to(G.form(gi), N);
        // middle coefficient B with B = rep.b (mod 2 rep.a), B = beta (mod 2N)
        Int diff = beta - rep.b; // even: both odd since -p is odd
        Int k = mod_pos((diff / 2) * inv_mod(mod_pos(rep.a, N), N), N);
        Int B = rep.b + 2 * rep.a * k;
        Int A = rep.a * N;
        Int Cnum = B * B + p;
        if (!mpz_divisible_p(Cnum.get_mpz_t(), Int(4 * A).get_mpz_t()))
            throw internal_error("heegner_forms: glued form has wrong discriminant");
        // normalize B into (-A, A] by multiples of 2A; preserves B mod 2N
        Int r = mod_pos(B, 2 * A);
        if (r > A) r -= 2 * A;
        B = r;
        Cnum = B * B + p;
        QuadForm hf(A, B, Cnum / (4 * A));
        if (mod_pos(hf.b - beta, 2 * N) != 0)
            throw internal_error("heegner_forms: beta congruence lost");
        if (G.index_of(reduce(hf)) != i)
            throw internal_error("heegner_forms: constructed form reduces to the wrong class");
        out.push_back(HeegnerForm{hf, beta, i});
    }
    return out;
}

/// Convenience overload constructing the class group internally.
inline std::vector<HeegnerForm> heegner_forms(const Int& p, const Int& N) {
    FormClassGroup G(p);
    return heegner_forms(G, N);
}

/// A Gamma_0(N)-equivalent form of hf minimizing the leading coefficient
/// over a search box (so the attached tau has large imaginary part).
/// Gamma_0(N) preserves both N | a and b mod 2N.
inline QuadForm gamma0_optimize(const HeegnerForm& hf, const Int& N, long box = 24) {
    const QuadForm& f = hf.form;
    QuadForm best = f;
    for (long x = -box; x <= box; ++x) {
        for (long y0 = -box; y0 <= box; ++y0) {
            if (x == 0 && y0 == 0) continue;
            Int y = Int(y0) * N;
            Int gx;
            mpz_gcd(gx.get_mpz_t(), Int(x).get_mpz_t(), y.get_mpz_t());
            if (gx != 1) continue;
            Int A = f.eval(x, y);
            if (A > best.a) continue;
            Int gg, v, u;
            mpz_gcdext(gg.get_mpz_t(), v.get_mpz_t(), u.get_mpz_t(),
                       Int(x).get_mpz_t(), y.get_mpz_t());
            u = -u; // x v - y u = 1, with y = 0 (mod N) the matrix is in Gamma_0(N)
            Int B = 2 * (f.a * x * u + f.c * y * v) + f.b * (x * v + y * u);
            Int r = mod_pos(B, 2 * A);
            if (r > A) r -= 2 * A;
            B = r;
            Int C = (B * B - f.disc()) / (4 * A);
            QuadForm cand(A, B, C);
            if (cand.a < best.a || (cand.a == best.a && cand.b < best.b)) best = cand;
        }
    }
    if (mod_pos(best.a, N) != 0)
        throw internal_error("gamma0_optimize: level divisibility lost");
    if (mod_pos(best.b - hf.beta, 2 * N) != 0)
        throw internal_error("gamma0_optimize: beta congruence lost");
    return best;
}

} // namespace heegner
