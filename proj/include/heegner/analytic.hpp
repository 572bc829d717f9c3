#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <vector>

#include "heegner/complex.hpp"
#include "heegner/curve.hpp"
#include "heegner/heegner_forms.hpp"
#include "heegner/modular_form.hpp"
#include "heegner/parallel.hpp"

namespace heegner {

// ---------------------------------------------------------------------------
// period lattice

/// Period lattice of E(C) = C/(Z omega1 + Z omega2), omega1 real positive,
/// Im(omega2/omega1) > 0. Weierstrass data in the 4x^3 - g2 x - g3
/// normalization with g2 = c4/12, g3 = c6/216.
struct PeriodLattice {
    CurveSpec curve;
    Complex omega1;
    Complex omega2;
    Real g2, g3;

    Complex tau() const { return omega2 / omega1; }
    mpfr_prec_t prec() const { return omega1.prec(); }
};

namespace detail {

/// Real roots of 4x^3 + c2 x^2 + c1 x + c0, polished by Newton iteration
/// from double-precision seeds. Returns all real roots, descending.
inline std::vector<Real> cubic_real_roots(const Real& c2, const Real& c1, const Real& c0,
                                          mpfr_prec_t prec) {
    // depressed form: x = t - c2/12 applied on doubles for seeding only
    const double A = 4.0, B = c2.to_double(), C = c1.to_double(), D = c0.to_double();
    const double p = (3 * A * C - B * B) / (3 * A * A);
    const double q = (2 * B * B * B - 9 * A * B * C + 27 * A * A * D) / (27 * A * A * A);
    const double shift = -B / (3 * A);
    std::vector<double> seeds;
    const double disc = -4 * p * p * p - 27 * q * q;
    if (disc > 0) {
        const double m = 2 * std::sqrt(-p / 3);
        const double theta = std::acos(std::clamp(3 * q / (p * m), -1.0, 1.0)) / 3;
        for (int k = 0; k < 3; ++k)
            seeds.push_back(m * std::cos(theta - 2 * M_PI * k / 3) + shift);
    } else {
        const double s = std::sqrt(q * q / 4 + p * p * p / 27);
        seeds.push_back(std::cbrt(-q / 2 + s) + std::cbrt(-q / 2 - s) + shift);
    }
    std::vector<Real> roots;
    for (double sd : seeds) {
        Real x = Real::of(sd, prec);
        for (int it = 0; it < 64; ++it) {
            Real f = ((x * 4 + c2) * x + c1) * x + c0;
            Real df = (x * 12 + c2 * 2) * x + c1;
            Real step = f / df;
            x -= step;
            if (exponent_of(step) < exponent_of(x) - static_cast<long>(prec)) break;
        }
        roots.push_back(x);
    }
    std::sort(roots.begin(), roots.end(), [](const Real& a, const Real& b) { return b < a; });
    return roots;
}

inline void sigma_tables(std::size_t n, std::vector<Int>& s3, std::vector<Int>& s5) {
    s3.assign(n + 1, 0);
    s5.assign(n + 1, 0);
    for (std::size_t d = 1; d <= n; ++d) {
        Int d3 = Int(static_cast<unsigned long>(d));
        d3 = d3 * d3 * d3;
        Int d5 = d3 * d * d;
        for (std::size_t m = d; m <= n; m += d) {
            s3[m] += d3;
            s5[m] += d5;
        }
    }
}

/// Number of q-series terms for a target of 2^-bits at |q| = e^{-2 pi im_tau}.
inline std::size_t terms_for(const Real& im_tau, long bits) {
    double it = im_tau.to_double();
    if (it <= 0) throw std::domain_error("terms_for: tau not in the upper half plane");
    return static_cast<std::size_t>(static_cast<double>(bits) * 0.6931471805599453 /
                                    (2 * M_PI * it)) +
           8;
}

} // namespace detail

/// E4, E6 and Delta at q = e^{2 pi i tau}; eta via the pentagonal-number
/// series, Delta = eta^24.
struct EisensteinValues {
    Complex e4, e6, delta;
};

inline EisensteinValues eisenstein_at(const Complex& tau, mpfr_prec_t prec) {
    const Complex q = exp_2pii(tau);
    const std::size_t n = detail::terms_for(tau.im, static_cast<long>(prec) + 32) + 4;
    std::vector<Int> s3, s5;
    detail::sigma_tables(n, s3, s5);
    Complex e4 = Complex::of(1, 0, prec), e6 = e4;
    Complex qn = Complex::of(1, 0, prec);
    for (std::size_t k = 1; k <= n; ++k) {
        qn = qn * q;
        e4 += qn * Real::of(Int(s3[k] * 240), prec);
        e6 -= qn * Real::of(Int(s5[k] * 504), prec);
    }
    // eta(tau)/q^{1/24} = sum_k (-1)^k q^{k(3k-1)/2}, pentagonal exponents
    auto qpow = [&](long e) {
        Complex r = Complex::of(1, 0, prec), b = q;
        while (e) {
            if (e & 1) r = r * b;
            b = sqr(b);
            e >>= 1;
        }
        return r;
    };
    Complex eta = Complex::of(1, 0, prec);
    for (long k = 1;; ++k) {
        const long g1 = k * (3 * k - 1) / 2, g2x = k * (3 * k + 1) / 2;
        if (static_cast<std::size_t>(g1) > n + 2) break;
        Complex term = qpow(g1) + qpow(g2x);
        if (k % 2 == 1)
            eta -= term;
        else
            eta += term;
    }
    Complex eta24 = eta;
    for (int i = 0; i < 4; ++i) eta24 = sqr(eta24); // eta^16
    Complex delta = eta24 * sqr(sqr(eta)) * sqr(sqr(eta)) * q; // eta^16 * eta^8 * q
    return {e4, e6, delta};
}

/// Klein j-invariant j(tau) = E4^3 / Delta.
inline Complex j_tau(const Complex& tau, mpfr_prec_t prec) {
    EisensteinValues ev = eisenstein_at(tau, prec);
    Complex e43 = ev.e4 * sqr(ev.e4);
    return e43 / ev.delta;
}

/// Period lattice by AGM on the roots of 4x^3 - g2 x - g3 (both discriminant
/// signs). The construction is verified against the curve by reconstructing
/// g2, g3 from Eisenstein series of the lattice to 2^(-prec/2) relative error.
inline PeriodLattice period_lattice(const CurveSpec& E, mpfr_prec_t prec) {
    const Real g2 = Real::of(E.c4(), prec) / 12;
    const Real g3 = Real::of(E.c6(), prec) / 216;
    const Real pi = Real::pi(prec);
    Complex omega1(prec), omega2(prec);
    if (E.discriminant() > 0) {
        auto r = detail::cubic_real_roots(Real::of(0L, prec), -g2, -g3, prec);
        if (r.size() != 3) throw numeric_error("period lattice: expected three real roots");
        const Real &e1 = r[0], &e2 = r[1], &e3 = r[2];
        omega1 = Complex(pi / agm(sqrt(e1 - e3), sqrt(e1 - e2)), Real::of(0L, prec));
        omega2 = Complex(Real::of(0L, prec), pi / agm(sqrt(e1 - e3), sqrt(e2 - e3)));
    } else {
        auto r = detail::cubic_real_roots(Real::of(0L, prec), -g2, -g3, prec);
        if (r.size() != 1) throw numeric_error("period lattice: expected one real root");
        const Real& e1 = r[0];
        const Real R = sqrt((e1 * e1 * 3) - g2 / 4);
        const Real w1 = pi * 2 / agm(sqrt(R) * 2, sqrt(R * 2 + e1 * 3));
        const Real w2im = pi / agm(sqrt(R) * 2, sqrt(R * 2 - e1 * 3));
        omega1 = Complex(w1, Real::of(0L, prec));
        omega2 = Complex(w1 / 2, w2im);
    }
    PeriodLattice lat{E, omega1, omega2, g2, g3};
    // internal consistency contract
    EisensteinValues ev = eisenstein_at(lat.tau(), prec);
    Real scale2 = pow_ui(pi * 2 / omega1.re, 4);
    Real scale3 = pow_ui(pi * 2 / omega1.re, 6);
    Real g4r = abs(ev.e4 * scale2 / Real::of(12L, prec) - Complex(g2, Real::of(0L, prec)));
    Real g6r = abs(ev.e6 * scale3 / Real::of(216L, prec) - Complex(g3, Real::of(0L, prec)));
    Real tol = Real::pow2(-static_cast<long>(prec) / 2, prec) * (abs(g2) + abs(g3) + 1);
    if (g4r > tol || g6r > tol)
        throw numeric_error("period lattice: g2/g3 reconstruction check failed");
    return lat;
}

/// Relative residual of the lattice's Eisenstein reconstruction of (g2, g3);
/// exposed for the precision-scaling tests.
inline Real lattice_reconstruction_residual(const PeriodLattice& lat) {
    const mpfr_prec_t prec = lat.prec();
    EisensteinValues ev = eisenstein_at(lat.tau(), prec);
    Real pi = Real::pi(prec);
    Real r2 = abs(ev.e4 * pow_ui(pi * 2 / lat.omega1.re, 4) / Real::of(12L, prec) -
                  Complex(lat.g2, Real::of(0L, prec)));
    Real r3 = abs(ev.e6 * pow_ui(pi * 2 / lat.omega1.re, 6) / Real::of(216L, prec) -
                  Complex(lat.g3, Real::of(0L, prec)));
    Real denom = abs(lat.g2) + abs(lat.g3) + 1;
    return (r2 + r3) / denom;
}

// ---------------------------------------------------------------------------
// lattice coordinates

/// Coordinates (s, t) of z = s omega1 + t omega2 with s, t real.
inline std::pair<Real, Real> lattice_coords(const PeriodLattice& lat, const Complex& z) {
    Complex w = z / lat.omega1;
    Complex tau = lat.tau();
    Real t = w.im / tau.im;
    Real s = w.re - t * tau.re;
    return {s, t};
}

/// Coordinate distance of z from the lattice: max over both coordinates of
/// the distance to the nearest integer. Scale-free membership measure.
inline Real lattice_coord_dist(const PeriodLattice& lat, const Complex& z) {
    auto [s, t] = lattice_coords(lat, z);
    Real ds = abs(s - Real::of(s.round_to_int(), lat.prec()));
    Real dt = abs(t - Real::of(t.round_to_int(), lat.prec()));
    return ds > dt ? ds : dt;
}

/// z reduced modulo the lattice to coordinates in [-1/2, 1/2).
inline Complex lattice_reduce(const PeriodLattice& lat, const Complex& z) {
    auto [s, t] = lattice_coords(lat, z);
    Int rs = s.round_to_int(), rt = t.round_to_int();
    return z - lat.omega1 * Real::of(rs, lat.prec()) - lat.omega2 * Real::of(rt, lat.prec());
}

// ---------------------------------------------------------------------------
// modular parametrization

/// tau attached to a Heegner form: (-b + i sqrt(p)) / (2a).
struct HeegnerTau {
    QuadForm form;
    Complex tau;
};

inline HeegnerTau tau_of_form(const QuadForm& f, mpfr_prec_t prec) {
    Int p = -f.disc();
    Real sp = sqrt(Real::of(p, prec));
    Real two_a = Real::of(f.a, prec) * 2;
    return {f, Complex(Real::of(Int(-f.b), prec) / two_a, sp / two_a)};
}

inline HeegnerTau tau_of_form(const HeegnerForm& hf, mpfr_prec_t prec) {
    return tau_of_form(hf.form, prec);
}

struct ModularImage {
    Complex z;
    Real tail_bound;
    std::size_t terms_used = 0;
};

/// Truncation length M such that sum_{n>M} n e^{-2 pi n Im tau} < 2^-(prec/2),
/// the coefficient bound being |a_n| <= n.
inline std::size_t qexp_required_terms(const Real& im_tau, mpfr_prec_t prec,
                                       std::size_t max_terms) {
    const mpfr_prec_t wp = 64;
    Real x = exp(Real::pi(wp) * (-2) * Real::of(im_tau.to_double(), wp));
    Real target = Real::pow2(-static_cast<long>(prec) / 2, wp);
    Real one = Real::of(1L, wp);
    auto tail = [&](std::size_t M) {
        // sum_{n>M} n x^n = x^{M+1} ((M+1) - M x) / (1-x)^2
        Real xm = pow_ui(x, static_cast<unsigned long>(M + 1));
        Real num = Real::of(static_cast<long>(M + 1), wp) -
                   Real::of(static_cast<long>(M), wp) * x;
        Real den = (one - x) * (one - x);
        return xm * num / den;
    };
    std::size_t M = 8;
    while (M <= max_terms) {
        if (tail(M) < target) {
            // refine downwards, then add slack for the 64-bit tail estimate
            while (M > 8 && tail(M - 1) < target) --M;
            return std::min(M + 2, max_terms);
        }
        M += M / 4 + 1;
    }
    throw resource_error(
        "q-expansion truncation exceeds the term budget; Im(tau) is too small "
        "(use a Gamma_0(N)-reduced representative or raise max_qexp_terms)");
}

/// z(tau) = sum_{n<=M} (a_n / n) e^{2 pi i n tau}, M per the tail rule.
inline ModularImage eval_modular_map(const ModularCoeffs& coeffs, const Complex& tau,
                                     mpfr_prec_t prec, std::size_t max_terms) {
    if (!(tau.im > 0)) throw std::domain_error("eval_modular_map: Im tau must be positive");
    std::size_t M = qexp_required_terms(tau.im, prec, max_terms);
    if (coeffs.upto() < M)
        throw std::domain_error("eval_modular_map: coefficient array shorter than required " +
                                std::to_string(M) + " terms");
    const Complex q = exp_2pii(tau);
    Complex z(prec), qn = Complex::of(1, 0, prec);
    for (std::size_t n = 1; n <= M; ++n) {
        qn = qn * q;
        if (coeffs.a[n] == 0) continue;
        z += qn * (Real::of(static_cast<long>(coeffs.a[n]), prec) /
                   static_cast<long>(n));
    }
    // certified tail bound, recomputed at working precision
    Real x = exp(Real::pi(prec) * (-2) * tau.im);
    Real xm = pow_ui(x, static_cast<unsigned long>(M + 1));
    Real one = Real::of(1L, prec);
    Real tail = xm * (Real::of(static_cast<long>(M + 1), prec) -
                      Real::of(static_cast<long>(M), prec) * x) /
                ((one - x) * (one - x));
    return {z, tail, M};
}

inline ModularImage eval_modular_map(const ModularCoeffs& coeffs, const HeegnerTau& t,
                                     mpfr_prec_t prec, std::size_t max_terms) {
    return eval_modular_map(coeffs, t.tau, prec, max_terms);
}

// ---------------------------------------------------------------------------
// Weierstrass functions and the exponential map

struct CurvePointC {
    bool infinity = false;
    Complex x, y;
};

/// wp(z) and wp'(z) for the lattice, via q-expansions in u = e^{2 pi i z/omega1}.
inline std::pair<Complex, Complex> weierstrass_p(const PeriodLattice& lat, const Complex& z) {
    const mpfr_prec_t prec = lat.prec();
    const Complex tau = lat.tau();
    const Complex q = exp_2pii(tau);
    Complex zr = lattice_reduce(lat, z);
    Complex u = exp_2pii(zr / lat.omega1);
    const Complex one = Complex::of(1, 0, prec);

    Complex s = Complex(Real::of(1L, prec) / 12, Real::of(0L, prec));
    {
        Complex d = one - u;
        s += u / sqr(d);
    }
    Complex sp = u * (one + u) / (sqr(one - u) * (one - u));
    const std::size_t nmax = detail::terms_for(tau.im, static_cast<long>(prec) + 32) + 4;
    Complex qn = one;
    for (std::size_t n = 1; n <= nmax; ++n) {
        qn = qn * q;
        Complex qu = qn * u;
        Complex qiu = qn / u;
        Complex d1 = one - qu, d2 = one - qiu, d3 = one - qn;
        s += qu / sqr(d1) + qiu / sqr(d2) - (qn / sqr(d3)) * Real::of(2L, prec);
        sp += qu * (one + qu) / (sqr(d1) * d1) - qiu * (one + qiu) / (sqr(d2) * d2);
    }
    const Real pi = Real::pi(prec);
    // (2 pi i / omega1)^2 and ^3 with omega1 real
    Complex f2 = Complex(Real::of(0L, prec), pi * 2) / lat.omega1;
    Complex f2sq = sqr(f2);
    return {f2sq * s, f2sq * f2 * sp};
}

/// The map C/Lambda -> E(C) in the curve's own coordinates. z within
/// tolerance of a lattice point yields the point-at-infinity marker.
inline CurvePointC elliptic_exp(const PeriodLattice& lat, const Complex& z) {
    const mpfr_prec_t prec = lat.prec();
    Real near = lattice_coord_dist(lat, z);
    if (near < Real::pow2(-static_cast<long>(prec) / 3, prec)) return {true, Complex(prec), Complex(prec)};
    auto [X, Y] = weierstrass_p(lat, z);
    const CurveSpec& E = lat.curve;
    Complex x = X - Complex(Real::of(E.b2(), prec) / 12, Real::of(0L, prec));
    Complex a1x = x * Real::of(E.a1, prec);
    Complex y = (Y - a1x - Complex(Real::of(E.a3, prec), Real::of(0L, prec))) / Real::of(2L, prec);
    // curve-equation contract
    Complex lhs = sqr(y) + x * y * Real::of(E.a1, prec) + y * Real::of(E.a3, prec);
    Complex rhs = x * sqr(x) + sqr(x) * Real::of(E.a2, prec) + x * Real::of(E.a4, prec) +
                  Complex(Real::of(E.a6, prec), Real::of(0L, prec));
    Real scale = abs(rhs) + abs(lhs) + 1;
    if (abs(lhs - rhs) / scale > Real::pow2(-static_cast<long>(prec) / 2, prec))
        throw numeric_error("elliptic_exp: curve equation residual too large");
    return {false, x, y};
}

// ---------------------------------------------------------------------------
// trace point

struct TracePoint {
    Complex z;                          // sum of per-class images, mod lattice
    std::vector<ModularImage> images;   // canonical class order
    std::vector<QuadForm> eval_forms;   // Gamma_0(N)-representatives used
    std::size_t distinct_images = 0;
    int conj_sign = 0;                  // +1 if conj(z) = z, -1 if conj(z) = -z (mod lattice)
};

/// Sum of the modular images over the full class orbit of Heegner forms,
/// evaluated at Gamma_0(N)-representatives maximizing Im tau and summed in
/// canonical class order. Conjugation stability of the sum modulo the
/// lattice is asserted to 2^(-prec/4).
inline TracePoint trace_point(const PeriodLattice& lat, const ModularCoeffs& coeffs,
                              const std::vector<HeegnerForm>& forms, const Int& N,
                              mpfr_prec_t prec, std::size_t max_terms,
                              unsigned threads = 1) {
    TracePoint out;
    out.eval_forms.reserve(forms.size());
    for (const auto& hf : forms) out.eval_forms.push_back(gamma0_optimize(hf, N));
    out.images = parallel_map_ordered<ModularImage>(
        out.eval_forms.size(),
        [&](std::size_t i) {
            HeegnerTau t = tau_of_form(out.eval_forms[i], prec);
            return eval_modular_map(coeffs, t, prec, max_terms);
        },
        threads);
    Complex z(prec);
    for (const auto& im : out.images) z += im.z;
    out.z = lattice_reduce(lat, z);

    const Real tol = Real::pow2(-static_cast<long>(prec) / 4, prec);
    Real dplus = lattice_coord_dist(lat, conj(out.z) - out.z);
    Real dminus = lattice_coord_dist(lat, conj(out.z) + out.z);
    if (dplus <= dminus && dplus < tol)
        out.conj_sign = 1;
    else if (dminus < tol)
        out.conj_sign = -1;
    else
        throw numeric_error("trace point is not conjugation-stable modulo the lattice");

    // distinct per-class images modulo the lattice (experimental data)
    std::vector<Complex> reps;
    for (const auto& im : out.images) {
        bool found = false;
        for (const auto& r : reps)
            if (lattice_coord_dist(lat, im.z - r) < tol) {
                found = true;
                break;
            }
        if (!found) reps.push_back(im.z);
    }
    out.distinct_images = reps.size();
    return out;
}

// ---------------------------------------------------------------------------
// recognition

/// Continued-fraction rational reconstruction of a real value: the best
/// convergent p/q within the height cap (|p|, q <= 10^height_cap), accepted
/// when its residual |value - p/q| is below 2^(-prec/4). Failure is a value,
/// not an error.
inline std::optional<Rat> recognize(const Real& value, unsigned height_cap) {
    const mpfr_prec_t prec = value.prec();
    Real tol = Real::pow2(-static_cast<long>(prec) / 4, prec);
    Int cap;
    mpz_ui_pow_ui(cap.get_mpz_t(), 10, height_cap);
    Int pm1 = 1, p0 = value.floor_to_int();
    Int qm1 = 0, q0 = 1;
    Real x = value;
    std::optional<Rat> best;
    Real best_err(prec);
    for (int it = 0; it < 500; ++it) {
        if (abs(p0) > cap || q0 > cap) break;
        Rat cand = make_rat(p0, q0);
        Real err = abs(value - Real::of(cand, prec));
        if (!best || err < best_err) {
            best = cand;
            best_err = err;
        }
        if (err.is_zero()) break;
        Real frac = x - Real::of(x.floor_to_int(), prec);
        if (frac.is_zero()) break;
        x = Real::of(1L, prec) / frac;
        Int a = x.floor_to_int();
        Int p1 = a * p0 + pm1, q1 = a * q0 + qm1;
        pm1 = p0;
        qm1 = q0;
        p0 = p1;
        q0 = q1;
    }
    if (best && best_err < tol) return best;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Hilbert class polynomial

struct ClassPolynomial {
    Int p;
    std::vector<Int> coeffs; // ascending degree, monic
    double max_residual_log2;
    mpfr_prec_t working_prec;

    std::size_t degree() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }
};

/// Monic integer polynomial prod over reduced forms (X - j(tau_form)).
/// Conjugate classes are multiplied pairwise so all arithmetic stays real;
/// working precision is raised above the session precision by the classical
/// coefficient-size bound pi sqrt(p) sum(1/a) so that rounding to integers
/// is meaningful at any session precision.
inline ClassPolynomial hilbert_class_poly(const Int& p, mpfr_prec_t session_prec) {
    FormClassGroup G(p);
    const auto& forms = G.reduced_forms();
    double inv_a_sum = 0;
    for (const auto& f : forms) inv_a_sum += 1.0 / f.a.get_d();
    const double bound_bits = M_PI * std::sqrt(p.get_d()) * inv_a_sum / std::log(2.0);
    const mpfr_prec_t wp = static_cast<mpfr_prec_t>(bound_bits) + 2 * G.h() +
                           session_prec / 2 + 64;

    std::vector<Real> poly;
    poly.emplace_back(Real::of(1L, wp));
    auto mul_linear = [&](const Real& r) {
        // poly *= (X - r)
        std::vector<Real> out(poly.size() + 1, Real(wp));
        for (std::size_t i = 0; i < poly.size(); ++i) {
            out[i] -= poly[i] * r;
            out[i + 1] += poly[i];
        }
        poly = std::move(out);
    };
    auto mul_quadratic = [&](const Real& b, const Real& c) {
        // poly *= (X^2 + b X + c)
        std::vector<Real> out(poly.size() + 2, Real(wp));
        for (std::size_t i = 0; i < poly.size(); ++i) {
            out[i] += poly[i] * c;
            out[i + 1] += poly[i] * b;
            out[i + 2] += poly[i];
        }
        poly = std::move(out);
    };

    for (const auto& f : forms) {
        if (f.b < 0) continue; // covered by its conjugate
        const bool ambiguous = (f.b == 0 || f.b == f.a || f.a == f.c);
        Complex j = j_tau(tau_of_form(f, wp).tau, wp);
        if (ambiguous) {
            mul_linear(j.re);
        } else {
            mul_quadratic(-(j.re * 2), abs2(j));
        }
    }
    if (poly.size() != G.h() + 1)
        throw internal_error("class polynomial degree mismatch");

    ClassPolynomial out;
    out.p = p;
    out.working_prec = wp;
    double max_res = -1e9;
    for (const auto& cf : poly) {
        Int n = cf.round_to_int();
        Real res = abs(cf - Real::of(n, wp));
        out.coeffs.push_back(n);
        double lg = res.is_zero() ? -1e9 : static_cast<double>(exponent_of(res));
        max_res = std::max(max_res, lg);
    }
    out.max_residual_log2 = max_res;
    if (max_res > -static_cast<double>(session_prec) / 4)
        throw precision_error("class polynomial coefficients too far from integers; raise prec_bits");
    return out;
}

} // namespace heegner
