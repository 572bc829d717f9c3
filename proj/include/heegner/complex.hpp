#pragma once

#include "heegner/real.hpp"

namespace heegner {

/// Complex number over Real; precision travels with the parts.
struct Complex {
    Real re, im;

    explicit Complex(mpfr_prec_t prec = 64) : re(prec), im(prec) {}
    Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}

    static Complex of(long r, long i, mpfr_prec_t prec) {
        return {Real::of(r, prec), Real::of(i, prec)};
    }
    mpfr_prec_t prec() const { return std::max(re.prec(), im.prec()); }

    friend Complex operator+(const Complex& a, const Complex& b) {
        return {a.re + b.re, a.im + b.im};
    }
    friend Complex operator-(const Complex& a, const Complex& b) {
        return {a.re - b.re, a.im - b.im};
    }
    friend Complex operator*(const Complex& a, const Complex& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend Complex operator*(const Complex& a, const Real& b) {
        return {a.re * b, a.im * b};
    }
    friend Complex operator/(const Complex& a, const Real& b) {
        return {a.re / b, a.im / b};
    }
    friend Complex operator/(const Complex& a, const Complex& b) {
        Real d = b.re * b.re + b.im * b.im;
        return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
    }
    Complex operator-() const { return {-re, -im}; }
    Complex& operator+=(const Complex& o) {
        re += o.re;
        im += o.im;
        return *this;
    }
    Complex& operator-=(const Complex& o) {
        re -= o.re;
        im -= o.im;
        return *this;
    }

    friend Complex conj(const Complex& a) { return {a.re, -a.im}; }
    friend Real abs2(const Complex& a) { return a.re * a.re + a.im * a.im; }
    friend Real abs(const Complex& a) { return sqrt(abs2(a)); }

    friend Complex sqr(const Complex& a) {
        return {a.re * a.re - a.im * a.im, a.re * a.im * 2};
    }

    /// exp(a) = e^re (cos im + i sin im)
    friend Complex exp(const Complex& a) {
        Real m = exp(a.re);
        return {m * cos(a.im), m * sin(a.im)};
    }
};

/// e^{2*pi*i*x} with x real, reducing x mod 1 first so that x and x+1 give
/// bit-identical results.
inline Complex exp_2pii(const Real& x) {
    const mpfr_prec_t prec = x.prec();
    Real frac = x - Real::of(x.floor_to_int(), prec);
    Real ang = Real::pi(prec) * 2 * frac;
    return {cos(ang), sin(ang)};
}

/// e^{2*pi*i*z} for complex z (frequency-1 character of the upper half plane).
inline Complex exp_2pii(const Complex& z) {
    const mpfr_prec_t prec = z.prec();
    Real r = exp(Real::pi(prec) * (-2) * z.im);
    Complex phase = exp_2pii(z.re);
    return phase * r;
}

} // namespace heegner
