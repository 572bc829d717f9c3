#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "heegner/analytic.hpp"
#include "heegner/curve.hpp"

namespace heegner {

/// A rational point on a curve, kept on the curve by construction. The
/// default-constructed marker is the identity O.
struct RationalPoint {
    bool infinity = true;
    Rat x, y;

    static RationalPoint identity() { return RationalPoint{}; }

    static RationalPoint on(const CurveSpec& E, Rat x, Rat y) {
        RationalPoint P;
        P.infinity = false;
        P.x = std::move(x);
        P.y = std::move(y);
        if (!satisfies_curve(E, P.x, P.y))
            throw std::domain_error("point does not satisfy the curve equation");
        return P;
    }

    static bool satisfies_curve(const CurveSpec& E, const Rat& x, const Rat& y) {
        Rat lhs = y * y + Rat(E.a1) * x * y + Rat(E.a3) * y;
        Rat rhs = x * x * x + Rat(E.a2) * x * x + Rat(E.a4) * x + Rat(E.a6);
        return lhs == rhs;
    }

    bool operator==(const RationalPoint& o) const {
        if (infinity || o.infinity) return infinity == o.infinity;
        return x == o.x && y == o.y;
    }
};

inline RationalPoint negate(const CurveSpec& E, const RationalPoint& P) {
    if (P.infinity) return P;
    RationalPoint R;
    R.infinity = false;
    R.x = P.x;
    R.y = -P.y - Rat(E.a1) * P.x - Rat(E.a3);
    return R;
}

/// Exact chord-tangent addition.
inline RationalPoint add_points(const CurveSpec& E, const RationalPoint& P,
                                const RationalPoint& Q) {
    if (P.infinity) return Q;
    if (Q.infinity) return P;
    if (P.x == Q.x) {
        Rat psi = P.y + Q.y + Rat(E.a1) * Q.x + Rat(E.a3);
        if (psi == 0) return RationalPoint::identity();
    }
    Rat lam, nu;
    if (P.x == Q.x) {
        Rat num = Rat(3) * P.x * P.x + Rat(2) * Rat(E.a2) * P.x + Rat(E.a4) -
                  Rat(E.a1) * P.y;
        Rat den = Rat(2) * P.y + Rat(E.a1) * P.x + Rat(E.a3);
        lam = num / den;
    } else {
        lam = (Q.y - P.y) / (Q.x - P.x);
    }
    nu = P.y - lam * P.x;
    Rat x3 = lam * lam + Rat(E.a1) * lam - Rat(E.a2) - P.x - Q.x;
    Rat y3 = -(lam + Rat(E.a1)) * x3 - nu - Rat(E.a3);
    RationalPoint R;
    R.infinity = false;
    R.x = x3;
    R.y = y3;
    return R;
}

inline RationalPoint mul_point(const CurveSpec& E, long n, RationalPoint P) {
    if (n < 0) {
        P = negate(E, P);
        n = -n;
    }
    RationalPoint R = RationalPoint::identity();
    while (n) {
        if (n & 1) R = add_points(E, R, P);
        P = add_points(E, P, P);
        n >>= 1;
    }
    return R;
}

/// Torsion test by the order bound on rational torsion: nP = O for some n <= 12.
inline bool is_torsion(const CurveSpec& E, const RationalPoint& P) {
    if (P.infinity) return true;
    RationalPoint Q = P;
    for (int n = 2; n <= 12; ++n) {
        Q = add_points(E, Q, P);
        if (Q.infinity) return true;
    }
    return false;
}

namespace detail {

inline Int ord_at(const Int& v, const Int& p) {
    if (v == 0) return Int(1) << 30;
    Int n = v, e = 0;
    while (mpz_divisible_p(n.get_mpz_t(), p.get_mpz_t())) {
        n /= p;
        ++e;
    }
    return e;
}

/// True when P reduces to a nonsingular point of the curve mod p. Points in
/// the formal group (p | denominator) are always nonsingular.
inline bool nonsingular_at(const CurveSpec& E, const RationalPoint& P, const Int& p) {
    if (P.infinity) return true;
    Int xden = P.x.get_den(), yden = P.y.get_den();
    if (mpz_divisible_p(xden.get_mpz_t(), p.get_mpz_t())) return true;
    Int xm = mod_pos(Int(P.x.get_num()) * inv_mod(mod_pos(xden, p), p), p);
    Int ym = mod_pos(Int(P.y.get_num()) * inv_mod(mod_pos(yden, p), p), p);
    Int fy = mod_pos(2 * ym + E.a1 * xm + E.a3, p);
    Int fx = mod_pos(E.a1 * ym - 3 * xm * xm - 2 * E.a2 * xm - E.a4, p);
    return !(fx == 0 && fy == 0);
}

/// Least m >= 1 with mP on the identity-component/nonsingular locus at every
/// bad prime; the correction-free height decomposition applies to mP.
inline long good_reduction_multiple(const CurveSpec& E, const RationalPoint& P) {
    long m = 1;
    Int disc = E.discriminant();
    for (const Int& p : E.bad_primes()) {
        long bound = std::max<long>(4, ord_at(disc, p).get_si() + 1);
        RationalPoint Q = P;
        long k = 1;
        while (!nonsingular_at(E, Q, p)) {
            Q = add_points(E, Q, P);
            if (++k > bound)
                throw internal_error("no nonsingular multiple within the component bound");
        }
        m = std::lcm(m, k);
    }
    return m;
}

/// Archimedean contribution via the shifted Tate series: with xs = x + c and
/// c chosen so xs >= 1 on the whole real locus,
///   lambda(P) = (1/2) [ log xs(P) + sum_{n>=0} 4^{-n-1} log zs_n ],
/// zs_n = t^4 (phi2 + c psi2^2) evaluated along the doubling orbit. Satisfies
/// 4 lambda(P) - lambda(2P) = log |psi2(P)| exactly, which together with the
/// denominator part makes the total exactly quadratic under doubling.
inline Real lambda_archimedean(const CurveSpec& E, const Rat& x_exact, mpfr_prec_t prec) {
    const Real b2 = Real::of(E.b2(), prec), b4 = Real::of(E.b4(), prec),
               b6 = Real::of(E.b6(), prec), b8 = Real::of(E.b8(), prec);
    auto roots = cubic_real_roots(b2, b4 * 2, b6, prec);
    if (roots.empty()) throw numeric_error("height: no real two-division root");
    Real emin = roots.back();
    Real c = Real::of(1L, prec) - emin;
    Real x = Real::of(x_exact, prec);
    Real sum = log(x + c);
    Real quarter_pow = Real::of(1L, prec);
    const long iters = static_cast<long>(prec) / 2 + 24;
    for (long n = 0; n < iters; ++n) {
        quarter_pow = quarter_pow / 4;
        Real ps = ((x * 4 + b2) * x + b4 * 2) * x + b6;        // psi2^2
        Real ph = ((x * x) - b4) * (x * x) - (b6 * x) * 2 - b8; // phi2
        Real xt = x + c;
        Real zt = (ph + c * ps) / pow_ui(xt, 4);
        if (!(zt > 0)) throw numeric_error("height: Tate series hit a torsion orbit");
        sum += log(zt) * quarter_pow;
        x = ph / ps;
    }
    return sum / 2;
}

} // namespace detail

struct HeightReport {
    RationalPoint point;
    Real hhat;
    Real naive;
    bool torsion = false;
    std::string method;
};

/// Canonical (Neron-Tate) height, normalized so that
/// hhat(P) = lim h(x(2^n P)) / 4^n  (hhat of the generator of 37a1 = 0.05111...).
/// Decomposition: pass to a multiple mP with everywhere-nonsingular reduction;
/// there hhat(mP) = 2 lambda_arch(mP) + log den(x(mP)), and hhat(P) scales by m^2.
inline HeightReport canonical_height(const CurveSpec& E, const RationalPoint& P,
                                     mpfr_prec_t prec) {
    if (P.infinity) throw std::domain_error("canonical_height: identity element");
    HeightReport rep;
    rep.point = P;
    rep.method = "tate-series";
    Int xnum_abs = abs(Int(P.x.get_num()));
    Int xden = P.x.get_den();
    rep.naive = log(Real::of(xnum_abs > xden ? xnum_abs : xden, prec));
    rep.hhat = Real::of(0L, prec);
    rep.torsion = is_torsion(E, P);
    if (rep.torsion) return rep;

    long m = detail::good_reduction_multiple(E, P);
    RationalPoint Q = mul_point(E, m, P);
    Real lam = detail::lambda_archimedean(E, Q.x, prec);
    Real den_part = log(Real::of(Int(Q.x.get_den()), prec));
    rep.hhat = (lam * 2 + den_part) / static_cast<long>(m * m);
    return rep;
}

struct GramReport {
    std::vector<std::vector<Real>> matrix;
    Real det;
    bool independent = false;
    double tolerance = 1e-6;
};

/// Height pairing matrix <P,Q> = (hhat(P+Q) - hhat(P) - hhat(Q))/2, its
/// determinant, and the independence verdict det > tolerance. The raw values
/// are always reported alongside the verdict.
inline GramReport gram_regulator(const CurveSpec& E, const std::vector<RationalPoint>& pts,
                                 mpfr_prec_t prec, double tolerance = 1e-6) {
    const std::size_t n = pts.size();
    if (n == 0) throw std::domain_error("gram_regulator: empty point list");
    std::vector<Real> h(n, Real(prec));
    for (std::size_t i = 0; i < n; ++i) {
        if (pts[i].infinity || is_torsion(E, pts[i]))
            throw std::domain_error("gram_regulator: points must be non-torsion");
        h[i] = canonical_height(E, pts[i], prec).hhat;
    }
    GramReport rep;
    rep.tolerance = tolerance;
    rep.matrix.assign(n, std::vector<Real>(n, Real(prec)));
    for (std::size_t i = 0; i < n; ++i) {
        rep.matrix[i][i] = h[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            RationalPoint S = add_points(E, pts[i], pts[j]);
            Real hs = S.infinity ? Real::of(0L, prec) : canonical_height(E, S, prec).hhat;
            Real pair = (hs - h[i] - h[j]) / 2;
            rep.matrix[i][j] = pair;
            rep.matrix[j][i] = pair;
        }
    }
    // determinant by Gaussian elimination with partial pivoting
    auto a = rep.matrix;
    Real det = Real::of(1L, prec);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (abs(a[r][col]) > abs(a[piv][col])) piv = r;
        if (piv != col) {
            std::swap(a[piv], a[col]);
            det = -det;
        }
        if (a[col][col].is_zero()) {
            det = Real::of(0L, prec);
            break;
        }
        det *= a[col][col];
        for (std::size_t r = col + 1; r < n; ++r) {
            Real f = a[r][col] / a[col][col];
            for (std::size_t cc = col; cc < n; ++cc) a[r][cc] -= f * a[col][cc];
        }
    }
    rep.det = det;
    rep.independent = det > Real::of(tolerance, prec);
    return rep;
}

} // namespace heegner
