#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <sstream>
#include <vector>

#include "heegner/arith.hpp"

namespace heegner {

/// Primitive positive-definite integral binary quadratic form a x^2 + b xy + c y^2.
struct QuadForm {
    Int a, b, c;

    QuadForm(Int a_, Int b_, Int c_) : a(std::move(a_)), b(std::move(b_)), c(std::move(c_)) {
        if (a <= 0 || disc() >= 0)
            throw std::domain_error("quadratic form must be positive definite");
        Int g;
        mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
        if (g != 1) throw std::domain_error("quadratic form must be primitive");
    }

    Int disc() const { return b * b - 4 * a * c; }

    bool is_reduced() const {
        Int ab = abs(b);
        if (!(ab <= a && a <= c)) return false;
        if ((ab == a || a == c) && b < 0) return false;
        return true;
    }

    /// Value a x^2 + b xy + c y^2.
    Int eval(const Int& x, const Int& y) const { return a * x * x + b * x * y + c * y * y; }

    bool operator==(const QuadForm& o) const { return a == o.a && b == o.b && c == o.c; }
    bool operator<(const QuadForm& o) const {
        if (a != o.a) return a < o.a;
        if (b != o.b) return b < o.b;
        return c < o.c;
    }

    std::string str() const {
        std::ostringstream os;
        os << "(" << a << "," << b << "," << c << ")";
        return os.str();
    }
};

/// Unique reduced representative of the proper equivalence class of f.
/// |b| <= a <= c, with b >= 0 whenever |b| = a or a = c.
inline QuadForm reduce(QuadForm f) {
    for (int guard = 0; guard < 100000; ++guard) {
        // normalize: bring b into (-a, a]
        Int r = mod_pos(f.b, 2 * f.a); // [0, 2a)
        if (r > f.a) r -= 2 * f.a;     // (-a, a]
        Int k = (r - f.b) / (2 * f.a);
        Int b1 = f.b + 2 * k * f.a;
        Int c1 = f.a * k * k + f.b * k + f.c;
        f = QuadForm(f.a, b1, c1);
        if (f.a < f.c || (f.a == f.c && f.b >= 0)) return f;
        f = QuadForm(f.c, -f.b, f.a); // rho step
    }
    throw internal_error("reduce: did not terminate");
}

/// Gauss composition of forms of equal discriminant; returns the reduced
/// representative of the product class. Identity is the principal form,
/// the inverse of (a, b, c) is the class of (a, -b, c).
inline QuadForm compose(const QuadForm& f1, const QuadForm& f2) {
    if (f1.disc() != f2.disc())
        throw std::domain_error("compose: discriminant mismatch");
    // general composition via two extended gcds (Cohen, Alg. 5.4.7)
    Int s = (f1.b + f2.b) / 2;
    Int g, u0, v0, d, v1, w;
    mpz_gcdext(g.get_mpz_t(), u0.get_mpz_t(), v0.get_mpz_t(), f1.a.get_mpz_t(),
               f2.a.get_mpz_t());
    mpz_gcdext(d.get_mpz_t(), v1.get_mpz_t(), w.get_mpz_t(), g.get_mpz_t(),
               s.get_mpz_t());
    Int v = v0 * v1;
    Int a2d = f2.a / d;
    Int a3 = (f1.a * a2d) / d;
    Int t = ((s - f2.b) * v - w * f2.c) * a2d * 2;
    Int b3 = f2.b + t;
    Int num = b3 * b3 - f1.disc();
    Int c3 = num / (4 * a3);
    return reduce(QuadForm(a3, b3, c3));
}

inline QuadForm principal_form(const Int& p) {
    // discriminant -p with p = 3 (mod 4)
    return QuadForm(1, 1, (1 + p) / 4);
}

inline QuadForm inverse_form(const QuadForm& f) {
    return reduce(QuadForm(f.a, -f.b, f.c));
}

/// The form class group of discriminant -p (p prime, p = 3 mod 4), realized
/// as the list of reduced forms in lexicographic (a, b) order together with
/// composition on class indices.
class FormClassGroup {
public:
    explicit FormClassGroup(const Int& p) : p_(p) {
        if (!is_prime(p)) throw std::domain_error("class group: p must be prime");
        if (mod_pos(p, 4) != 3)
            throw std::domain_error("class group: p must be 3 (mod 4); -p is not a fundamental discriminant otherwise");
        enumerate();
        if (forms_.size() % 2 == 0)
            throw internal_error("class number must be odd for p = 3 (mod 4)");
    }

    const Int& p() const { return p_; }
    Int disc() const { return -p_; }
    std::size_t h() const { return forms_.size(); }
    const std::vector<QuadForm>& reduced_forms() const { return forms_; }
    const QuadForm& form(std::size_t i) const { return forms_.at(i); }

    std::size_t index_of(const QuadForm& reduced) const {
        auto it = index_.find(reduced);
        if (it == index_.end())
            throw std::domain_error("form does not belong to this class group");
        return it->second;
    }

    std::size_t identity() const { return index_of(principal_form(p_)); }

    std::size_t mul(std::size_t i, std::size_t j) const {
        if (table_) return (*table_)[i * forms_.size() + j];
        return index_of(compose(forms_.at(i), forms_.at(j)));
    }

    std::size_t inv(std::size_t i) const { return index_of(inverse_form(forms_.at(i))); }

    std::size_t pow(std::size_t i, Int e) const {
        std::size_t r = identity();
        std::size_t base = i;
        if (e < 0) {
            base = inv(base);
            e = -e;
        }
        while (e > 0) {
            if (mpz_odd_p(e.get_mpz_t())) r = mul(r, base);
            base = mul(base, base);
            e /= 2;
        }
        return r;
    }

    /// Precomputes the full h x h composition table (h^2 compositions).
    void build_table() const {
        if (table_) return;
        const std::size_t n = forms_.size();
        auto tab = std::make_unique<std::vector<std::size_t>>(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                std::size_t k = index_of(compose(forms_[i], forms_[j]));
                (*tab)[i * n + j] = k;
                (*tab)[j * n + i] = k;
            }
        table_ = std::move(tab);
    }
    bool has_table() const { return table_ != nullptr; }

    /// Invariant factor decomposition d_1 | d_2 | ... with prod d_i = h,
    /// computed by element-order counting per Sylow subgroup.
    std::vector<Int> structure() const {
        const std::size_t n = forms_.size();
        if (n == 1) return {};
        if (n > 10000)
            throw resource_error("class group structure: h exceeds brute-force bound 10^4");
        Int h(static_cast<unsigned long>(n));
        // per prime l | h: the partition of the l-Sylow subgroup, found from
        // the counts N_j = #{x : x^(l^j) = 1}
        std::map<Int, std::vector<unsigned>> sylow; // l -> cyclic factor exponents, descending
        for (const auto& [l, e] : factor(h)) {
            std::vector<unsigned> sizes; // s_j = #{factors of order >= l^j}
            unsigned long prev_log = 0;
            Int lj = 1;
            for (unsigned j = 1;; ++j) {
                lj *= l;
                std::size_t count = 0;
                for (std::size_t i = 0; i < n; ++i)
                    if (pow(i, lj) == identity()) ++count;
                unsigned long lg = 0;
                Int c(static_cast<unsigned long>(count));
                while (c > 1) {
                    c /= l;
                    ++lg;
                }
                unsigned long s = lg - prev_log;
                if (s == 0) break;
                sizes.push_back(static_cast<unsigned>(s));
                prev_log = lg;
                if (lg == static_cast<unsigned long>(e)) break;
            }
            // conjugate partition: factor exponents, descending
            std::vector<unsigned> lambda;
            for (unsigned idx = 0; idx < (sizes.empty() ? 0 : sizes[0]); ++idx) {
                unsigned exp = 0;
                for (unsigned s : sizes)
                    if (s > idx) ++exp;
                lambda.push_back(exp);
            }
            sylow[l] = lambda;
        }
        std::size_t parts = 0;
        for (auto& [l, lam] : sylow) parts = std::max(parts, lam.size());
        std::vector<Int> inv_factors(parts, 1);
        for (auto& [l, lam] : sylow)
            for (std::size_t i = 0; i < lam.size(); ++i) {
                Int le;
                mpz_pow_ui(le.get_mpz_t(), l.get_mpz_t(), lam[i]);
                inv_factors[i] *= le; // index 0 = largest factor
            }
        std::reverse(inv_factors.begin(), inv_factors.end()); // ascending d_1 | d_2 | ...
        return inv_factors;
    }

private:
    void enumerate() {
        // all reduced forms of discriminant -p: |b| <= a <= sqrt(p/3)
        Int amax;
        mpz_sqrt(amax.get_mpz_t(), Int(p_ / 3).get_mpz_t());
        for (Int a = 1; a <= amax + 1; ++a) {
            for (Int b = -a + 1; b <= a; ++b) {
                Int num = b * b + p_;
                if (!mpz_divisible_p(num.get_mpz_t(), Int(4 * a).get_mpz_t())) continue;
                Int c = num / (4 * a);
                if (c < a) continue;
                if (a == c && b < 0) continue;
                Int g;
                mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
                mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
                if (g != 1) continue;
                forms_.emplace_back(a, b, c);
            }
        }
        std::sort(forms_.begin(), forms_.end());
        for (std::size_t i = 0; i < forms_.size(); ++i) index_[forms_[i]] = i;
    }

    Int p_;
    std::vector<QuadForm> forms_;
    std::map<QuadForm, std::size_t> index_;
    mutable std::unique_ptr<std::vector<std::size_t>> table_;
};

/// Class number of Q(sqrt(-p)) by reduced-form enumeration.
inline std::size_t class_number(const Int& p) { return FormClassGroup(p).h(); }

} // namespace heegner
