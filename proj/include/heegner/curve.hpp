#pragma once

#include <array>
#include <sstream>
#include <string>
#include <vector>

#include "heegner/arith.hpp"

namespace heegner {

/// An elliptic curve over Q in Weierstrass form
///   y^2 + a1 x y + a3 y = x^3 + a2 x^2 + a4 x + a6,
/// assumed minimal, together with its declared conductor.
struct CurveSpec {
    Int a1, a2, a3, a4, a6;
    Int conductor;
    std::string label;

    CurveSpec(Int a1_, Int a2_, Int a3_, Int a4_, Int a6_, Int n, std::string lab)
        : a1(std::move(a1_)),
          a2(std::move(a2_)),
          a3(std::move(a3_)),
          a4(std::move(a4_)),
          a6(std::move(a6_)),
          conductor(std::move(n)),
          label(std::move(lab)) {
        validate();
    }

    Int b2() const { return a1 * a1 + 4 * a2; }
    Int b4() const { return 2 * a4 + a1 * a3; }
    Int b6() const { return a3 * a3 + 4 * a6; }
    Int b8() const {
        return a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    }
    Int c4() const { return b2() * b2() - 24 * b4(); }
    Int c6() const {
        Int B2 = b2();
        return -B2 * B2 * B2 + 36 * B2 * b4() - 216 * b6();
    }
    Int discriminant() const {
        Int B2 = b2(), B4 = b4(), B6 = b6(), B8 = b8();
        return -B2 * B2 * B8 - 8 * B4 * B4 * B4 - 27 * B6 * B6 + 9 * B2 * B4 * B6;
    }

    /// Distinct primes dividing the conductor, ascending.
    std::vector<Int> bad_primes() const {
        std::vector<Int> out;
        for (const auto& [q, e] : factor(conductor)) out.push_back(q);
        return out;
    }

    std::string inline_form() const {
        std::ostringstream os;
        os << a1 << "," << a2 << "," << a3 << "," << a4 << "," << a6 << ","
           << conductor;
        return os.str();
    }

    bool operator==(const CurveSpec& o) const {
        return a1 == o.a1 && a2 == o.a2 && a3 == o.a3 && a4 == o.a4 &&
               a6 == o.a6 && conductor == o.conductor;
    }

private:
    void validate() const {
        Int disc = discriminant();
        if (disc == 0) throw std::domain_error("curve '" + label + "' is singular");
        if (conductor < 1)
            throw std::domain_error("curve '" + label + "': conductor must be >= 1");
        for (const auto& [q, e] : factor(conductor)) {
            if (!mpz_divisible_p(disc.get_mpz_t(), q.get_mpz_t())) {
                std::ostringstream os;
                os << "curve '" << label << "': conductor prime " << q
                   << " does not divide the discriminant";
                throw std::domain_error(os.str());
            }
        }
    }
};

/// Parses the short inline form "a1,a2,a3,a4,a6,N".
inline CurveSpec parse_inline_curve(const std::string& text, std::string label = "") {
    std::vector<Int> vals;
    std::string cur;
    std::istringstream is(text);
    while (std::getline(is, cur, ',')) {
        cur.erase(0, cur.find_first_not_of(" \t"));
        cur.erase(cur.find_last_not_of(" \t") + 1);
        if (cur.empty()) throw std::domain_error("inline curve: empty field");
        vals.push_back(make_int(cur));
    }
    if (vals.size() != 6)
        throw std::domain_error("inline curve: expected 6 comma-separated integers");
    if (label.empty()) label = "E[" + text + "]";
    return CurveSpec(vals[0], vals[1], vals[2], vals[3], vals[4], vals[5],
                     std::move(label));
}

/// Small table of named curves used in documentation and tests.
inline const std::vector<CurveSpec>& builtin_curves() {
    static const std::vector<CurveSpec> curves = {
        CurveSpec(0, 0, 1, -1, 0, 37, "37a1"),
        CurveSpec(0, 1, 1, 0, 0, 43, "43a1"),
        CurveSpec(1, 0, 0, -2, 1, 61, "61a1"),
        CurveSpec(0, 1, 1, -2, 0, 389, "389a1"),
        CurveSpec(0, -1, 1, -10, -20, 11, "11a1"),
        CurveSpec(0, 0, 1, 0, 0, 27, "27a3"),
    };
    return curves;
}

inline const CurveSpec* find_builtin_curve(const std::string& label) {
    for (const auto& c : builtin_curves())
        if (c.label == label) return &c;
    return nullptr;
}

} // namespace heegner
