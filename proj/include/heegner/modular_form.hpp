#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "heegner/curve.hpp"
#include "heegner/parallel.hpp"
#include "heegner/version.hpp"

namespace heegner {

namespace detail {

inline std::uint64_t powmod_u64(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
    unsigned __int128 r = 1, base = b % m;
    while (e) {
        if (e & 1) r = (r * base) % m;
        base = (base * base) % m;
        e >>= 1;
    }
    return static_cast<std::uint64_t>(r);
}

inline std::uint64_t to_u64_mod(const Int& v, std::uint64_t q) {
    Int r = mod_pos(v, Int(static_cast<unsigned long>(q)));
    return r.get_ui();
}

/// #E(F_q), projective points of the reduced Weierstrass model, with a
/// singular point (for bad q) counted once. For odd q the substitution
/// Y = 2y + a1 x + a3 is a bijection, so counting Y^2 = 4x^3+b2x^2+2b4x+b6
/// gives the same total.
inline std::uint64_t count_points(const CurveSpec& E, std::uint64_t q) {
    if (q >> 26) throw resource_error("point count: prime beyond desk-scale bound 2^26");
    if (q == 2) {
        std::uint64_t count = 1;
        for (int x = 0; x < 2; ++x)
            for (int y = 0; y < 2; ++y) {
                Int lhs = Int(y) * y + E.a1 * x * y + E.a3 * y;
                Int rhs = Int(x) * x * x + E.a2 * x * x + E.a4 * x + E.a6;
                if (mod_pos(lhs - rhs, 2) == 0) ++count;
            }
        return count;
    }
    const std::uint64_t b2 = to_u64_mod(E.b2(), q);
    const std::uint64_t b4 = to_u64_mod(E.b4(), q);
    const std::uint64_t b6 = to_u64_mod(E.b6(), q);
    std::vector<std::uint8_t> qr(q, 0);
    for (std::uint64_t t = 0; t < q; ++t) qr[(t * t) % q] = 1;
    std::uint64_t count = 1; // infinity
    for (std::uint64_t x = 0; x < q; ++x) {
        std::uint64_t f = (((4 * x + b2) % q) * x + 2 * b4) % q;
        f = (f * x + b6) % q;
        if (f == 0)
            count += 1;
        else
            count += qr[f] ? 2 : 0;
    }
    return count;
}

} // namespace detail

/// a_q = q + 1 - #E(F_q) for a good prime q, by exhaustive point counting
/// (quadratic-character test per x; q = 2 brute force).
inline std::int64_t ap_good(const CurveSpec& E, std::uint64_t q) {
    if (mpz_divisible_ui_p(E.conductor.get_mpz_t(), q))
        throw std::domain_error("ap_good: prime divides the conductor");
    return static_cast<std::int64_t>(q) + 1 -
           static_cast<std::int64_t>(detail::count_points(E, q));
}

/// a_q for a bad prime q: q + 1 - #E(F_q) where the count includes the
/// singular point; the result is +1 (split multiplicative), -1 (non-split)
/// or 0 (additive).
inline std::int64_t ap_bad(const CurveSpec& E, std::uint64_t q) {
    if (!mpz_divisible_ui_p(E.conductor.get_mpz_t(), q))
        throw std::domain_error("ap_bad: prime does not divide the conductor");
    std::int64_t aq = static_cast<std::int64_t>(q) + 1 -
                      static_cast<std::int64_t>(detail::count_points(E, q));
    if (aq < -1 || aq > 1) throw internal_error("ap_bad: value outside {-1,0,1}");
    return aq;
}

/// q-expansion coefficients a_1..a_M of the weight-2 newform attached to E,
/// assembled from prime values by multiplicativity and the Hecke recursion
/// a_{q^{k+1}} = a_q a_{q^k} - q a_{q^{k-1}} at good primes.
struct ModularCoeffs {
    CurveSpec curve;
    std::vector<std::int64_t> a; // index 0 unused; a[1] = 1

    std::size_t upto() const { return a.empty() ? 0 : a.size() - 1; }
};

inline ModularCoeffs compute_coefficients(const CurveSpec& E, std::size_t M,
                                          unsigned threads = 1) {
    if (M < 1) throw std::domain_error("coefficients: M must be >= 1");
    ModularCoeffs out{E, std::vector<std::int64_t>(M + 1, 0)};
    out.a[1] = 1;
    // smallest prime factor sieve
    std::vector<std::uint32_t> spf(M + 1, 0);
    for (std::uint64_t i = 2; i <= M; ++i) {
        if (spf[i]) continue;
        for (std::uint64_t j = i; j <= M; j += i)
            if (!spf[j]) spf[j] = static_cast<std::uint32_t>(i);
    }
    std::vector<std::uint64_t> primes;
    for (std::uint64_t q = 2; q <= M; ++q)
        if (spf[q] == q) primes.push_back(q);
    // point counts for distinct primes are independent; assembly stays ordered
    std::vector<std::int64_t> apv = parallel_map_ordered<std::int64_t>(
        primes.size(),
        [&](std::size_t i) {
            std::uint64_t q = primes[i];
            return mpz_divisible_ui_p(E.conductor.get_mpz_t(), q) ? ap_bad(E, q)
                                                                  : ap_good(E, q);
        },
        threads);
    for (std::size_t i = 0; i < primes.size(); ++i) {
        const std::uint64_t q = primes[i];
        const bool bad = mpz_divisible_ui_p(E.conductor.get_mpz_t(), q);
        const std::int64_t aq = apv[i];
        std::int64_t prev = 1, cur = aq;
        for (std::uint64_t pk = q; pk <= M; pk *= q) {
            out.a[pk] = cur;
            if (pk > M / q) break;
            std::int64_t nxt = bad ? aq * cur : aq * cur - static_cast<std::int64_t>(q) * prev;
            prev = cur;
            cur = nxt;
        }
    }
    for (std::uint64_t n = 2; n <= M; ++n) {
        std::uint64_t q = spf[n], pk = 1, m = n;
        while (m % q == 0) {
            m /= q;
            pk *= q;
        }
        if (m > 1) out.a[n] = out.a[pk] * out.a[m];
    }
    return out;
}

/// Versioned JSON cache, one file per curve label. Reused when it covers the
/// requested range, extended (and rewritten) otherwise.
class CoefficientCache {
public:
    explicit CoefficientCache(std::filesystem::path dir, unsigned threads = 1)
        : dir_(std::move(dir)), threads_(threads) {}

    ModularCoeffs get(const CurveSpec& E, std::size_t M) {
        namespace fs = std::filesystem;
        fs::path file = path_for(E);
        if (fs::exists(file)) {
            try {
                std::ifstream in(file);
                nlohmann::json j;
                in >> j;
                if (j.at("version") == 1 && j.at("curve") == E.inline_form()) {
                    auto arr = j.at("a").get<std::vector<std::int64_t>>();
                    if (arr.size() >= M + 1) {
                        arr.resize(M + 1);
                        return ModularCoeffs{E, std::move(arr)};
                    }
                }
            } catch (const std::exception&) {
                // unreadable cache entries are recomputed
            }
        }
        ModularCoeffs c = compute_coefficients(E, M, threads_);
        fs::create_directories(dir_);
        nlohmann::json j;
        j["version"] = 1;
        j["tool_version"] = kVersion;
        j["curve"] = E.inline_form();
        j["label"] = E.label;
        j["M"] = M;
        j["a"] = c.a;
        std::ofstream out(file);
        out << j.dump() << "\n";
        return c;
    }

private:
    std::filesystem::path path_for(const CurveSpec& E) const {
        std::string name = E.label.empty() ? E.inline_form() : E.label;
        for (char& ch : name)
            if (ch == '/' || ch == ',' || ch == ' ') ch = '_';
        return dir_ / ("anq_" + name + ".json");
    }

    std::filesystem::path dir_;
    unsigned threads_;
};

} // namespace heegner
