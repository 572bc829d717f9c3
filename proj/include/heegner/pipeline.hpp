#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "heegner/certificate.hpp"

namespace heegner {

struct RunConfig {
    long prec_bits = 256;
    std::size_t max_qexp_terms = 400000;
    std::uint64_t prime_search_budget = 10000000;
    Int class_number_floor = 1;
    double gram_tolerance = 1e-6;
    unsigned threads = 0; // 0 = hardware concurrency
    unsigned recognize_height_cap = 30;
    std::string out_dir = "out";

    void validate() const {
        if (prec_bits < 64) throw std::domain_error("config: prec_bits must be >= 64");
        if (max_qexp_terms == 0 || prime_search_budget == 0)
            throw std::domain_error("config: budgets must be positive");
        if (class_number_floor < 1)
            throw std::domain_error("config: class_number_floor must be >= 1");
    }
    unsigned effective_threads() const { return threads ? threads : default_thread_count(); }
    mpfr_prec_t prec() const { return static_cast<mpfr_prec_t>(prec_bits); }
};

inline RunConfig config_from_json(const json& j) {
    RunConfig cfg;
    if (j.contains("prec_bits")) cfg.prec_bits = j.at("prec_bits").get<long>();
    if (j.contains("max_qexp_terms")) cfg.max_qexp_terms = j.at("max_qexp_terms").get<std::size_t>();
    if (j.contains("prime_search_budget"))
        cfg.prime_search_budget = j.at("prime_search_budget").get<std::uint64_t>();
    if (j.contains("class_number_floor"))
        cfg.class_number_floor = make_int(j.at("class_number_floor").is_string()
                                              ? j.at("class_number_floor").get<std::string>()
                                              : std::to_string(j.at("class_number_floor").get<long>()));
    if (j.contains("gram_tolerance")) cfg.gram_tolerance = j.at("gram_tolerance").get<double>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<unsigned>();
    if (j.contains("recognize_height_cap"))
        cfg.recognize_height_cap = j.at("recognize_height_cap").get<unsigned>();
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    cfg.validate();
    return cfg;
}

namespace detail {

/// A Gamma_0(N) matrix tilting tau to roughly maximal imaginary part among
/// fraction c = N: (a b; N d) with d near -N Re(tau), gcd(d, N) = 1.
struct Gamma0Matrix {
    Int a, b, c, d;
    Complex apply(const Complex& tau, mpfr_prec_t prec) const {
        Complex num = tau * Real::of(a, prec) + Complex(Real::of(b, prec), Real::of(0L, prec));
        Complex den = tau * Real::of(c, prec) + Complex(Real::of(d, prec), Real::of(0L, prec));
        return num / den;
    }
};

inline Gamma0Matrix gamma0_probe(const Int& N, const Complex& tau) {
    Int d = (tau.re * Real::of(Int(-N), tau.prec())).round_to_int();
    for (Int off = 0;; off = (off >= 0 ? Int(-(off + 1)) : Int(-off))) {
        Int cand = d + off;
        if (cand == 0) continue;
        Int g;
        mpz_gcd(g.get_mpz_t(), cand.get_mpz_t(), N.get_mpz_t());
        if (g == 1) {
            d = cand;
            break;
        }
    }
    Int a = mod_pos(inv_mod(d, N), N);
    if (a == 0) a = N;
    Int b = (a * d - 1) / N;
    if (a * d - b * N != 1) throw internal_error("gamma0 probe: determinant not 1");
    return {a, b, N, d};
}

/// Smallest c0 in 1..4 with c0 * delta in the lattice (coordinate distance
/// below 2^(-prec/4)); 0 when none works.
inline int smallest_manin_scaling(const PeriodLattice& lat, const Complex& delta,
                                  mpfr_prec_t prec) {
    Real tol = Real::pow2(-static_cast<long>(prec) / 4, prec);
    for (int c0 = 1; c0 <= 4; ++c0) {
        if (lattice_coord_dist(lat, delta * Real::of(static_cast<long>(c0), prec)) < tol)
            return c0;
    }
    return 0;
}

} // namespace detail

/// Full certification pipeline for one (curve, p, j). Stage failures yield a
/// partial certificate with status "partial:<stage>"; they never throw.
inline Certificate certify(const CurveSpec& E, const Int& p, std::size_t j,
                           const RunConfig& cfg, bool force = false) {
    cfg.validate();
    const mpfr_prec_t prec = cfg.prec();
    Certificate cert;
    cert.curve_label = E.label;
    cert.curve_inline = E.inline_form();
    cert.p = p.get_str();
    cert.involution_j = j;
    cert.precision_bits = cfg.prec_bits;
    cert.class_number_floor = cfg.class_number_floor.get_str();
    cert.timestamp = detail::iso_utc_now();
    std::string stage = "hypothesis";
    try {
        if (!is_prime(p)) throw std::domain_error("p is not prime");
        cert.hypothesis = verify_hypothesis(p, E.conductor);
        FamilyCongruence cong = build_congruence(E.conductor);
        cert.in_congruence_class = (mod_pos(p, cong.modulus_M) == cong.residue_rho);
        if (!cert.hypothesis.valid())
            throw std::domain_error("Heegner hypothesis fails for (p, N)");
        if (!cert.in_congruence_class) {
            if (family_eligible(p, E.conductor)) {
                cert.warnings.push_back(
                    "p satisfies the family congruence conditions but lies outside "
                    "the A_N class rho mod M");
            } else if (force) {
                cert.warnings.push_back(
                    "forced: p is hypothesis-valid but not family-eligible "
                    "(p != 7 mod 8)");
            } else {
                throw std::domain_error(
                    "p is not family-eligible; pass force to certify anyway");
            }
        }

        stage = "classgroup";
        FormClassGroup G(p);
        cert.h = G.h();
        if (G.h() <= 10000)
            for (const Int& d : G.structure()) cert.class_group_structure.push_back(d.get_str());
        cert.floor_ok = (Int(static_cast<unsigned long>(G.h())) >= cfg.class_number_floor);
        if (!cert.floor_ok)
            cert.warnings.push_back("class number below the configured floor");

        stage = "galois";
        if (j < 1 || j > G.h()) {
            std::ostringstream os;
            os << "involution label j = " << j << " out of range 1..h = " << G.h();
            throw std::domain_error(os.str());
        }
        InvolutionLabel lab{j, dihedral(G, j - 1, -1)};
        cert.fixed_class = fixed_heegner_classes(G, lab)[0];

        stage = "heegner_forms";
        auto forms = heegner_forms(G, E.conductor);
        cert.heegner_form = forms.at(cert.fixed_class);

        stage = "periods";
        PeriodLattice lat = period_lattice(E, prec);

        stage = "coefficients";
        std::vector<QuadForm> eval_forms;
        for (const auto& hf : forms) eval_forms.push_back(gamma0_optimize(hf, E.conductor));
        std::size_t terms = 0;
        for (const auto& f : eval_forms) {
            HeegnerTau t = tau_of_form(f, prec);
            terms = std::max(terms, qexp_required_terms(t.tau.im, prec, cfg.max_qexp_terms));
        }
        // Manin probe: Im(gamma tau) ~ Im(tau)/|N tau + d|^2, so the cheapest
        // probe point is the class with the smallest Im(tau) (largest a)
        const QuadForm* probe = &eval_forms.front();
        for (const auto& f : eval_forms)
            if (f.a > probe->a) probe = &f;
        HeegnerTau best_tau = tau_of_form(*probe, prec);
        detail::Gamma0Matrix gamma = detail::gamma0_probe(E.conductor, best_tau.tau);
        Complex gtau = gamma.apply(best_tau.tau, prec);
        terms = std::max(terms, qexp_required_terms(gtau.im, prec, cfg.max_qexp_terms));
        CoefficientCache cache(std::filesystem::path(cfg.out_dir) / "cache",
                               cfg.effective_threads());
        ModularCoeffs coeffs = cache.get(E, terms);

        stage = "trace";
        TracePoint tp = trace_point(lat, coeffs, forms, E.conductor, prec,
                                    cfg.max_qexp_terms, cfg.effective_threads());
        cert.trace_z_re_hex = tp.z.re.to_hex();
        cert.trace_z_im_hex = tp.z.im.to_hex();
        cert.conj_sign = tp.conj_sign;
        cert.distinct_images = tp.distinct_images;

        stage = "manin";
        ModularImage zt = eval_modular_map(coeffs, best_tau, prec, cfg.max_qexp_terms);
        ModularImage zg = eval_modular_map(coeffs, gtau, prec, cfg.max_qexp_terms);
        cert.manin_c0 = detail::smallest_manin_scaling(lat, zg.z - zt.z, prec);
        if (cert.manin_c0 == 0)
            cert.warnings.push_back("no Manin scaling c0 <= 4 matched the lattice test");

        stage = "recognize";
        CurvePointC Pc = elliptic_exp(lat, tp.z);
        if (Pc.infinity) {
            cert.trace_is_identity = true;
        } else {
            const Real tol = Real::pow2(-static_cast<long>(prec) / 4, prec);
            Real xscale = abs(Pc.x) + 1;
            if (abs(Pc.x.im) > tol * xscale)
                throw numeric_error("trace x-coordinate is not real to tolerance");
            auto x = recognize(Pc.x.re, cfg.recognize_height_cap);
            std::optional<Rat> yr, ys;
            if (x) {
                yr = recognize(Pc.y.re, cfg.recognize_height_cap);
                Real sp = sqrt(Real::of(p, prec));
                ys = recognize(Pc.y.im / sp, cfg.recognize_height_cap);
            }
            if (x && yr && ys) {
                RecognizedPoint rp;
                rp.x = *x;
                rp.y_rat = *yr;
                rp.y_rad = *ys;
                rp.on_curve_exact =
                    RecognizedPoint::check_on_curve(E, rp.x, rp.y_rat, rp.y_rad, p);
                if (!rp.on_curve_exact) {
                    cert.warnings.push_back(
                        "recognized coordinates do not satisfy the curve exactly; "
                        "treated as recognition failure");
                    cert.recognized.reset();
                } else {
                    cert.recognized = rp;
                }
            } else {
                cert.warnings.push_back("rational recognition failed at the height cap");
            }
        }

        stage = "height";
        if (cert.recognized && cert.recognized->is_rational()) {
            RationalPoint P = RationalPoint::on(E, cert.recognized->x, cert.recognized->y_rat);
            HeightReport hr = canonical_height(E, P, prec);
            HeightSummary hs;
            hs.hhat_hex = hr.hhat.to_hex();
            hs.naive_hex = hr.naive.to_hex();
            hs.hhat_approx = hr.hhat.to_double();
            hs.torsion = hr.torsion;
            hs.method = hr.method;
            cert.height = hs;
        } else if (cert.recognized) {
            cert.warnings.push_back(
                "trace point has a nonzero radical part; heights are computed for "
                "rational coordinates only");
        }

        cert.status = "complete";
    } catch (const std::exception& e) {
        cert.status = "partial:" + stage;
        cert.error = e.what();
    }
    return cert;
}

// ---------------------------------------------------------------------------
// report

struct ReportRow {
    std::string curve;
    Int p;
    std::size_t h = 0;
    std::size_t j = 0;
    double siegel = 0;         // log h / log p
    double running_median = 0; // over rows of this curve so far, ascending p
    bool recognized = false;
    bool torsion = false;
    double hhat = 0;
    int manin_c0 = 0;
    std::string status;
};

struct Report {
    std::vector<ReportRow> rows;
    std::map<std::string, double> median_by_curve;
    std::vector<std::string> warnings;
};

inline double median_of(std::vector<double> v) {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

/// Tabulates a store grouped by curve in increasing p, with the Siegel
/// statistic log h_p / log p, its running median, and an optional chain view
/// dropping the first `drop` primes per curve.
inline Report build_report(const std::vector<Certificate>& certs, std::size_t drop = 0) {
    Report rep;
    std::map<std::string, std::vector<const Certificate*>> by_curve;
    for (const auto& c : certs) by_curve[c.curve_label.empty() ? c.curve_inline : c.curve_label].push_back(&c);
    for (auto& [curve, list] : by_curve) {
        std::sort(list.begin(), list.end(), [](const Certificate* a, const Certificate* b) {
            return make_int(a->p) < make_int(b->p);
        });
        std::vector<double> stats;
        std::size_t idx = 0;
        for (const Certificate* c : list) {
            if (idx++ < drop) continue;
            ReportRow row;
            row.curve = curve;
            row.p = make_int(c->p);
            row.h = c->h;
            row.j = c->involution_j;
            row.status = c->status;
            if (c->h > 0) {
                row.siegel = std::log(static_cast<double>(c->h)) / std::log(row.p.get_d());
                stats.push_back(row.siegel);
            }
            row.running_median = median_of(stats);
            row.recognized = c->recognized.has_value();
            row.manin_c0 = c->manin_c0;
            if (c->height) {
                row.torsion = c->height->torsion;
                row.hhat = c->height->hhat_approx;
            }
            rep.rows.push_back(row);
        }
        rep.median_by_curve[curve] = median_of(stats);
    }
    return rep;
}

} // namespace heegner
