// Command-line front end: family generation, class groups, Galois structure,
// end-to-end certification, store verification and reporting.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "heegner/pipeline.hpp"

namespace {

using namespace heegner;

constexpr int kExitDomain = 2;
constexpr int kExitResource = 3;
constexpr int kExitInternal = 4;

CurveSpec resolve_curve(const std::string& spec, const std::string& label) {
    if (!spec.empty() && spec.front() == '{') {
        json j = json::parse(spec);
        auto geti = [&](const char* k) {
            const auto& v = j.at(k);
            return v.is_string() ? make_int(v.get<std::string>()) : Int(v.get<long>());
        };
        std::string lab = j.value("label", label);
        return CurveSpec(geti("a1"), geti("a2"), geti("a3"), geti("a4"), geti("a6"),
                         geti("conductor"), lab);
    }
    if (spec.find(',') != std::string::npos) return parse_inline_curve(spec, label);
    if (const CurveSpec* c = find_builtin_curve(spec)) return *c;
    throw std::domain_error("unknown curve '" + spec +
                            "'; pass JSON, the inline form a1,a2,a3,a4,a6,N, or a "
                            "built-in label");
}

struct GlobalOpts {
    RunConfig cfg;
    bool json_out = false;
};

void add_config_flags(CLI::App* app, GlobalOpts& g, std::string& config_path) {
    app->add_option("--prec-bits", g.cfg.prec_bits, "working precision in bits (>= 64)");
    app->add_option("--max-qexp-terms", g.cfg.max_qexp_terms, "q-expansion term budget");
    app->add_option("--prime-search-budget", g.cfg.prime_search_budget,
                    "candidates per family-prime search");
    app->add_option("--class-number-floor",
                    [&g](const std::vector<std::string>& v) {
                        g.cfg.class_number_floor = make_int(v.at(0));
                        return true;
                    },
                    "certificates record h_p >= floor");
    app->add_option("--gram-tolerance", g.cfg.gram_tolerance,
                    "independence threshold on the Gram determinant");
    app->add_option("--threads", g.cfg.threads, "worker threads (0 = hardware)");
    app->add_option("--recognize-cap", g.cfg.recognize_height_cap,
                    "height cap (decimal digits) for rational recognition");
    app->add_option("--out-dir", g.cfg.out_dir, "output directory (store, caches)");
    app->add_option("--config", config_path, "JSON config file (flags override it)");
    app->add_flag("--json", g.json_out, "machine-readable JSON output");
}

void apply_config_file_and_env(GlobalOpts& g, const std::string& config_path,
                               const CLI::App& sub) {
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw std::domain_error("cannot read config file " + config_path);
        json j;
        in >> j;
        RunConfig file_cfg = config_from_json(j);
        // flags explicitly given on the command line win over the file
        RunConfig merged = file_cfg;
        if (sub.count("--prec-bits")) merged.prec_bits = g.cfg.prec_bits;
        if (sub.count("--max-qexp-terms")) merged.max_qexp_terms = g.cfg.max_qexp_terms;
        if (sub.count("--prime-search-budget"))
            merged.prime_search_budget = g.cfg.prime_search_budget;
        if (sub.count("--class-number-floor"))
            merged.class_number_floor = g.cfg.class_number_floor;
        if (sub.count("--gram-tolerance")) merged.gram_tolerance = g.cfg.gram_tolerance;
        if (sub.count("--threads")) merged.threads = g.cfg.threads;
        if (sub.count("--recognize-cap"))
            merged.recognize_height_cap = g.cfg.recognize_height_cap;
        if (sub.count("--out-dir")) merged.out_dir = g.cfg.out_dir;
        g.cfg = merged;
    }
    if (const char* t = std::getenv("HEEGNER_THREADS")) {
        if (!sub.count("--threads")) g.cfg.threads = static_cast<unsigned>(std::atoi(t));
    }
    g.cfg.validate();
}

int cmd_family(const CurveSpec& E, long count, const std::string& after_s,
               const GlobalOpts& g) {
    Int after = make_int(after_s);
    FamilyCongruence cong = build_congruence(E.conductor);
    json out = json::array();
    Int cur = after;
    for (long i = 0; i < count; ++i) {
        FamilyPrime fp = next_family_prime(cong, E.conductor, cur, g.cfg.prime_search_budget);
        cur = fp.p;
        if (g.json_out) {
            out.push_back({{"p", fp.p.get_str()},
                           {"m_p", fp.m_p.get_str()},
                           {"hypothesis", to_json(fp.heegner_cert)}});
        } else {
            std::cout << fp.p << "  (m_p = " << fp.m_p
                      << ", hypothesis: " << (fp.heegner_cert.valid() ? "valid" : "INVALID")
                      << ")\n";
        }
    }
    if (g.json_out) {
        std::cout << json{{"curve", E.label},
                          {"modulus_M", cong.modulus_M.get_str()},
                          {"residue_rho", cong.residue_rho.get_str()},
                          {"primes", out}}
                         .dump()
                  << "\n";
    } else if (count == 0) {
        // empty output by contract
    } else {
        std::cout << "congruence class: p = " << cong.residue_rho << " (mod "
                  << cong.modulus_M << ")\n";
    }
    return 0;
}

int cmd_classgroup(const std::string& p_s, bool list_forms, const GlobalOpts& g) {
    Int p = make_int(p_s);
    FormClassGroup G(p);
    auto structure = G.structure();
    if (g.json_out) {
        json forms = json::array();
        if (list_forms)
            for (const auto& f : G.reduced_forms())
                forms.push_back({{"a", f.a.get_str()}, {"b", f.b.get_str()}, {"c", f.c.get_str()}});
        json st = json::array();
        for (const Int& d : structure) st.push_back(d.get_str());
        json j{{"p", p.get_str()}, {"h", G.h()}, {"structure", st}};
        if (list_forms) j["reduced_forms"] = forms;
        std::cout << j.dump() << "\n";
    } else {
        std::cout << "disc -" << p << ": h = " << G.h() << ", structure = [";
        for (std::size_t i = 0; i < structure.size(); ++i)
            std::cout << (i ? " x " : "") << "Z/" << structure[i];
        std::cout << "]\n";
        if (list_forms)
            for (const auto& f : G.reduced_forms()) std::cout << "  " << f.str() << "\n";
    }
    return 0;
}

int cmd_galois(const std::string& p_s, long j_opt, const GlobalOpts& g) {
    Int p = make_int(p_s);
    FormClassGroup G(p);
    auto invs = involutions(G);
    json rows = json::array();
    for (const auto& lab : invs) {
        if (j_opt > 0 && lab.j != static_cast<std::size_t>(j_opt)) continue;
        std::size_t fixed = fixed_heegner_classes(G, lab)[0];
        if (g.json_out)
            rows.push_back({{"j", lab.j},
                            {"gamma_class", lab.element.gamma},
                            {"fixed_class", fixed},
                            {"fixed_form", G.form(fixed).str()}});
        else
            std::cout << "psi_" << lab.j << ": gamma = class " << lab.element.gamma
                      << ", fixed Heegner class = " << fixed << " "
                      << G.form(fixed).str() << "\n";
    }
    if (g.json_out)
        std::cout << json{{"p", p.get_str()}, {"h", G.h()}, {"involutions", rows}}.dump()
                  << "\n";
    else
        std::cout << "total involutions: " << G.h() << "\n";
    return 0;
}

int cmd_certify(const CurveSpec& E, const std::string& p_s, long j, bool force,
                const std::string& store_path, const GlobalOpts& g) {
    Int p = make_int(p_s);
    Certificate cert = certify(E, p, static_cast<std::size_t>(j), g.cfg, force);
    CertificateStore store(store_path.empty()
                               ? std::filesystem::path(g.cfg.out_dir) / "certificates.jsonl"
                               : std::filesystem::path(store_path));
    store.append(cert);
    if (g.json_out) {
        json j2 = to_json(cert);
        j2["determinism_digest"] = determinism_digest(cert);
        std::cout << j2.dump() << "\n";
    } else {
        std::cout << "curve " << cert.curve_label << ", p = " << cert.p
                  << ", j = " << cert.involution_j << "\n"
                  << "  status: " << cert.status << "\n"
                  << "  h = " << cert.h << ", fixed class = " << cert.fixed_class
                  << ", manin c0 = " << cert.manin_c0 << "\n";
        if (cert.recognized) {
            std::cout << "  point: x = " << Rat(cert.recognized->x) << ", y = "
                      << Rat(cert.recognized->y_rat);
            if (!cert.recognized->is_rational())
                std::cout << " + (" << Rat(cert.recognized->y_rad) << ")*sqrt(-" << cert.p
                          << ")";
            std::cout << "\n";
        }
        if (cert.height)
            std::cout << "  hhat = " << cert.height->hhat_approx
                      << (cert.height->torsion ? " (torsion)" : " (non-torsion)") << "\n";
        for (const auto& w : cert.warnings) std::cout << "  warning: " << w << "\n";
        if (!cert.error.empty()) std::cout << "  error: " << cert.error << "\n";
        std::cout << "  stored in " << store.path().string() << "\n";
    }
    return cert.status == "complete" ? 0 : kExitDomain;
}

int cmd_verify(const std::string& store_path, const GlobalOpts& g) {
    CertificateStore store(store_path);
    auto res = store.load();
    json rows = json::array();
    std::size_t failures = 0;
    for (const auto& c : res.certificates) {
        auto fails = self_validate(c);
        if (!fails.empty()) ++failures;
        if (g.json_out) {
            rows.push_back({{"curve", c.curve_label},
                            {"p", c.p},
                            {"ok", fails.empty()},
                            {"failures", fails}});
        } else {
            std::cout << (fails.empty() ? "OK   " : "FAIL ") << c.curve_label
                      << " p=" << c.p << " j=" << c.involution_j << "\n";
            for (const auto& f : fails) std::cout << "      " << f << "\n";
        }
    }
    for (const auto& w : res.corrupt) std::cerr << "warning: corrupt entry, " << w << "\n";
    if (g.json_out)
        std::cout << json{{"entries", res.certificates.size()},
                          {"corrupt", res.corrupt.size()},
                          {"failures", failures},
                          {"results", rows}}
                         .dump()
                  << "\n";
    else
        std::cout << res.certificates.size() << " certificate(s), " << failures
                  << " validation failure(s), " << res.corrupt.size() << " corrupt line(s)\n";
    if (res.lines > 0 && res.certificates.empty()) return kExitInternal;
    return failures == 0 ? 0 : kExitDomain;
}

int cmd_report(const std::string& store_path, std::size_t drop, const GlobalOpts& g) {
    CertificateStore store(store_path);
    auto res = store.load();
    for (const auto& w : res.corrupt) std::cerr << "warning: corrupt entry, " << w << "\n";
    if (res.lines > 0 && res.certificates.empty()) {
        std::cerr << "error: all store entries are corrupt\n";
        return kExitInternal;
    }
    Report rep = build_report(res.certificates, drop);
    if (g.json_out) {
        json rows = json::array();
        for (const auto& r : rep.rows)
            rows.push_back({{"curve", r.curve},
                            {"p", r.p.get_str()},
                            {"h", r.h},
                            {"j", r.j},
                            {"siegel", r.siegel},
                            {"running_median", r.running_median},
                            {"recognized", r.recognized},
                            {"manin_c0", r.manin_c0},
                            {"hhat", r.hhat},
                            {"status", r.status}});
        json med = json::object();
        for (const auto& [k, v] : rep.median_by_curve) med[k] = v;
        std::cout << json{{"rows", rows}, {"median_by_curve", med}, {"dropped", drop}}.dump()
                  << "\n";
    } else {
        std::cout << std::left << std::setw(10) << "curve" << std::setw(10) << "p"
                  << std::setw(6) << "h" << std::setw(4) << "j" << std::setw(10) << "siegel"
                  << std::setw(10) << "med" << std::setw(8) << "point" << std::setw(10)
                  << "hhat" << "status\n";
        for (const auto& r : rep.rows)
            std::cout << std::left << std::setw(10) << r.curve << std::setw(10)
                      << r.p.get_str() << std::setw(6) << r.h << std::setw(4) << r.j
                      << std::setw(10) << std::setprecision(4) << r.siegel << std::setw(10)
                      << r.running_median << std::setw(8) << (r.recognized ? "yes" : "-")
                      << std::setw(10) << r.hhat << r.status << "\n";
        for (const auto& [curve, med] : rep.median_by_curve)
            std::cout << "median Siegel statistic for " << curve << ": " << med << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heegner-point pipeline: prime families, class groups, dihedral "
                 "Galois data, modular-parametrization trace points, certificates"};
    app.require_subcommand(1);

    GlobalOpts g;
    std::string config_path;
    std::string curve_spec, curve_label, p_s = "0", after_s = "0", store_path;
    long count = 1, j = 1;
    bool force = false, list_forms = false;
    std::size_t drop = 0;

    auto* fam = app.add_subcommand("family", "generate family primes for a curve");
    fam->add_option("--curve", curve_spec, "curve (label, inline, or JSON)")->required();
    fam->add_option("--label", curve_label, "label for inline/JSON curves");
    fam->add_option("--count", count, "how many primes");
    fam->add_option("--after", after_s, "strict lower bound");
    add_config_flags(fam, g, config_path);

    auto* cg = app.add_subcommand("classgroup", "reduced forms and structure of disc -p");
    cg->add_option("--p", p_s, "prime p = 3 (mod 4)")->required();
    cg->add_flag("--forms", list_forms, "list the reduced forms");
    add_config_flags(cg, g, config_path);

    auto* ga = app.add_subcommand("galois", "involutions and fixed Heegner classes");
    ga->add_option("--p", p_s, "prime p = 3 (mod 4)")->required();
    ga->add_option("--j", j, "only the j-th involution (default: all)")->default_val(0);
    add_config_flags(ga, g, config_path);

    auto* ce = app.add_subcommand("certify", "run the full pipeline for (curve, p, j)");
    ce->add_option("--curve", curve_spec, "curve (label, inline, or JSON)")->required();
    ce->add_option("--label", curve_label, "label for inline/JSON curves");
    ce->add_option("--p", p_s, "family prime")->required();
    ce->add_option("--j", j, "involution label (1-based)")->default_val(1);
    ce->add_flag("--force", force, "certify hypothesis-valid primes outside the family");
    ce->add_option("--store", store_path, "certificate store (default out-dir/certificates.jsonl)");
    add_config_flags(ce, g, config_path);

    auto* ve = app.add_subcommand("verify", "re-check every exact field of stored certificates");
    ve->add_option("--store", store_path, "certificate store")->required();
    add_config_flags(ve, g, config_path);

    auto* re = app.add_subcommand("report", "tabulate a store with Siegel statistics");
    re->add_option("--store", store_path, "certificate store")->required();
    re->add_option("--drop", drop, "chain view: drop the i smallest primes per curve");
    add_config_flags(re, g, config_path);

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* sub = app.get_subcommands().front();
        apply_config_file_and_env(g, config_path, *sub);
        if (sub == fam) return cmd_family(resolve_curve(curve_spec, curve_label), count, after_s, g);
        if (sub == cg) return cmd_classgroup(p_s, list_forms, g);
        if (sub == ga) return cmd_galois(p_s, j, g);
        if (sub == ce)
            return cmd_certify(resolve_curve(curve_spec, curve_label), p_s, j, force,
                               store_path, g);
        if (sub == ve) return cmd_verify(store_path, g);
        if (sub == re) return cmd_report(store_path, drop, g);
        return kExitInternal;
    } catch (const heegner::resource_error& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return kExitResource;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
