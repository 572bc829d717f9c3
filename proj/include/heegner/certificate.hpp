#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "heegner/analytic.hpp"
#include "heegner/galois.hpp"
#include "heegner/heights.hpp"
#include "heegner/version.hpp"

namespace heegner {

using json = nlohmann::json;

/// Trace-point coordinates recognized over Q(sqrt(-p)):
/// x rational, y = y_rat + y_rad * sqrt(-p).
struct RecognizedPoint {
    Rat x;
    Rat y_rat;
    Rat y_rad;
    bool on_curve_exact = false;

    bool is_rational() const { return y_rad == 0; }

    /// Exact curve-equation check over Q(sqrt(-p)): both the rational and the
    /// radical component of y^2 + a1 x y + a3 y - x^3 - a2 x^2 - a4 x - a6
    /// must vanish.
    static bool check_on_curve(const CurveSpec& E, const Rat& x, const Rat& yr,
                               const Rat& ys, const Int& p) {
        Rat rat_part = yr * yr - Rat(p) * ys * ys + Rat(E.a1) * x * yr + Rat(E.a3) * yr -
                       x * x * x - Rat(E.a2) * x * x - Rat(E.a4) * x - Rat(E.a6);
        Rat rad_part = ys * (Rat(2) * yr + Rat(E.a1) * x + Rat(E.a3));
        return rat_part == 0 && rad_part == 0;
    }
};

struct HeightSummary {
    std::string hhat_hex;
    std::string naive_hex;
    double hhat_approx = 0;
    bool torsion = false;
    std::string method;
};

/// The per-(curve, prime) verifiable record produced by the certify pipeline.
/// Every exact field can be re-checked without redoing analytic work.
struct Certificate {
    int schema_version = kCertificateSchemaVersion;
    std::string tool_version = kVersion;
    std::string curve_label;
    std::string curve_inline;
    std::string p;
    HypothesisCertificate hypothesis;
    bool in_congruence_class = false;
    std::size_t h = 0;
    std::vector<std::string> class_group_structure;
    std::string class_number_floor = "1";
    bool floor_ok = true;
    std::size_t involution_j = 0;
    std::size_t fixed_class = 0;
    std::optional<HeegnerForm> heegner_form;
    int manin_c0 = 0; // 0 = not determined
    std::string trace_z_re_hex, trace_z_im_hex;
    int conj_sign = 0;
    std::size_t distinct_images = 0;
    bool trace_is_identity = false;
    std::optional<RecognizedPoint> recognized;
    std::optional<HeightSummary> height;
    long precision_bits = 0;
    std::string status = "incomplete"; // "complete" or "partial:<stage>"
    std::string error;
    std::vector<std::string> warnings;
    std::string timestamp;
};

namespace detail {

inline std::string iso_utc_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline json rat_to_json(const Rat& r) {
    return json{{"num", Int(r.get_num()).get_str()}, {"den", Int(r.get_den()).get_str()}};
}

inline Rat rat_from_json(const json& j) {
    return make_rat(make_int(j.at("num").get<std::string>()),
                    make_int(j.at("den").get<std::string>()));
}

} // namespace detail

inline json to_json(const HypothesisCertificate& c) {
    json w = json::array();
    for (const auto& [q, k] : c.split_witnesses) w.push_back({{"q", q.get_str()}, {"kronecker", k}});
    return json{{"p", c.p.get_str()},
                {"N", c.N.get_str()},
                {"gcd_ok", c.gcd_ok},
                {"split_witnesses", w},
                {"odd_class_number_criterion", c.odd_class_number_criterion},
                {"valid", c.valid()}};
}

inline HypothesisCertificate hypothesis_from_json(const json& j) {
    HypothesisCertificate c;
    c.p = make_int(j.at("p").get<std::string>());
    c.N = make_int(j.at("N").get<std::string>());
    c.gcd_ok = j.at("gcd_ok").get<bool>();
    for (const auto& w : j.at("split_witnesses"))
        c.split_witnesses.emplace_back(make_int(w.at("q").get<std::string>()),
                                       w.at("kronecker").get<int>());
    c.odd_class_number_criterion = j.at("odd_class_number_criterion").get<bool>();
    return c;
}

inline json to_json(const Certificate& c) {
    json j;
    j["schema_version"] = c.schema_version;
    j["tool_version"] = c.tool_version;
    j["curve"] = {{"label", c.curve_label}, {"inline", c.curve_inline}};
    j["p"] = c.p;
    j["hypothesis"] = to_json(c.hypothesis);
    j["in_congruence_class"] = c.in_congruence_class;
    j["h"] = c.h;
    j["class_group_structure"] = c.class_group_structure;
    j["class_number_floor"] = c.class_number_floor;
    j["floor_ok"] = c.floor_ok;
    j["involution_j"] = c.involution_j;
    j["fixed_class"] = c.fixed_class;
    if (c.heegner_form) {
        j["heegner_form"] = {{"a", c.heegner_form->form.a.get_str()},
                             {"b", c.heegner_form->form.b.get_str()},
                             {"c", c.heegner_form->form.c.get_str()},
                             {"beta", c.heegner_form->beta.get_str()},
                             {"class_index", c.heegner_form->class_index}};
    } else {
        j["heegner_form"] = nullptr;
    }
    j["manin_c0"] = c.manin_c0;
    j["trace_z"] = {{"re", c.trace_z_re_hex}, {"im", c.trace_z_im_hex}};
    j["conj_sign"] = c.conj_sign;
    j["distinct_images"] = c.distinct_images;
    j["trace_is_identity"] = c.trace_is_identity;
    if (c.recognized) {
        j["recognized"] = {{"x", detail::rat_to_json(c.recognized->x)},
                           {"y_rational_part", detail::rat_to_json(c.recognized->y_rat)},
                           {"y_radical_part", detail::rat_to_json(c.recognized->y_rad)},
                           {"on_curve_exact", c.recognized->on_curve_exact}};
    } else {
        j["recognized"] = nullptr;
    }
    if (c.height) {
        j["height"] = {{"hhat", c.height->hhat_hex},
                       {"naive", c.height->naive_hex},
                       {"hhat_approx", c.height->hhat_approx},
                       {"torsion", c.height->torsion},
                       {"method", c.height->method}};
    } else {
        j["height"] = nullptr;
    }
    j["precision_bits"] = c.precision_bits;
    j["status"] = c.status;
    j["error"] = c.error;
    j["warnings"] = c.warnings;
    j["timestamp"] = c.timestamp;
    return j;
}

inline Certificate certificate_from_json(const json& j) {
    Certificate c;
    c.schema_version = j.at("schema_version").get<int>();
    c.tool_version = j.at("tool_version").get<std::string>();
    c.curve_label = j.at("curve").at("label").get<std::string>();
    c.curve_inline = j.at("curve").at("inline").get<std::string>();
    c.p = j.at("p").get<std::string>();
    c.hypothesis = hypothesis_from_json(j.at("hypothesis"));
    c.in_congruence_class = j.at("in_congruence_class").get<bool>();
    c.h = j.at("h").get<std::size_t>();
    c.class_group_structure = j.at("class_group_structure").get<std::vector<std::string>>();
    c.class_number_floor = j.at("class_number_floor").get<std::string>();
    c.floor_ok = j.at("floor_ok").get<bool>();
    c.involution_j = j.at("involution_j").get<std::size_t>();
    c.fixed_class = j.at("fixed_class").get<std::size_t>();
    if (!j.at("heegner_form").is_null()) {
        const auto& hf = j.at("heegner_form");
        QuadForm f(make_int(hf.at("a").get<std::string>()),
                   make_int(hf.at("b").get<std::string>()),
                   make_int(hf.at("c").get<std::string>()));
        c.heegner_form = HeegnerForm{f, make_int(hf.at("beta").get<std::string>()),
                                     hf.at("class_index").get<std::size_t>()};
    }
    c.manin_c0 = j.at("manin_c0").get<int>();
    c.trace_z_re_hex = j.at("trace_z").at("re").get<std::string>();
    c.trace_z_im_hex = j.at("trace_z").at("im").get<std::string>();
    c.conj_sign = j.at("conj_sign").get<int>();
    c.distinct_images = j.at("distinct_images").get<std::size_t>();
    c.trace_is_identity = j.at("trace_is_identity").get<bool>();
    if (!j.at("recognized").is_null()) {
        const auto& r = j.at("recognized");
        RecognizedPoint rp;
        rp.x = detail::rat_from_json(r.at("x"));
        rp.y_rat = detail::rat_from_json(r.at("y_rational_part"));
        rp.y_rad = detail::rat_from_json(r.at("y_radical_part"));
        rp.on_curve_exact = r.at("on_curve_exact").get<bool>();
        c.recognized = rp;
    }
    if (!j.at("height").is_null()) {
        const auto& h = j.at("height");
        HeightSummary hs;
        hs.hhat_hex = h.at("hhat").get<std::string>();
        hs.naive_hex = h.at("naive").get<std::string>();
        hs.hhat_approx = h.at("hhat_approx").get<double>();
        hs.torsion = h.at("torsion").get<bool>();
        hs.method = h.at("method").get<std::string>();
        c.height = hs;
    }
    c.precision_bits = j.at("precision_bits").get<long>();
    c.status = j.at("status").get<std::string>();
    c.error = j.at("error").get<std::string>();
    c.warnings = j.at("warnings").get<std::vector<std::string>>();
    c.timestamp = j.at("timestamp").get<std::string>();
    return c;
}

/// FNV-1a digest of the canonical JSON with the timestamp blanked; two runs
/// of the same inputs must agree here bit for bit.
inline std::string determinism_digest(const Certificate& c) {
    json j = to_json(c);
    j["timestamp"] = "";
    std::string s = j.dump();
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char ch : s) {
        hash ^= ch;
        hash *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

/// Re-checks every exact field of a certificate; analytic values are taken
/// at face value. Returns human-readable failure descriptions (empty = pass).
inline std::vector<std::string> self_validate(const Certificate& c) {
    std::vector<std::string> fails;
    auto expect = [&](bool ok, const std::string& what) {
        if (!ok) fails.push_back(what);
    };
    try {
        CurveSpec E = parse_inline_curve(c.curve_inline, c.curve_label);
        Int p = make_int(c.p);
        expect(is_prime(p), "p is prime");
        HypothesisCertificate hyp = verify_hypothesis(p, E.conductor);
        expect(hyp.gcd_ok == c.hypothesis.gcd_ok, "hypothesis gcd flag matches");
        expect(hyp.split_witnesses == c.hypothesis.split_witnesses,
               "hypothesis split witnesses match");
        expect(hyp.odd_class_number_criterion == c.hypothesis.odd_class_number_criterion,
               "hypothesis oddness criterion matches");
        FamilyCongruence cong = build_congruence(E.conductor);
        expect(c.in_congruence_class ==
                   (mod_pos(p, cong.modulus_M) == cong.residue_rho),
               "congruence-class membership flag matches");
        if (c.status.rfind("partial:", 0) == 0) return fails; // later fields absent
        FormClassGroup G(p);
        expect(G.h() == c.h, "class number matches enumeration");
        expect(c.h % 2 == 1, "class number is odd");
        std::vector<std::string> structure;
        for (const Int& d : G.structure()) structure.push_back(d.get_str());
        expect(structure == c.class_group_structure, "class group structure matches");
        expect(c.involution_j >= 1 && c.involution_j <= c.h, "involution label in range");
        std::size_t gamma = c.involution_j - 1;
        expect(G.mul(c.fixed_class, c.fixed_class) == gamma, "fixed class squares to gamma");
        expect(G.pow(gamma, Int((static_cast<unsigned long>(c.h) + 1) / 2)) == c.fixed_class,
               "fixed class matches the closed form");
        if (c.heegner_form) {
            const QuadForm& f = c.heegner_form->form;
            const Int& beta = c.heegner_form->beta;
            expect(f.disc() == -p, "heegner form has discriminant -p");
            expect(mod_pos(f.a, E.conductor) == 0, "heegner form level divisibility");
            expect(mod_pos(f.b - beta, 2 * E.conductor) == 0, "heegner form beta congruence");
            expect(mod_pos(beta * beta + p, 4 * E.conductor) == 0,
                   "beta^2 = -p (mod 4N)");
            expect(G.index_of(reduce(f)) == c.fixed_class,
                   "heegner form reduces to the fixed class");
            expect(c.heegner_form->class_index == c.fixed_class,
                   "heegner form class index consistent");
        }
        if (c.manin_c0 != 0)
            expect(c.manin_c0 >= 1 && c.manin_c0 <= 4, "manin scaling in 1..4");
        if (c.recognized) {
            expect(RecognizedPoint::check_on_curve(E, c.recognized->x, c.recognized->y_rat,
                                                   c.recognized->y_rad, p),
                   "recognized point satisfies the curve equation exactly");
            expect(c.recognized->on_curve_exact, "on_curve_exact flag set");
            if (c.height && c.recognized->is_rational()) {
                RationalPoint P = RationalPoint::on(E, c.recognized->x, c.recognized->y_rat);
                expect(is_torsion(E, P) == c.height->torsion,
                       "height torsion flag matches the order-12 test");
            }
        }
        expect(c.precision_bits >= 64, "precision at least 64 bits");
    } catch (const std::exception& e) {
        fails.push_back(std::string("validation raised: ") + e.what());
    }
    return fails;
}

/// Append-only line-delimited JSON store.
class CertificateStore {
public:
    explicit CertificateStore(std::filesystem::path file) : file_(std::move(file)) {}

    const std::filesystem::path& path() const { return file_; }

    void append(const Certificate& c) {
        std::filesystem::create_directories(file_.parent_path().empty()
                                                ? std::filesystem::path(".")
                                                : file_.parent_path());
        std::ofstream out(file_, std::ios::app);
        if (!out) throw std::runtime_error("cannot open store " + file_.string());
        out << to_json(c).dump() << "\n";
    }

    struct LoadResult {
        std::vector<Certificate> certificates;
        std::vector<std::string> corrupt; // line description per corrupt entry
        std::size_t lines = 0;
    };

    LoadResult load() const {
        LoadResult res;
        std::ifstream in(file_);
        if (!in) return res;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            ++res.lines;
            try {
                res.certificates.push_back(certificate_from_json(json::parse(line)));
            } catch (const std::exception& e) {
                res.corrupt.push_back("line " + std::to_string(lineno) + ": " + e.what());
            }
        }
        return res;
    }

private:
    std::filesystem::path file_;
};

} // namespace heegner
