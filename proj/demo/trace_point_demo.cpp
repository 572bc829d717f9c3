// Minimal library walkthrough: build the class group for a family prime,
// pick an involution, follow its fixed Heegner form through the modular
// parametrization of 37a1, and print the recognized point.

#include <iostream>

#include "heegner/pipeline.hpp"

int main() {
    using namespace heegner;
    const CurveSpec& E = *find_builtin_curve("37a1");

    FamilyCongruence cong = build_congruence(E.conductor);
    std::cout << "family congruence: p = " << cong.residue_rho << " (mod "
              << cong.modulus_M << ")\n";
    FamilyPrime fp = next_family_prime(cong, E.conductor, 0);
    std::cout << "first family prime: " << fp.p << "\n";

    FormClassGroup G(fp.p);
    std::cout << "h(-" << fp.p << ") = " << G.h() << "\n";
    auto invs = involutions(G);
    std::size_t fixed = fixed_heegner_classes(G, invs[0])[0];
    std::cout << "involution psi_1 fixes class " << fixed << ": "
              << G.form(fixed).str() << "\n";

    RunConfig cfg;
    cfg.out_dir = "demo_out";
    Certificate cert = certify(E, fp.p, 1, cfg);
    std::cout << "certificate status: " << cert.status << "\n";
    if (cert.recognized)
        std::cout << "recognized x = " << Rat(cert.recognized->x) << "\n";
    std::cout << "trace z = " << cert.trace_z_re_hex << " + i*" << cert.trace_z_im_hex
              << "\n";
    return 0;
}
