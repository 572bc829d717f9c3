#pragma once

#include <map>
#include <sstream>
#include <vector>

#include "heegner/heegner_forms.hpp"
#include "heegner/quadform.hpp"

namespace heegner {

/// Element of the generalized dihedral group Gal(H_p/Q): a class-group
/// element gamma together with a sign; sign -1 marks the coset acting on the
/// class group by inversion (the involutions). Group law:
/// (g1, e1) * (g2, e2) = (g1 * g2^e1, e1 e2).
struct DihedralElement {
    std::size_t gamma;
    int sign; // +1 or -1
    Int group_disc;

    bool operator==(const DihedralElement& o) const {
        return gamma == o.gamma && sign == o.sign && group_disc == o.group_disc;
    }
};

struct InvolutionLabel {
    std::size_t j; // 1-based label
    DihedralElement element;
};

inline DihedralElement dihedral(const FormClassGroup& G, std::size_t gamma, int sign) {
    if (sign != 1 && sign != -1) throw std::domain_error("dihedral sign must be +-1");
    return DihedralElement{gamma, sign, G.disc()};
}

inline DihedralElement multiply(const FormClassGroup& G, const DihedralElement& x,
                                const DihedralElement& y) {
    if (x.group_disc != G.disc() || y.group_disc != G.disc())
        throw std::domain_error("dihedral multiply: elements of different groups");
    std::size_t g2 = (x.sign == 1) ? y.gamma : G.inv(y.gamma);
    return DihedralElement{G.mul(x.gamma, g2), x.sign * y.sign, G.disc()};
}

/// The h involutions of Gal(H_p/Q), labeled j = 1..h in the canonical
/// (lexicographic) class order.
inline std::vector<InvolutionLabel> involutions(const FormClassGroup& G) {
    std::vector<InvolutionLabel> out;
    out.reserve(G.h());
    for (std::size_t i = 0; i < G.h(); ++i)
        out.push_back(InvolutionLabel{i + 1, DihedralElement{i, -1, G.disc()}});
    return out;
}

/// Action on Heegner classes: (g, +1) . c = g c and (g, -1) . c = g c^-1.
inline std::size_t act(const FormClassGroup& G, const DihedralElement& sigma,
                       std::size_t c) {
    std::size_t cc = (sigma.sign == 1) ? c : G.inv(c);
    return G.mul(sigma.gamma, cc);
}

/// Classes fixed by an involution (gamma, -1): solutions of c^2 = gamma.
/// In a group of odd order the square root is unique, c = gamma^((h+1)/2);
/// both the closed form and the defining equation are enforced.
inline std::vector<std::size_t> fixed_heegner_classes(const FormClassGroup& G,
                                                      const InvolutionLabel& sigma) {
    if (G.h() % 2 == 0)
        throw std::domain_error("fixed classes: even class number is out of scope");
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < G.h(); ++c)
        if (G.mul(c, c) == sigma.element.gamma) out.push_back(c);
    std::size_t closed = G.pow(sigma.element.gamma, Int((static_cast<unsigned long>(G.h()) + 1) / 2));
    if (out.size() != 1 || out[0] != closed)
        throw internal_error("odd-order square root is not unique");
    return out;
}

struct SigmaSelection {
    Int p;
    InvolutionLabel involution;
    std::size_t fixed_class;
    HeegnerForm fixed_form;
};

/// The selector Sigma_j across a list of family primes: per prime, the j-th
/// involution and its unique fixed Heegner form. j must not exceed the
/// smallest class number among the primes.
inline std::vector<SigmaSelection> select_sigma(std::size_t j, const std::vector<Int>& primes,
                                                const Int& N) {
    if (j == 0) throw std::domain_error("select_sigma: labels are 1-based");
    std::vector<SigmaSelection> out;
    for (const Int& p : primes) {
        FormClassGroup G(p);
        if (j > G.h()) {
            std::ostringstream os;
            os << "select_sigma: j = " << j << " exceeds class number " << G.h()
               << " of prime " << p;
            throw std::domain_error(os.str());
        }
        InvolutionLabel lab{j, DihedralElement{j - 1, -1, G.disc()}};
        std::size_t fixed = fixed_heegner_classes(G, lab)[0];
        auto forms = heegner_forms(G, N);
        out.push_back(SigmaSelection{p, lab, fixed, forms.at(fixed)});
    }
    return out;
}

} // namespace heegner
