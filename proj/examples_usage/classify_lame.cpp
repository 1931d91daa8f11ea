// Classifies the discrete Lame equation Delta_h^2 y = wp(z) y on C/(Z + iZ) and prints
// the group together with the imprimitivity bounds that ruled out a monomial group.

#include <cstdio>
#include <string>

#include "ellric/ellric.hpp"

int main()
{
    using namespace ellric;
    const LatticeSpec L(I);
    const cplx h{0.31, 0.17};
    const DifferenceEquation eq = build_lame(1.0, 0.0, h, L);

    const GaloisVerdict v = classify(eq);
    std::printf("group: %s\n", render(v).c_str());
    for (const auto& a : v.assumptions)
        std::printf("  %-28s bound %-4d %s\n", a.name.c_str(), a.bound, a.passed ? "passed" : "FAILED");

    if (v.imprimitivity_problem) {
        std::printf("imprimitivity numerator bound on C/L:\n");
        for (const auto& e : v.imprimitivity_problem->p2_base.entries())
            std::printf("  %d [%+.6f %+.6fi]\n", e.mult, e.point.xi.real(), e.point.xi.imag());
    }
    return v.kind == VerdictKind::Unresolved ? 2 : 0;
}
