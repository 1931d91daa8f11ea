#pragma once

// Group-shape classification of phi^2 y + a phi y + b y = 0 from Riccati
// solution counts, the imprimitivity test and the determinant group.

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "divisor.hpp"
#include "error.hpp"
#include "lattice.hpp"
#include "riccati.hpp"
#include "special_functions.hpp"
#include "theta_quotient.hpp"

namespace ellric {

struct Rank1Group {
    enum class Kind { Finite, FullTorus };
    Kind kind = Kind::FullTorus;
    int order = 0;          // Finite
    int bound_checked = 0;  // FullTorus: no N <= bound_checked works
    std::optional<ThetaQuotient> witness; // g with b^N = phi(g)/g
    double witness_residual = 0.0;
    std::string reason;

    static Rank1Group finite(int n, ThetaQuotient g, double residual)
    {
        Rank1Group r;
        r.kind = Kind::Finite;
        r.order = n;
        r.witness = std::move(g);
        r.witness_residual = residual;
        r.reason = "coboundary witness";
        return r;
    }

    static Rank1Group full(int bound, std::string why)
    {
        Rank1Group r;
        r.kind = Kind::FullTorus;
        r.bound_checked = bound;
        r.reason = std::move(why);
        return r;
    }
};

namespace detail {

// max |b(z)^N g(z) - g(z+h)| / |g(z+h)| over 8 probe points.
inline double telescoping_residual(const EllipticCoefficient& b, int N, const ThetaQuotient& g, cplx h,
                                   const LatticeSpec& L, const EvalConfig& cfg)
{
    std::vector<cplx> avoid = factor_points(g);
    for (const cplx x : factor_points(g))
        avoid.push_back(x - h);
    if (!b.is_constant())
        for (const auto& e : exact_divisor(b, L, cfg).entries())
            avoid.push_back(e.point.xi);
    double worst = 0.0;
    for (const cplx z : probe_points(L, avoid, 8, 0.03)) {
        const cplx bz = evaluate(b, z, cfg);
        cplx bn{1.0, 0.0};
        for (int i = 0; i < N; ++i)
            bn *= bz;
        const cplx gs = evaluate(g, z + h, cfg);
        worst = std::max(worst, std::abs(bn * evaluate(g, z, cfg) - gs) / std::abs(gs));
    }
    return worst;
}

} // namespace detail

/// Least N <= n_max with b^N = phi(g)/g for a theta quotient g, or FullTorus(n_max).
inline Rank1Group rank1_group(const EllipticCoefficient& b, cplx h, const LatticeSpec& L, int n_max,
                              double tol_c = 1e-6, int orbit_cap = 128, const EvalConfig& cfg = {})
{
    if (b.is_zero())
        throw error(errc::zero_coefficient_b, "rank-1 group of the zero coefficient");
    if (n_max < 1)
        throw error(errc::invalid_input, "n_max must be >= 1");

    if (const auto* c = std::get_if<ConstantCoeff>(&b.data)) {
        cplx pw{1.0, 0.0};
        for (int n = 1; n <= n_max; ++n) {
            pw *= c->value;
            if (std::abs(pw - 1.0) <= tol_c)
                return Rank1Group::finite(n, ThetaQuotient(L, 1.0), std::abs(pw - 1.0));
        }
        return Rank1Group::full(n_max, "no root of unity of order <= bound");
    }

    const Divisor D1 = exact_divisor(b, L, cfg);
    for (int n = 1; n <= n_max; ++n) {
        const auto E = h_orbit_solve(scale(D1, n), h, orbit_cap);
        // Orbit totals scale with n, so an obstruction at n = 1 persists for every n.
        if (!E)
            return Rank1Group::full(n_max, "nonzero total multiplicity on an h-orbit");
        ThetaQuotient g(L, 1.0);
        for (const auto& e : E->entries())
            g.add_factor(e.point.xi, e.mult);
        const double res = detail::telescoping_residual(b, n, g, h, L, cfg);
        if (res <= tol_c)
            return Rank1Group::finite(n, g, res);
    }
    return Rank1Group::full(n_max, "coboundary constant is not 1 for any N <= bound");
}

/// Rendering of {M in GL2 : det M in H}.
inline std::string render_det_group(const Rank1Group& H)
{
    if (H.kind == Rank1Group::Kind::FullTorus)
        return "GL2";
    return "mu_" + std::to_string(2 * H.order) + ".SL2";
}

enum class VerdictKind {
    ScalarSubgroup,
    ReducibleNotCompletelyReducible,
    CompletelyReducibleNonScalar,
    Imprimitive,
    DetConstrained,
    Unresolved
};

inline const char* to_string(VerdictKind k)
{
    switch (k) {
    case VerdictKind::ScalarSubgroup: return "scalar_subgroup";
    case VerdictKind::ReducibleNotCompletelyReducible: return "reducible_not_completely_reducible";
    case VerdictKind::CompletelyReducibleNonScalar: return "completely_reducible_non_scalar";
    case VerdictKind::Imprimitive: return "imprimitive";
    case VerdictKind::DetConstrained: return "det_constrained";
    case VerdictKind::Unresolved: return "unresolved";
    }
    return "?";
}

struct Assumption {
    std::string name;
    int bound = 0;
    int secondary_bound = 0; // d_range for independence checks
    bool passed = true;
    std::string detail;
};

struct GaloisVerdict {
    VerdictKind kind = VerdictKind::Unresolved;
    std::optional<Rank1Group> det_group;
    std::vector<Assumption> assumptions;
    std::optional<RiccatiProblem> first_problem;
    std::optional<RiccatiOutcome> first;
    std::optional<RiccatiProblem> imprimitivity_problem;
    std::optional<RiccatiOutcome> imprimitivity;
    std::string evidence;
    std::uint64_t seed = 0;
};

inline std::string render(const GaloisVerdict& v)
{
    switch (v.kind) {
    case VerdictKind::ScalarSubgroup: return "scalar_subgroup";
    case VerdictKind::ReducibleNotCompletelyReducible: return "reducible_not_completely";
    case VerdictKind::CompletelyReducibleNonScalar: return "completely_reducible_non_scalar";
    case VerdictKind::Imprimitive: return "imprimitive";
    case VerdictKind::DetConstrained: return render_det_group(*v.det_group);
    case VerdictKind::Unresolved: return "unresolved";
    }
    return "?";
}

struct ClassifyConfig {
    SolveConfig solve{};
    int torsion_nmax = 64;
    int independence_l_range = 8;
    int d_range = 64;
    int rank1_nmax = 24;
    int orbit_cap = 128;
};

namespace detail {

// Zeros of the alpha wp + beta coefficients; the points whose relation to h is checked.
inline std::vector<cplx> wp_linear_zeros(const DifferenceEquation& eq, const EvalConfig& cfg)
{
    std::vector<cplx> out;
    for (const auto* c : {&eq.a, &eq.b})
        if (const auto* w = std::get_if<WpLinearCoeff>(&c->data))
            if (w->alpha != cplx{0.0, 0.0})
                out.push_back(from_wp_linear(w->alpha, w->beta, w->lattice, cfg).z0);
    return out;
}

} // namespace detail

inline GaloisVerdict classify(const DifferenceEquation& eq, const ClassifyConfig& cfg = {})
{
    cfg.solve.validate();
    const LatticeSpec& L = eq.lattice;
    if (L.level != 1)
        throw error(errc::level_mismatch, "equations live on the level-1 lattice");
    if (eq.b.is_zero())
        throw error(errc::zero_coefficient_b, "b must be invertible");

    GaloisVerdict v;
    v.seed = cfg.solve.seed;

    if (const auto n = torsion_order(eq.h, L, cfg.torsion_nmax))
        throw error(errc::non_torsion_violated, "shift has torsion order " + std::to_string(*n));
    v.assumptions.push_back({"torsion_order_absent", cfg.torsion_nmax, 0, true, "no n <= bound with n h in L"});
    for (const cplx z0 : detail::wp_linear_zeros(eq, cfg.solve.eval)) {
        const bool ok = check_independence(eq.h, z0, cfg.independence_l_range, cfg.d_range, L);
        v.assumptions.push_back({"independence", cfg.independence_l_range, cfg.d_range, ok,
                                 "no d h = l z0 mod L for the zero z0 of a wp-linear coefficient"});
    }
    v.assumptions.push_back({"d_max", cfg.solve.d_max, 0, true, "deg r scanned in [0, d_max]"});
    v.assumptions.push_back({"orbit_cap", cfg.orbit_cap, 0, true, "h-orbit detection window"});
    v.assumptions.push_back({std::string("weight_congruence_") + to_string(cfg.solve.weight_mode), 0, 0, true,
                             cfg.solve.weight_mode == WeightMode::Formal
                                 ? "h-coefficients balanced exactly; relies on h non-torsion"
                                 : "numeric congruence mod kL"});

    v.first_problem = build_first_riccati(eq, cfg.solve.eval);
    v.first = solve(*v.first_problem, cfg.solve);
    const auto& first = *v.first;
    if (first.kind == OutcomeKind::Solutions) {
        v.assumptions.push_back({"solution_count_complete", 0, 0, first.solution_count_complete,
                                 "no unsearched deg r != 0 survivors"});
        const std::size_t n = first.solutions.size();
        v.kind = n >= 3 ? VerdictKind::ScalarSubgroup
               : n == 2 ? VerdictKind::CompletelyReducibleNonScalar
                        : VerdictKind::ReducibleNotCompletelyReducible;
        v.evidence = std::to_string(n) + " verified Riccati solution(s)";
        return v;
    }
    if (first.kind == OutcomeKind::Inconclusive) {
        v.kind = VerdictKind::Unresolved;
        v.evidence = std::to_string(first.unresolved.size()) + " first-pass survivor(s) with deg r != 0";
        return v;
    }

    if (eq.a.is_zero()) {
        v.kind = VerdictKind::Imprimitive;
        v.evidence = "irreducible with a = 0";
        return v;
    }

    v.imprimitivity_problem = build_imprimitivity_riccati(eq, cfg.solve.eval);
    v.imprimitivity = solve(*v.imprimitivity_problem, cfg.solve);
    const auto& imp = *v.imprimitivity;
    if (imp.kind == OutcomeKind::Solutions) {
        v.kind = VerdictKind::Imprimitive;
        v.evidence = "imprimitivity Riccati has a verified solution";
        return v;
    }
    if (imp.kind == OutcomeKind::Inconclusive) {
        v.kind = VerdictKind::Unresolved;
        v.evidence = std::to_string(imp.unresolved.size()) + " imprimitivity survivor(s) with deg r != 0";
        return v;
    }

    v.det_group = rank1_group(eq.b, eq.h, L, cfg.rank1_nmax, cfg.solve.tol_c, cfg.orbit_cap, cfg.solve.eval);
    v.assumptions.push_back({"rank1_nmax", cfg.rank1_nmax, 0, true, "coboundary search for b^N"});
    v.kind = VerdictKind::DetConstrained;
    v.evidence = "irreducible, primitive; determinant group " + render_det_group(*v.det_group);
    return v;
}

/// Re-verifies every certificate carried by the verdict with a fresh seed.
inline bool replay_certificates(const DifferenceEquation& eq, const GaloisVerdict& v, std::uint64_t seed,
                                const ClassifyConfig& cfg = {})
{
    auto check = [&](const std::optional<RiccatiProblem>& prob, const std::optional<RiccatiOutcome>& out) {
        if (!prob || !out)
            return true;
        for (const auto& s : out->solutions)
            if (riccati_residual(*prob, s.u, seed, cfg.solve.samples, cfg.solve.eval) > cfg.solve.tol_res)
                return false;
        return true;
    };
    if (!check(v.first_problem, v.first) || !check(v.imprimitivity_problem, v.imprimitivity))
        return false;
    if (v.det_group && v.det_group->kind == Rank1Group::Kind::Finite)
        return detail::telescoping_residual(eq.b, v.det_group->order, *v.det_group->witness, eq.h, eq.lattice,
                                            cfg.solve.eval)
            <= cfg.solve.tol_c;
    return true;
}

// ---------------------------------------------------------------------------
// Builders

/// Delta_h^2 y = (A wp + B) y, i.e. phi^2 y - 2 phi y + (1 - A h^2 wp - B h^2) y = 0.
inline DifferenceEquation build_lame(cplx A, cplx B, cplx h, const LatticeSpec& L, int torsion_nmax = 64)
{
    if (A == cplx{0.0, 0.0})
        throw error(errc::invalid_input, "discrete Lame equation needs A != 0");
    if (const auto n = torsion_order(h, L, torsion_nmax))
        throw error(errc::non_torsion_violated, "shift has torsion order " + std::to_string(*n));
    DifferenceEquation eq;
    eq.lattice = L;
    eq.h = h;
    eq.a = EllipticCoefficient::constant(-2.0);
    eq.b = EllipticCoefficient::wp_linear(-A * h * h, -B * h * h + 1.0, L);
    return eq;
}

/// a = alpha wp + beta, b constant.
inline DifferenceEquation build_family7(cplx b_const, cplx alpha, cplx beta, cplx h, const LatticeSpec& L,
                                        int torsion_nmax = 64)
{
    if (b_const == cplx{0.0, 0.0})
        throw error(errc::zero_coefficient_b, "b must be nonzero");
    if (alpha == cplx{0.0, 0.0})
        throw error(errc::invalid_input, "alpha must be nonzero");
    if (const auto n = torsion_order(h, L, torsion_nmax))
        throw error(errc::non_torsion_violated, "shift has torsion order " + std::to_string(*n));
    DifferenceEquation eq;
    eq.lattice = L;
    eq.h = h;
    eq.a = EllipticCoefficient::wp_linear(alpha, beta, L);
    eq.b = EllipticCoefficient::constant(b_const);
    return eq;
}

/// Independence range conventionally paired with each family.
inline constexpr int lame_l_range = 8;
inline constexpr int family7_l_range = 16;

} // namespace ellric
