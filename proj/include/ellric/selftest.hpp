#pragma once

// Fast invariant suites behind `ellric selftest`. Each suite draws its points from a
// fixed-seed generator, so a pass is reproducible.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "classifier.hpp"
#include "divisor.hpp"
#include "lattice.hpp"
#include "riccati.hpp"
#include "special_functions.hpp"
#include "theta_quotient.hpp"

namespace ellric {

struct SelfTestResult {
    std::string name;
    bool passed = false;
    double worst = 0.0;
    double tolerance = 0.0;
};

namespace detail {

inline double rel_err(cplx got, cplx want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

inline cplx random_point(std::mt19937_64& rng, const LatticeSpec& L)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double s = u(rng);
    return from_coords({s, u(rng)}, L);
}

} // namespace detail

inline std::vector<SelfTestResult> run_selftest(std::uint64_t seed = 20240917)
{
    std::vector<SelfTestResult> out;
    std::mt19937_64 rng(seed);
    const std::vector<LatticeSpec> lattices{LatticeSpec(I), LatticeSpec(cplx{0.3, 0.8})};

    auto suite = [&](const std::string& name, double tol, const std::function<double()>& body) {
        SelfTestResult r{name, false, 0.0, tol};
        try {
            r.worst = body();
            r.passed = r.worst <= tol;
        } catch (const std::exception&) {
            r.worst = HUGE_VAL;
        }
        out.push_back(r);
    };

    suite("theta_quasi_periodicity", 1e-9, [&] {
        double worst = 0.0;
        for (const auto& L : lattices)
            for (int i = 0; i < 50; ++i) {
                const cplx z = detail::random_point(rng, L);
                const cplx t = theta(z, L);
                worst = std::max(worst, detail::rel_err(theta(z + 1.0, L), t));
                worst = std::max(worst, detail::rel_err(theta(z + L.tau, L), -std::exp(-2.0 * I * pi * z) * t));
            }
        return worst;
    });

    suite("theta_triple_product", 1e-9, [&] {
        double worst = 0.0;
        for (const auto& L : lattices)
            for (int i = 0; i < 50; ++i) {
                const cplx z = detail::random_point(rng, L);
                worst = std::max(worst, detail::rel_err(theta_triple_product(z, L), theta(z, L)));
            }
        return worst;
    });

    suite("theta_k_quasi_periodicity", 1e-9, [&] {
        double worst = 0.0;
        for (const int k : {2, 3})
            for (const auto& base : lattices) {
                const LatticeSpec L = base.at_level(k);
                for (int i = 0; i < 25; ++i) {
                    const cplx z = detail::random_point(rng, L);
                    const cplx t = theta_k(z, L);
                    const cplx shifted = theta_k(z + static_cast<double>(k) * L.tau, L);
                    worst = std::max(worst, detail::rel_err(shifted, -std::exp(-2.0 * I * pi * z / static_cast<double>(k)) * t));
                    worst = std::max(worst, detail::rel_err(theta_k(z + static_cast<double>(k), L), t));
                }
            }
        return worst;
    });

    // With wp_2(z) = wp(z/2) the chain rule turns the usual 1/4 into 1.
    suite("wp2_addition", 1e-7, [&] {
        double worst = 0.0;
        const LatticeSpec L = LatticeSpec(I).at_level(2);
        int done = 0;
        while (done < 25) {
            const cplx z = detail::random_point(rng, L);
            const cplx h = detail::random_point(rng, L);
            if (coord_distance_to_lattice(z, L) < 0.05 || coord_distance_to_lattice(h, L) < 0.05
                || coord_distance_to_lattice(z + h, L) < 0.05 || coord_distance_to_lattice(z - h, L) < 0.05)
                continue;
            const cplx lhs = wp(z, L) + wp(h, L) + wp(z + h, L);
            const cplx slope = (wp_prime(z, L) - wp_prime(h, L)) / (wp(z, L) - wp(h, L));
            worst = std::max(worst, std::abs(lhs - slope * slope) / std::abs(lhs));
            ++done;
        }
        return worst;
    });

    suite("monodromy_multiplier", 1e-7, [&] {
        double worst = 0.0;
        std::uniform_int_distribution<int> mult(-2, 2);
        for (int trial = 0; trial < 20; ++trial) {
            const LatticeSpec L = LatticeSpec(I).at_level(1 + trial % 3);
            ThetaQuotient f(L, 1.0);
            for (int j = 0; j < 3; ++j)
                f.add_factor(detail::random_point(rng, L), mult(rng));
            const double k = L.level;
            for (const cplx z : detail::probe_points(L, detail::factor_points(f), 2, 0.05, static_cast<std::size_t>(trial))) {
                const cplx measured = evaluate(f, z + k * L.tau) / evaluate(f, z);
                worst = std::max(worst, detail::rel_err(measured, predicted_multiplier(f, z)));
            }
        }
        return worst;
    });

    suite("constant_riccati_roots", 1e-8, [&] {
        DifferenceEquation eq;
        eq.lattice = LatticeSpec(I);
        eq.h = {0.31, 0.17};
        eq.a = EllipticCoefficient::constant(0.0);
        eq.b = EllipticCoefficient::constant(1.0);
        const auto outcome = solve(build_first_riccati(eq));
        if (outcome.solutions.size() != 2)
            return HUGE_VAL;
        double worst = 0.0;
        for (const auto& s : outcome.solutions)
            worst = std::max(worst, std::min(std::abs(s.u.constant() - I), std::abs(s.u.constant() + I)));
        return worst;
    });

    return out;
}

} // namespace ellric
