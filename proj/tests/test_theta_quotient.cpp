#include <gtest/gtest.h>

#include <random>

#include "ellric/theta_quotient.hpp"
#include "oracles.hpp"

using namespace ellric;

namespace {

double rel(cplx got, cplx want) { return std::abs(got - want) / std::max(1e-300, std::abs(want)); }

cplx random_point(std::mt19937_64& rng, const LatticeSpec& L)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double s = u(rng);
    return from_coords({s, u(rng)}, L);
}

ThetaQuotient random_quotient(std::mt19937_64& rng, const LatticeSpec& L, int factors = 3)
{
    std::uniform_int_distribution<int> m(-2, 2);
    std::uniform_real_distribution<double> c(0.5, 2.0);
    ThetaQuotient f(L, cplx{c(rng), c(rng) - 1.0});
    for (int i = 0; i < factors; ++i)
        f.add_factor(random_point(rng, L) + static_cast<double>(m(rng)) * L.tau, m(rng));
    return f;
}

// A point kept away from every factor of the given quotients.
cplx safe_point(std::mt19937_64& rng, const std::vector<const ThetaQuotient*>& fs)
{
    const LatticeSpec& L = fs.front()->lattice();
    while (true) {
        const cplx z = random_point(rng, L);
        bool ok = true;
        for (const auto* f : fs)
            for (const auto& fa : f->factors())
                ok = ok && coord_distance_to_lattice(z - fa.xi, L) > 0.05;
        if (ok)
            return z;
    }
}

// Direct product from the series oracle.
cplx evaluate_direct(const ThetaQuotient& f, cplx z)
{
    const double k = f.level();
    cplx v = f.constant();
    for (const auto& fa : f.factors())
        v *= std::pow(oracle::theta_direct((z - fa.xi) / k, f.lattice().tau), fa.mult);
    return v;
}

} // namespace

TEST(ThetaQuotient, EvaluationMatchesDirectProduct)
{
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 40; ++trial) {
        const LatticeSpec L = LatticeSpec(cplx{0.3, 0.8}).at_level(1 + trial % 3);
        const auto f = random_quotient(rng, L);
        const cplx z = safe_point(rng, {&f});
        EXPECT_LT(rel(evaluate(f, z), evaluate_direct(f, z)), 1e-9);
    }
}

TEST(ThetaQuotient, ArithmeticIsPointwise)
{
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 40; ++trial) {
        const LatticeSpec L = LatticeSpec(I).at_level(1 + trial % 2);
        const auto f = random_quotient(rng, L);
        const auto g = random_quotient(rng, L);
        const cplx z = safe_point(rng, {&f, &g});
        const cplx fz = evaluate(f, z);
        const cplx gz = evaluate(g, z);
        EXPECT_LT(rel(evaluate(multiply(f, g), z), fz * gz), 1e-10);
        EXPECT_LT(rel(evaluate(invert(f), z), 1.0 / fz), 1e-10);
        EXPECT_LT(rel(evaluate(power(f, 3), z), fz * fz * fz), 1e-10);
        EXPECT_LT(rel(evaluate(power(f, -2), z), 1.0 / (fz * fz)), 1e-10);
        EXPECT_LT(rel(evaluate(scale(f, cplx{2.0, -1.0}), z), cplx{2.0, -1.0} * fz), 1e-12);
        EXPECT_EQ(multiply(f, g).degree(), f.degree() + g.degree());
        EXPECT_EQ(multiply(f, g).divisor(), add(f.divisor(), g.divisor()));
    }
}

TEST(ThetaQuotient, PhiShift)
{
    std::mt19937_64 rng(43);
    const cplx h{0.31, 0.17};
    for (int trial = 0; trial < 30; ++trial) {
        const LatticeSpec L = LatticeSpec(I).at_level(1 + trial % 2);
        const auto f = random_quotient(rng, L);
        const auto g = phi_shift(f, h);
        const cplx z = safe_point(rng, {&g});
        EXPECT_LT(rel(evaluate(g, z), evaluate(f, z + h)), 1e-10);
        EXPECT_EQ(g.divisor(), shift(f.divisor(), h));
    }
}

TEST(ThetaQuotient, ZeroConstantRejected)
{
    EXPECT_THROW(ThetaQuotient(LatticeSpec(I), 0.0), error);
}

TEST(ThetaQuotient, PoleGuard)
{
    const LatticeSpec L(I);
    ThetaQuotient f(L, 1.0, {{0.3, -1}});
    EXPECT_THROW(evaluate(f, cplx{0.3, 1e-6}), error);
}

// f(z + k tau) / f(z) = (-1)^deg e^{2 i pi omega / k} e^{-2 i pi deg z / k}.
TEST(Monodromy, MultiplierLaw)
{
    std::mt19937_64 rng(44);
    for (int trial = 0; trial < 50; ++trial) {
        const LatticeSpec L = LatticeSpec(trial % 2 ? I : cplx{0.3, 0.8}).at_level(1 + trial % 3);
        const auto f = random_quotient(rng, L, 4);
        const double k = L.level;
        std::vector<cplx> normalized;
        for (int j = 0; j < 4; ++j) {
            const cplx z = safe_point(rng, {&f});
            const cplx measured = evaluate(f, z + k * L.tau) / evaluate(f, z);
            EXPECT_LT(rel(measured, predicted_multiplier(f, z)), 1e-7);
            // Factoring out the z-dependence leaves a constant.
            normalized.push_back(measured * std::exp(2.0 * I * pi * static_cast<double>(f.degree()) * z / k));
            EXPECT_LT(rel(evaluate(f, z + k), evaluate(f, z)), 1e-9);
        }
        cplx mean{0.0, 0.0};
        for (const cplx v : normalized)
            mean += v / static_cast<double>(normalized.size());
        double var = 0.0;
        for (const cplx v : normalized)
            var += std::norm(v - mean) / static_cast<double>(normalized.size());
        EXPECT_LT(var / std::norm(mean), 1e-8);
    }
}

TEST(Ellipticity, DegreeZeroAndIntegralWeight)
{
    const LatticeSpec L(I);
    ThetaQuotient f(L, 1.0, {{0.2, 1}, {0.5, 1}, {0.35, -2}});
    EXPECT_TRUE(is_elliptic(f));
    ThetaQuotient g(L, 1.0, {{0.2, 1}, {0.6, -1}});
    EXPECT_FALSE(is_elliptic(g));
    ThetaQuotient h(L, 1.0, {{0.2, 1}});
    EXPECT_FALSE(is_elliptic(h));
}

TEST(Ellipticity, NormalizeRepresentatives)
{
    std::mt19937_64 rng(45);
    for (const int k : {1, 2}) {
        const LatticeSpec L = LatticeSpec(cplx{0.3, 0.8}).at_level(k);
        const cplx a = random_point(rng, L);
        const cplx b = random_point(rng, L);
        // Weight a + b - (a + b + k tau) = -k tau lies in kL but not in kZ.
        ThetaQuotient f(L, 1.0, {{a, 1}, {b, 1}, {a + b + static_cast<double>(k) * L.tau, -1}, {0.0, -1}});
        EXPECT_FALSE(is_elliptic(f));
        const auto g = normalize_representatives(f);
        EXPECT_TRUE(is_elliptic(g));
        EXPECT_EQ(g.divisor(), f.divisor());
    }
}

TEST(WpLinear, QuotientFormMatchesWp)
{
    std::mt19937_64 rng(46);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (const auto& base : {LatticeSpec(I), LatticeSpec(cplx{0.3, 0.8})})
        for (int trial = 0; trial < 10; ++trial) {
            const cplx alpha{u(rng), u(rng)};
            const cplx beta{u(rng), u(rng)};
            const auto w = from_wp_linear(alpha, beta, base);
            EXPECT_TRUE(is_elliptic(w.quotient));
            EXPECT_LT(std::abs(alpha * wp(w.z0, base) + beta), 1e-8 * (std::abs(alpha) + std::abs(beta)));
            for (int j = 0; j < 5; ++j) {
                const cplx z = safe_point(rng, {&w.quotient});
                EXPECT_LT(rel(evaluate(w.quotient, z), alpha * oracle::wp_rows(z, base.tau) + beta), 1e-8);
            }
        }
}

TEST(Coefficients, DivisorsAndPoleBounds)
{
    const LatticeSpec L(I);
    const auto c = EllipticCoefficient::wp_linear(1.0, 0.0, L);
    const Divisor d = exact_divisor(c, L);
    // wp on the square lattice vanishes doubly at (1+i)/2.
    EXPECT_EQ(d.multiplicity(cplx{0.5, 0.5}), 2);
    EXPECT_EQ(d.multiplicity(0.0), -2);
    EXPECT_EQ(degree(d), 0);
    EXPECT_EQ(pole_bound(c, L), Divisor::single(0.0, L, 2));

    const LatticeSpec L2 = L.at_level(2);
    const Divisor up = pole_bound(c, L2);
    EXPECT_EQ(degree(up), 8);
    EXPECT_EQ(up.multiplicity(1.0), 2);

    const auto k = EllipticCoefficient::constant(3.0);
    EXPECT_TRUE(pole_bound(k, L).empty());
    EXPECT_TRUE(exact_divisor(k, L).empty());
    EXPECT_THROW(exact_divisor(EllipticCoefficient::constant(0.0), L), error);

    ThetaQuotient q(L, 1.0, {{0.2, 1}, {0.5, 1}, {0.35, -2}});
    const auto s = EllipticCoefficient::sum({q, ThetaQuotient(L, 1.0, {{0.1, 1}, {0.7, -1}})});
    EXPECT_THROW(exact_divisor(s, L), error);
    const Divisor cd = common_denominator({c, s}, L);
    EXPECT_EQ(cd.multiplicity(0.0), 2);
    EXPECT_EQ(cd.multiplicity(0.35), 2);
    EXPECT_EQ(cd.multiplicity(0.7), 1);
}

TEST(Coefficients, EvaluateVariants)
{
    std::mt19937_64 rng(47);
    const LatticeSpec L(I);
    const auto w = EllipticCoefficient::wp_linear(cplx{1.0, 2.0}, -1.0, L);
    const ThetaQuotient tq = to_quotient(w, L);
    const auto q = EllipticCoefficient::quotient(tq);
    for (int j = 0; j < 10; ++j) {
        const cplx z = safe_point(rng, {&tq});
        EXPECT_LT(rel(evaluate(q, z), evaluate(w, z)), 1e-9);
    }
}
