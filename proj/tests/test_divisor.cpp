#include <gtest/gtest.h>

#include <random>
#include <set>

#include "ellric/divisor.hpp"

using namespace ellric;

namespace {

const LatticeSpec L1(cplx{0.3, 0.8});
const LatticeSpec L2 = L1.at_level(2);

Divisor random_divisor(std::mt19937_64& rng, const LatticeSpec& L, int points, int max_mult = 3)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> m(-max_mult, max_mult);
    Divisor d(L);
    for (int i = 0; i < points; ++i) {
        const double s = u(rng);
        d.add_point(from_coords({s, u(rng)}, L), m(rng));
    }
    return d;
}

bool same_class(cplx a, cplx b, const LatticeSpec& L) { return is_lattice_member(a - b, L, 1e-9); }

} // namespace

TEST(Divisor, TolerantPointIdentity)
{
    Divisor d(L1);
    d.add_point(cplx{0.25, 0.4}, 2);
    d.add_point(cplx{0.25, 0.4} + 1e-12, 1);
    d.add_point(cplx{0.25, 0.4} + 1.0 + L1.tau, -1);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d.multiplicity(cplx{0.25, 0.4}), 2);
    d.add_point(cplx{0.25, 0.4}, -2);
    EXPECT_TRUE(d.empty());
}

TEST(Divisor, GroupLaws)
{
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const Divisor a = random_divisor(rng, L2, 4);
        const Divisor b = random_divisor(rng, L2, 4);
        const Divisor c = random_divisor(rng, L2, 3);
        EXPECT_EQ(add(a, b), add(b, a));
        EXPECT_EQ(add(add(a, b), c), add(a, add(b, c)));
        EXPECT_TRUE(subtract(a, a).empty());
        EXPECT_EQ(negate(negate(a)), a);
        EXPECT_EQ(scale(a, 3), add(a, add(a, a)));
        EXPECT_EQ(degree(add(a, b)), degree(a) + degree(b));
        EXPECT_TRUE(same_class(weight_representative(add(a, b)),
                               weight_representative(a) + weight_representative(b), L2));
    }
}

TEST(Divisor, PartsAndOrder)
{
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 50; ++trial) {
        const Divisor d = random_divisor(rng, L1, 5);
        const Divisor pos = positive_part(d);
        const Divisor neg = negative_part(d);
        EXPECT_EQ(subtract(pos, neg), d);
        EXPECT_TRUE(pos.empty() || is_effective(pos));
        EXPECT_TRUE(neg.empty() || is_effective(neg));
        EXPECT_TRUE(leq(d, pos));
        EXPECT_TRUE(leq(negate(neg), d));
        const Divisor e = random_divisor(rng, L1, 3);
        const Divisor j = join(d, e);
        EXPECT_TRUE(leq(d, j));
        EXPECT_TRUE(leq(e, j));
    }
}

TEST(Divisor, LevelsDoNotMix)
{
    const Divisor a = Divisor::single(0.1, L1);
    const Divisor b = Divisor::single(0.1, L2);
    try {
        (void)add(a, b);
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::level_mismatch);
    }
    EXPECT_THROW(lift(b, 3), error);
}

TEST(Divisor, ShiftMovesWeight)
{
    std::mt19937_64 rng(33);
    const cplx delta{0.137, 0.291};
    for (int trial = 0; trial < 30; ++trial) {
        const Divisor d = random_divisor(rng, L2, 4);
        const Divisor s = shift(d, delta);
        EXPECT_EQ(degree(s), degree(d));
        EXPECT_TRUE(same_class(weight_representative(s),
                               weight_representative(d) - static_cast<double>(degree(d)) * delta, L2));
        EXPECT_EQ(shift(s, -delta), d);
    }
}

TEST(Divisor, LiftToLevelTwo)
{
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 30; ++trial) {
        const Divisor d = random_divisor(rng, L1, 3);
        const Divisor up = lift(d, 2);
        EXPECT_EQ(up.level(), 2);
        EXPECT_EQ(degree(up), 4 * degree(d));
        EXPECT_EQ(up.size(), 4 * d.size());
        // Each preimage set sums to 4 xi + 2 + 2 tau, which is 4 xi mod 2L.
        EXPECT_TRUE(same_class(weight_representative(up), 4.0 * weight_representative(d), L2));
        for (const auto& e : up.entries())
            EXPECT_EQ(d.multiplicity(e.point.xi), e.mult);
    }
}

TEST(Subdivisors, CountAndContents)
{
    Divisor bound(L2);
    bound.add_point(cplx{0.2, 0.1}, 2);
    bound.add_point(cplx{0.7, 0.3}, 1);
    bound.add_point(cplx{1.1, 0.9}, 3);
    const auto all = enumerate_subdivisors(bound);
    ASSERT_EQ(all.size(), 3u * 2u * 4u);
    std::set<std::vector<int>> seen;
    for (const auto& d : all) {
        EXPECT_TRUE(leq(d, bound));
        EXPECT_TRUE(d.empty() || is_effective(d));
        std::vector<int> key;
        for (const auto& e : bound.entries())
            key.push_back(d.multiplicity(e.point.xi));
        seen.insert(key);
    }
    EXPECT_EQ(seen.size(), all.size());
}

TEST(Subdivisors, CapAndEffectiveness)
{
    Divisor bound(L1);
    for (int i = 0; i < 12; ++i)
        bound.add_point(cplx{0.05 * i + 0.01, 0.3}, 9);
    try {
        SubdivisorEnumerator en(bound, 1000);
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::combinatorial_blowup);
    }
    Divisor mixed(L1);
    mixed.add_point(0.3, 1);
    mixed.add_point(0.6, -1);
    EXPECT_THROW(SubdivisorEnumerator{mixed}, error);
}

TEST(HOrbitSolve, RecoversCoboundaryDivisor)
{
    std::mt19937_64 rng(35);
    const LatticeSpec L(I);
    const cplx h{0.1234567, 0.3456789};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> m(-2, 2);
    std::uniform_int_distribution<int> step(-5, 5);
    for (int trial = 0; trial < 30; ++trial) {
        Divisor E(L);
        const cplx base{u(rng), u(rng)};
        for (int i = 0; i < 4; ++i)
            E.add_point(base + static_cast<double>(step(rng)) * h, m(rng));
        E.add_point(cplx{u(rng), u(rng)}, m(rng));
        const Divisor D = subtract(shift(E, h), E);
        const auto sol = h_orbit_solve(D, h);
        ASSERT_TRUE(sol.has_value());
        EXPECT_EQ(subtract(shift(*sol, h), *sol), D);
    }
}

TEST(HOrbitSolve, NonzeroOrbitTotalIsObstructed)
{
    const LatticeSpec L(I);
    const cplx h{0.1234567, 0.3456789};
    Divisor D(L);
    D.add_point(0.3, 1);
    D.add_point(cplx{0.3, 0.0} + 2.0 * h, 1);
    D.add_point(cplx{0.8, 0.1}, -2);
    EXPECT_FALSE(h_orbit_solve(D, h).has_value());
}

TEST(HOrbitSolve, TorsionShiftWithinCapIsRejected)
{
    const LatticeSpec L(I);
    const cplx h{0.25, 0.0};
    Divisor D(L);
    D.add_point(0.1, 1);
    D.add_point(0.35, -1);
    try {
        (void)h_orbit_solve(D, h, 16);
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::orbit_cap_exceeded);
    }
}
