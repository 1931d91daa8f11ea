#pragma once

// Riccati problems (phi(u) + a) u = -b at level k: divisor bounds, candidate
// enumeration under the degree/weight constraints, constant solving and
// sampled verification.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "divisor.hpp"
#include "error.hpp"
#include "lattice.hpp"
#include "special_functions.hpp"
#include "theta_quotient.hpp"

namespace ellric {

/// phi^2 y + a phi y + b y = 0 with phi(f)(z) = f(z + h), coefficients on C/L (level 1).
struct DifferenceEquation {
    LatticeSpec lattice{};
    cplx h{};
    EllipticCoefficient a = EllipticCoefficient::constant(0.0);
    EllipticCoefficient b = EllipticCoefficient::constant(1.0);
};

enum class WeightMode { Numeric, Formal };

inline const char* to_string(WeightMode m) { return m == WeightMode::Numeric ? "numeric" : "formal"; }

struct RiccatiProblem {
    LatticeSpec lattice{};     // level of the search (2 for both passes)
    cplx step{};               // h, or 2h for the imprimitivity pass
    cplx h{};
    int step_multiple = 1;     // step = step_multiple * h
    EllipticCoefficient coeff_a;
    EllipticCoefficient coeff_b;
    Divisor p2_divisor;        // numerator bound of b * p3, lifted
    Divisor p3_divisor;        // common denominator bound, lifted
    Divisor p2_base;           // same bounds on C/L
    Divisor p3_base;
    std::optional<ThetaQuotient> b_quotient; // exact form of coeff_b on C/L when known
    /// Unshifted points of the equation's coefficient divisors (and 0): the orbit bases
    /// of the formal weight split.
    std::vector<cplx> orbit_seeds;

    /// q <= divisor of p3(z - step).
    Divisor q_bound() const { return shift(p3_divisor, -step); }
};

struct RiccatiCandidate {
    Divisor p_div;
    Divisor q_div;
    int deg_r = 0;
};

struct SolveConfig {
    std::uint64_t seed = 20240917;
    int d_max = 32;
    double tol_c = 1e-6;
    double tol_res = 1e-7;
    int samples = 24;
    /// Lattice-coordinate radius around relevant divisor points where samples are rejected.
    double sample_guard = 1e-2;
    std::uint64_t subdivisor_cap = SubdivisorEnumerator::default_cap;
    std::uint64_t candidate_cap = 1'000'000;
    WeightMode weight_mode = WeightMode::Formal;
    /// Formal mode links orbit points only within this many h-steps. Half the torsion
    /// bound keeps orbit indices unambiguous: an alias would need a torsion order <= 2 * window.
    int formal_window = 32;
    EvalConfig eval{};

    void validate() const
    {
        eval.validate();
        if (d_max < 0)
            throw error(errc::invalid_input, "d_max must be >= 0");
        if (samples < 1)
            throw error(errc::invalid_input, "samples must be >= 1");
        if (!(tol_c > 0.0) || !(tol_res > 0.0))
            throw error(errc::invalid_input, "tolerances must be positive");
    }
};

struct VerifiedSolution {
    ThetaQuotient u;        // on the problem lattice
    Divisor divisor;        // div(u) = p - q
    double max_residual = 0.0;
    int samples = 0;
};

enum class OutcomeKind { NoSolutionCertificate, Solutions, Inconclusive };

inline const char* to_string(OutcomeKind k)
{
    switch (k) {
    case OutcomeKind::NoSolutionCertificate: return "no_solution_certificate";
    case OutcomeKind::Solutions: return "solutions";
    case OutcomeKind::Inconclusive: return "inconclusive";
    }
    return "?";
}

struct RiccatiOutcome {
    OutcomeKind kind = OutcomeKind::NoSolutionCertificate;
    std::vector<VerifiedSolution> solutions;
    std::vector<RiccatiCandidate> unresolved;   // survivors with deg_r != 0
    std::size_t candidate_count = 0;
    std::size_t checked_count = 0;              // deg_r == 0 candidates run through verification
    int d_max = 0;
    std::uint64_t seed = 0;
    /// False when solutions coexist with unsearched deg_r != 0 survivors.
    bool solution_count_complete = true;
};

// ---------------------------------------------------------------------------
// Builders

namespace detail {

inline RiccatiProblem assemble(const LatticeSpec& base, int level, cplx h, int multiple, EllipticCoefficient a_t,
                               EllipticCoefficient b_t, Divisor p3_base, const EvalConfig& cfg)
{
    RiccatiProblem prob;
    prob.lattice = base.at_level(level);
    prob.h = h;
    prob.step_multiple = multiple;
    prob.step = static_cast<double>(multiple) * h;
    const Divisor div_b = exact_divisor(b_t, base, cfg);
    prob.p3_base = std::move(p3_base);
    prob.p2_base = add(div_b, prob.p3_base);
    if (!is_effective(prob.p2_base) && !prob.p2_base.empty())
        throw error(errc::invalid_input, "numerator bound is not effective; denominator bound too small");
    prob.p2_divisor = lift(prob.p2_base, level);
    prob.p3_divisor = lift(prob.p3_base, level);
    if (!b_t.is_constant())
        prob.b_quotient = to_quotient(b_t, base, cfg);
    prob.coeff_a = std::move(a_t);
    prob.coeff_b = std::move(b_t);
    return prob;
}

} // namespace detail

namespace detail {

inline std::vector<cplx> orbit_seeds(const DifferenceEquation& eq, const EvalConfig& cfg)
{
    std::vector<cplx> seeds{0.0};
    for (const auto* c : {&eq.a, &eq.b})
        if (!c->is_zero())
            for (const auto& e : exact_divisor(*c, eq.lattice, cfg).entries())
                seeds.push_back(e.point.xi);
    return seeds;
}

} // namespace detail

/// (phi(u) + a) u = -b, searched on C/2L with step h.
inline RiccatiProblem build_first_riccati(const DifferenceEquation& eq, const EvalConfig& cfg = {})
{
    if (eq.b.is_zero())
        throw error(errc::zero_coefficient_b, "b must be invertible");
    const LatticeSpec& L = eq.lattice;
    Divisor p3 = common_denominator({eq.a, eq.b}, L);
    auto prob = detail::assemble(L, 2, eq.h, 1, eq.a, eq.b, std::move(p3), cfg);
    prob.orbit_seeds = detail::orbit_seeds(eq, cfg);
    return prob;
}

/// Riccati equation for phi^2 with
///   a~ = phi^2(b)/phi^2(a) - phi(a) + phi(b)/a,   b~ = phi(b) b / a^2,
/// searched on C/2L with step 2h.
inline RiccatiProblem build_imprimitivity_riccati(const DifferenceEquation& eq, const EvalConfig& cfg = {})
{
    if (eq.a.is_zero())
        throw error(errc::zero_coefficient_a, "imprimitivity test needs a != 0");
    if (eq.b.is_zero())
        throw error(errc::zero_coefficient_b, "b must be invertible");
    const LatticeSpec& L = eq.lattice;
    const cplx h = eq.h;
    const ThetaQuotient qa = to_quotient(eq.a, L, cfg);
    const ThetaQuotient qb = to_quotient(eq.b, L, cfg);
    const ThetaQuotient inv_a = invert(qa);

    std::vector<ThetaQuotient> terms;
    terms.push_back(multiply(phi_shift(qb, 2.0 * h), invert(phi_shift(qa, 2.0 * h))));
    terms.push_back(scale(phi_shift(qa, h), -1.0));
    terms.push_back(multiply(phi_shift(qb, h), inv_a));
    const ThetaQuotient bt = multiply(multiply(phi_shift(qb, h), qb), power(inv_a, 2));

    auto a_t = EllipticCoefficient::sum(std::move(terms));
    auto b_t = EllipticCoefficient::quotient(bt);
    Divisor p3 = common_denominator({a_t, b_t}, L);
    auto prob = detail::assemble(L, 2, h, 2, std::move(a_t), std::move(b_t), std::move(p3), cfg);
    prob.orbit_seeds = detail::orbit_seeds(eq, cfg);
    return prob;
}

/// b~ / (p2 / p3) is constant when b~ is an exact quotient: checked at 5 probe points.
inline bool check_consistency(const RiccatiProblem& prob, double tol = 1e-7, const EvalConfig& cfg = {})
{
    if (!prob.b_quotient)
        return true;
    const LatticeSpec L = prob.p2_base.lattice();
    const Divisor d = subtract(prob.p2_base, prob.p3_base);
    ThetaQuotient ref(L, 1.0);
    for (const auto& e : d.entries())
        ref.add_factor(e.point.xi, e.mult);
    ref = normalize_representatives(ref);
    std::vector<cplx> avoid;
    for (const auto& e : d.entries())
        avoid.push_back(e.point.xi);
    for (const auto& f : prob.b_quotient->factors())
        avoid.push_back(f.xi);
    const auto pts = detail::probe_points(L, avoid, 5, 0.05);
    std::optional<cplx> ratio;
    for (const cplx z : pts) {
        const cplx r = evaluate(*prob.b_quotient, z, cfg) / evaluate(ref, z, cfg);
        if (!ratio)
            ratio = r;
        else if (std::abs(r - *ratio) > tol * std::abs(*ratio))
            return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Candidate enumeration
//
// Support points of a bound are grouped by their class on C/L. A group has a
// representative rho and each member x has an offset (x - rho) in L, taken mod k.
// For D <= bound the weight is sum_g N_g rho_g plus a lattice vector whose class
// mod kL is the sum of member offsets, so the congruence
//     w(p) - w(q) = d * step  mod kL
// splits into a test mod L on the group totals N_g and a test on offsets mod k.
//
// In formal mode every rho is also written beta + n h along its h-orbit, and the
// h-coefficients must balance exactly: H(p) - H(q) = d * s for step = s h. This is
// the reading of the congruence under the assumption that h is non-torsion and
// independent of the orbit bases; numerically it discards relations that need a
// torsion order beyond what was checked.

struct EnumerationOptions {
    int d_max = 32;
    std::uint64_t profile_cap = SubdivisorEnumerator::default_cap;
    std::uint64_t candidate_cap = 1'000'000;
    WeightMode mode = WeightMode::Numeric;
    cplx h{};              // formal mode: step = step_multiple * h
    int step_multiple = 1;
    int orbit_window = 32;
    std::vector<cplx> orbit_seeds; // preferred orbit bases; must not involve h
};

namespace detail {

struct GroupChoice {
    std::vector<int> mults;
    int offset = 0; // index a*k + b into (Z/k)^2
};

struct PointGroup {
    cplx rho{};
    std::vector<cplx> points;
    std::vector<int> bounds;
    std::vector<std::pair<int, int>> offsets;
    int total = 0;
    long h_index = 0;
    std::vector<std::vector<GroupChoice>> by_total;      // indexed by N
    std::vector<std::uint64_t> masks;                    // achievable offsets per N
    std::vector<std::vector<std::uint64_t>> off_counts;  // per N, number of choices per offset
};

inline int mod_k(std::int64_t x, int k) { return static_cast<int>(((x % k) + k) % k); }

inline std::vector<PointGroup> group_bound(const Divisor& bound)
{
    const LatticeSpec& L = bound.lattice();
    const LatticeSpec L1 = L.base();
    const int k = L.level;
    std::vector<PointGroup> groups;
    for (const auto& e : bound.entries()) {
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const PointGroup& g) { return is_lattice_member(e.point.xi - g.rho, L1); });
        if (it == groups.end()) {
            groups.push_back({});
            it = std::prev(groups.end());
            it->rho = e.point.xi;
        }
        const auto [a, b] = integer_coords(e.point.xi - it->rho, L1);
        it->points.push_back(e.point.xi);
        it->bounds.push_back(e.mult);
        it->offsets.emplace_back(mod_k(a, k), mod_k(b, k));
        it->total += e.mult;
    }
    for (auto& g : groups) {
        const auto slots = static_cast<std::size_t>(g.total + 1);
        g.by_total.assign(slots, {});
        g.masks.assign(slots, 0);
        g.off_counts.assign(slots, std::vector<std::uint64_t>(static_cast<std::size_t>(k * k), 0));
        std::vector<int> cur(g.points.size(), 0);
        while (true) {
            int n = 0;
            int oa = 0;
            int ob = 0;
            for (std::size_t i = 0; i < cur.size(); ++i) {
                n += cur[i];
                oa += cur[i] * g.offsets[i].first;
                ob += cur[i] * g.offsets[i].second;
            }
            const int off = (oa % k) * k + (ob % k);
            const auto ni = static_cast<std::size_t>(n);
            g.by_total[ni].push_back({cur, off});
            g.masks[ni] |= (std::uint64_t{1} << off);
            ++g.off_counts[ni][static_cast<std::size_t>(off)];
            std::size_t i = 0;
            while (i < cur.size() && cur[i] == g.bounds[i])
                cur[i++] = 0;
            if (i == cur.size())
                break;
            ++cur[i];
        }
    }
    return groups;
}

// Writes every group representative as beta + n h (mod L) with |n| <= window minimal.
// Seeds are tried first as bases; a group reaching no base starts its own orbit.
inline void assign_orbit_indices(std::vector<PointGroup>& a, std::vector<PointGroup>& b, cplx h, int window,
                                 const LatticeSpec& L1, const std::vector<cplx>& seeds = {})
{
    auto link = [&](cplx x, cplx beta) -> std::optional<int> {
        for (int m = 0; m <= window; ++m) {
            if (is_lattice_member(x - beta - static_cast<double>(m) * h, L1))
                return m;
            if (m > 0 && is_lattice_member(x - beta + static_cast<double>(m) * h, L1))
                return -m;
        }
        return std::nullopt;
    };
    std::vector<cplx> bases;
    for (const cplx s : seeds) {
        const bool known = std::any_of(bases.begin(), bases.end(), [&](cplx beta) { return link(s, beta).has_value(); });
        if (!known)
            bases.push_back(s);
    }
    auto place = [&](PointGroup& g) {
        std::optional<int> best;
        for (const cplx beta : bases)
            if (const auto n = link(g.rho, beta); n && (!best || std::abs(*n) < std::abs(*best)))
                best = n;
        if (best) {
            g.h_index = *best;
            return;
        }
        bases.push_back(g.rho);
        g.h_index = 0;
    };
    for (auto& g : a)
        place(g);
    for (auto& g : b)
        place(g);
}

// Sumset of two offset masks in (Z/k)^2.
inline std::uint64_t mask_sum(std::uint64_t m1, std::uint64_t m2, int k)
{
    std::uint64_t out = 0;
    for (int x = 0; x < k * k; ++x) {
        if (!(m1 >> x & 1))
            continue;
        for (int y = 0; y < k * k; ++y) {
            if (!(m2 >> y & 1))
                continue;
            const int a = (x / k + y / k) % k;
            const int b = (x % k + y % k) % k;
            out |= std::uint64_t{1} << (a * k + b);
        }
    }
    return out;
}

inline int offset_add(int x, int y, int k) { return ((x / k + y / k) % k) * k + (x % k + y % k) % k; }

struct SideProfile {
    std::vector<int> totals; // N_g per group
    int degree = 0;
    long h_coeff = 0;        // sum N_g n_g (formal mode)
    cplx w0{};               // sum N_g rho_g
    std::uint64_t mask = 1;  // achievable offset sums
};

inline std::vector<SideProfile> build_profiles(const std::vector<PointGroup>& groups, int k, std::uint64_t cap)
{
    std::vector<SideProfile> out(1);
    for (const auto& g : groups) {
        if (out.size() * static_cast<std::uint64_t>(g.total + 1) > cap)
            throw error(errc::combinatorial_blowup, "candidate profile count exceeds cap " + std::to_string(cap));
        std::vector<SideProfile> next;
        next.reserve(out.size() * static_cast<std::size_t>(g.total + 1));
        for (const auto& p : out)
            for (int n = 0; n <= g.total; ++n) {
                SideProfile q = p;
                q.totals.push_back(n);
                q.degree += n;
                q.h_coeff += static_cast<long>(n) * g.h_index;
                q.w0 += static_cast<double>(n) * g.rho;
                q.mask = mask_sum(q.mask, g.masks[static_cast<std::size_t>(n)], k);
                next.push_back(std::move(q));
            }
        out = std::move(next);
    }
    return out;
}

// Number of concrete divisors of a profile per offset class.
inline std::vector<std::uint64_t> profile_counts(const std::vector<PointGroup>& groups, const SideProfile& prof, int k)
{
    const auto kk = static_cast<std::size_t>(k * k);
    std::vector<std::uint64_t> acc(kk, 0);
    acc[0] = 1;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const auto& c = groups[gi].off_counts[static_cast<std::size_t>(prof.totals[gi])];
        std::vector<std::uint64_t> next(kk, 0);
        for (std::size_t x = 0; x < kk; ++x)
            for (std::size_t y = 0; y < kk; ++y)
                next[static_cast<std::size_t>(offset_add(static_cast<int>(x), static_cast<int>(y), k))] += acc[x] * c[y];
        acc = std::move(next);
    }
    return acc;
}

// Concrete divisors of one profile as per-group choice indices, bucketed by offset.
inline std::vector<std::vector<std::vector<int>>> expand_profile(const std::vector<PointGroup>& groups,
                                                                 const SideProfile& prof, int k)
{
    std::vector<std::vector<std::vector<int>>> buckets(static_cast<std::size_t>(k * k));
    std::vector<int> pick(groups.size(), 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t gi, int off) {
        if (gi == groups.size()) {
            buckets[static_cast<std::size_t>(off)].push_back(pick);
            return;
        }
        const auto& choices = groups[gi].by_total[static_cast<std::size_t>(prof.totals[gi])];
        for (std::size_t c = 0; c < choices.size(); ++c) {
            pick[gi] = static_cast<int>(c);
            rec(gi + 1, offset_add(off, choices[c].offset, k));
        }
    };
    rec(0, 0);
    return buckets;
}

inline Divisor materialize(const std::vector<PointGroup>& groups, const SideProfile& prof,
                           const std::vector<int>& pick, const LatticeSpec& L)
{
    Divisor d(L);
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const auto& ch = groups[gi].by_total[static_cast<std::size_t>(prof.totals[gi])][static_cast<std::size_t>(pick[gi])];
        for (std::size_t i = 0; i < ch.mults.size(); ++i)
            d.add_point(groups[gi].points[i], ch.mults[i]);
    }
    return d;
}

class WeightIndex {
public:
    static constexpr std::int64_t cells = std::int64_t{1} << 20;

    WeightIndex(const std::vector<SideProfile>& profs, const LatticeSpec& L1) : L1_(L1)
    {
        for (std::size_t i = 0; i < profs.size(); ++i)
            map_[key(profs[i].degree, cell(profs[i].w0))].push_back(i);
    }

    /// Profiles of the given degree whose w0 lies within one cell of target mod L.
    std::vector<std::size_t> near(int degree, cplx target) const
    {
        const auto [cs, ct] = cell(target);
        std::vector<std::size_t> out;
        for (int ds = -1; ds <= 1; ++ds)
            for (int dt = -1; dt <= 1; ++dt) {
                const auto it = map_.find(key(degree, {wrap(cs + ds), wrap(ct + dt)}));
                if (it != map_.end())
                    out.insert(out.end(), it->second.begin(), it->second.end());
            }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

private:
    static std::int64_t wrap(std::int64_t c) { return ((c % cells) + cells) % cells; }

    std::pair<std::int64_t, std::int64_t> cell(cplx w) const
    {
        const Coords c = lattice_coords(w, L1_);
        const double s = c.s - std::floor(c.s);
        const double t = c.t - std::floor(c.t);
        return {wrap(static_cast<std::int64_t>(s * static_cast<double>(cells))),
                wrap(static_cast<std::int64_t>(t * static_cast<double>(cells)))};
    }

    static std::uint64_t key(int degree, std::pair<std::int64_t, std::int64_t> c)
    {
        return (static_cast<std::uint64_t>(degree) << 42) ^ (static_cast<std::uint64_t>(c.first) << 21)
             ^ static_cast<std::uint64_t>(c.second);
    }

    LatticeSpec L1_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> map_;
};

struct ProfileMatch {
    std::size_t p = 0;
    std::size_t q = 0;
    int d = 0;
    int need_a = 0; // off_p - off_q = (need_a, need_b) mod k
    int need_b = 0;
};

} // namespace detail

/// All (p, q, d) with 0 <= p <= p_bound, 0 <= q <= q_bound, deg p = deg q, 0 <= d <= d_max
/// and w(p) - w(q) = d * step mod kL. d is nonnegative because it is the degree of an entire r.
inline std::vector<RiccatiCandidate> enumerate_candidates(const Divisor& p_bound, const Divisor& q_bound, cplx step,
                                                          const EnumerationOptions& opt)
{
    detail::require_same_level(p_bound, q_bound);
    if (!is_effective(p_bound) || !is_effective(q_bound))
        throw error(errc::invalid_input, "candidate bounds must be effective");
    if (opt.d_max < 0)
        throw error(errc::invalid_input, "d_max must be >= 0");
    const LatticeSpec& L = p_bound.lattice();
    const LatticeSpec L1 = L.base();
    const int k = L.level;
    if (k > 8)
        throw error(errc::invalid_input, "candidate enumeration supports levels up to 8");
    const bool formal = opt.mode == WeightMode::Formal;
    if (formal && !is_lattice_member(step - static_cast<double>(opt.step_multiple) * opt.h, L.base(), 1e-12))
        throw error(errc::invalid_input, "formal mode needs step = step_multiple * h");
    constexpr double tol_match = 1e-8;

    auto pg = detail::group_bound(p_bound);
    auto qg = detail::group_bound(q_bound);
    if (formal)
        detail::assign_orbit_indices(pg, qg, opt.h, opt.orbit_window, L1, opt.orbit_seeds);
    const auto pp = detail::build_profiles(pg, k, opt.profile_cap);
    const auto qp = detail::build_profiles(qg, k, opt.profile_cap);
    const detail::WeightIndex index(pp, L1);

    // Pass 1: matching profile pairs and the exact candidate count.
    std::vector<detail::ProfileMatch> matches;
    std::uint64_t total = 0;
    for (std::size_t qi = 0; qi < qp.size(); ++qi) {
        const auto& q = qp[qi];
        std::optional<std::vector<std::uint64_t>> q_counts;
        for (int d = 0; d <= opt.d_max; ++d) {
            const cplx target = q.w0 + static_cast<double>(d) * step;
            for (const std::size_t pi_ : index.near(q.degree, target)) {
                const auto& p = pp[pi_];
                if (formal && p.h_coeff != q.h_coeff + static_cast<long>(d) * opt.step_multiple)
                    continue;
                const cplx r = p.w0 - target;
                if (!is_lattice_member(r, L1, tol_match))
                    continue;
                const auto [a, b] = integer_coords(r, L1);
                const int na = detail::mod_k(-a, k);
                const int nb = detail::mod_k(-b, k);
                const int need = na * k + nb;
                bool feasible = false;
                for (int x = 0; x < k * k && !feasible; ++x)
                    if (q.mask >> x & 1)
                        feasible = (p.mask >> detail::offset_add(x, need, k) & 1) != 0;
                if (!feasible)
                    continue;
                if (!q_counts)
                    q_counts = detail::profile_counts(qg, q, k);
                const auto p_counts = detail::profile_counts(pg, p, k);
                for (int x = 0; x < k * k; ++x)
                    total += (*q_counts)[static_cast<std::size_t>(x)]
                           * p_counts[static_cast<std::size_t>(detail::offset_add(x, need, k))];
                if (total > opt.candidate_cap)
                    throw error(errc::combinatorial_blowup,
                                "candidate count exceeds cap " + std::to_string(opt.candidate_cap));
                matches.push_back({pi_, qi, d, na, nb});
            }
        }
    }

    // Pass 2: materialize.
    std::vector<RiccatiCandidate> out;
    out.reserve(static_cast<std::size_t>(total));
    for (const auto& m : matches) {
        const auto& p = pp[m.p];
        const auto& q = qp[m.q];
        const auto pb = detail::expand_profile(pg, p, k);
        const auto qb = detail::expand_profile(qg, q, k);
        const int need = m.need_a * k + m.need_b;
        for (int x = 0; x < k * k; ++x) {
            const auto& ps = pb[static_cast<std::size_t>(detail::offset_add(x, need, k))];
            for (const auto& pick_q : qb[static_cast<std::size_t>(x)]) {
                const Divisor qd = detail::materialize(qg, q, pick_q, L);
                for (const auto& pick_p : ps)
                    out.push_back({detail::materialize(pg, p, pick_p, L), qd, m.d});
            }
        }
    }
    return out;
}

/// Numeric congruence with default caps.
inline std::vector<RiccatiCandidate> enumerate_candidates(const Divisor& p_bound, const Divisor& q_bound, cplx step,
                                                          int d_max)
{
    EnumerationOptions opt;
    opt.d_max = d_max;
    return enumerate_candidates(p_bound, q_bound, step, opt);
}

inline EnumerationOptions enumeration_options(const RiccatiProblem& prob, const SolveConfig& cfg)
{
    EnumerationOptions opt;
    opt.d_max = cfg.d_max;
    opt.profile_cap = cfg.subdivisor_cap;
    opt.candidate_cap = cfg.candidate_cap;
    opt.mode = cfg.weight_mode;
    opt.h = prob.h;
    opt.step_multiple = prob.step_multiple;
    opt.orbit_window = cfg.formal_window;
    opt.orbit_seeds = prob.orbit_seeds;
    return opt;
}

inline std::vector<RiccatiCandidate> enumerate_candidates(const RiccatiProblem& prob, const SolveConfig& cfg = {})
{
    return enumerate_candidates(prob.p2_divisor, prob.q_bound(), prob.step, enumeration_options(prob, cfg));
}

// ---------------------------------------------------------------------------
// Solving

namespace detail {

class Sampler {
public:
    Sampler(const LatticeSpec& L, std::uint64_t seed, std::vector<cplx> avoid, double guard)
        : L_(L), rng_(seed), avoid_(std::move(avoid)), guard_(guard)
    {
    }

    /// Next admissible point; nullopt after `tries` rejections in a row.
    std::optional<cplx> draw(int tries = 64)
    {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < tries; ++i) {
            const double s = u(rng_);
            const double t = u(rng_);
            const cplx z = from_coords({s, t}, L_);
            bool ok = true;
            for (const cplx a : avoid_)
                if (coord_distance_to_lattice(z - a, L_) < guard_) {
                    ok = false;
                    break;
                }
            if (ok)
                return z;
        }
        return std::nullopt;
    }

private:
    LatticeSpec L_;
    std::mt19937_64 rng_;
    std::vector<cplx> avoid_;
    double guard_;
};

struct QuadSample {
    cplx A, B, C;
};

inline std::array<cplx, 2> quadratic_roots(const QuadSample& q)
{
    const cplx disc = std::sqrt(q.B * q.B - 4.0 * q.A * q.C);
    // Pick the sign that avoids cancellation.
    const cplx den = (std::real(std::conj(q.B) * disc) >= 0.0) ? -q.B - disc : -q.B + disc;
    if (den == cplx{0.0, 0.0})
        return {cplx{0.0, 0.0}, cplx{0.0, 0.0}};
    const cplx r1 = den / (2.0 * q.A);
    const cplx r2 = (2.0 * q.C) / den;
    return {r1, r2};
}

inline double relative_residual(const QuadSample& q, cplx c)
{
    const cplx t2 = q.A * c * c;
    const cplx t1 = q.B * c;
    const double scale = std::max({std::abs(t2), std::abs(t1), std::abs(q.C)});
    if (scale == 0.0)
        return 0.0;
    return std::abs(t2 + t1 + q.C) / scale;
}

inline void push_points(std::vector<cplx>& out, const Divisor& d)
{
    for (const auto& e : d.entries())
        out.push_back(e.point.xi);
}

// v with div(v) = p - q and a periodic choice of representatives.
inline ThetaQuotient candidate_quotient(const RiccatiCandidate& cand, const LatticeSpec& L)
{
    ThetaQuotient v(L, 1.0);
    for (const auto& e : cand.p_div.entries())
        v.add_factor(e.point.xi, e.mult);
    for (const auto& e : cand.q_div.entries())
        v.add_factor(e.point.xi, -e.mult);
    if (v.factors().empty())
        return v;
    return normalize_representatives(v);
}

} // namespace detail

/// Constants c for which u = c * v (div v = p - q) solves the problem; deg_r must be 0.
inline std::vector<VerifiedSolution> solve_and_verify(const RiccatiProblem& prob, const RiccatiCandidate& cand,
                                                      const SolveConfig& cfg = {})
{
    if (cand.deg_r != 0)
        throw error(errc::invalid_input, "solve_and_verify handles deg_r = 0 only");
    const LatticeSpec& L = prob.lattice;
    const ThetaQuotient v = detail::candidate_quotient(cand, L);

    std::vector<cplx> avoid;
    detail::push_points(avoid, prob.p3_divisor);
    detail::push_points(avoid, prob.p2_divisor);
    detail::push_points(avoid, cand.p_div);
    detail::push_points(avoid, cand.q_div);
    detail::push_points(avoid, shift(cand.p_div, prob.step));
    detail::push_points(avoid, shift(cand.q_div, prob.step));
    detail::Sampler sampler(L, cfg.seed, std::move(avoid), cfg.sample_guard);

    auto sample = [&]() -> detail::QuadSample {
        for (int round = 0; round < 10; ++round) {
            const auto z = sampler.draw();
            if (!z)
                continue;
            try {
                const cplx vz = evaluate(v, *z, cfg.eval);
                const cplx vs = evaluate(v, *z + prob.step, cfg.eval);
                const cplx az = evaluate(prob.coeff_a, *z, cfg.eval);
                const cplx bz = evaluate(prob.coeff_b, *z, cfg.eval);
                const detail::QuadSample q{vz * vs, az * vz, bz};
                if (std::abs(q.A) > 1e-12 * (std::abs(q.B) + std::abs(q.C) + 1e-300) && std::isfinite(std::abs(q.A))
                    && std::isfinite(std::abs(q.B)) && std::isfinite(std::abs(q.C)))
                    return q;
            } catch (const error& e) {
                if (e.code() != errc::pole_proximity)
                    throw;
            }
        }
        throw error(errc::sample_degeneracy, "no admissible sample point after 10 rounds");
    };

    const auto s1 = sample();
    const auto s2 = sample();
    const auto r1 = detail::quadratic_roots(s1);
    const auto r2 = detail::quadratic_roots(s2);
    std::vector<cplx> common;
    for (const cplx x : r1)
        for (const cplx y : r2)
            if (std::abs(x - y) <= cfg.tol_c * std::max(1.0, std::abs(x))) {
                const cplx c = 0.5 * (x + y);
                const bool dup = std::any_of(common.begin(), common.end(), [&](cplx w) {
                    return std::abs(w - c) <= cfg.tol_c * std::max(1.0, std::abs(c));
                });
                if (!dup && c != cplx{0.0, 0.0})
                    common.push_back(c);
            }

    std::vector<VerifiedSolution> out;
    if (common.empty())
        return out;
    std::vector<detail::QuadSample> fresh;
    fresh.reserve(static_cast<std::size_t>(cfg.samples));
    for (int i = 0; i < cfg.samples; ++i)
        fresh.push_back(sample());
    for (const cplx c : common) {
        double worst = 0.0;
        for (const auto& q : fresh)
            worst = std::max(worst, detail::relative_residual(q, c));
        if (worst <= cfg.tol_res)
            out.push_back({scale(v, c), subtract(cand.p_div, cand.q_div), worst, cfg.samples});
    }
    return out;
}

/// Max relative Riccati residual of u at `count` samples drawn from `seed`.
inline double riccati_residual(const RiccatiProblem& prob, const ThetaQuotient& u, std::uint64_t seed, int count = 24,
                               const EvalConfig& eval = {})
{
    std::vector<cplx> avoid;
    detail::push_points(avoid, prob.p3_divisor);
    for (const auto& f : u.factors()) {
        avoid.push_back(f.xi);
        avoid.push_back(f.xi - prob.step);
    }
    detail::Sampler sampler(prob.lattice, seed, std::move(avoid), 1e-2);
    double worst = 0.0;
    int done = 0;
    for (int attempts = 0; done < count && attempts < 40 * count; ++attempts) {
        const auto z = sampler.draw();
        if (!z)
            continue;
        try {
            const cplx uz = evaluate(u, *z, eval);
            const cplx us = evaluate(u, *z + prob.step, eval);
            const detail::QuadSample q{us * uz, evaluate(prob.coeff_a, *z, eval) * uz, evaluate(prob.coeff_b, *z, eval)};
            worst = std::max(worst, detail::relative_residual(q, 1.0));
            ++done;
        } catch (const error& e) {
            if (e.code() != errc::pole_proximity)
                throw;
        }
    }
    if (done < count)
        throw error(errc::sample_degeneracy, "not enough admissible samples for residual check");
    return worst;
}

inline RiccatiOutcome solve(const RiccatiProblem& prob, const SolveConfig& cfg = {})
{
    cfg.validate();
    RiccatiOutcome out;
    out.d_max = cfg.d_max;
    out.seed = cfg.seed;
    const auto cands = enumerate_candidates(prob, cfg);
    out.candidate_count = cands.size();

    for (const auto& cand : cands) {
        if (cand.deg_r != 0) {
            out.unresolved.push_back(cand);
            continue;
        }
        ++out.checked_count;
        for (auto& sol : solve_and_verify(prob, cand, cfg)) {
            // Same function reached from another candidate (p and q sharing support).
            const bool dup = std::any_of(out.solutions.begin(), out.solutions.end(), [&](const VerifiedSolution& s) {
                if (!(s.divisor == sol.divisor))
                    return false;
                const auto pts = detail::probe_points(prob.lattice, detail::factor_points(s.u), 2, 0.05);
                for (const cplx z : pts) {
                    const cplx x = evaluate(s.u, z, cfg.eval);
                    const cplx y = evaluate(sol.u, z, cfg.eval);
                    if (std::abs(x - y) > cfg.tol_c * std::abs(x))
                        return false;
                }
                return true;
            });
            if (!dup)
                out.solutions.push_back(std::move(sol));
        }
    }

    if (!out.solutions.empty()) {
        out.kind = OutcomeKind::Solutions;
        out.solution_count_complete = out.unresolved.empty();
    } else if (!out.unresolved.empty()) {
        out.kind = OutcomeKind::Inconclusive;
        out.solution_count_complete = false;
    } else {
        out.kind = OutcomeKind::NoSolutionCertificate;
    }
    return out;
}

} // namespace ellric
