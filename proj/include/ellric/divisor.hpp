#pragma once

// Formal divisors on C/kL: finite Z-combinations of torus points.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "lattice.hpp"

namespace ellric {

struct DivisorEntry {
    TorusPoint point;
    int mult = 0;
};

class Divisor {
public:
    Divisor() = default;
    explicit Divisor(const LatticeSpec& L) : lattice_(L) {}

    static Divisor single(cplx xi, const LatticeSpec& L, int mult = 1)
    {
        Divisor d(L);
        d.add_point(xi, mult);
        return d;
    }

    const LatticeSpec& lattice() const noexcept { return lattice_; }
    int level() const noexcept { return lattice_.level; }
    const std::vector<DivisorEntry>& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t size() const noexcept { return entries_.size(); }

    /// Adds mult*[xi]; xi is reduced to its canonical representative.
    void add_point(cplx xi, int mult)
    {
        if (mult == 0)
            return;
        const TorusPoint p = reduce(xi, lattice_);
        auto it = std::find_if(entries_.begin(), entries_.end(),
                               [&](const DivisorEntry& e) { return same_point(e.point, p); });
        if (it != entries_.end()) {
            it->mult += mult;
            if (it->mult == 0)
                entries_.erase(it);
            return;
        }
        const auto pos = std::lower_bound(entries_.begin(), entries_.end(), p, [](const DivisorEntry& e, const TorusPoint& q) {
            return std::pair(e.point.coords.s, e.point.coords.t) < std::pair(q.coords.s, q.coords.t);
        });
        entries_.insert(pos, DivisorEntry{p, mult});
    }

    int multiplicity(cplx xi) const
    {
        const TorusPoint p = reduce(xi, lattice_);
        for (const auto& e : entries_)
            if (same_point(e.point, p))
                return e.mult;
        return 0;
    }

    friend bool operator==(const Divisor& a, const Divisor& b)
    {
        if (a.level() != b.level() || a.size() != b.size())
            return false;
        for (const auto& e : a.entries_)
            if (b.multiplicity(e.point.xi) != e.mult)
                return false;
        return true;
    }

private:
    LatticeSpec lattice_{};
    std::vector<DivisorEntry> entries_;
};

namespace detail {

inline void require_same_level(const Divisor& a, const Divisor& b)
{
    if (a.level() != b.level())
        throw error(errc::level_mismatch, "divisors live on different levels");
}

template <typename F>
Divisor pointwise(const Divisor& a, const Divisor& b, F&& op)
{
    require_same_level(a, b);
    Divisor out(a.lattice());
    std::vector<TorusPoint> support;
    for (const auto& e : a.entries())
        support.push_back(e.point);
    for (const auto& e : b.entries())
        if (a.multiplicity(e.point.xi) == 0)
            support.push_back(e.point);
    for (const auto& p : support)
        out.add_point(p.xi, op(a.multiplicity(p.xi), b.multiplicity(p.xi)));
    return out;
}

} // namespace detail

inline Divisor add(const Divisor& a, const Divisor& b)
{
    return detail::pointwise(a, b, [](int x, int y) { return x + y; });
}

inline Divisor negate(const Divisor& d)
{
    Divisor out(d.lattice());
    for (const auto& e : d.entries())
        out.add_point(e.point.xi, -e.mult);
    return out;
}

inline Divisor subtract(const Divisor& a, const Divisor& b) { return add(a, negate(b)); }

inline Divisor scale(const Divisor& d, int n)
{
    Divisor out(d.lattice());
    for (const auto& e : d.entries())
        out.add_point(e.point.xi, n * e.mult);
    return out;
}

inline Divisor positive_part(const Divisor& d)
{
    Divisor out(d.lattice());
    for (const auto& e : d.entries())
        if (e.mult > 0)
            out.add_point(e.point.xi, e.mult);
    return out;
}

inline Divisor negative_part(const Divisor& d)
{
    Divisor out(d.lattice());
    for (const auto& e : d.entries())
        if (e.mult < 0)
            out.add_point(e.point.xi, -e.mult);
    return out;
}

/// Pointwise max.
inline Divisor join(const Divisor& a, const Divisor& b)
{
    return detail::pointwise(a, b, [](int x, int y) { return std::max(x, y); });
}

/// a <= b pointwise.
inline bool leq(const Divisor& a, const Divisor& b)
{
    detail::require_same_level(a, b);
    for (const auto& e : a.entries())
        if (e.mult > b.multiplicity(e.point.xi))
            return false;
    for (const auto& e : b.entries())
        if (e.mult < a.multiplicity(e.point.xi))
            return false;
    return true;
}

inline bool is_effective(const Divisor& d)
{
    return std::all_of(d.entries().begin(), d.entries().end(), [](const DivisorEntry& e) { return e.mult > 0; });
}

inline int degree(const Divisor& d)
{
    int s = 0;
    for (const auto& e : d.entries())
        s += e.mult;
    return s;
}

/// Sum of mult * (canonical representative); a representative of the weight.
inline cplx weight_representative(const Divisor& d)
{
    cplx s{0.0, 0.0};
    for (const auto& e : d.entries())
        s += static_cast<double>(e.mult) * e.point.xi;
    return s;
}

inline TorusPoint weight(const Divisor& d) { return reduce(weight_representative(d), d.lattice()); }

/// Divisor of z -> f(z + delta) given the divisor of f: [xi] moves to [xi - delta].
inline Divisor shift(const Divisor& d, cplx delta)
{
    Divisor out(d.lattice());
    for (const auto& e : d.entries())
        out.add_point(e.point.xi - delta, e.mult);
    return out;
}

/// Re-expresses a divisor on C/kL at level k*m: [xi] becomes the sum of its m^2 preimages.
inline Divisor lift(const Divisor& d, int target_level)
{
    const int k = d.level();
    if (target_level % k != 0)
        throw error(errc::level_mismatch, "lift target level must be a multiple of the source level");
    const int m = target_level / k;
    const LatticeSpec Lt = d.lattice().at_level(target_level);
    Divisor out(Lt);
    for (const auto& e : d.entries())
        for (int l1 = 0; l1 < m; ++l1)
            for (int l2 = 0; l2 < m; ++l2)
                out.add_point(e.point.xi + static_cast<double>(k) * (static_cast<double>(l1) + static_cast<double>(l2) * d.lattice().tau), e.mult);
    return out;
}

/// Streams every D with 0 <= D <= bound, lexicographically in the multiplicity vector.
class SubdivisorEnumerator {
public:
    static constexpr std::uint64_t default_cap = 10'000'000;

    explicit SubdivisorEnumerator(Divisor bound, std::uint64_t cap = default_cap) : bound_(std::move(bound))
    {
        if (!is_effective(bound_))
            throw error(errc::invalid_input, "subdivisor bound must be effective");
        count_ = 1;
        for (const auto& e : bound_.entries()) {
            count_ *= static_cast<std::uint64_t>(e.mult + 1);
            if (count_ > cap)
                throw error(errc::combinatorial_blowup, "subdivisor count exceeds cap " + std::to_string(cap));
        }
        current_.assign(bound_.size(), 0);
    }

    std::uint64_t count() const noexcept { return count_; }

    const std::vector<int>& multiplicities() const noexcept { return current_; }

    std::optional<Divisor> next()
    {
        if (done_)
            return std::nullopt;
        Divisor out(bound_.lattice());
        const auto& es = bound_.entries();
        for (std::size_t i = 0; i < es.size(); ++i)
            out.add_point(es[i].point.xi, current_[i]);
        last_ = current_;
        advance();
        return out;
    }

    /// Multiplicity vector of the divisor most recently returned by next().
    const std::vector<int>& last_multiplicities() const noexcept { return last_; }

private:
    void advance()
    {
        const auto& es = bound_.entries();
        for (std::size_t i = es.size(); i-- > 0;) {
            if (current_[i] < es[i].mult) {
                ++current_[i];
                return;
            }
            current_[i] = 0;
        }
        done_ = true;
    }

    Divisor bound_;
    std::vector<int> current_;
    std::vector<int> last_;
    std::uint64_t count_ = 0;
    bool done_ = false;
};

inline std::vector<Divisor> enumerate_subdivisors(const Divisor& bound,
                                                  std::uint64_t cap = SubdivisorEnumerator::default_cap)
{
    SubdivisorEnumerator en(bound, cap);
    std::vector<Divisor> out;
    out.reserve(static_cast<std::size_t>(en.count()));
    while (auto d = en.next())
        out.push_back(std::move(*d));
    return out;
}

/// Solves D = shift(E, h) - E (the divisor of phi(g)/g when div g = E) with E supported
/// on the h-orbit hull of supp(D). Orbits are detected within orbit_cap steps.
/// Returns nullopt when some orbit has nonzero total multiplicity; that obstruction holds
/// whether or not h is torsion. Building E needs h non-torsion within orbit_cap.
inline std::optional<Divisor> h_orbit_solve(const Divisor& D, cplx h, int orbit_cap = 128)
{
    const LatticeSpec& L = D.lattice();
    const auto& es = D.entries();
    const std::size_t n = es.size();
    std::vector<int> orbit(n, -1);
    std::vector<long> index(n, 0);
    int orbits = 0;
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (orbit[seed] >= 0)
            continue;
        orbit[seed] = orbits;
        index[seed] = 0;
        std::vector<std::size_t> frontier{seed};
        while (!frontier.empty()) {
            const std::size_t cur = frontier.back();
            frontier.pop_back();
            for (std::size_t j = 0; j < n; ++j) {
                if (orbit[j] >= 0)
                    continue;
                // Nearest step first.
                for (int m = 1; m <= orbit_cap && orbit[j] < 0; ++m)
                    for (const int step : {m, -m})
                        if (is_lattice_member(es[j].point.xi - es[cur].point.xi - static_cast<double>(step) * h, L)) {
                            orbit[j] = orbits;
                            index[j] = index[cur] + step;
                            frontier.push_back(j);
                            break;
                        }
            }
        }
        ++orbits;
    }

    for (int o = 0; o < orbits; ++o) {
        int total = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (orbit[i] == o)
                total += es[i].mult;
        if (total != 0)
            return std::nullopt;
    }
    if (torsion_order(h, L, orbit_cap))
        throw error(errc::orbit_cap_exceeded, "shift is torsion within orbit_cap; the orbit solution is not unique");

    Divisor E(L);
    for (int o = 0; o < orbits; ++o) {
        std::map<long, int> coeff;
        std::map<long, cplx> anchor;
        for (std::size_t i = 0; i < n; ++i)
            if (orbit[i] == o) {
                coeff[index[i]] += es[i].mult;
                anchor[index[i]] = es[i].point.xi;
            }
        // Point index n moves to n-1 under shift(., h): coefficient at n is e_{n+1} - e_n = d_n,
        // so e_n = sum_{j<n} d_j.
        const long lo = coeff.begin()->first;
        const long hi = coeff.rbegin()->first;
        int running = 0;
        for (long idx = lo; idx <= hi; ++idx) {
            if (running != 0) {
                auto near = anchor.lower_bound(idx);
                if (near == anchor.end())
                    --near;
                const cplx xi = near->second + static_cast<double>(idx - near->first) * h;
                E.add_point(xi, running);
            }
            const auto it = coeff.find(idx);
            if (it != coeff.end())
                running += it->second;
        }
    }
    return E;
}

} // namespace ellric
