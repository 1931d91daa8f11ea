#pragma once

// Lattices k(Z + tau Z), canonical reduction of points of C/kL and the
// bounded torsion / independence checks used as stand-ins for
// transcendence hypotheses on the shift.

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <utility>

#include "error.hpp"

namespace ellric {

using cplx = std::complex<double>;

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr cplx I{0.0, 1.0};

/// Coordinate-space tolerance for torus-point identity.
inline constexpr double tol_lat = 1e-9;

struct LatticeSpec {
    cplx tau{0.0, 1.0};
    int level = 1;

    LatticeSpec() = default;
    LatticeSpec(cplx tau_, int level_ = 1) : tau(tau_), level(level_) { validate(); }

    void validate() const
    {
        if (!(tau.imag() > 0.0))
            throw error(errc::invalid_input, "lattice generator needs Im(tau) > 0");
        if (level < 1)
            throw error(errc::invalid_input, "lattice level must be >= 1");
    }

    LatticeSpec at_level(int k) const { return LatticeSpec(tau, k); }
    LatticeSpec base() const { return at_level(1); }

    friend bool operator==(const LatticeSpec& a, const LatticeSpec& b)
    {
        return a.tau == b.tau && a.level == b.level;
    }
};

struct Coords {
    double s = 0.0;
    double t = 0.0;
};

/// Solves w = s*k + t*k*tau over the reals.
inline Coords lattice_coords(cplx w, const LatticeSpec& L)
{
    const double k = L.level;
    const double t = w.imag() / (k * L.tau.imag());
    const double s = (w.real() - t * k * L.tau.real()) / k;
    return {s, t};
}

inline cplx from_coords(Coords c, const LatticeSpec& L)
{
    const double k = L.level;
    return k * c.s + k * c.t * L.tau;
}

namespace detail {

// Fractional part in [0, 1), snapping values within tol of 1 to 0.
inline double frac01(double x, double tol = tol_lat)
{
    const double f = x - std::floor(x);
    return (f < tol || f >= 1.0 - tol) ? 0.0 : f;
}

// Signed distance of x to the nearest integer, in [-0.5, 0.5].
inline double centered(double x) { return x - std::nearbyint(x); }

// Equality of classes mod 1 within tol.
inline bool same_mod1(double a, double b, double tol) { return std::abs(centered(a - b)) <= tol; }

} // namespace detail

/// A point of C/kL held by its canonical representative (coordinates in [0,1)^2).
struct TorusPoint {
    cplx xi{};
    int level = 1;
    Coords coords{};
};

inline TorusPoint reduce(cplx w, const LatticeSpec& L)
{
    const Coords c = lattice_coords(w, L);
    const Coords r{detail::frac01(c.s), detail::frac01(c.t)};
    return TorusPoint{from_coords(r, L), L.level, r};
}

/// Equality of torus points in coordinate space; shear independent.
inline bool same_point(const TorusPoint& a, const TorusPoint& b, double tol = tol_lat)
{
    return a.level == b.level && detail::same_mod1(a.coords.s, b.coords.s, tol)
        && detail::same_mod1(a.coords.t, b.coords.t, tol);
}

/// Euclidean distance, measured in lattice coordinates, from w to kL.
inline double coord_distance_to_lattice(cplx w, const LatticeSpec& L)
{
    const Coords c = lattice_coords(w, L);
    return std::hypot(detail::centered(c.s), detail::centered(c.t));
}

inline bool is_lattice_member(cplx w, const LatticeSpec& L, double tol = tol_lat)
{
    const Coords c = lattice_coords(w, L);
    return std::abs(detail::centered(c.s)) <= tol && std::abs(detail::centered(c.t)) <= tol;
}

/// Integer coordinates of a lattice member (caller checks membership).
inline std::pair<std::int64_t, std::int64_t> integer_coords(cplx w, const LatticeSpec& L)
{
    const Coords c = lattice_coords(w, L);
    return {static_cast<std::int64_t>(std::llround(c.s)), static_cast<std::int64_t>(std::llround(c.t))};
}

/// Smallest n in [1, n_max] with n*h in L. Absence only certifies "no order up to n_max".
inline std::optional<int> torsion_order(cplx h, const LatticeSpec& L, int n_max, double tol = tol_lat)
{
    for (int n = 1; n <= n_max; ++n)
        if (is_lattice_member(static_cast<double>(n) * h, L, tol))
            return n;
    return std::nullopt;
}

/// True iff no (d, l) with 1 <= |d| <= d_range, |l| <= l_range has d*h = l*z0 mod L.
/// (d, l) and (-d, -l) give the same relation, so only d > 0 is scanned.
inline bool check_independence(cplx h, cplx z0, int l_range, int d_range, const LatticeSpec& L,
                               double tol = tol_lat)
{
    for (int d = 1; d <= d_range; ++d)
        for (int l = -l_range; l <= l_range; ++l)
            if (is_lattice_member(static_cast<double>(d) * h - static_cast<double>(l) * z0, L, tol))
                return false;
    return true;
}

} // namespace ellric
