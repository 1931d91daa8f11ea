#pragma once

// Jacobi theta (series and triple product), Weierstrass p and p', their
// level-k variants, and numerical inversion of p.
//
// Conventions, with q = exp(2 i pi tau):
//   theta(z)   = sum_m (-1)^m exp(i pi m(m-1) tau) exp(2 i pi m z)
//   theta_k(z) = theta(z / k)
//   wp_k(z)    = wp(z / k),   wp_k'(z) = wp'(z / k) / k
// theta is 1-periodic with theta(z + tau) = -exp(-2 i pi z) theta(z); its zeros are L.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "error.hpp"
#include "lattice.hpp"

namespace ellric {

struct EvalConfig {
    double target_eps = 1e-15;
    int max_terms = 64;
    /// Minimal lattice-coordinate distance to a pole for guarded evaluation.
    double pole_guard = 1e-3;

    void validate() const
    {
        if (!(target_eps > 0.0 && target_eps <= 1e-6))
            throw error(errc::invalid_input, "target_eps must lie in (0, 1e-6]");
        if (max_terms < 8)
            throw error(errc::invalid_input, "max_terms must be >= 8");
    }
};

namespace detail {

// 1 - exp(w), accurate when exp(w) is close to 1.
inline cplx one_minus_exp(cplx w)
{
    const double a = w.real();
    const double b = w.imag();
    const double sh = std::sin(0.5 * b);
    const double em1 = std::expm1(a);
    // exp(w) - 1 = expm1(a) cos b + (cos b - 1) + i e^a sin b
    const cplx expm1w{em1 * std::cos(b) - 2.0 * sh * sh, std::exp(a) * std::sin(b)};
    return -expm1w;
}

inline cplx expm1c(cplx w) { return -one_minus_exp(w); }

/// Raw defining series of theta, summed in pairs (m, 1-m) so that theta(0) == 0 exactly.
inline cplx theta_series(cplx z, cplx tau, const EvalConfig& cfg)
{
    const double y = std::abs(z.imag());
    cplx sum{0.0, 0.0};
    for (int m = 1;; ++m) {
        if (m > cfg.max_terms)
            throw error(errc::non_convergent, "theta series needs more than max_terms terms");
        const double md = m;
        const cplx nome = std::exp(I * pi * md * (md - 1.0) * tau);
        // e^{2 i pi m z} - e^{2 i pi (1-m) z} = e^{2 i pi (1-m) z} expm1(2 i pi (2m-1) z)
        const cplx diff = std::exp(2.0 * I * pi * (1.0 - md) * z) * expm1c(2.0 * I * pi * (2.0 * md - 1.0) * z);
        const cplx term = ((m % 2 == 0) ? 1.0 : -1.0) * nome * diff;
        sum += term;
        const double bound = std::exp(-pi * tau.imag() * md * (md - 1.0) + 2.0 * pi * y * md);
        if (m >= 2 && bound < cfg.target_eps)
            break;
    }
    return sum;
}

/// Truncated Jacobi triple product.
inline cplx theta_product(cplx z, cplx tau, const EvalConfig& cfg)
{
    cplx prod{1.0, 0.0};
    const double stop = cfg.target_eps / cfg.max_terms;
    for (int m = 1;; ++m) {
        if (m > cfg.max_terms)
            throw error(errc::non_convergent, "triple product needs more than max_terms factors");
        const double md = m;
        const cplx w1 = 2.0 * I * pi * md * tau;
        const cplx w2 = 2.0 * I * pi * ((md - 1.0) * tau + z);
        const cplx w3 = 2.0 * I * pi * (md * tau - z);
        prod *= one_minus_exp(w1) * one_minus_exp(w2) * one_minus_exp(w3);
        const double dev = std::exp(w1.real()) + std::exp(w2.real()) + std::exp(w3.real());
        if (dev < stop)
            break;
    }
    return prod;
}

/// theta(z) = exp(log_mult) * value, with value computed at the reduced point.
struct ThetaParts {
    cplx log_mult{0.0, 0.0};
    cplx value{0.0, 0.0};
};

// Reduces z to s, t in [0,1) using 1-periodicity and
// theta(z' + n tau) = (-1)^n exp(-2 i pi (n z' + n(n-1) tau / 2)) theta(z').
inline ThetaParts theta_parts(cplx z, cplx tau, const EvalConfig& cfg, bool use_product)
{
    const LatticeSpec L1(tau, 1);
    const Coords c = lattice_coords(z, L1);
    const double n = std::floor(c.t);
    const double m = std::floor(c.s);
    const cplx zr = z - m - n * tau;
    ThetaParts out;
    out.log_mult = I * pi * n - 2.0 * I * pi * (n * zr + 0.5 * n * (n - 1.0) * tau);
    out.value = use_product ? theta_product(zr, tau, cfg) : theta_series(zr, tau, cfg);
    return out;
}

} // namespace detail

/// theta(z) for the lattice generator of L (the level is ignored).
inline cplx theta(cplx z, const LatticeSpec& L, const EvalConfig& cfg = {})
{
    const auto p = detail::theta_parts(z, L.tau, cfg, false);
    return std::exp(p.log_mult) * p.value;
}

inline cplx theta_triple_product(cplx z, const LatticeSpec& L, const EvalConfig& cfg = {})
{
    const auto p = detail::theta_parts(z, L.tau, cfg, true);
    return std::exp(p.log_mult) * p.value;
}

/// theta_k(z) = theta(z / k) with k = L.level.
inline cplx theta_k(cplx z, const LatticeSpec& L, const EvalConfig& cfg = {})
{
    return theta(z / static_cast<double>(L.level), L, cfg);
}

namespace detail {

inline cplx wp_T(cplx one_minus_x, cplx x) { return x / (one_minus_x * one_minus_x); }
inline cplx wp_D(cplx one_minus_x, cplx x) { return x * (1.0 + x) / (one_minus_x * one_minus_x * one_minus_x); }

// Fourier (q-series) expansion of wp / wp' for the lattice Z + tau Z:
//   wp(z)  = (2 i pi)^2 [1/12 + sum_n T(q^n u) - 2 sum_{n>=1} T(q^n)],  T(x) = x/(1-x)^2
//   wp'(z) = (2 i pi)^3 sum_n D(q^n u),                                 D(x) = x(1+x)/(1-x)^3
// with u = exp(2 i pi z). No pole guard; z must not be a lattice point.
inline cplx wp_qseries(cplx z, cplx tau, const EvalConfig& cfg, bool derivative)
{
    const LatticeSpec L1(tau, 1);
    const Coords c = lattice_coords(z, L1);
    const cplx zr = z - std::nearbyint(c.s) - std::nearbyint(c.t) * tau;
    const cplx tpi = 2.0 * I * pi;
    const cplx u = std::exp(tpi * zr);
    const cplx omu = one_minus_exp(tpi * zr);
    cplx sum = derivative ? wp_D(omu, u) : wp_T(omu, u);
    for (int n = 1;; ++n) {
        if (n > cfg.max_terms)
            throw error(errc::non_convergent, "wp q-series needs more than max_terms terms");
        const double nd = n;
        const cplx wa = tpi * (nd * tau + zr);
        const cplx wb = tpi * (nd * tau - zr);
        const cplx xa = std::exp(wa);
        const cplx xb = std::exp(wb);
        cplx term;
        if (derivative) {
            term = wp_D(one_minus_exp(wa), xa) - wp_D(one_minus_exp(wb), xb);
        } else {
            const cplx wq = tpi * nd * tau;
            term = wp_T(one_minus_exp(wa), xa) + wp_T(one_minus_exp(wb), xb) - 2.0 * wp_T(one_minus_exp(wq), std::exp(wq));
        }
        sum += term;
        if (std::abs(term) <= cfg.target_eps * (1.0 + std::abs(sum)) && std::abs(xa) + std::abs(xb) < 0.5)
            break;
    }
    if (derivative)
        return tpi * tpi * tpi * sum;
    return tpi * tpi * (sum + 1.0 / 12.0);
}

inline void guard_pole(cplx z, const LatticeSpec& L, const EvalConfig& cfg)
{
    if (coord_distance_to_lattice(z, L) < cfg.pole_guard)
        throw error(errc::pole_proximity, "evaluation point too close to a lattice point");
}

} // namespace detail

/// wp_k(z) with k = L.level.
inline cplx wp(cplx z, const LatticeSpec& L, const EvalConfig& cfg = {})
{
    detail::guard_pole(z, L, cfg);
    return detail::wp_qseries(z / static_cast<double>(L.level), L.tau, cfg, false);
}

/// wp_k'(z) = wp'(z/k) / k with k = L.level.
inline cplx wp_prime(cplx z, const LatticeSpec& L, const EvalConfig& cfg = {})
{
    detail::guard_pole(z, L, cfg);
    const double k = L.level;
    return detail::wp_qseries(z / k, L.tau, cfg, true) / k;
}

/// Weierstrass invariants (g2, g3) of Z + tau Z via Eisenstein series.
inline std::pair<cplx, cplx> weierstrass_invariants(const LatticeSpec& L, const EvalConfig& cfg = {})
{
    const cplx q = std::exp(2.0 * I * pi * L.tau);
    cplx e4{1.0, 0.0};
    cplx e6{1.0, 0.0};
    cplx qn = q;
    for (int n = 1; n <= 4 * cfg.max_terms; ++n) {
        double s3 = 0.0;
        double s5 = 0.0;
        for (int d = 1; d <= n; ++d)
            if (n % d == 0) {
                s3 += std::pow(static_cast<double>(d), 3);
                s5 += std::pow(static_cast<double>(d), 5);
            }
        const cplx t4 = 240.0 * s3 * qn;
        const cplx t6 = -504.0 * s5 * qn;
        e4 += t4;
        e6 += t6;
        if (std::abs(t4) + std::abs(t6) < cfg.target_eps * (std::abs(e4) + std::abs(e6)))
            break;
        qn *= q;
    }
    const double pi4 = std::pow(pi, 4);
    const double pi6 = std::pow(pi, 6);
    return {4.0 * pi4 / 3.0 * e4, 8.0 * pi6 / 27.0 * e6};
}

namespace detail {

struct NewtonResult {
    bool ok = false;
    cplx z{};
    double residual = 0.0;
};

inline NewtonResult wp_newton(cplx c, cplx start, cplx tau, const EvalConfig& cfg, double accept)
{
    const LatticeSpec L1(tau, 1);
    auto f = [&](cplx z) { return wp_qseries(z, tau, cfg, false) - c; };
    NewtonResult r;
    cplx z = start;
    cplx fz = f(z);
    for (int iter = 0; iter < 200; ++iter) {
        if (std::abs(fz) <= 1e-14 * (1.0 + std::abs(c)))
            break;
        const cplx d = wp_qseries(z, tau, cfg, true);
        if (d == cplx{0.0, 0.0} || !std::isfinite(std::abs(d)))
            break;
        const cplx step = fz / d;
        double lambda = 1.0;
        bool improved = false;
        while (lambda > 1e-8) {
            const cplx zn = z - lambda * step;
            if (coord_distance_to_lattice(zn, L1) > 1e-12) {
                const cplx fn = f(zn);
                if (std::isfinite(std::abs(fn)) && std::abs(fn) < std::abs(fz)) {
                    z = zn;
                    fz = fn;
                    improved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if (!improved)
            break;
    }
    r.z = z;
    r.residual = std::abs(fz);
    r.ok = std::isfinite(r.residual) && r.residual <= accept;
    return r;
}

} // namespace detail

/// Returns z0 in the fundamental domain with wp_k(z0) = c (k = L.level).
/// Of the two preimages {z0, -z0} the one with lexicographically smaller coordinates is returned.
inline cplx wp_invert(cplx c, const LatticeSpec& L, const EvalConfig& cfg = {})
{
    const LatticeSpec L1 = L.base();
    const double accept = 1e-8 * (1.0 + std::abs(c));

    std::vector<cplx> starts;
    if (std::abs(c) > 1e3)
        starts.push_back(1.0 / std::sqrt(c));
    {
        std::vector<std::pair<double, cplx>> grid;
        constexpr int n = 8;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const cplx z = from_coords({(i + 0.5) / n, (j + 0.5) / n}, L1);
                if (coord_distance_to_lattice(z, L1) < cfg.pole_guard)
                    continue;
                grid.emplace_back(std::abs(detail::wp_qseries(z, L.tau, cfg, false) - c), z);
            }
        std::stable_sort(grid.begin(), grid.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& g : grid)
            starts.push_back(g.second);
    }

    for (const cplx s : starts) {
        auto r = detail::wp_newton(c, s, L.tau, cfg, accept);
        if (!r.ok)
            continue;
        cplx z0 = r.z;
        // Critical values are attained at 2-torsion points; Newton only gets there linearly.
        if (is_lattice_member(2.0 * z0, L1, 1e-7)) {
            const auto [a, b] = integer_coords(2.0 * z0, L1);
            const cplx half = 0.5 * (static_cast<double>(a) + static_cast<double>(b) * L.tau);
            if (std::abs(detail::wp_qseries(half, L.tau, cfg, false) - c) <= accept)
                z0 = half;
        }
        const TorusPoint p = reduce(z0, L1);
        const TorusPoint m = reduce(-z0, L1);
        const bool take_neg = !same_point(p, m)
            && (m.coords.s < p.coords.s - tol_lat
                || (std::abs(m.coords.s - p.coords.s) <= tol_lat && m.coords.t < p.coords.t));
        const cplx out = take_neg ? m.xi : p.xi;
        return out * static_cast<double>(L.level);
    }
    throw error(errc::no_convergence, "wp_invert: no Newton start converged");
}

} // namespace ellric
