#pragma once

// Theta quotients c * prod theta_k(z - xi)^n and the elliptic coefficients
// built from them.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "divisor.hpp"
#include "error.hpp"
#include "lattice.hpp"
#include "special_functions.hpp"

namespace ellric {

struct ThetaFactor {
    cplx xi{};
    int mult = 0;
};

/// c * prod_i theta_k(z - xi_i)^{n_i}. Factors are keyed by their complex xi, not by
/// the class of xi mod kL: shifting xi by a period changes the function by a multiplier.
class ThetaQuotient {
public:
    ThetaQuotient() = default;

    ThetaQuotient(const LatticeSpec& L, cplx constant, std::vector<ThetaFactor> factors = {})
        : lattice_(L), constant_(constant)
    {
        if (constant == cplx{0.0, 0.0} || !std::isfinite(std::abs(constant)))
            throw error(errc::invalid_input, "theta quotient constant must be finite and nonzero");
        for (const auto& f : factors)
            add_factor(f.xi, f.mult);
    }

    const LatticeSpec& lattice() const noexcept { return lattice_; }
    int level() const noexcept { return lattice_.level; }
    cplx constant() const noexcept { return constant_; }
    const std::vector<ThetaFactor>& factors() const noexcept { return factors_; }

    void set_constant(cplx c)
    {
        if (c == cplx{0.0, 0.0})
            throw error(errc::invalid_input, "theta quotient constant must be nonzero");
        constant_ = c;
    }

    void add_factor(cplx xi, int mult)
    {
        if (mult == 0)
            return;
        auto it = std::find_if(factors_.begin(), factors_.end(), [&](const ThetaFactor& f) {
            return std::abs(f.xi - xi) <= 1e-13 * (1.0 + std::abs(xi));
        });
        if (it != factors_.end()) {
            it->mult += mult;
            if (it->mult == 0)
                factors_.erase(it);
            return;
        }
        factors_.push_back({xi, mult});
    }

    Divisor divisor() const
    {
        Divisor d(lattice_);
        for (const auto& f : factors_)
            d.add_point(f.xi, f.mult);
        return d;
    }

    int degree() const
    {
        int s = 0;
        for (const auto& f : factors_)
            s += f.mult;
        return s;
    }

    /// The representative sum n_i xi_i of the weight (not reduced).
    cplx omega() const
    {
        cplx s{0.0, 0.0};
        for (const auto& f : factors_)
            s += static_cast<double>(f.mult) * f.xi;
        return s;
    }

private:
    LatticeSpec lattice_{};
    cplx constant_{1.0, 0.0};
    std::vector<ThetaFactor> factors_;
};

inline ThetaQuotient constant_quotient(const LatticeSpec& L, cplx c) { return ThetaQuotient(L, c); }

inline cplx evaluate(const ThetaQuotient& f, cplx z, const EvalConfig& cfg = {})
{
    const LatticeSpec& L = f.lattice();
    const double k = L.level;
    cplx log_acc{0.0, 0.0};
    cplx prod = f.constant();
    for (const auto& fa : f.factors()) {
        if (fa.mult < 0 && coord_distance_to_lattice(z - fa.xi, L) < cfg.pole_guard)
            throw error(errc::pole_proximity, "theta quotient evaluated next to a pole");
        const auto parts = detail::theta_parts((z - fa.xi) / k, L.tau, cfg, false);
        log_acc += static_cast<double>(fa.mult) * parts.log_mult;
        const int n = std::abs(fa.mult);
        cplx pw{1.0, 0.0};
        for (int i = 0; i < n; ++i)
            pw *= parts.value;
        prod = fa.mult > 0 ? prod * pw : prod / pw;
    }
    return prod * std::exp(log_acc);
}

inline void require_same_level(const ThetaQuotient& a, const ThetaQuotient& b)
{
    if (a.level() != b.level())
        throw error(errc::level_mismatch, "theta quotients live on different levels");
}

inline ThetaQuotient multiply(const ThetaQuotient& f, const ThetaQuotient& g)
{
    require_same_level(f, g);
    ThetaQuotient out(f.lattice(), f.constant() * g.constant(), f.factors());
    for (const auto& fa : g.factors())
        out.add_factor(fa.xi, fa.mult);
    return out;
}

inline ThetaQuotient invert(const ThetaQuotient& f)
{
    ThetaQuotient out(f.lattice(), 1.0 / f.constant());
    for (const auto& fa : f.factors())
        out.add_factor(fa.xi, -fa.mult);
    return out;
}

inline ThetaQuotient scale(const ThetaQuotient& f, cplx c)
{
    ThetaQuotient out = f;
    out.set_constant(f.constant() * c);
    return out;
}

inline ThetaQuotient power(const ThetaQuotient& f, int n)
{
    ThetaQuotient out(f.lattice(), std::pow(f.constant(), n));
    for (const auto& fa : f.factors())
        out.add_factor(fa.xi, n * fa.mult);
    return out;
}

/// (phi f)(z) = f(z + h): every xi moves to xi - h, constant unchanged.
inline ThetaQuotient phi_shift(const ThetaQuotient& f, cplx h)
{
    ThetaQuotient out(f.lattice(), f.constant());
    for (const auto& fa : f.factors())
        out.add_factor(fa.xi - h, fa.mult);
    return out;
}

struct Monodromy {
    int degree = 0;
    cplx omega{};
};

/// f(z + k tau) = (-1)^deg exp(2 i pi omega / k) exp(-2 i pi deg z / k) f(z).
inline Monodromy monodromy_multiplier(const ThetaQuotient& f) { return {f.degree(), f.omega()}; }

inline cplx predicted_multiplier(const ThetaQuotient& f, cplx z)
{
    const auto m = monodromy_multiplier(f);
    const double k = f.level();
    const double sign = (m.degree % 2 == 0) ? 1.0 : -1.0;
    return sign * std::exp(2.0 * I * pi * m.omega / k) * std::exp(-2.0 * I * pi * static_cast<double>(m.degree) * z / k);
}

namespace detail {

// Deterministic probe points in the level-k fundamental domain, kept away from `avoid`.
inline std::vector<cplx> probe_points(const LatticeSpec& L, const std::vector<cplx>& avoid, std::size_t count,
                                      double min_dist = 0.03, std::size_t phase = 0)
{
    std::vector<cplx> out;
    for (std::size_t j = phase; out.size() < count && j < phase + 100000; ++j) {
        const double s = std::fmod(0.1234 + 0.6180339887498949 * static_cast<double>(j), 1.0);
        const double t = std::fmod(0.3456 + 0.7548776662466927 * static_cast<double>(j), 1.0);
        const cplx z = from_coords({s, t}, L);
        bool ok = true;
        for (const cplx a : avoid)
            if (coord_distance_to_lattice(z - a, L) < min_dist) {
                ok = false;
                break;
            }
        if (ok)
            out.push_back(z);
    }
    return out;
}

inline std::vector<cplx> factor_points(const ThetaQuotient& f)
{
    std::vector<cplx> pts;
    for (const auto& fa : f.factors())
        pts.push_back(fa.xi);
    return pts;
}

} // namespace detail

/// deg = 0 and f(z + k tau) = f(z), checked numerically at three points.
inline bool is_elliptic(const ThetaQuotient& f, double tol = 1e-8, const EvalConfig& cfg = {})
{
    if (f.degree() != 0)
        return false;
    const LatticeSpec& L = f.lattice();
    const double k = L.level;
    std::vector<cplx> avoid = detail::factor_points(f);
    for (const cplx z : detail::probe_points(L, avoid, 3)) {
        const cplx ratio = evaluate(f, z + k * L.tau, cfg) / evaluate(f, z, cfg);
        if (std::abs(ratio - 1.0) > tol)
            return false;
    }
    return true;
}

/// For deg f = 0 and omega in kL, moves one representative by a multiple of k tau so that
/// omega lands in kZ; the divisor is unchanged and the result is kL-periodic.
inline ThetaQuotient normalize_representatives(const ThetaQuotient& f)
{
    const LatticeSpec& L = f.lattice();
    if (f.degree() != 0 || !is_lattice_member(f.omega(), L, 1e-8))
        throw error(errc::invalid_input, "normalize_representatives needs degree 0 and weight in kL");
    const auto [a, b] = integer_coords(f.omega(), L);
    (void)a;
    if (b == 0 || f.factors().empty())
        return f;
    const ThetaFactor& first = f.factors().front();
    const int sigma = first.mult > 0 ? 1 : -1;
    ThetaQuotient out(L, f.constant());
    for (std::size_t i = 1; i < f.factors().size(); ++i)
        out.add_factor(f.factors()[i].xi, f.factors()[i].mult);
    const double k = L.level;
    out.add_factor(first.xi, first.mult - sigma);
    out.add_factor(first.xi - static_cast<double>(sigma * b) * k * L.tau, sigma);
    return out;
}

struct WpLinearQuotient {
    ThetaQuotient quotient;
    cplx z0{};
};

/// alpha * wp_k + beta as c * theta_k(z - z0) theta_k(z + z0) / theta_k(z)^2 with wp_k(z0) = -beta/alpha.
inline WpLinearQuotient from_wp_linear(cplx alpha, cplx beta, const LatticeSpec& L, const EvalConfig& cfg = {})
{
    if (alpha == cplx{0.0, 0.0})
        throw error(errc::invalid_input, "from_wp_linear needs alpha != 0");
    const cplx z0 = wp_invert(-beta / alpha, L, cfg);
    auto target = [&](cplx z) { return alpha * wp(z, L, cfg) + beta; };

    for (const cplx root : {z0, -z0}) {
        ThetaQuotient q(L, 1.0, {{root, 1}, {-root, 1}, {0.0, -2}});
        const auto pts = detail::probe_points(L, {root, -root, 0.0}, 9, 0.05);
        const cplx c = target(pts[0]) / evaluate(q, pts[0], cfg);
        if (c == cplx{0.0, 0.0} || !std::isfinite(std::abs(c)))
            continue;
        q.set_constant(c);
        bool ok = true;
        for (std::size_t i = 1; i < pts.size() && ok; ++i) {
            const cplx expect = target(pts[i]);
            const cplx got = evaluate(q, pts[i], cfg);
            ok = std::abs(got - expect) <= 1e-7 * std::max(std::abs(expect), std::abs(alpha));
        }
        if (ok)
            return {q, reduce(root, L).xi};
    }
    throw error(errc::calibration_failed, "wp-linear calibration disagrees at verification points");
}

// ---------------------------------------------------------------------------
// Elliptic coefficients

struct ConstantCoeff {
    cplx value{};
};

struct WpLinearCoeff {
    cplx alpha{};
    cplx beta{};
    LatticeSpec lattice{};
};

struct QuotientCoeff {
    ThetaQuotient quotient;
};

/// Sum of theta quotients (each already a product of shifted factors and constants).
struct SumOfProducts {
    std::vector<ThetaQuotient> terms;
};

struct EllipticCoefficient {
    std::variant<ConstantCoeff, WpLinearCoeff, QuotientCoeff, SumOfProducts> data;

    static EllipticCoefficient constant(cplx c) { return {ConstantCoeff{c}}; }
    static EllipticCoefficient wp_linear(cplx alpha, cplx beta, const LatticeSpec& L) { return {WpLinearCoeff{alpha, beta, L}}; }
    static EllipticCoefficient quotient(ThetaQuotient q) { return {QuotientCoeff{std::move(q)}}; }
    static EllipticCoefficient sum(std::vector<ThetaQuotient> terms) { return {SumOfProducts{std::move(terms)}}; }

    bool is_constant() const { return std::holds_alternative<ConstantCoeff>(data); }
    bool is_sum() const { return std::holds_alternative<SumOfProducts>(data); }

    /// Literally zero (constant 0 or 0*wp + 0).
    bool is_zero() const
    {
        if (const auto* c = std::get_if<ConstantCoeff>(&data))
            return c->value == cplx{0.0, 0.0};
        if (const auto* w = std::get_if<WpLinearCoeff>(&data))
            return w->alpha == cplx{0.0, 0.0} && w->beta == cplx{0.0, 0.0};
        return false;
    }
};

inline cplx evaluate(const EllipticCoefficient& c, cplx z, const EvalConfig& cfg = {})
{
    return std::visit(
        [&](const auto& v) -> cplx {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, ConstantCoeff>) {
                return v.value;
            } else if constexpr (std::is_same_v<T, WpLinearCoeff>) {
                if (v.alpha == cplx{0.0, 0.0})
                    return v.beta;
                return v.alpha * wp(z, v.lattice, cfg) + v.beta;
            } else if constexpr (std::is_same_v<T, QuotientCoeff>) {
                return evaluate(v.quotient, z, cfg);
            } else {
                cplx s{0.0, 0.0};
                for (const auto& t : v.terms)
                    s += evaluate(t, z, cfg);
                return s;
            }
        },
        c.data);
}

namespace detail {

inline Divisor at_level(const Divisor& d, const LatticeSpec& L)
{
    if (d.level() == L.level)
        return d;
    return lift(d, L.level);
}

} // namespace detail

/// Effective divisor dominating the poles of c, expressed on the lattice L.
inline Divisor pole_bound(const EllipticCoefficient& c, const LatticeSpec& L)
{
    return std::visit(
        [&](const auto& v) -> Divisor {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, ConstantCoeff>) {
                return Divisor(L);
            } else if constexpr (std::is_same_v<T, WpLinearCoeff>) {
                if (v.alpha == cplx{0.0, 0.0})
                    return Divisor(L);
                return detail::at_level(Divisor::single(0.0, v.lattice, 2), L);
            } else if constexpr (std::is_same_v<T, QuotientCoeff>) {
                return detail::at_level(negative_part(v.quotient.divisor()), L);
            } else {
                Divisor out(L);
                for (const auto& t : v.terms)
                    out = join(out, detail::at_level(negative_part(t.divisor()), L));
                return out;
            }
        },
        c.data);
}

inline Divisor common_denominator(const std::vector<EllipticCoefficient>& cs, const LatticeSpec& L)
{
    Divisor out(L);
    for (const auto& c : cs)
        out = join(out, pole_bound(c, L));
    return out;
}

/// The coefficient as a single theta quotient on L (sums have no such form).
inline ThetaQuotient to_quotient(const EllipticCoefficient& c, const LatticeSpec& L, const EvalConfig& cfg = {})
{
    return std::visit(
        [&](const auto& v) -> ThetaQuotient {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, ConstantCoeff>) {
                if (v.value == cplx{0.0, 0.0})
                    throw error(errc::invalid_input, "zero coefficient has no theta-quotient form");
                return ThetaQuotient(L, v.value);
            } else if constexpr (std::is_same_v<T, WpLinearCoeff>) {
                if (v.alpha == cplx{0.0, 0.0}) {
                    if (v.beta == cplx{0.0, 0.0})
                        throw error(errc::invalid_input, "zero coefficient has no theta-quotient form");
                    return ThetaQuotient(L, v.beta);
                }
                if (v.lattice.level != L.level)
                    throw error(errc::level_mismatch, "wp-linear coefficient level differs from target level");
                return from_wp_linear(v.alpha, v.beta, v.lattice, cfg).quotient;
            } else if constexpr (std::is_same_v<T, QuotientCoeff>) {
                if (v.quotient.level() != L.level)
                    throw error(errc::level_mismatch, "quotient level differs from target level");
                return v.quotient;
            } else {
                throw error(errc::invalid_input, "a sum of theta quotients is not a theta quotient");
            }
        },
        c.data);
}

/// Exact divisor of a non-sum coefficient, expressed on L.
inline Divisor exact_divisor(const EllipticCoefficient& c, const LatticeSpec& L, const EvalConfig& cfg = {})
{
    if (c.is_sum())
        throw error(errc::invalid_input, "sums of theta quotients carry only pole bounds");
    if (c.is_zero())
        throw error(errc::invalid_input, "the zero coefficient has no divisor");
    if (c.is_constant())
        return Divisor(L);
    if (const auto* w = std::get_if<WpLinearCoeff>(&c.data)) {
        if (w->alpha == cplx{0.0, 0.0})
            return Divisor(L);
        return detail::at_level(from_wp_linear(w->alpha, w->beta, w->lattice, cfg).quotient.divisor(), L);
    }
    return detail::at_level(std::get<QuotientCoeff>(c.data).quotient.divisor(), L);
}

} // namespace ellric
