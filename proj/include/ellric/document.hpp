#pragma once

// JSON problem and verdict documents (schema_version "1"). Complex numbers are
// [re, im] pairs.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "classifier.hpp"
#include "divisor.hpp"
#include "error.hpp"
#include "lattice.hpp"
#include "riccati.hpp"
#include "theta_quotient.hpp"

namespace ellric {

using json = nlohmann::json;

inline constexpr const char* schema_version = "1";

struct ProblemDocument {
    cplx tau{0.0, 1.0};
    cplx h{};
    EllipticCoefficient a = EllipticCoefficient::constant(0.0);
    EllipticCoefficient b = EllipticCoefficient::constant(1.0);
    ClassifyConfig config{};

    DifferenceEquation equation() const
    {
        const LatticeSpec L(tau);
        DifferenceEquation eq;
        eq.lattice = L;
        eq.h = h;
        eq.a = rebind(a, L);
        eq.b = rebind(b, L);
        return eq;
    }

private:
    static EllipticCoefficient rebind(EllipticCoefficient c, const LatticeSpec& L)
    {
        if (auto* w = std::get_if<WpLinearCoeff>(&c.data))
            w->lattice = L;
        return c;
    }
};

namespace detail {

[[noreturn]] inline void field_error(const std::string& path, const std::string& what)
{
    throw error(errc::invalid_input, "field " + path + ": " + what);
}

inline const json& require(const json& obj, const char* key, const std::string& path)
{
    if (!obj.is_object())
        field_error(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end())
        field_error(path + "/" + key, "missing");
    return *it;
}

inline cplx complex_at(const json& v, const std::string& path)
{
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        field_error(path, "expected a complex number as [re, im]");
    return {v[0].get<double>(), v[1].get<double>()};
}

inline void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& path)
{
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const auto k : allowed)
            ok = ok || it.key() == k;
        if (!ok)
            field_error(path + "/" + it.key(), "unknown field");
    }
}

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline EllipticCoefficient parse_coefficient(const json& v, const LatticeSpec& L, const std::string& path)
{
    const json& kind_v = require(v, "kind", path);
    if (!kind_v.is_string())
        field_error(path + "/kind", "expected a string");
    const auto kind = kind_v.get<std::string>();
    if (kind == "constant") {
        check_keys(v, {"kind", "value"}, path);
        return EllipticCoefficient::constant(complex_at(require(v, "value", path), path + "/value"));
    }
    if (kind == "wp_linear") {
        check_keys(v, {"kind", "alpha", "beta"}, path);
        return EllipticCoefficient::wp_linear(complex_at(require(v, "alpha", path), path + "/alpha"),
                                              complex_at(require(v, "beta", path), path + "/beta"), L);
    }
    if (kind == "theta_quotient") {
        check_keys(v, {"kind", "constant", "factors"}, path);
        const cplx c = complex_at(require(v, "constant", path), path + "/constant");
        if (c == cplx{0.0, 0.0})
            field_error(path + "/constant", "must be nonzero");
        const json& fs = require(v, "factors", path);
        if (!fs.is_array())
            field_error(path + "/factors", "expected an array");
        ThetaQuotient q(L, c);
        for (std::size_t i = 0; i < fs.size(); ++i) {
            const std::string fp = path + "/factors/" + std::to_string(i);
            check_keys(fs[i], {"xi", "mult"}, fp);
            const json& m = require(fs[i], "mult", fp);
            if (!m.is_number_integer())
                field_error(fp + "/mult", "expected an integer");
            q.add_factor(complex_at(require(fs[i], "xi", fp), fp + "/xi"), m.get<int>());
        }
        if (!is_elliptic(q))
            field_error(path, "theta quotient is not L-periodic (degree must be 0 and the weight an integer)");
        return EllipticCoefficient::quotient(std::move(q));
    }
    field_error(path + "/kind", "expected constant, wp_linear or theta_quotient");
}

inline json coefficient_json(const EllipticCoefficient& c)
{
    if (const auto* k = std::get_if<ConstantCoeff>(&c.data))
        return {{"kind", "constant"}, {"value", complex_json(k->value)}};
    if (const auto* w = std::get_if<WpLinearCoeff>(&c.data))
        return {{"kind", "wp_linear"}, {"alpha", complex_json(w->alpha)}, {"beta", complex_json(w->beta)}};
    if (const auto* q = std::get_if<QuotientCoeff>(&c.data)) {
        json fs = json::array();
        for (const auto& f : q->quotient.factors())
            fs.push_back({{"xi", complex_json(f.xi)}, {"mult", f.mult}});
        return {{"kind", "theta_quotient"}, {"constant", complex_json(q->quotient.constant())}, {"factors", fs}};
    }
    throw error(errc::invalid_input, "sums of theta quotients have no document form");
}

inline json options_json(const ClassifyConfig& c)
{
    return {
        {"seed", c.solve.seed},
        {"torsion_nmax", c.torsion_nmax},
        {"independence_l_range", c.independence_l_range},
        {"d_range", c.d_range},
        {"rank1_nmax", c.rank1_nmax},
        {"orbit_cap", c.orbit_cap},
        {"d_max", c.solve.d_max},
        {"tol_c", c.solve.tol_c},
        {"tol_res", c.solve.tol_res},
        {"samples", c.solve.samples},
        {"sample_guard", c.solve.sample_guard},
        {"subdivisor_cap", c.solve.subdivisor_cap},
        {"candidate_cap", c.solve.candidate_cap},
        {"weight_mode", to_string(c.solve.weight_mode)},
        {"formal_window", c.solve.formal_window},
        {"target_eps", c.solve.eval.target_eps},
        {"max_terms", c.solve.eval.max_terms},
        {"pole_guard", c.solve.eval.pole_guard},
    };
}

inline ClassifyConfig parse_options(const json& o, const std::string& path)
{
    ClassifyConfig c;
    if (!o.is_object())
        field_error(path, "expected an object");
    const json defaults = options_json(c);
    for (auto it = o.begin(); it != o.end(); ++it) {
        const std::string key = it.key();
        const std::string fp = path + "/" + key;
        if (!defaults.contains(key))
            field_error(fp, "unknown option");
        const json& v = it.value();
        auto integer = [&](auto& dst, long long lo) {
            if (!v.is_number_integer() || v.get<long long>() < lo)
                field_error(fp, "expected an integer >= " + std::to_string(lo));
            dst = static_cast<std::remove_reference_t<decltype(dst)>>(v.get<long long>());
        };
        auto positive = [&](double& dst) {
            if (!v.is_number() || !(v.get<double>() > 0.0))
                field_error(fp, "expected a positive number");
            dst = v.get<double>();
        };
        if (key == "seed") {
            if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
                field_error(fp, "expected a non-negative integer");
            c.solve.seed = v.get<std::uint64_t>();
        } else if (key == "torsion_nmax") integer(c.torsion_nmax, 1);
        else if (key == "independence_l_range") integer(c.independence_l_range, 0);
        else if (key == "d_range") integer(c.d_range, 1);
        else if (key == "rank1_nmax") integer(c.rank1_nmax, 1);
        else if (key == "orbit_cap") integer(c.orbit_cap, 1);
        else if (key == "d_max") integer(c.solve.d_max, 0);
        else if (key == "tol_c") positive(c.solve.tol_c);
        else if (key == "tol_res") positive(c.solve.tol_res);
        else if (key == "samples") integer(c.solve.samples, 1);
        else if (key == "sample_guard") positive(c.solve.sample_guard);
        else if (key == "subdivisor_cap") integer(c.solve.subdivisor_cap, 1);
        else if (key == "candidate_cap") integer(c.solve.candidate_cap, 1);
        else if (key == "formal_window") integer(c.solve.formal_window, 1);
        else if (key == "target_eps") positive(c.solve.eval.target_eps);
        else if (key == "max_terms") integer(c.solve.eval.max_terms, 8);
        else if (key == "pole_guard") positive(c.solve.eval.pole_guard);
        else if (key == "weight_mode") {
            const std::string m = v.is_string() ? v.get<std::string>() : "";
            if (m == "formal")
                c.solve.weight_mode = WeightMode::Formal;
            else if (m == "numeric")
                c.solve.weight_mode = WeightMode::Numeric;
            else
                field_error(fp, "expected \"formal\" or \"numeric\"");
        }
    }
    try {
        c.solve.validate();
    } catch (const error& e) {
        field_error(path, e.what());
    }
    return c;
}

// 1-based line and column of a byte offset.
inline std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t byte)
{
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

} // namespace detail

/// Parses JSON text; syntax errors report line and column.
inline json parse_json_text(std::string_view text)
{
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // nlohmann reports the offset just past the offending character.
        const auto [line, col] = detail::line_col(text, e.byte > 0 ? e.byte - 1 : 0);
        throw error(errc::invalid_input,
                    "JSON syntax error at line " + std::to_string(line) + ", column " + std::to_string(col));
    }
}

inline ProblemDocument parse_problem(const json& doc)
{
    if (!doc.is_object())
        detail::field_error("", "document must be an object");
    detail::check_keys(doc, {"schema_version", "tau", "h", "a", "b", "options"}, "");
    const json& ver = detail::require(doc, "schema_version", "");
    if (!ver.is_string() || ver.get<std::string>() != schema_version)
        detail::field_error("/schema_version", "expected \"1\"");

    ProblemDocument p;
    p.tau = detail::complex_at(detail::require(doc, "tau", ""), "/tau");
    if (!(p.tau.imag() > 0.0))
        detail::field_error("/tau", "Im(tau) must be positive");
    p.h = detail::complex_at(detail::require(doc, "h", ""), "/h");
    const LatticeSpec L(p.tau);
    p.a = detail::parse_coefficient(detail::require(doc, "a", ""), L, "/a");
    p.b = detail::parse_coefficient(detail::require(doc, "b", ""), L, "/b");
    if (p.b.is_zero())
        detail::field_error("/b", "b must not be the zero constant");
    if (const auto it = doc.find("options"); it != doc.end())
        p.config = detail::parse_options(*it, "/options");
    return p;
}

inline ProblemDocument parse_problem_text(std::string_view text) { return parse_problem(parse_json_text(text)); }

inline ProblemDocument read_problem_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw error(errc::invalid_input, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_problem_text(ss.str());
    } catch (const error& e) {
        throw error(e.code(), path + ": " + e.message());
    }
}

inline json serialize(const ProblemDocument& p)
{
    return {
        {"schema_version", schema_version},
        {"tau", detail::complex_json(p.tau)},
        {"h", detail::complex_json(p.h)},
        {"a", detail::coefficient_json(p.a)},
        {"b", detail::coefficient_json(p.b)},
        {"options", detail::options_json(p.config)},
    };
}

/// Canonical form of a problem document: every option present with its default filled in.
inline json normalize(const json& doc)
{
    json out = doc;
    json opts = detail::options_json(ClassifyConfig{});
    if (const auto it = doc.find("options"); it != doc.end() && it->is_object())
        for (auto o = it->begin(); o != it->end(); ++o)
            opts[o.key()] = o.value();
    out["options"] = opts;
    return out;
}

// ---------------------------------------------------------------------------
// Verdict documents

namespace detail {

inline json divisor_json(const Divisor& d)
{
    json out = json::array();
    for (const auto& e : d.entries())
        out.push_back({{"point", complex_json(e.point.xi)}, {"mult", e.mult}});
    return out;
}

inline json quotient_json(const ThetaQuotient& q)
{
    json fs = json::array();
    for (const auto& f : q.factors())
        fs.push_back({{"xi", complex_json(f.xi)}, {"mult", f.mult}});
    return {{"level", q.level()}, {"constant", complex_json(q.constant())}, {"factors", fs}};
}

} // namespace detail

inline json outcome_json(const RiccatiProblem& prob, const RiccatiOutcome& out)
{
    json sols = json::array();
    for (const auto& s : out.solutions)
        sols.push_back({{"u", detail::quotient_json(s.u)},
                        {"divisor", detail::divisor_json(s.divisor)},
                        {"max_residual", s.max_residual},
                        {"samples", s.samples}});
    json unresolved = json::array();
    for (const auto& c : out.unresolved)
        unresolved.push_back(
            {{"p", detail::divisor_json(c.p_div)}, {"q", detail::divisor_json(c.q_div)}, {"deg_r", c.deg_r}});
    return {
        {"kind", to_string(out.kind)},
        {"level", prob.lattice.level},
        {"step", detail::complex_json(prob.step)},
        {"step_multiple", prob.step_multiple},
        {"bounds",
         {{"p2_level1", detail::divisor_json(prob.p2_base)},
          {"p3_level1", detail::divisor_json(prob.p3_base)},
          {"p2", detail::divisor_json(prob.p2_divisor)},
          {"p3", detail::divisor_json(prob.p3_divisor)},
          {"q", detail::divisor_json(prob.q_bound())}}},
        {"candidate_count", out.candidate_count},
        {"checked_count", out.checked_count},
        {"d_max", out.d_max},
        {"seed", out.seed},
        {"solution_count_complete", out.solution_count_complete},
        {"solutions", sols},
        {"unresolved", unresolved},
    };
}

inline json rank1_json(const Rank1Group& g)
{
    json out = {{"kind", g.kind == Rank1Group::Kind::Finite ? "finite" : "full_torus"}, {"reason", g.reason}};
    if (g.kind == Rank1Group::Kind::Finite) {
        out["order"] = g.order;
        out["witness"] = detail::quotient_json(*g.witness);
        out["witness_residual"] = g.witness_residual;
    } else {
        out["bound_checked"] = g.bound_checked;
    }
    return out;
}

/// Verdict document without the timing field; the replayable part.
inline json verdict_json(const GaloisVerdict& v)
{
    json verdict = {{"tag", to_string(v.kind)}};
    if (v.det_group)
        verdict["det_group"] = rank1_json(*v.det_group);
    json assumptions = json::array();
    for (const auto& a : v.assumptions) {
        json j = {{"name", a.name}, {"bound", a.bound}, {"passed", a.passed}, {"detail", a.detail}};
        if (a.secondary_bound != 0)
            j["secondary_bound"] = a.secondary_bound;
        assumptions.push_back(j);
    }
    json certs = json::object();
    if (v.first_problem && v.first)
        certs["first"] = outcome_json(*v.first_problem, *v.first);
    if (v.imprimitivity_problem && v.imprimitivity)
        certs["imprimitivity"] = outcome_json(*v.imprimitivity_problem, *v.imprimitivity);
    return {
        {"schema_version", schema_version},
        {"verdict", verdict},
        {"group_rendering", render(v)},
        {"evidence", v.evidence},
        {"seed", v.seed},
        {"assumptions", assumptions},
        {"certificates", certs},
    };
}

inline json verdict_document(const GaloisVerdict& v, double seconds)
{
    json doc = verdict_json(v);
    doc["timing"] = {{"seconds", seconds}};
    return doc;
}

/// Copy of a document with its timing field removed, for replay comparisons.
inline json without_timing(json doc)
{
    doc.erase("timing");
    return doc;
}

} // namespace ellric
