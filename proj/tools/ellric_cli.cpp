// ellric command-line tool: classify, riccati, eval, torsion, selftest.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ellric/ellric.hpp"

namespace {

using namespace ellric;

constexpr int exit_ok = 0;
constexpr int exit_input = 1;
constexpr int exit_unresolved = 2;

struct ProblemSource {
    std::string file;
    std::string lame;    // "A,B[,h]"
    std::string family7; // "b,alpha,beta"
    std::string tau = "i";
    std::string h = "0.31+0.17i";
    std::optional<std::uint64_t> seed;
    std::string weight_mode;
};

std::vector<cplx> split_complex(const std::string& text, cplx tau)
{
    std::vector<cplx> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::size_t end = comma == std::string::npos ? text.size() : comma;
        out.push_back(parse_complex(std::string_view(text).substr(start, end - start), tau));
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return out;
}

std::optional<std::uint64_t> env_seed()
{
    const char* s = std::getenv("ELLRIC_SEED");
    if (s == nullptr || *s == '\0')
        return std::nullopt;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (end == s || *end != '\0')
        throw error(errc::invalid_input, "ELLRIC_SEED must be a non-negative integer");
    return v;
}

// Flag beats ELLRIC_SEED beats the document's options.seed beats the built-in default.
ProblemDocument load_problem(const ProblemSource& src)
{
    const int given = !src.file.empty() + !src.lame.empty() + !src.family7.empty();
    if (given != 1)
        throw error(errc::invalid_input, "give exactly one of a problem file, --lame or --family7");

    ProblemDocument doc;
    if (!src.file.empty()) {
        doc = read_problem_file(src.file);
    } else {
        doc.tau = parse_complex(src.tau);
        doc.h = parse_complex(src.h, doc.tau);
        const LatticeSpec L(doc.tau);
        if (!src.lame.empty()) {
            const auto v = split_complex(src.lame, doc.tau);
            if (v.size() < 2 || v.size() > 3)
                throw error(errc::invalid_input, "--lame expects A,B or A,B,h");
            if (v.size() == 3)
                doc.h = v[2];
            const auto eq = build_lame(v[0], v[1], doc.h, L, doc.config.torsion_nmax);
            doc.a = eq.a;
            doc.b = eq.b;
            doc.config.independence_l_range = lame_l_range;
        } else {
            const auto v = split_complex(src.family7, doc.tau);
            if (v.size() != 3)
                throw error(errc::invalid_input, "--family7 expects b,alpha,beta");
            const auto eq = build_family7(v[0], v[1], v[2], doc.h, L, doc.config.torsion_nmax);
            doc.a = eq.a;
            doc.b = eq.b;
            doc.config.independence_l_range = family7_l_range;
        }
    }
    if (src.seed)
        doc.config.solve.seed = *src.seed;
    else if (const auto s = env_seed())
        doc.config.solve.seed = *s;
    if (src.weight_mode == "numeric")
        doc.config.solve.weight_mode = WeightMode::Numeric;
    else if (src.weight_mode == "formal")
        doc.config.solve.weight_mode = WeightMode::Formal;
    else if (!src.weight_mode.empty())
        throw error(errc::invalid_input, "--weight-mode expects formal or numeric");
    return doc;
}

void add_source_options(CLI::App* cmd, ProblemSource& src, bool file_positional = true)
{
    if (file_positional)
        cmd->add_option("file", src.file, "ProblemDocument (JSON)");
    cmd->add_option("--lame", src.lame, "discrete Lame instance A,B[,h]");
    cmd->add_option("--family7", src.family7, "a = alpha wp + beta, b constant: b,alpha,beta");
    cmd->add_option("--tau", src.tau, "lattice generator for helper instances")->capture_default_str();
    cmd->add_option("--shift", src.h, "shift h for helper instances")->capture_default_str();
    cmd->add_option("--seed", src.seed, "sampling seed (overrides ELLRIC_SEED and the document)");
    cmd->add_option("--weight-mode", src.weight_mode, "formal or numeric weight congruence");
}

void write_output(const json& doc, const std::string& path)
{
    const std::string text = doc.dump(2) + "\n";
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw error(errc::invalid_input, "cannot write " + path);
    out << text;
}

std::string format_complex(cplx z)
{
    char buf[96];
    if (z.imag() == 0.0)
        std::snprintf(buf, sizeof buf, "%.15g", z.real());
    else
        std::snprintf(buf, sizeof buf, "%.15g%+.15gi", z.real(), z.imag());
    return buf;
}

int cmd_classify(const ProblemSource& src, const std::string& out_path)
{
    const ProblemDocument doc = load_problem(src);
    const auto t0 = std::chrono::steady_clock::now();
    const GaloisVerdict v = classify(doc.equation(), doc.config);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_output(verdict_document(v, secs), out_path);
    std::cerr << "verdict: " << render(v) << "\n";
    return v.kind == VerdictKind::Unresolved ? exit_unresolved : exit_ok;
}

int cmd_riccati(const ProblemSource& src, bool imprimitivity, const std::string& out_path)
{
    const ProblemDocument doc = load_problem(src);
    const DifferenceEquation eq = doc.equation();
    const auto t0 = std::chrono::steady_clock::now();
    const RiccatiProblem prob = imprimitivity ? build_imprimitivity_riccati(eq, doc.config.solve.eval)
                                              : build_first_riccati(eq, doc.config.solve.eval);
    const RiccatiOutcome outcome = solve(prob, doc.config.solve);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json out = {{"schema_version", schema_version}, {"pass", imprimitivity ? "imprimitivity" : "first"}};
    out["outcome"] = outcome_json(prob, outcome);
    out["timing"] = {{"seconds", secs}};
    write_output(out, out_path);
    std::cerr << "outcome: " << to_string(outcome.kind) << " (" << outcome.candidate_count << " candidates)\n";
    return outcome.kind == OutcomeKind::Inconclusive ? exit_unresolved : exit_ok;
}

int cmd_eval(const std::string& fn, const std::string& z_text, const std::string& tau_text, int k)
{
    const cplx tau = parse_complex(tau_text);
    const LatticeSpec L = LatticeSpec(tau).at_level(k);
    const cplx z = parse_complex(z_text, tau);
    cplx value;
    if (fn == "theta")
        value = theta(z, L);
    else if (fn == "theta_k")
        value = theta_k(z, L);
    else if (fn == "wp")
        value = wp(z, L);
    else if (fn == "wp_prime")
        value = wp_prime(z, L);
    else if (fn == "wp_invert")
        value = wp_invert(z, L);
    else
        throw error(errc::invalid_input, "unknown function '" + fn + "' (theta, theta_k, wp, wp_prime, wp_invert)");
    std::cout << format_complex(value) << "\n";
    return exit_ok;
}

int cmd_torsion(const std::string& h_text, const std::string& tau_text, int nmax)
{
    const cplx tau = parse_complex(tau_text);
    const LatticeSpec L(tau);
    const cplx h = parse_complex(h_text, tau);
    if (const auto n = torsion_order(h, L, nmax))
        std::cout << *n << "\n";
    else
        std::cout << "none up to " << nmax << "\n";
    return exit_ok;
}

int cmd_selftest()
{
    bool all = true;
    for (const auto& r : run_selftest()) {
        std::printf("%-28s %s  worst %.3e  tol %.1e\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.worst, r.tolerance);
        all = all && r.passed;
    }
    return all ? exit_ok : exit_input;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Difference Galois groups of order-two equations with elliptic coefficients"};
    app.require_subcommand(1);

    ProblemSource classify_src;
    std::string classify_out;
    auto* classify_cmd = app.add_subcommand("classify", "decide the Galois group; writes a VerdictDocument");
    add_source_options(classify_cmd, classify_src);
    classify_cmd->add_option("--out", classify_out, "write the verdict here instead of standard output");

    ProblemSource riccati_src;
    std::string riccati_out;
    bool imprimitivity = false;
    auto* riccati_cmd = app.add_subcommand("riccati", "run one Riccati pass; writes its outcome");
    add_source_options(riccati_cmd, riccati_src);
    riccati_cmd->add_flag("--imprimitivity", imprimitivity, "run the pass for phi^2 instead of phi");
    riccati_cmd->add_option("--out", riccati_out, "output path");

    std::string eval_fn;
    std::string eval_z;
    std::string eval_tau = "i";
    int eval_k = 1;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate theta, theta_k, wp, wp_prime or wp_invert");
    eval_cmd->add_option("function", eval_fn)->required();
    eval_cmd->add_option("z", eval_z)->required();
    eval_cmd->add_option("--tau", eval_tau)->capture_default_str();
    eval_cmd->add_option("--k", eval_k, "lattice level")->capture_default_str()->check(CLI::PositiveNumber);

    std::string torsion_h;
    std::string torsion_tau = "i";
    int torsion_nmax = 64;
    auto* torsion_cmd = app.add_subcommand("torsion", "least n <= nmax with n h in the lattice");
    torsion_cmd->add_option("shift", torsion_h, "the shift h")->required();
    torsion_cmd->add_option("--nmax", torsion_nmax)->capture_default_str()->check(CLI::PositiveNumber);
    torsion_cmd->add_option("--tau", torsion_tau)->capture_default_str();

    auto* selftest_cmd = app.add_subcommand("selftest", "run the invariant suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_input;
    }

    try {
        if (classify_cmd->parsed())
            return cmd_classify(classify_src, classify_out);
        if (riccati_cmd->parsed())
            return cmd_riccati(riccati_src, imprimitivity, riccati_out);
        if (eval_cmd->parsed())
            return cmd_eval(eval_fn, eval_z, eval_tau, eval_k);
        if (torsion_cmd->parsed())
            return cmd_torsion(torsion_h, torsion_tau, torsion_nmax);
        if (selftest_cmd->parsed())
            return cmd_selftest();
    } catch (const ellric::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_input;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_input;
    }
    return exit_input;
}
