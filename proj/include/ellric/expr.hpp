#pragma once

// Small recursive-descent parser for complex literals on the command line:
// numbers, i, pi, tau, + - * / ^ (integer exponent), parentheses, exp(), sqrt().
// "0.31+0.17i", "(1+tau)/2", "exp(2*pi*i/3)".

#include <cctype>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <string>
#include <string_view>

#include "error.hpp"
#include "lattice.hpp"

namespace ellric {

namespace detail {

class ExprParser {
public:
    ExprParser(std::string_view src, cplx tau) : src_(src), tau_(tau) {}

    cplx parse()
    {
        const cplx v = expr();
        skip();
        if (pos_ != src_.size())
            fail("unexpected character");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        throw error(errc::invalid_input,
                    "cannot parse complex expression '" + std::string(src_) + "' at offset " + std::to_string(pos_) + ": " + what);
    }

    void skip()
    {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
    }

    bool eat(char c)
    {
        skip();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    cplx expr()
    {
        cplx v = term();
        while (true) {
            if (eat('+'))
                v += term();
            else if (eat('-'))
                v -= term();
            else
                return v;
        }
    }

    cplx term()
    {
        cplx v = power();
        while (true) {
            if (eat('*')) {
                v *= power();
            } else if (eat('/')) {
                const cplx d = power();
                if (d == cplx{0.0, 0.0})
                    fail("division by zero");
                v /= d;
            } else {
                // Implicit product: "2tau", "3(1+i)".
                skip();
                if (pos_ < src_.size() && (std::isalpha(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '('))
                    v *= power();
                else
                    return v;
            }
        }
    }

    cplx power()
    {
        const cplx base = unary();
        if (!eat('^'))
            return base;
        const cplx e = unary();
        if (e.imag() != 0.0 || e.real() != std::round(e.real()))
            fail("exponent must be an integer");
        return std::pow(base, static_cast<int>(e.real()));
    }

    cplx unary()
    {
        if (eat('-'))
            return -unary();
        if (eat('+'))
            return unary();
        return primary();
    }

    cplx primary()
    {
        skip();
        if (pos_ >= src_.size())
            fail("unexpected end");
        if (eat('(')) {
            const cplx v = expr();
            if (!eat(')'))
                fail("missing ')'");
            return v;
        }
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const std::string rest(src_.substr(pos_));
            char* end = nullptr;
            const double x = std::strtod(rest.c_str(), &end);
            if (end == rest.c_str())
                fail("bad number");
            pos_ += static_cast<std::size_t>(end - rest.c_str());
            // "0.17i" as an imaginary literal.
            if (pos_ < src_.size() && src_[pos_] == 'i'
                && (pos_ + 1 == src_.size() || !std::isalnum(static_cast<unsigned char>(src_[pos_ + 1])))) {
                ++pos_;
                return {0.0, x};
            }
            return {x, 0.0};
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_])))
                ++pos_;
            const std::string_view name = src_.substr(start, pos_ - start);
            if (name == "i")
                return I;
            if (name == "pi")
                return pi;
            if (name == "tau")
                return tau_;
            if (name == "exp" || name == "sqrt") {
                if (!eat('('))
                    fail("expected '(' after function name");
                // Unary minus leaves -0 imaginary parts; drop the sign so sqrt(-4) is 2i.
                const cplx raw = expr();
                const cplx arg{raw.real(), raw.imag() + 0.0};
                if (!eat(')'))
                    fail("missing ')'");
                return name == "exp" ? std::exp(arg) : std::sqrt(arg);
            }
            pos_ = start;
            fail("unknown identifier '" + std::string(name) + "'");
        }
        fail("unexpected character");
    }

    std::string_view src_;
    cplx tau_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Parses a complex expression; `tau` is substituted for the identifier tau.
inline cplx parse_complex(std::string_view text, cplx tau = I) { return detail::ExprParser(text, tau).parse(); }

} // namespace ellric
