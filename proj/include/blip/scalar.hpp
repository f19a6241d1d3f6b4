#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>

#include "blip/errors.hpp"

namespace blip {

/// Exact scalar for the rational evaluation mode. Arbitrary precision, so
/// simplex pivoting cannot overflow no matter how the denominators grow.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

template <class S>
inline constexpr bool is_exact_scalar_v = std::is_same_v<S, Rational>;

template <class S>
concept ScalarType = std::is_same_v<S, double> || std::is_same_v<S, Rational>;

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return static_cast<double>(x); }

inline double scalar_abs(double x) { return std::fabs(x); }
inline Rational scalar_abs(const Rational& x) { return x < 0 ? Rational(-x) : x; }

template <ScalarType S>
S scalar_min(const S& a, const S& b) { return a < b ? a : b; }

template <ScalarType S>
S scalar_max(const S& a, const S& b) { return a < b ? b : a; }

/// Exact square root of a nonnegative rational; empty unless numerator and
/// denominator are both perfect squares.
inline std::optional<Rational> exact_sqrt(const Rational& x) {
    if (x < 0) return std::nullopt;
    const BigInt num = boost::multiprecision::numerator(x);
    const BigInt den = boost::multiprecision::denominator(x);
    const BigInt sn = boost::multiprecision::sqrt(num);
    if (sn * sn != num) return std::nullopt;
    const BigInt sd = boost::multiprecision::sqrt(den);
    if (sd * sd != den) return std::nullopt;
    return Rational(sn, sd);
}

inline double scalar_sqrt(double x) { return std::sqrt(x); }

inline Rational scalar_sqrt(const Rational& x) {
    if (auto r = exact_sqrt(x)) return *r;
    throw ExactUnavailableError("square root of " + x.str() + " is irrational");
}

/// Shortest round-trip decimal form of a double; deterministic across runs.
inline std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

/// "p/q" when the denominator is nontrivial, plain integer otherwise.
inline std::string format_rational(const Rational& x) {
    if (boost::multiprecision::denominator(x) == 1)
        return boost::multiprecision::numerator(x).str();
    return x.str();
}

inline std::string format_scalar(double x) { return format_double(x); }
inline std::string format_scalar(const Rational& x) { return format_rational(x); }

/// Parses "p/q", integers, and finite decimals ("-0.25", "3e-2") exactly.
inline Rational parse_rational(std::string_view text) {
    auto fail = [&]() -> void {
        throw ParseError("not a rational number: '" + std::string(text) + "'");
    };
    // cpp_int's string constructor treats a leading 0 as octal; parse the
    // digits ourselves
    auto parse_int = [&](std::string_view t) -> BigInt {
        bool neg = false;
        if (t.starts_with('-')) { neg = true; t.remove_prefix(1); }
        else if (t.starts_with('+')) t.remove_prefix(1);
        if (t.empty()) fail();
        for (char c : t)
            if (!std::isdigit(static_cast<unsigned char>(c))) fail();
        while (t.size() > 1 && t.front() == '0') t.remove_prefix(1);
        BigInt v{std::string(t)};
        return neg ? BigInt(-v) : v;
    };
    if (text.empty()) fail();
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        const BigInt num = parse_int(text.substr(0, slash));
        const BigInt den = parse_int(text.substr(slash + 1));
        if (den == 0) fail();
        return Rational{num, den};
    }
    // decimal: [sign] digits [. digits] [e[sign]digits]
    std::string_view s = text;
    bool neg = false;
    if (s.starts_with('-')) { neg = true; s.remove_prefix(1); }
    else if (s.starts_with('+')) s.remove_prefix(1);
    std::string digits;
    long frac_len = 0, exponent = 0;
    std::size_t i = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) digits += s[i++];
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
            digits += s[i++];
            ++frac_len;
        }
    }
    if (digits.empty()) fail();
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        ++i;
        bool eneg = false;
        if (i < s.size() && (s[i] == '-' || s[i] == '+')) eneg = (s[i++] == '-');
        std::string e;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) e += s[i++];
        if (e.empty() || e.size() > 4) fail(); // keeps the shifted value small
        exponent = std::stol(e) * (eneg ? -1 : 1);
    }
    if (i != s.size()) fail();
    Rational value{parse_int(digits)};
    long shift = exponent - frac_len;
    BigInt pow10 = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(shift < 0 ? -shift : shift));
    if (shift < 0) value /= Rational(pow10);
    else value *= Rational(pow10);
    return neg ? Rational(-value) : value;
}

template <ScalarType S>
S scalar_from_string(std::string_view text);

template <>
inline Rational scalar_from_string<Rational>(std::string_view text) {
    return parse_rational(text);
}

template <>
inline double scalar_from_string<double>(std::string_view text) {
    // accept the rational forms too, so float mode can read exact files
    if (text.find('/') != std::string_view::npos)
        return to_double(parse_rational(text));
    std::string owned(text);
    char* end = nullptr;
    double v = std::strtod(owned.c_str(), &end);
    if (end != owned.c_str() + owned.size() || owned.empty() || !std::isfinite(v))
        throw ParseError("not a number: '" + owned + "'");
    return v;
}

template <ScalarType S>
S scalar_from_rational(const Rational& r) {
    if constexpr (is_exact_scalar_v<S>) return r;
    else return to_double(r);
}

inline bool scalar_finite(double x) { return std::isfinite(x); }
inline bool scalar_finite(const Rational&) { return true; }

/// -0.0 folds to +0.0 so exact payload equality and ordering behave.
inline double normalize_real(double x) { return x == 0.0 ? 0.0 : x; }
inline const Rational& normalize_real(const Rational& x) { return x; }

} // namespace blip
