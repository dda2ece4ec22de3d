#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <string>

namespace cforge {

using Rational = mpq_class;

Rational make_rational(long num, long den = 1);
std::string to_string(const Rational& r);
// Accepts "a" or "a/b" with an optional leading sign.
Rational parse_rational(const std::string& text);
double to_double(const Rational& r);

// Exponent of a single variable factor.  Integral for every variable kind
// except positive parameters, which may carry small fractions.
struct Exponent {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Exponent() = default;
    Exponent(std::int64_t n) : num(n), den(1) {}
    Exponent(std::int64_t n, std::int64_t d);

    bool is_zero() const { return num == 0; }
    bool is_integer() const { return den == 1; }
    bool is_negative() const { return num < 0; }
    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
    Rational to_rational() const;

    friend Exponent operator+(Exponent a, Exponent b);
    friend Exponent operator-(Exponent a, Exponent b);
    friend Exponent operator*(Exponent a, Exponent b);
    Exponent operator-() const { return Exponent(-num, den); }
    friend bool operator==(const Exponent&, const Exponent&) = default;
    friend std::strong_ordering operator<=>(const Exponent& a, const Exponent& b);
};

std::string to_string(const Exponent& e);

}  // namespace cforge
