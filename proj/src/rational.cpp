#include "cforge/rational.hpp"

#include <numeric>
#include <stdexcept>

namespace cforge {

Rational make_rational(long num, long den) {
    Rational r(num, den);
    r.canonicalize();
    return r;
}

std::string to_string(const Rational& r) { return r.get_str(); }

Rational parse_rational(const std::string& text) {
    Rational r;
    if (text.empty() || r.set_str(text, 10) != 0) throw std::invalid_argument("not a rational number: '" + text + "'");
    if (r.get_den() == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
    r.canonicalize();
    return r;
}

double to_double(const Rational& r) { return r.get_d(); }

Exponent::Exponent(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (d == 0) throw std::invalid_argument("zero exponent denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
}

Rational Exponent::to_rational() const { return make_rational(static_cast<long>(num), static_cast<long>(den)); }

Exponent operator+(Exponent a, Exponent b) {
    if (a.den == 1 && b.den == 1) return Exponent(a.num + b.num);
    return Exponent(a.num * b.den + b.num * a.den, a.den * b.den);
}

Exponent operator-(Exponent a, Exponent b) { return a + (-b); }

Exponent operator*(Exponent a, Exponent b) { return Exponent(a.num * b.num, a.den * b.den); }

std::strong_ordering operator<=>(const Exponent& a, const Exponent& b) {
    if (a.den == b.den) return a.num <=> b.num;
    return (a.num * b.den) <=> (b.num * a.den);
}

std::string to_string(const Exponent& e) {
    if (e.den == 1) return std::to_string(e.num);
    return std::to_string(e.num) + "/" + std::to_string(e.den);
}

}  // namespace cforge
