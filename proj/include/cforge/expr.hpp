#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cforge/rational.hpp"
#include "cforge/var_table.hpp"

namespace cforge {

struct Factor {
    Var var;
    Exponent exp;
    friend bool operator==(const Factor&, const Factor&) = default;
};

// Product of variable powers, factors sorted by variable, no zero exponents.
class Monomial {
public:
    Monomial() = default;
    static Monomial of(Var v, Exponent e = 1);
    static Monomial from_factors(std::vector<Factor> factors);

    const std::vector<Factor>& factors() const { return factors_; }
    bool is_one() const { return factors_.empty(); }
    std::int64_t phase_degree() const { return phase_degree_; }
    Exponent param_degree() const { return param_degree_; }
    Exponent exponent(Var v) const;
    bool has_negative_exponent() const;
    bool has_phase_vars() const;

    Monomial operator*(const Monomial& o) const;
    Monomial operator/(const Monomial& o) const;
    Monomial pow(Exponent e) const;
    Monomial inverse() const { return pow(Exponent(-1)); }
    Monomial without(Var v) const;
    // True when o / *this has only non-negative exponents.
    bool divides(const Monomial& o) const;
    Monomial lcm(const Monomial& o) const;
    bool coprime(const Monomial& o) const;

    friend bool operator==(const Monomial& a, const Monomial& b) { return a.factors_ == b.factors_; }
    std::size_t hash() const;

private:
    void recompute();

    std::vector<Factor> factors_;
    std::int64_t phase_degree_ = 0;
    Exponent param_degree_;
};

// Graded lexicographic order on the phase block, then on the parameter block.
// Returns a positive value when a leads b.
int compare_monomials(const Monomial& a, const Monomial& b);

struct MonomialLeads {
    bool operator()(const Monomial& a, const Monomial& b) const { return compare_monomials(a, b) > 0; }
};

struct Term {
    Monomial mono;
    Rational coef;
};

// Immutable normalized polynomial: terms sorted leading-first, coefficients
// nonzero, monomials distinct.
class Expr {
public:
    Expr();
    Expr(const Rational& c);
    Expr(long c) : Expr(Rational(c)) {}
    Expr(int c) : Expr(Rational(c)) {}

    static Expr var(Var v);
    static Expr term(Monomial m, Rational c);
    static Expr from_terms(std::vector<Term> terms);
    // Terms must already be sorted leading-first, distinct and nonzero.
    static Expr from_sorted(std::vector<Term> terms);

    const std::vector<Term>& terms() const { return *terms_; }
    std::size_t size() const { return terms_->size(); }
    bool is_zero() const { return terms_->empty(); }
    bool is_number() const;
    std::optional<Rational> as_number() const;
    // Single term with a nonzero coefficient.
    bool is_monomial() const { return terms_->size() == 1; }
    const Term& leading() const { return terms_->front(); }

    bool depends_on(Var v) const;
    bool has_phase_vars() const;
    std::vector<Var> variables() const;

    Expr operator-() const;
    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    Expr& operator+=(const Expr& o) { return *this = *this + o; }
    Expr& operator-=(const Expr& o) { return *this = *this - o; }
    Expr& operator*=(const Expr& o) { return *this = *this * o; }

    Expr scaled(const Rational& c) const;
    Expr times(const Monomial& m, const Rational& c) const;
    Expr pow(unsigned n) const;
    // Inverse of a single-term expression; throws otherwise.
    Expr inverse_monomial() const;

    friend bool operator==(const Expr& a, const Expr& b);
    friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }
    std::size_t hash() const;

private:
    explicit Expr(std::shared_ptr<const std::vector<Term>> t) : terms_(std::move(t)) {}
    std::shared_ptr<const std::vector<Term>> terms_;
};

// dP/dx for parameters that depend on other symbols (e.g. omega on k_i).
using DerivativeRules = std::map<Var, std::vector<std::pair<Var, Expr>>>;

Expr differentiate(const Expr& e, Var x, const DerivativeRules* rules = nullptr);
// Simultaneous substitution.  A negative power of a bound variable requires a
// single-term binding.
Expr substitute(const Expr& e, const std::map<Var, Expr>& bindings);

std::string to_string(const Expr& e, const VarTable& table);
std::string to_string(const Monomial& m, const VarTable& table);

// Divides out rational content and the common parameter monomial, clears
// parameter denominators, and makes the leading coefficient positive.
Expr primitive_part(const Expr& e);

// Unit in the sense of elimination: nonzero number times invertible symbols.
bool is_unit(const Expr& e, const VarTable& table);

}  // namespace cforge
