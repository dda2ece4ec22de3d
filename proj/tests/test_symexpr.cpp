#include <doctest.h>

#include <random>

#include "cforge/errors.hpp"
#include "cforge/linear_solve.hpp"
#include "cforge/parse.hpp"
#include "support.hpp"

using namespace cforge;
using testsupport::circle_table;
using testsupport::eval_exact;
using testsupport::random_poly;

namespace {

Expr P(const std::string& s, const VarTable& t) { return parse_expr(s, t); }

const char* kCircleLagrangian = "(1/2)*m*(v1^2+v2^2) - (1/2)*q3*(q1^2+q2^2-r^2)";

}  // namespace

TEST_CASE("parse builds the normalized circle Lagrangian") {
    auto t = circle_table();
    Expr L = P(kCircleLagrangian, t);
    // Independent oracle: evaluate at a rational point by hand.
    std::map<Var, Rational> pt{{Var::q(0), Rational(2)},        {Var::q(1), Rational(-1)},
                               {Var::q(2), make_rational(3, 2)}, {Var::v(0), Rational(5)},
                               {Var::v(1), Rational(7)},         {Var::param(0), Rational(3)},
                               {Var::param(1), Rational(2)}};
    Rational m = 3, r = 2;
    Rational hand = Rational(1, 2) * m * (25 + 49) - Rational(1, 2) * make_rational(3, 2) * (4 + 1 - r * r);
    CHECK(eval_exact(L, pt) == hand);
    CHECK(L.size() == 5);
    CHECK(P("0", t).is_zero());
    CHECK(P("q1^2+q2^2-q2^2", t) == P("q1^2", t));
}

TEST_CASE("printing re-parses to the same expression") {
    auto t = circle_table();
    for (const char* s : {kCircleLagrangian, "-(1/2)*m^-1*p1^2 + 3", "r^(1/2)*q1 - r^(-3/2)", "0", "-7/3",
                          "(q1+q2)^3*m/r^2"}) {
        Expr e = P(s, t);
        CHECK(P(to_string(e, t), t) == e);
    }
}

TEST_CASE("parse errors carry offsets and token names") {
    auto t = circle_table();
    try {
        P("q1 + zeta", t);
        FAIL("expected unknown identifier");
    } catch (const UnknownIdentifier& e) {
        CHECK(e.token() == "zeta");
        CHECK(e.offset() == 5);
    }
    try {
        P("q1 + * q2", t);
        FAIL("expected syntax error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 5);
    }
    CHECK_THROWS_AS(P("(q1", t), ParseError);
    CHECK_THROWS_AS(P("q1/(q1+q2)", t), ParseError);
    CHECK_THROWS_AS(P("q1^(1/2)", t), ParseError);
    CHECK_THROWS_AS(P("1.5", t), ParseError);
    CHECK_NOTHROW(P("m^(1/2)*r^-1", t));
}

TEST_CASE("differentiate") {
    auto t = circle_table();
    Expr L = P(kCircleLagrangian, t);
    CHECK(differentiate(L, Var::v(0)) == P("m*v1", t));
    CHECK(differentiate(L, Var::q(2)) == P("-(1/2)*(q1^2+q2^2-r^2)", t));
    CHECK(differentiate(P("q1", t), Var::p(0)).is_zero());
    CHECK(differentiate(P("r^(1/2)*q1", t), Var::param(1)) == P("(1/2)*r^(-1/2)*q1", t));
}

TEST_CASE("differentiate applies declared parameter dependence") {
    VarTable t;
    t.add_param("k1");
    t.add_param("w", true);
    DerivativeRules rules;
    rules[Var::param(1)] = {{Var::param(0), P("k1*w^-1", t)}};
    // d/dk1 of w^3 = 3 w^2 * k1/w
    CHECK(differentiate(P("w^3", t), Var::param(0), &rules) == P("3*k1*w", t));
}

TEST_CASE("substitute performs the Legendre reinsertion") {
    auto t = circle_table();
    Expr L = P(kCircleLagrangian, t);
    Expr pv = P("p1*v1 + p2*v2 + p3*v3", t) - L;
    std::map<Var, Expr> b{{Var::v(0), P("p1/m", t)}, {Var::v(1), P("p2/m", t)}};
    Expr H = substitute(pv, b);
    // v3 survives multiplied by p3, exactly as the unreduced formula says.
    CHECK(H == P("(1/(2*m))*(p1^2+p2^2) + (1/2)*q3*(q1^2+q2^2-r^2) + p3*v3", t));
    CHECK(substitute(Expr(), b).is_zero());
    CHECK(substitute(L, {{Var::v(0), Expr::var(Var::v(0))}}) == L);
}

TEST_CASE("normalization is a ring homomorphism on random polynomials") {
    auto t = circle_table();
    std::mt19937_64 rng(7);
    std::vector<Var> vars{Var::q(0), Var::q(1), Var::q(2), Var::p(0), Var::p(2), Var::param(0)};
    for (int i = 0; i < 200; ++i) {
        Expr a = random_poly(rng, vars), b = random_poly(rng, vars), c = random_poly(rng, vars);
        CHECK(a + b == b + a);
        CHECK(a * (b + c) == a * b + a * c);
        CHECK((a * b) * c == a * (b * c));
        Expr fg = a * b;
        Expr leibniz = differentiate(fg, Var::q(0)) - differentiate(a, Var::q(0)) * b - a * differentiate(b, Var::q(0));
        CHECK(leibniz.is_zero());
        CHECK(P(to_string(a, t), t) == a);
    }
}

TEST_CASE("monomial order is graded lexicographic with parameters last") {
    auto t = circle_table();
    Expr e = P("r^5 + q3 + q1*q2 + p1^2 + q1^2", t);
    std::vector<std::string> lead;
    for (const auto& term : e.terms()) lead.push_back(to_string(term.mono, t));
    CHECK(lead == std::vector<std::string>{"q1^2", "q1*q2", "p1^2", "q3", "r^5"});
}

TEST_CASE("primitive part clears parameter denominators and content") {
    auto t = circle_table();
    CHECK(primitive_part(P("q3 - m^-1*r^-2*(p1^2+p2^2)", t)) == P("p1^2+p2^2-m*r^2*q3", t));
    CHECK(primitive_part(P("(1/2)*(q1^2+q2^2-r^2)", t)) == P("q1^2+q2^2-r^2", t));
    CHECK(primitive_part(P("-6*q1*m", t)) == P("q1", t));
}

TEST_CASE("solve_linear_system on momentum maps") {
    auto t = circle_table();
    std::vector<Var> v{Var::v(0), Var::v(1), Var::v(2)};
    std::vector<Expr> eqs{P("p1 - m*v1", t), P("p2 - m*v2", t), P("p3", t)};
    auto sol = solve_linear_system(eqs, v, t);
    CHECK(sol.particular.at(Var::v(0)) == P("p1/m", t));
    CHECK(sol.particular.at(Var::v(1)) == P("p2/m", t));
    CHECK(sol.null_space.size() == 1);
    CHECK(sol.null_space[0].at(Var::v(2)) == Expr(1));
    REQUIRE(sol.residuals.size() == 1);
    CHECK(sol.residuals[0] == P("p3", t));
    for (std::size_t i = 0; i < 2; ++i) CHECK(substitute(eqs[i], sol.particular).is_zero());

    VarTable g;
    g.add_pair("q1");
    g.add_pair("q2");
    g.add_param("m", true);
    std::vector<Var> gv{Var::v(0), Var::v(1)};
    std::vector<Expr> geqs{P("p1 - m*(v1+v2)", g), P("p2 - m*(v1+v2)", g)};
    auto gs = solve_linear_system(geqs, gv, g);
    CHECK(gs.null_space.size() == 1);
    REQUIRE(gs.residuals.size() == 1);
    CHECK(primitive_part(gs.residuals[0]) == P("p1 - p2", g));

    auto empty = solve_linear_system({}, gv, g);
    CHECK(empty.free_unknowns.size() == 2);
    CHECK(empty.null_space.size() == 2);
}

TEST_CASE("solve_linear_system reports inconsistency and non-affine input") {
    auto t = circle_table();
    std::vector<Var> v{Var::v(0)};
    std::vector<Expr> bad{P("v1 - 1", t), P("v1 - 2", t)};
    CHECK_THROWS_AS(solve_linear_system(bad, v, t), InconsistentSystem);
    std::vector<Expr> quad{P("v1^2", t)};
    CHECK_THROWS_AS(solve_linear_system(quad, v, t), NotAffine);
    std::vector<Expr> nonunit{P("q1*v1 - 1", t)};
    CHECK_THROWS_AS(solve_linear_system(nonunit, v, t), NonUnitPivot);
}
