#include <doctest.h>

#include <random>

#include "cforge/analysis.hpp"
#include "cforge/errors.hpp"
#include "cforge/parse.hpp"
#include "support.hpp"

using namespace cforge;
using testsupport::data_model;
using testsupport::random_poly;

namespace {

Expr P(const std::string& s, const VarTable& t) { return parse_expr(s, t); }

// True if a == c * b for a nonzero parameter-only factor c.
bool proportional(const Expr& a, const Expr& b) {
    if (a.is_zero() || b.is_zero()) return a.is_zero() && b.is_zero();
    Monomial shift = a.leading().mono / b.leading().mono;
    if (Expr::term(shift, Rational(1)).has_phase_vars()) return false;
    return a == b.times(shift, a.leading().coef / b.leading().coef);
}

Expr pfaffian4(const ExprMatrix& d) { return d[0][1] * d[2][3] - d[0][2] * d[1][3] + d[0][3] * d[1][2]; }

// Sum of the weak brackets of every constraint with the extended total Hamiltonian.
void check_conservation(const ConstraintAnalysis& a) {
    const auto& ms = a.multipliers;
    std::vector<Expr> coef(a.constraints.size());
    for (const auto& [u, v] : ms.particular) coef[u.index] += v;
    for (std::size_t f = 0; f < ms.free.size(); ++f)
        for (const auto& [u, v] : ms.null_space[f]) coef[u.index] += v * Expr::var(ms.free[f]);
    Expr H = a.model.h0;
    for (std::size_t i = 0; i < coef.size(); ++i) H += coef[i] * a.constraints[i].expr;
    for (const auto& c : a.constraints) CHECK(a.reduce(poisson_bracket(c.expr, H, a.model)).is_zero());
    for (const auto& c : a.constraints) CHECK(a.reduce(poisson_bracket(c.expr, a.h_total, a.model)).is_zero());
}

}  // namespace

TEST_CASE("circle particle: consistency chain and second-class block") {
    auto a = analyze(data_model("circle_particle"));
    const auto& t = a.table();
    REQUIRE(a.status.converged);
    CHECK(a.status.generations == 4);
    REQUIRE(a.constraints.size() == 4);
    std::vector<Expr> textbook{P("p3", t), P("(1/2)*(q1^2+q2^2-r^2)", t), P("p1*q1+p2*q2", t),
                            P("q3 - (p1^2+p2^2)/(m*r^2)", t)};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(proportional(a.constraints[i].expr, textbook[i]));
        CHECK(a.constraints[i].generation == static_cast<int>(i));
        CHECK(a.constraints[i].cls == ConstraintClass::Second);
        if (i > 0) CHECK(*a.constraints[i].parent == i - 1);
    }
    CHECK(a.constraints[0].provenance() == "primary");
    CHECK(a.constraints[3].provenance() == "secondary(3)");

    REQUIRE(a.primary_multipliers.entries.size() == 1);
    CHECK(a.primary_multipliers.entries[0].status == MultiplierStatus::Fixed);
    CHECK(a.primary_multipliers.entries[0].value.is_zero());
    for (const auto& e : a.multipliers.entries) {
        CHECK(e.status == MultiplierStatus::Fixed);
        CHECK(e.value.is_zero());
    }
    CHECK(a.first_class.empty());
    CHECK(a.second_class.size() == 4);

    // Oracle: brackets of the textbook-normalized constraints, reduced on the surface.
    ExprMatrix d(4, std::vector<Expr>(4));
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) d[i][j] = a.reduce(poisson_bracket(textbook[i], textbook[j], a.model));
    Expr pf = pfaffian4(d);
    CHECK(pf * pf == P("r^4", t));
    Expr pfe = pfaffian4(a.delta_weak);
    CHECK(pfe * pfe == P("4*m^2*r^8", t));
    check_conservation(a);
}

TEST_CASE("circle particle: Hamiltonian decomposes into the energy plus constraints") {
    auto a = analyze(data_model("circle_particle"));
    const auto& t = a.table();
    // H = (1/2) r^2 q3 + sum u_a psi_a with u = (0, q3, 0, -(1/2) r^2) on the textbook constraints.
    Expr rebuilt = P("(1/2)*r^2*q3 + q3*(1/2)*(q1^2+q2^2-r^2) - (1/2)*r^2*(q3 - (p1^2+p2^2)/(m*r^2))", t);
    CHECK(rebuilt == a.model.h0);
    auto d = decompose_in_constraints(a.model.h0, a);
    CHECK(d.remainder == P("(1/2)*r^2*q3", t));
    Expr sum = d.remainder;
    for (std::size_t i = 0; i < d.quotients.size(); ++i) sum += d.quotients[i] * a.constraints[i].expr;
    CHECK(sum == a.model.h0);
    CHECK(d.quotients[0].is_zero());
    CHECK(d.quotients[2].is_zero());
    CHECK(a.reduce(d.quotients[1] * a.constraints[1].expr - P("q3*(1/2)*(q1^2+q2^2-r^2)", t)).is_zero());
}

TEST_CASE("gauge pair: one first-class constraint and a free multiplier") {
    auto a = analyze(data_model("gauge_pair"));
    const auto& t = a.table();
    REQUIRE(a.status.converged);
    CHECK(a.status.generations == 1);
    REQUIRE(a.constraints.size() == 1);
    CHECK(a.constraints[0].expr == P("p1 - p2", t));
    CHECK(a.constraints[0].cls == ConstraintClass::First);
    REQUIRE(a.first_class.size() == 1);
    CHECK(a.primary_multipliers.entries[0].status == MultiplierStatus::Free);
    CHECK(a.algebra.entries.empty());
    CHECK_FALSE(a.block.has_value());

    Expr u = Expr::var(Var::u(0));
    std::map<std::size_t, Expr> gp{{0, u}};
    CHECK(gauge_transform(P("q1", t), gp, a) == u);
    CHECK(gauge_transform(P("q2", t), gp, a) == -u);
    CHECK(gauge_transform(P("p1", t), gp, a).is_zero());
    CHECK(gauge_transform(P("p2", t), gp, a).is_zero());

    Expr Q = P("q1+q2", t), Pm = P("p1", t);
    CHECK(check_observable(Q, a).is_observable);
    CHECK(check_observable(Pm, a).is_observable);
    CHECK(a.weak_bracket(Q, Pm) == Expr(1));
    auto qr = check_observable(P("q1", t), a);
    CHECK_FALSE(qr.is_observable);
    REQUIRE_FALSE(qr.offending.empty());
    CHECK(qr.offending[0].first == "psi1");
    check_conservation(a);
}

TEST_CASE("gauge pair: observable brackets ignore constraint shifts") {
    auto a = analyze(data_model("gauge_pair"));
    std::vector<Var> vars{Var::q(0), Var::q(1), Var::p(0), Var::p(1)};
    std::mt19937_64 rng(5);
    const Expr& psi = a.constraints[0].expr;
    for (const auto& G : {P("q1+q2", a.table()), P("p1", a.table())})
        for (int trial = 0; trial < 20; ++trial) {
            Expr F1 = random_poly(rng, vars, 3, 2);
            Expr F2 = F1 + random_poly(rng, vars, 2, 2) * psi;
            CHECK(a.weak_bracket(F1 - F2, G).is_zero());
        }
}

TEST_CASE("relativistic particle: world-line charges") {
    auto a = analyze(data_model("rel_particle"));
    const auto& t = a.table();
    REQUIRE(a.status.converged);
    CHECK(a.status.generations == 1);
    REQUIRE(a.first_class.size() == 1);
    CHECK(a.primary_multipliers.entries[0].status == MultiplierStatus::Free);
    CHECK(a.reduce(a.model.h0).is_zero());

    Expr u = Expr::var(Var::u(0));
    std::map<std::size_t, Expr> gp{{0, u}};
    // q^mu = eta^{mu nu} q_nu: the upper-index momentum carries the metric sign.
    CHECK(gauge_transform(P("q0", t), gp, a) == P("-p0", t) * u);
    for (const char* i : {"1", "2", "3"}) {
        std::string qi = std::string("q") + i, pi = std::string("p") + i;
        CHECK(gauge_transform(P(qi, t), gp, a) == P(pi, t) * u);
        CHECK(gauge_transform(P(pi, t), gp, a).is_zero());
        for (const char* tt : {"0", "1", "(-2)"}) {
            // With lower-index p0 the upper-index energy is -p0.
            Expr Q = P(qi + " - (" + tt + " - q0)*" + pi + "/p0", t);
            auto r = check_observable(Q, a);
            CHECK(r.is_observable);
            CHECK(r.is_conserved_charge);
        }
        CHECK_FALSE(check_observable(P(qi, t), a).is_observable);
    }
    CHECK_FALSE(check_observable(P("q0", t), a).is_observable);
    check_conservation(a);
}

TEST_CASE("inconsistent model reports a witness") {
    auto m = load_model("model bad\ncoords q\ndirect\nh0 q\nprimary c = pq\n");
    auto a = analyze(m);
    CHECK_FALSE(a.status.converged);
    CHECK(a.status.inconsistent);
    CHECK_FALSE(a.status.witness.empty());
}

TEST_CASE("generation guard stops a long chain") {
    ConsistencyOptions opts;
    opts.max_generations = 2;
    auto a = run_consistency(data_model("circle_particle"), opts);
    CHECK_FALSE(a.status.converged);
    CHECK_FALSE(a.status.inconsistent);
    CHECK(a.status.diagnostic.find("no convergence") != std::string::npos);
    CHECK_THROWS_AS(classify_constraints(a), AnalysisError);
}

TEST_CASE("non-constant rank is reported") {
    auto m = load_model("model rank\ncoords x y\ndirect\nh0 0\nprimary a = px\nprimary b = x*y\n");
    auto a = analyze(m);
    CHECK_FALSE(a.status.converged);
    CHECK(a.status.diagnostic.find("rank instability") != std::string::npos);
}

TEST_CASE("mixed first and second class constraints") {
    // psi1 = p1 and psi2 = q1 form a second-class pair, psi3 = p2 is first class.
    auto m = load_model("model mixed\ncoords q1 q2\ndirect\nh0 (1/2)*p1^2\nprimary a = p1\nprimary b = q1\nprimary c = p2\n");
    auto a = analyze(m);
    REQUIRE(a.status.converged);
    CHECK(a.second_class == std::vector<std::size_t>{0, 1});
    REQUIRE(a.first_class.size() == 1);
    CHECK(a.first_class[0].expr == P("p2", a.table()));
    REQUIRE(a.block.has_value());
    CHECK(a.block->chi.size() % 2 == 0);
    CHECK(a.multipliers.entries[0].status == MultiplierStatus::Fixed);
    CHECK(a.multipliers.entries[2].status == MultiplierStatus::Free);
    // q2 is not gauge invariant; q1 brackets vanish through the Dirac bracket.
    CHECK_FALSE(check_observable(P("q2", a.table()), a).is_observable);
    CHECK(check_observable(P("q1", a.table()), a).is_observable);
    check_conservation(a);
}

TEST_CASE("first-class recombination exposes the null direction") {
    // {a, b} = 1 and {a, c} = 1: the null vector of Delta is b - c.
    auto m = load_model("model recomb\ncoords x y z\ndirect\nh0 0\nprimary a = px\nprimary b = x + y\nprimary c = x + z\n");
    auto a = analyze(m);
    REQUIRE(a.status.converged);
    REQUIRE(a.first_class.size() == 1);
    const auto& g = a.first_class[0];
    CHECK(proportional(g.expr, P("y - z", a.table())));
    Expr rebuilt;
    for (const auto& [k, coef] : g.combination) rebuilt += coef * a.constraints[k].expr;
    CHECK(rebuilt == g.expr);
    for (const auto& c : a.constraints) CHECK(a.reduce(poisson_bracket(g.expr, c.expr, a.model)).is_zero());
    CHECK(a.second_class.size() == 2);
}

TEST_CASE("non-abelian first-class algebra") {
    // Angular momentum components close on each other with constant structure constants.
    auto m = load_model(
        "model rotor\ncoords x y z\ndirect\nh0 0\n"
        "primary L1 = y*pz - z*py\nprimary L2 = z*px - x*pz\nprimary L3 = x*py - y*px\n");
    auto a = analyze(m);
    REQUIRE(a.status.converged);
    REQUIRE(a.first_class.size() == 3);
    CHECK(a.algebra.non_constant == 0);
    // {L1, L2} = L3 and cyclic: three entries, coefficient +-1.
    CHECK(a.algebra.entries.size() == 3);
    for (const auto& e : a.algebra.entries) {
        Expr lhs = poisson_bracket(a.first_class[e.a].expr, a.first_class[e.b].expr, a.model);
        CHECK(lhs == e.f * a.first_class[e.c].expr);
    }
}

TEST_CASE("Dirac nullity and first-class closure on random inputs") {
    auto circle = analyze(data_model("circle_particle"));
    std::vector<Var> vars{Var::q(0), Var::q(1), Var::q(2), Var::p(0), Var::p(1), Var::p(2)};
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        Expr F = random_poly(rng, vars, 3, 3);
        for (auto i : circle.second_class) CHECK(circle.weak_bracket(F, circle.constraints[i].expr).is_zero());
    }
}
