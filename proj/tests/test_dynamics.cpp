#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cforge/analysis.hpp"
#include "cforge/catalog.hpp"
#include "cforge/dynamics.hpp"
#include "cforge/errors.hpp"
#include "cforge/parse.hpp"
#include "support.hpp"

using namespace cforge;

namespace {

ConstraintAnalysis analyzed(const std::string& name) { return analyze(load_model(builtin(name).source)); }

NumericState projected_default(const ConstraintAnalysis& a, const std::string& name) {
    return project_to_surface(NumericState{0, builtin(name).dynamics.initial}, a).state;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double spread(const std::vector<double>& s) {
    auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    return *hi - *lo;
}

// Circle constraints in their textbook form, written out independently.
double circle_residual(const std::vector<double>& x) {
    double q1 = x[0], p1 = x[1], q2 = x[2], p2 = x[3], q3 = x[4], p3 = x[5];
    double r = std::max({std::abs(p3), std::abs(0.5 * (q1 * q1 + q2 * q2 - 1)), std::abs(p1 * q1 + p2 * q2),
                         std::abs(q3 - (p1 * p1 + p2 * p2))});
    return r;
}

}  // namespace

TEST_CASE("profiles and schedules parse") {
    CHECK(parse_profile("zero")(3.0) == 0.0);
    CHECK(parse_profile("constant(1/2)")(7.0) == doctest::Approx(0.5));
    CHECK(parse_profile("sin(2,3)")(0.5) == doctest::Approx(2 * std::sin(1.5)));
    auto step = parse_profile("step(1,0,2)");
    CHECK(step(0.999) == 0.0);
    CHECK(step(1.0) == 2.0);
    CHECK_THROWS_AS(parse_profile("cosine(1,2)"), Error);
    CHECK_THROWS_AS(parse_profile("sin(1)"), Error);

    auto s = USchedule::parse("u=sin(1,1);u2=step(1,0,2)");
    auto r = s.resolve({"u1", "u2"});
    CHECK(r[0].kind == Profile::Sinusoid);
    CHECK(r[1].kind == Profile::Step);
    CHECK_THROWS_AS(USchedule::parse("u7=zero").resolve({"u1"}), Error);
    CHECK_THROWS_AS(USchedule{}.resolve({"u1"}), Error);
    CHECK(USchedule{}.resolve({}).empty());
    CHECK(split_top_level("u=zero,u=sin(1,1)") == std::vector<std::string>{"u=zero", "u=sin(1,1)"});
    CHECK(USchedule::parse(s.to_string()).to_string() == s.to_string());
}

TEST_CASE("numeric chart expressions") {
    auto t = testsupport::circle_table();
    std::vector<double> x{0.6, -0.3, 0.8, 0.4, 1.0, 0.0};
    CHECK(NumericExpr::parse("atan2(q2, q1)", t)(x) == doctest::Approx(std::atan2(0.8, 0.6)));
    CHECK(NumericExpr::parse("sqrt(p1^2 + p2^2)", t)(x) == doctest::Approx(0.5));
    CHECK(NumericExpr::parse("sign(-p1) * abs(p2) / m", t)(x) == doctest::Approx(0.4));
    CHECK(NumericExpr::parse("1.5*r - 2^3", t)(x) == doctest::Approx(-6.5));
    CHECK_THROWS_AS(NumericExpr::parse("zeta(q1)", t), ParseError);
    CHECK_THROWS_AS(NumericExpr::parse("q1 + w", t), UnknownIdentifier);
    CHECK(CompiledPoly(parse_expr("q1^2*p2 - m^(-1)*q2^3", t), t)(x) == doctest::Approx(0.36 * 0.4 - 0.512));
}

TEST_CASE("projection onto the constraint surface") {
    auto a = analyzed("circle_particle");
    auto on = project_to_surface(NumericState{0, {1, 0, 0, 1, 1, 0}}, a);
    CHECK(on.iterations == 0);
    CHECK(on.state.x == std::vector<double>{1, 0, 0, 1, 1, 0});

    auto off = project_to_surface(NumericState{0, {1.1, 0, 0, 1, 1, 0}}, a);
    CHECK(off.iterations > 0);
    CHECK(circle_residual(off.state.x) < 1e-12);
    CHECK(off.residual < 1e-12);

    DynamicsOptions tight;
    tight.max_project_iterations = 0;
    CHECK_THROWS_AS(project_to_surface(NumericState{0, {1.1, 0, 0, 1, 1, 0}}, a, tight), ProjectionFailure);
    CHECK_THROWS_AS(project_to_surface(NumericState{0, {0, 0, 0, 0, 1, 0}}, a), ProjectionFailure);

    auto free = analyzed("free_particle");
    auto id = project_to_surface(NumericState{0, {0.1, 0.7}}, free);
    CHECK(id.iterations == 0);
    CHECK(id.state.x == std::vector<double>{0.1, 0.7});
}

TEST_CASE("circle particle follows the analytic orbit") {
    auto a = analyzed("circle_particle");
    const auto& d = builtin("circle_particle").dynamics;
    DynamicsOptions opt;
    opt.dt = d.dt;
    opt.t_end = d.t_end;
    auto traj = integrate(a, NumericState{0, d.initial}, USchedule{}, opt);
    double worst = 0;
    for (const auto& s : traj.states) {
        worst = std::max(worst, std::abs(s.x[0] - std::cos(s.t)));
        worst = std::max(worst, std::abs(s.x[2] - std::sin(s.t)));
    }
    CHECK(worst < 1e-6);
    CHECK(traj.max_drift < 1e-8);
    CHECK_FALSE(traj.drift_alarm);
    CHECK(std::abs(traj.states.back().t - 2 * M_PI) < 1e-3);
    CHECK(spread(traj.series("pi")) < 1e-6);
    CHECK(spread(traj.series("pi2")) < 1e-6);

    ConstrainedFlow flow(a);
    NumericObservable phi = compile_observable("phi", std::string("atan2(q2, q1)"), a.table());
    NumericObservable pi = compile_observable("pi", std::string("sqrt(p1^2 + p2^2)"), a.table());
    for (std::size_t i = 0; i < traj.states.size(); i += 700) {
        CAPTURE(i);
        CHECK(numeric_dirac_bracket(phi, pi, flow, a.second_class, traj.states[i].x) == doctest::Approx(1).epsilon(1e-6));
        CHECK(numeric_dirac_bracket(pi, phi, flow, a.second_class, traj.states[i].x) == doctest::Approx(-1).epsilon(1e-6));
    }
    auto constant = evaluate_observable(traj, Expr(3), a.table());
    CHECK(spread(constant) == 0.0);
    CHECK(constant.front() == 3.0);
}

TEST_CASE("RK4 drift order on the circle") {
    auto a = analyzed("circle_particle");
    auto drift_at = [&](double dt) {
        DynamicsOptions opt;
        opt.dt = dt;
        opt.t_end = 2 * M_PI;
        return integrate(a, NumericState{0, {1, 0, 0, 1, 1, 0}}, USchedule{}, opt).max_drift;
    };
    double coarse = drift_at(0.1), fine = drift_at(0.05);
    CAPTURE(coarse);
    CAPTURE(fine);
    CHECK(coarse / fine >= 16 * 0.8);
}

TEST_CASE("optional reprojection keeps the state on the surface") {
    auto a = analyzed("circle_particle");
    DynamicsOptions opt;
    opt.dt = 0.1;
    opt.t_end = 2 * M_PI;
    opt.reproject_every = 5;
    auto traj = integrate(a, NumericState{0, {1, 0, 0, 1, 1, 0}}, USchedule{}, opt);
    CHECK(traj.reprojections == 12);
    CHECK(circle_residual(traj.states.at(60).x) < 1e-12);
    CHECK(circle_residual(traj.states.at(59).x) > 1e-12);
}

TEST_CASE("relativistic particle: zero multiplier freezes the state") {
    auto a = analyzed("rel_particle");
    auto s0 = projected_default(a, "rel_particle");
    DynamicsOptions opt;
    opt.t_end = 3;
    auto traj = integrate(a, s0, USchedule::parse("u=zero"), opt);
    for (const auto& s : traj.states) CHECK(max_abs_diff(s.x, s0.x) == 0.0);
}

TEST_CASE("relativistic particle: oscillating multiplier moves along the world line") {
    auto a = analyzed("rel_particle");
    auto s0 = projected_default(a, "rel_particle");
    DynamicsOptions opt;
    opt.t_end = 6;
    auto traj = integrate(a, s0, USchedule::parse("u=sin(1,1)"), opt);
    // dq0/dt = -u p0 with p0 constant: q0(t) = q0(0) - p0 (1 - cos t).
    double worst = 0;
    for (const auto& s : traj.states)
        worst = std::max(worst, std::abs(s.x[0] - (s0.x[0] - s0.x[1] * (1 - std::cos(s.t)))));
    CHECK(worst < 1e-8);
    auto q0 = traj.coordinate(0);
    bool rises = false, falls = false;
    for (std::size_t i = 1; i < q0.size(); ++i) {
        rises |= q0[i] > q0[i - 1] + 1e-9;
        falls |= q0[i] < q0[i - 1] - 1e-9;
    }
    CHECK(rises);
    CHECK(falls);
    for (const auto& name : traj.observable_names) {
        CAPTURE(name);
        CHECK(spread(traj.series(name)) < 1e-9);
    }
}

TEST_CASE("gauge orbits leave observables invariant") {
    SUBCASE("gauge pair") {
        auto a = analyzed("gauge_pair");
        ConstrainedFlow flow(a);
        auto s0 = projected_default(a, "gauge_pair");
        DynamicsOptions opt;
        opt.t_end = 5;
        opt.dt = 1e-2;
        auto r = gauge_orbit_compare(flow, s0, USchedule::parse("u=zero"), USchedule::parse("u=sin(1,1)"),
                                     model_observables(a), opt);
        for (const auto& d : r.observables) {
            CAPTURE(d.name);
            CHECK(d.max_difference < 1e-6);
        }
        CHECK(max_abs_diff(r.a.coordinate(0), r.b.coordinate(0)) > 0.5);
        auto same = gauge_orbit_compare(flow, s0, USchedule::parse("u=step(1,0,2)"),
                                        USchedule::parse("u=step(1,0,2)"), model_observables(a), opt);
        CHECK(same.max_state_divergence == 0.0);
    }
    SUBCASE("relativistic particle") {
        auto a = analyzed("rel_particle");
        ConstrainedFlow flow(a);
        auto s0 = projected_default(a, "rel_particle");
        DynamicsOptions opt;
        opt.t_end = 3;
        auto r = gauge_orbit_compare(flow, s0, USchedule::parse("u=sin(1,1)"), USchedule::parse("u=step(1,0,2)"),
                                     model_observables(a), opt);
        for (const auto& d : r.observables) {
            CAPTURE(d.name);
            CHECK(d.max_difference < 1e-6);
        }
        CHECK(max_abs_diff(r.a.coordinate(0), r.b.coordinate(0)) > 0.1);
    }
    SUBCASE("relativistic particle in a magnetic field") {
        auto a = analyzed("rel_particle_field");
        ConstrainedFlow flow(a);
        auto s0 = projected_default(a, "rel_particle_field");
        DynamicsOptions opt;
        opt.t_end = 3;
        auto r = gauge_orbit_compare(flow, s0, USchedule::parse("u=zero"), USchedule::parse("u=sin(1,1)"),
                                     model_observables(a), opt);
        for (const auto& d : r.observables) {
            CAPTURE(d.name);
            CHECK(d.max_difference < 1e-6);
        }
        CHECK(r.max_state_divergence > 0.1);
    }
}

TEST_CASE("free particle conserves energy") {
    auto a = analyzed("free_particle");
    DynamicsOptions opt;
    opt.t_end = builtin("free_particle").dynamics.t_end;
    opt.dt = 1e-2;
    auto traj = integrate(a, NumericState{0, {0.1, 0.7}}, USchedule{}, opt);
    auto energy = evaluate_observable(traj, a.model.h0, a.table());
    CHECK(spread(energy) < 1e-8);
    CHECK(traj.states.back().x[0] == doctest::Approx(0.1 + 0.7 * 10).epsilon(1e-10));
}

TEST_CASE("evaluation errors, blow-up and CSV") {
    auto a = analyzed("rel_particle");
    Trajectory traj;
    traj.states = {NumericState{0, {0, 1, 0, 0, 0, 0, 0, 0}}, NumericState{1, {0, 0, 0, 0, 0, 0, 0, 0}}};
    auto t = a.table();
    try {
        evaluate_observable(traj, parse_expr("p0^(-1)", t), t);
        FAIL("expected an evaluation error");
    } catch (const EvaluationError& e) {
        CHECK(e.index() == 1);
    }

    auto blow = load_model("model blow\ncoords x\ndirect\nh0 (1/2)*px^2 - x^4\n");
    auto ab = analyze(blow);
    DynamicsOptions opt;
    opt.dt = 0.01;
    opt.t_end = 50;
    CHECK_THROWS_AS(integrate(ab, NumericState{0, {1, 1}}, USchedule{}, opt), BlowUp);

    auto c = analyzed("circle_particle");
    opt.t_end = 0.02;
    auto small = integrate(c, NumericState{0, {1, 0, 0, 1, 1, 0}}, USchedule{}, opt);
    std::ostringstream csv;
    write_csv(csv, small);
    const std::string text = csv.str();
    std::string header = text.substr(0, text.find('\n'));
    CHECK(header.rfind("t,q1,p1,q2,p2,q3,p3,drift_", 0) == 0);
    CHECK(header.find(",pi2,phi,pi") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}

TEST_CASE("catalog gauge invariance across schedules") {
    for (const auto& entry : shipped_entries()) {
        CAPTURE(entry.name);
        if (entry.golden.second_class != 0 || entry.dynamics.schedules.size() < 2) continue;
        auto a = analyze(load_model(entry.source));
        ConstrainedFlow flow(a);
        auto s0 = project_to_surface(NumericState{0, entry.dynamics.initial}, flow).state;
        DynamicsOptions opt;
        opt.t_end = entry.dynamics.t_end;
        opt.dt = entry.dynamics.dt;
        auto obs = model_observables(a);
        REQUIRE_FALSE(obs.empty());
        const auto& sch = entry.dynamics.schedules;
        for (std::size_t i = 0; i < sch.size(); ++i)
            for (std::size_t j = i + 1; j < sch.size(); ++j) {
                auto r = gauge_orbit_compare(flow, s0, USchedule::parse(sch[i]), USchedule::parse(sch[j]), obs, opt);
                for (const auto& d : r.observables) {
                    CAPTURE(d.name);
                    CHECK(d.max_difference < 1e-5);
                }
                CHECK(r.max_state_divergence > 1e-3);
            }
    }
}
