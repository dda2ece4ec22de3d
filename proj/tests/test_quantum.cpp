#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "cforge/errors.hpp"
#include "cforge/quantum.hpp"

using namespace cforge;

namespace {

Occupation vacuum() { return {}; }

// Brute-force count: every occupation vector with entries <= n_max, filtered by level.
std::uint64_t brute_count(const std::vector<int>& weights, int n_max) {
    std::uint64_t count = 0;
    std::vector<int> n(weights.size(), 0);
    for (;;) {
        int level = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) level += weights[i] * n[i];
        if (level <= n_max) ++count;
        std::size_t i = 0;
        while (i < n.size() && ++n[i] > n_max) n[i++] = 0;
        if (i == n.size()) return count;
    }
}

Graded component(const FockVector& v, const Occupation& o) {
    auto it = v.find(o);
    return it == v.end() ? Graded{} : it->second;
}

double central_formula(int D, int k, double N) { return D * (k * k * k - k) / 12.0 - 2.0 * k * N; }

}  // namespace

TEST_CASE("Fock space enumeration") {
    auto single = build_fock_space(1, 1, 2, -1, FamilySet::A);
    REQUIRE(single.dimension() == 3);
    CHECK(single.states[0].empty());
    CHECK(single.states[1] == Occupation{{0, 1}});
    CHECK(single.states[2] == Occupation{{0, 2}});

    auto two = build_fock_space(2, 2, 2);
    std::vector<int> weights;
    for (const auto& o : two.space.oscillators()) weights.push_back(o.weight());
    CHECK(weights.size() == 8);
    CHECK(two.dimension() == brute_count(weights, 2));
    CHECK(two.space.dimension() == two.dimension());
    CHECK(two.states.front().empty());
    for (std::size_t i = 1; i < two.states.size(); ++i)
        CHECK(two.space.level(two.states[i - 1]) <= two.space.level(two.states[i]));

    auto mid = FockSpace(3, 2, 3);
    std::vector<int> w3;
    for (const auto& o : mid.oscillators()) w3.push_back(o.weight());
    CHECK(mid.dimension() == brute_count(w3, 3));
    CHECK(build_fock_space(4, 3, 0).dimension() == 1);

    // Oscillators ordered by (k, mu).
    const auto& osc = two.space.oscillators();
    for (std::size_t i = 1; i < osc.size(); ++i)
        CHECK(std::make_pair(osc[i - 1].k, osc[i - 1].mu) < std::make_pair(osc[i].k, osc[i].mu));

    CHECK_THROWS_AS(FockSpace(0, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(FockSpace(1, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(FockSpace(1, 1, -1), std::invalid_argument);
}

TEST_CASE("size guard and its override") {
    CHECK(FockSpace(26, 3, 6).dimension() > 200000);
    CHECK_THROWS_AS(build_fock_space(26, 3, 6), SizeGuard);
    setenv("CONSTRAINT_FORGE_MAX_STATES", "10", 1);
    CHECK(max_states() == 10);
    CHECK_THROWS_AS(build_fock_space(2, 2, 2), SizeGuard);
    unsetenv("CONSTRAINT_FORGE_MAX_STATES");
    CHECK(max_states() == 200000);
    CHECK_NOTHROW(build_fock_space(2, 2, 2));
}

TEST_CASE("ladder operators") {
    FockSpace space(3, 2, 4);
    auto vac = vacuum();
    for (int k = 1; k <= 2; ++k)
        for (int mu = 0; mu < 3; ++mu)
            for (int nu = 0; nu < 3; ++nu) {
                CAPTURE(k);
                CAPTURE(mu);
                CAPTURE(nu);
                double g = mu == nu ? space.metric(mu) : 0.0;
                auto am = ladder_operator(space, -k, mu, Family::A), ap = ladder_operator(space, k, nu, Family::A);
                auto c = subtract(am.apply(ap.apply(vac)), ap.apply(am.apply(vac)));
                CHECK(component(c, vac).c[2] == doctest::Approx(M_PI * k * g));
                auto bp = ladder_operator(space, k, mu, Family::B), bm = ladder_operator(space, -k, nu, Family::B);
                auto d = subtract(bp.apply(bm.apply(vac)), bm.apply(bp.apply(vac)));
                CHECK(component(d, vac).c[2] == doctest::Approx(M_PI * k * g));
            }
    CHECK(ladder_operator(space, -1, 0, Family::A).apply(vac).empty());
    CHECK(ladder_operator(space, 1, 0, Family::B).apply(vac).empty());
    CHECK_THROWS_AS(ladder_operator(space, 0, 0, Family::A), std::invalid_argument);
    CHECK_THROWS_AS(ladder_operator(space, 3, 0, Family::A), std::invalid_argument);

    // Mixed families commute on the exact sector.
    for (int k : {-2, -1, 1, 2})
        for (int l : {-2, -1, 1, 2})
            CHECK(commutator_norm_on_sector(ladder_operator(space, k, 0, Family::A),
                                            ladder_operator(space, l, 0, Family::B), space, 2) == 0.0);
    FockSpace only_a(2, 1, 2, -1, FamilySet::A);
    CHECK_THROWS_AS(ladder_operator(only_a, -1, 0, Family::B), std::invalid_argument);
}

TEST_CASE("Virasoro operators on the vacuum") {
    FockSpace space(3, 2, 4);
    std::vector<double> P{0.7, 0.2, -0.4};
    const double P2 = -0.49 + 0.04 + 0.16;
    auto vac = vacuum();
    CHECK(max_abs(virasoro_operator(space, -1, 0.3, P, Family::A).apply(vac)) == 0.0);
    auto zero = virasoro_operator(space, 0, 0.3, P, Family::A).apply(vac);
    REQUIRE(zero.size() == 1);
    CHECK(component(zero, vac).c[0] == doctest::Approx(P2 / (8 * M_PI)));
    CHECK(component(zero, vac).c[2] == doctest::Approx(0.3));

    // P^2 + 8 pi hbar N = 0 puts the ground state on shell; the mixed scheme then holds.
    const double N = -P2 / (8 * M_PI);
    for (int k = -4; k <= 0; ++k) {
        CAPTURE(k);
        for (const auto& [o, a] : virasoro_operator(space, k, N, P, Family::A).apply(vac)) CHECK(std::abs(a.total()) < 1e-15);
        for (const auto& [o, a] : virasoro_operator(space, -k, N, P, Family::B).apply(vac)) CHECK(std::abs(a.total()) < 1e-15);
    }
    CHECK(max_abs(virasoro_operator(space, 1, N, P, Family::A).apply(vac)) > 0.01);
    CHECK(virasoro_operator(space, 5, N, P, Family::A).is_zero());
}

TEST_CASE("central term from an explicit matrix computation") {
    // Vacuum expectation of [phi(k), phi(-k)] from materialized matrices.
    for (int D : {1, 2, 3}) {
        auto basis = build_fock_space(D, 2, 4, -1, FamilySet::A);
        for (double N : {0.0, 1.0}) {
            CAPTURE(D);
            CAPTURE(N);
            auto plus = virasoro_operator(basis.space, 2, N, {}, Family::A);
            auto minus = virasoro_operator(basis.space, -2, N, {}, Family::A);
            auto ab = to_matrix(plus * minus, basis), ba = to_matrix(minus * plus, basis);
            double vev = ab.entry(0, 0) - ba.entry(0, 0);
            // -hbar (k - l) <phi(0)> = -4 N, plus the central term.
            CHECK(vev == doctest::Approx(-4 * N - central_formula(D, 2, N)));
            CHECK(vev == doctest::Approx(-D * 0.5));
        }
    }
}

TEST_CASE("Virasoro commutators on the exact sector") {
    struct Case {
        int D;
        double N;
    };
    for (Case c : {Case{26, 0}, Case{4, 0}, Case{26, 1}})
        for (auto [k, l] : {std::pair{1, -1}, std::pair{2, -2}, std::pair{2, 1}}) {
            CAPTURE(c.D);
            CAPTURE(c.N);
            CAPTURE(k);
            CAPTURE(l);
            FockSpace space(c.D, 3, 6);
            auto r = commutator_check(space, k, l, c.N, {}, Family::A);
            CHECK(r.exact_sector_level == (l < 0 ? 3 - std::max(k, -l) : 3));
            CHECK(r.max_deviation < 1e-9);
            CHECK(r.measured_algebra == doctest::Approx(-(k - l)));
            double expected = k + l == 0 ? central_formula(c.D, k, c.N) : 0.0;
            CHECK(r.predicted_central == doctest::Approx(expected));
            CHECK(r.measured_central == doctest::Approx(expected).epsilon(1e-9));
        }
    FockSpace space(26, 3, 6);
    CHECK(commutator_check(space, 2, -2, 0, {}).measured_central == doctest::Approx(13));
    CHECK(std::abs(commutator_check(space, 1, -1, 0, {}).measured_central) < 1e-9);
    CHECK(commutator_check(space, 1, -1, 1, {}).measured_central == doctest::Approx(-2));
    CHECK_THROWS_AS(commutator_check(FockSpace(2, 3, 3), 2, -2, 0, {}), Error);
    CHECK_THROWS_AS(commutator_check(FockSpace(2, 2, 8), 3, -1, 0, {}), Error);
    CHECK(commutator_check(space, 2, -2, 0, {}).sector_states == FockSpace(26, 3, 1, -1, FamilySet::A).dimension());
}

TEST_CASE("exact sector bound") {
    // Level budget, and for opposite signs the mode cutoff.
    CHECK(exact_sector_level(FockSpace(1, 3, 6), 2, 1) == 3);
    CHECK(exact_sector_level(FockSpace(1, 3, 6), 1, -1) == 2);
    CHECK(exact_sector_level(FockSpace(1, 6, 8), 1, -1) == 5);
    CHECK(exact_sector_level(FockSpace(1, 3, 3), -2, 2) < 1);
    // One level above the mode bound the truncated commutator is already wrong:
    // with K = 3, [phi(1), phi(-1)] on a mode-3 quantum misses a mode-4 contraction.
    FockSpace wide(1, 3, 6, -1, FamilySet::A);
    auto phi1 = virasoro_operator(wide, 1, 0, {}, Family::A), phim = virasoro_operator(wide, -1, 0, {}, Family::A);
    auto phi0 = virasoro_operator(wide, 0, 0, {}, Family::A);
    auto residual = [&](const Occupation& s) {
        FockVector v{{s, Graded{{1}}}};
        auto c = subtract(phi1.apply(phim.apply(v)), phim.apply(phi1.apply(v)));
        auto t = phi0.apply(v);
        for (auto& [o, a] : t) {
            Graded shifted;
            for (int g = 0; g + 2 < Graded::kGrades; ++g) shifted.c[g + 2] = -2 * a.c[g];
            a = shifted;
        }
        return max_abs(subtract(c, t));
    };
    auto index = wide.oscillator_index(3, 0);
    REQUIRE(index);
    CHECK(residual(Occupation{{*index, 1}}) > 1);
    CHECK(residual(Occupation{{*wide.oscillator_index(2, 0), 1}}) < 1e-12);
}

TEST_CASE("commutator check: families, momenta, signatures and truncation invariance") {
    std::vector<double> P{0.9, 0.3, -0.5, 0.1};
    for (Family fam : {Family::A, Family::B})
        for (int eta : {-1, 1})
            for (auto [k, l] : {std::pair{2, -2}, std::pair{3, -1}, std::pair{-1, -2}, std::pair{1, 1}}) {
                CAPTURE(to_string(fam));
                CAPTURE(eta);
                CAPTURE(k);
                CAPTURE(l);
                double deviations[2];
                for (int n : {5, 7}) {
                    auto r = commutator_check(FockSpace(4, 3, n, eta), k, l, 0.4, P, fam);
                    CHECK(r.max_deviation < 1e-9);
                    deviations[n == 5 ? 0 : 1] = r.max_deviation;
                    double sign = fam == Family::A ? 1 : -1;
                    if (r.algebra_identified) CHECK(r.measured_algebra == doctest::Approx(-sign * (k - l)));
                }
                CHECK(std::abs(deviations[0] - deviations[1]) < 1e-9);
            }
    // Each half closes: no identity component when k + l != 0.
    for (int k = -3; k <= 0; ++k)
        for (int l = -3; l <= 0; ++l) {
            if (k + l == 0) continue;
            auto r = commutator_check(FockSpace(3, 3, 6), k, l, 0.2, {0.5, 0.1, 0.2}, Family::A);
            CHECK(r.max_deviation < 1e-9);
            CHECK(std::abs(r.measured_central) < 1e-9);
        }
}

TEST_CASE("EM one-photon norms") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> pick(-3, 3);
    for (int trial = 0; trial < 50; ++trial) {
        Vec3 k{double(pick(rng)), double(pick(rng)), double(pick(rng))};
        if (k == Vec3{0, 0, 0}) continue;
        const double n = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
        auto ev = em_positivity_eigenvalues(k);
        CHECK(std::abs(ev[0]) < 1e-12);
        CHECK(std::abs(ev[1] - n) < 1e-12);
        CHECK(std::abs(ev[2] - n) < 1e-12);

        ModeVector m{int(k[0]), int(k[1]), int(k[2])};
        for (int h : {-1, 1}) {
            std::map<ModeVector, CVec3> omega{{m, helicity_vector(k, h)}};
            CHECK(em_one_photon_norm(omega, EmProduct::ChernSimons) == doctest::Approx(2 * h * n));
            CHECK(em_one_photon_norm(omega, EmProduct::Physical) == doctest::Approx(2 * n));
        }
        const std::complex<double> lambda(0.3, -1.1);
        std::map<ModeVector, CVec3> gradient{{m, {k[0] * lambda, k[1] * lambda, k[2] * lambda}}};
        CHECK(std::abs(em_one_photon_norm(gradient, EmProduct::Physical)) < 1e-12);
    }
    std::map<ModeVector, CVec3> neg{{{0, 0, 1}, helicity_vector({0, 0, 1}, -1)}};
    CHECK(em_one_photon_norm(neg, EmProduct::ChernSimons) < 0);
    CHECK(em_one_photon_norm(neg, EmProduct::Physical) > 0);
    // Transverse single mode: 2 hbar |k| |Omega|^2.
    std::map<ModeVector, CVec3> transverse{{{0, 2, 0}, {{1.5, 0, std::complex<double>(0, 0.5)}}}};
    CHECK(em_one_photon_norm(transverse, EmProduct::Physical, 0.5) == doctest::Approx(2 * 0.5 * 2 * 2.5));
    std::map<ModeVector, CVec3> zero{{{0, 0, 0}, {1, 0, 0}}};
    CHECK_THROWS_AS(em_one_photon_norm(zero, EmProduct::Physical), std::invalid_argument);
}

TEST_CASE("Klein-Gordon Hermiticity condition") {
    auto half = kg_hermiticity_condition(Rational(1, 2));
    CHECK(half.omega_rule_consistent);
    CHECK(half.condition_holds);
    CHECK(half.weight_is_omega);
    CHECK(half.weight == "omega");
    auto zero = kg_hermiticity_condition(Rational(0));
    CHECK(zero.condition_holds);
    CHECK(zero.weight == "1");
    auto one = kg_hermiticity_condition(Rational(1));
    CHECK(one.condition_holds);
    CHECK(one.weight == "omega^2");
    CHECK_FALSE(one.weight_is_omega);
    CHECK(one.notes.front().find("nonstandard") != std::string::npos);
    CHECK(kg_hermiticity_condition(Rational(3, 4)).weight == "omega^(3/2)");
}
