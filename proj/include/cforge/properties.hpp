#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cforge/analysis.hpp"

namespace cforge {

struct PropertyOptions {
    std::size_t triples = 200;
    std::size_t nullity_samples = 100;
    std::uint64_t seed = 1;
    int max_terms = 3;
    int max_degree = 2;
    std::size_t pairs_per_sample = 4;  // random polynomials use a few canonical pairs each
};

// Failure counts per property; every count is zero on a correct engine.
struct PropertyReport {
    std::string model;
    std::uint64_t seed = 0;
    std::size_t triples = 0;
    std::size_t antisymmetry = 0, linearity = 0, leibniz = 0, jacobi = 0;
    bool dirac_checked = false;
    std::size_t dirac_antisymmetry = 0, dirac_leibniz = 0, dirac_jacobi = 0;
    std::size_t nullity_samples = 0, nullity = 0;
    bool passed() const {
        return antisymmetry + linearity + leibniz + jacobi + dirac_antisymmetry + dirac_leibniz + dirac_jacobi +
                   nullity ==
               0;
    }
};

// Small integer coefficients, degree <= max_degree, at most max_terms terms.
Expr random_polynomial(std::mt19937_64& rng, const std::vector<Var>& vars, int max_terms, int max_degree);

// Poisson antisymmetry, linearity, Leibniz and strong Jacobi on random triples;
// with second-class constraints also Dirac antisymmetry, Leibniz and Jacobi
// weakly, and {F, chi}* ~ 0 on random F.
PropertyReport check_bracket_properties(const ConstraintAnalysis& analysis, const PropertyOptions& options = {});

}  // namespace cforge
