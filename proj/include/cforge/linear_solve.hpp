#pragma once

#include <functional>
#include <map>
#include <span>
#include <vector>

#include "cforge/expr.hpp"

namespace cforge {

using Reducer = std::function<Expr(const Expr&)>;

struct LinearSolution {
    std::map<Var, Expr> particular;               // free unknowns set to zero
    std::vector<std::map<Var, Expr>> null_space;  // one vector per free unknown
    std::vector<Var> free_unknowns;
    std::vector<Var> pivot_unknowns;
    std::vector<Expr> residuals;                  // equations left without unknowns
    std::vector<std::size_t> residual_rows;       // index of the equation each residual reduced from
};

// Solves eqs = 0 for the unknowns; every equation must be affine in them.
// Coefficients are passed through `reduce` (if given) after every elimination
// step, so the solve happens over the quotient by the constraint ideal.
// Throws InconsistentSystem if a residual is a nonzero expression free of
// phase-space symbols, NonUnitPivot if a column has only non-invertible entries.
LinearSolution solve_linear_system(std::span<const Expr> eqs, std::span<const Var> unknowns, const VarTable& table,
                                   const Reducer& reduce = {});

}  // namespace cforge
