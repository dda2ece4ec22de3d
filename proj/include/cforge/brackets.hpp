#pragma once

#include <vector>

#include "cforge/expr.hpp"
#include "cforge/model.hpp"
#include "cforge/weak_reduce.hpp"

namespace cforge {

using ExprMatrix = std::vector<std::vector<Expr>>;

// Sum over canonical pairs of c_i (dF/dq_i dG/dp_i - dF/dp_i dG/dq_i).
Expr poisson_bracket(const Expr& F, const Expr& G, const PhaseSpaceModel& model);

struct SecondClassBlock {
    std::vector<Expr> chi;
    ExprMatrix delta;       // {chi_m, chi_n}
    ExprMatrix delta_weak;  // reduced entries
    ExprMatrix lambda;      // weak inverse of delta
};

// Builds Delta and its weak inverse; throws SingularLambda if Delta is not
// weakly invertible.
SecondClassBlock make_second_class_block(std::vector<Expr> chi, const PhaseSpaceModel& model,
                                         const WeakReducer& reducer);

// Inverse of a matrix over the quotient ring, by Gauss-Jordan elimination with
// invertible pivots; the result satisfies inverse * m - I ~ 0.
ExprMatrix weak_inverse(const ExprMatrix& m, const VarTable& table, const WeakReducer& reducer);

struct DiracResult {
    Expr strong;
    Expr weak;
};

DiracResult dirac_bracket(const Expr& F, const Expr& G, const SecondClassBlock& block, const PhaseSpaceModel& model,
                          const WeakReducer& reducer);

// Drops every term containing a mode variable whose wave number exceeds the
// window.
Expr project_to_window(const Expr& e, const VarTable& table, int window);

}  // namespace cforge
