#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cforge/expr.hpp"
#include "cforge/var_table.hpp"

namespace cforge {

// Double-precision function of the phase-space state.  Parses the exact
// grammar plus the chart functions sqrt, abs, sign, sin, cos, atan, atan2;
// parameters are replaced by their declared values.
class NumericExpr {
public:
    struct Node;

    NumericExpr() = default;
    static NumericExpr parse(const std::string& text, const VarTable& table);

    // State is interleaved (q, p) in VarTable::phase_vars order.
    double operator()(const std::vector<double>& state) const;
    bool valid() const { return root_ != nullptr; }

private:
    std::shared_ptr<const Node> root_;
};

// Numeric value of a parameter; throws if none was declared.
double param_value(const VarTable& table, std::uint32_t index);

// Slot of a coordinate or momentum in the interleaved state vector.
inline std::size_t state_slot(Var v) { return 2 * v.index + (v.kind == VarKind::Momentum ? 1 : 0); }

// Polynomial (Laurent in phase variables) with double coefficients, for fast
// repeated evaluation and differentiation.
class CompiledPoly {
public:
    CompiledPoly() = default;
    CompiledPoly(const Expr& e, const VarTable& table);

    double operator()(const std::vector<double>& state) const;
    bool empty() const { return terms_.empty(); }

private:
    struct Term {
        double coef;
        std::vector<std::pair<std::size_t, int>> powers;  // (slot, exponent)
    };
    std::vector<Term> terms_;
};

}  // namespace cforge
