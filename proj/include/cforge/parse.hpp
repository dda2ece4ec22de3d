#pragma once

#include <string_view>

#include "cforge/expr.hpp"
#include "cforge/var_table.hpp"

namespace cforge {

// Parses the exact expression grammar: identifiers, integer literals, + - * / ^,
// parentheses and unary minus.  Division and negative powers require an
// invertible single-term operand; fractional powers only apply to positive
// parameters.
Expr parse_expr(std::string_view text, const VarTable& table);

}  // namespace cforge
