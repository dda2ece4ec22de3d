#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cforge/expr.hpp"
#include "cforge/var_table.hpp"

namespace cforge {

struct NamedExpr {
    std::string name;
    Expr expr;
    std::optional<int> label;  // mode label for windowed constraint families
};

// Registered observable: either an exact expression or a numeric-only chart
// function (atan, sqrt, ...) evaluated in the dynamics module.
struct ObservableSpec {
    std::string name;
    std::string source;
    std::optional<Expr> expr;
};

// Declarations shared by both input paths.
struct ModelHeader {
    std::string name;
    VarTable table;
    std::vector<Expr> bracket_scale;  // {q_i, p_i} per pair, default 1
    std::vector<int> metric;
    bool parameter_time = false;
    std::optional<int> modes;
    std::optional<int> window;  // exact window for mode-truncated brackets
    std::vector<ObservableSpec> observables;
    DerivativeRules rules;
};

struct LagrangianSpec {
    ModelHeader header;
    Expr lagrangian;
    std::vector<std::vector<Expr>> mass;  // symmetric, pair-indexed
    std::vector<Expr> linear;             // b
    Expr potential;                      // V
};

struct DirectSpec {
    ModelHeader header;
    Expr h0;
    std::vector<NamedExpr> primaries;
};

using ModelSpec = std::variant<LagrangianSpec, DirectSpec>;

enum class Provenance { Legendre, Direct };

struct PhaseSpaceModel {
    ModelHeader header;
    Expr h0;
    std::vector<NamedExpr> primaries;
    Provenance provenance = Provenance::Direct;

    const VarTable& table() const { return header.table; }
    const std::string& name() const { return header.name; }
};

ModelSpec parse_model(const std::string& text);

// Splits L = 1/2 v^T M v + b^T v - V; throws NonQuadraticLagrangian otherwise.
void decompose_lagrangian(LagrangianSpec& spec);

PhaseSpaceModel legendre_transform(const LagrangianSpec& spec);
PhaseSpaceModel build_phase_space(const DirectSpec& spec);
PhaseSpaceModel load_model(const std::string& text);

std::string to_string(Provenance p);

}  // namespace cforge
