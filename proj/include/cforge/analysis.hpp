#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cforge/brackets.hpp"
#include "cforge/model.hpp"
#include "cforge/weak_reduce.hpp"

namespace cforge {

enum class ConstraintClass { Unclassified, First, Second };

struct Constraint {
    std::string name;
    Expr expr;
    int generation = 0;                 // 0 for primaries
    std::optional<std::size_t> parent;  // constraint whose bracket with H produced this one
    ConstraintClass cls = ConstraintClass::Unclassified;
    std::optional<int> label;

    std::string provenance() const;
};

enum class MultiplierStatus { Fixed, Free, FreeWithOffset };

struct MultiplierEntry {
    std::string name;
    Var var;
    MultiplierStatus status = MultiplierStatus::Free;
    Expr value;  // weak value (fixed) or offset
};

struct MultiplierSolution {
    std::vector<MultiplierEntry> entries;
    // Full solution: u = particular + sum_f u_f * null_space[f] over the free u_f.
    std::map<Var, Expr> particular;
    std::vector<Var> free;
    std::vector<std::map<Var, Expr>> null_space;

    std::size_t free_count() const { return free.size(); }
};

struct FirstClassGenerator {
    std::string name;
    Expr expr;
    std::map<std::size_t, Expr> combination;  // phi = sum combination[b] * psi_b
};

struct StructureFunction {
    std::size_t a, b, c;  // indices into first_class
    Expr f;
};

// A windowed bracket outside the truncation-exact window.
struct WindowDeviation {
    std::size_t a, b;
    std::size_t terms;  // size of the unprojected remainder
};

struct GaugeAlgebra {
    std::vector<StructureFunction> entries;
    std::vector<WindowDeviation> deviations;
    // Pairs whose bracket needed phase-dependent cofactors.
    std::size_t non_constant = 0;
};

struct AnalysisStatus {
    bool converged = false;
    bool inconsistent = false;
    std::string witness;
    std::string diagnostic;
    int generations = 0;
};

struct ConsistencyOptions {
    int max_generations = 16;
    ReductionOptions reduction;
};

struct ConstraintAnalysis {
    PhaseSpaceModel model;  // table extended with one multiplier per constraint
    std::vector<Constraint> constraints;
    ExprMatrix delta_weak;
    std::vector<FirstClassGenerator> first_class;
    std::vector<std::size_t> second_class;  // indices into constraints
    std::optional<SecondClassBlock> block;
    MultiplierSolution primary_multipliers;
    MultiplierSolution multipliers;  // one multiplier per constraint
    GaugeAlgebra algebra;
    Expr h_total;
    AnalysisStatus status;
    std::vector<WindowDeviation> window_deviations;
    bool classified = false;

    std::shared_ptr<WeakReducer> reducer;         // all constraints
    std::shared_ptr<WeakReducer> window_reducer;  // constraints projected to the window

    const VarTable& table() const { return model.header.table; }
    std::vector<Expr> constraint_exprs() const;
    Expr reduce(const Expr& e) const { return reducer ? reducer->reduce(e) : e; }
    // {psi_i, psi_j} reduced, with truncation-window handling for mode families.
    Expr weak_constraint_bracket(std::size_t i, std::size_t j, std::vector<WindowDeviation>* deviations) const;
    Expr bracket(const Expr& F, const Expr& G) const;       // Dirac bracket if a block exists
    Expr weak_bracket(const Expr& F, const Expr& G) const;  // reduced
};

ConstraintAnalysis run_consistency(const PhaseSpaceModel& model, const ConsistencyOptions& options = {});
ConstraintAnalysis classify_constraints(ConstraintAnalysis analysis);
MultiplierSolution solve_multipliers(const ConstraintAnalysis& analysis);
GaugeAlgebra gauge_algebra(const ConstraintAnalysis& analysis);
// Full pipeline; stops after consistency if the model is inconsistent.
ConstraintAnalysis analyze(const PhaseSpaceModel& model, const ConsistencyOptions& options = {});

// delta F = sum_a params[a] {F, phi_a}, reduced; keys index first_class.
Expr gauge_transform(const Expr& F, const std::map<std::size_t, Expr>& params, const ConstraintAnalysis& analysis);

struct ObservableReport {
    bool is_observable = false;
    bool is_conserved_charge = false;
    std::vector<std::pair<std::string, Expr>> offending;  // generator name -> weak bracket
};

ObservableReport check_observable(const Expr& F, const ConstraintAnalysis& analysis);

// e = remainder + sum quotients[a] * psi_a, dividing by the constraints in order.
Division decompose_in_constraints(const Expr& e, const ConstraintAnalysis& analysis);

std::string to_string(ConstraintClass c);
std::string to_string(MultiplierStatus s);

}  // namespace cforge
