#pragma once

#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "cforge/analysis.hpp"
#include "cforge/numeric_expr.hpp"

namespace cforge {

// Phase-space point, interleaved (q, p) per canonical pair.
struct NumericState {
    double t = 0;
    std::vector<double> x;
};

// Time profile of one free multiplier.
struct Profile {
    enum Kind { Zero, Constant, Sinusoid, Step } kind = Zero;
    double a = 0, b = 0, c = 0;  // constant(a) | sinusoid(a, b) | step(a, b, c)
    double operator()(double t) const;
    std::string to_string() const;
};

// zero | constant(c) | sin(A, w) | sinusoid(A, w) | step(t0, before, after)
Profile parse_profile(const std::string& text);

// Profiles per free multiplier name.  The key "u" applies to every free
// multiplier that has no profile of its own.
struct USchedule {
    std::map<std::string, Profile> profiles;

    // "u=sin(1,1)" or "u1=zero;u2=step(1,0,2)"
    static USchedule parse(const std::string& text);
    std::string to_string() const;
    // One profile per name; throws if a name is uncovered or a key matches nothing.
    std::vector<Profile> resolve(const std::vector<std::string>& free_names) const;
};

// Splits "a,b(c,d),e" at top-level commas.
std::vector<std::string> split_top_level(const std::string& text, char sep = ',');

struct DynamicsOptions {
    double dt = 1e-2;
    double t_end = 1.0;
    int reproject_every = 0;  // steps; 0 = off
    double tol_drift = 1e-6;
    double tol_project = 1e-12;
    int max_project_iterations = 50;
    double blowup = 1e12;
    int record_every = 1;
    // Use the multipliers of all constraints instead of the primaries only.
    bool extended = false;
};

// A named numeric function of the state.
struct NumericObservable {
    std::string name;
    std::function<double(const std::vector<double>&)> eval;
};

// Registered observables of the model, plus "H0".
std::vector<NumericObservable> model_observables(const ConstraintAnalysis& analysis);
NumericObservable compile_observable(const std::string& name, const Expr& e, const VarTable& table);
NumericObservable compile_observable(const std::string& name, const std::string& source, const VarTable& table);

struct Trajectory {
    std::vector<NumericState> states;
    std::vector<std::string> var_names;
    std::vector<std::string> constraint_names;
    std::vector<std::vector<double>> drift;  // per sample, |psi_a|
    std::vector<std::string> observable_names;
    std::vector<std::vector<double>> observables;  // per sample
    double max_drift = 0;
    bool drift_alarm = false;
    int reprojections = 0;

    std::vector<double> series(const std::string& observable) const;
    std::vector<double> coordinate(std::size_t slot) const;
};

// Compiled vector field and constraint functions of an analysis.
class ConstrainedFlow {
public:
    explicit ConstrainedFlow(const ConstraintAnalysis& analysis, bool extended = false);

    std::size_t dimension() const { return dim_; }
    const std::vector<std::string>& free_names() const { return free_names_; }
    std::size_t constraint_count() const { return constraints_.size(); }

    // dx/dt at time t with the free multipliers set to s.
    void velocity(const std::vector<double>& x, const std::vector<double>& s, std::vector<double>& out) const;
    std::vector<double> constraints(const std::vector<double>& x) const;
    double constraint(std::size_t a, const std::vector<double>& x) const { return constraints_[a](x); }
    // d psi_a / d x_slot as (slot, value) lists.
    std::vector<std::vector<std::pair<std::size_t, double>>> constraint_gradients(const std::vector<double>& x) const;
    // Bracket {x_slot, x_other} scale for each pair.
    double bracket_scale(std::size_t pair) const { return scales_[pair]; }

private:
    struct SparseGradient {
        std::vector<std::pair<std::size_t, CompiledPoly>> entries;
    };
    std::size_t dim_ = 0;
    std::vector<double> scales_;
    SparseGradient fixed_;                     // H0 + fixed multiplier terms
    std::vector<SparseGradient> free_;         // one per free multiplier
    std::vector<std::string> free_names_;
    std::vector<CompiledPoly> constraints_;
    std::vector<SparseGradient> constraint_grad_;
};

struct ProjectionResult {
    NumericState state;
    int iterations = 0;
    double residual = 0;
};

// Gauss-Newton least-squares steps on psi(x) = 0.
ProjectionResult project_to_surface(const NumericState& state, const ConstrainedFlow& flow,
                                    const DynamicsOptions& options = {});
ProjectionResult project_to_surface(const NumericState& state, const ConstraintAnalysis& analysis,
                                    const DynamicsOptions& options = {});

// Classic RK4; throws BlowUp.  Observables are sampled with every recorded state.
Trajectory integrate(const ConstrainedFlow& flow, const NumericState& state0, const USchedule& schedule,
                     const DynamicsOptions& options, const std::vector<NumericObservable>& observables = {});
Trajectory integrate(const ConstraintAnalysis& analysis, const NumericState& state0, const USchedule& schedule,
                     const DynamicsOptions& options);

// Pointwise evaluation; throws EvaluationError at the first non-finite sample.
std::vector<double> evaluate_observable(const Trajectory& traj, const NumericObservable& F);
std::vector<double> evaluate_observable(const Trajectory& traj, const Expr& F, const VarTable& table);

struct ObservableDelta {
    std::string name;
    double max_difference = 0;
};

struct ComparisonReport {
    std::vector<ObservableDelta> observables;
    double max_state_divergence = 0;
    Trajectory a, b;
};

ComparisonReport gauge_orbit_compare(const ConstrainedFlow& flow, const NumericState& state0, const USchedule& a,
                                     const USchedule& b, const std::vector<NumericObservable>& observables,
                                     const DynamicsOptions& options);

// Dirac bracket at a state, from finite-difference gradients of F and G and
// the exact constraint gradients; second-class constraints are given by index.
double numeric_dirac_bracket(const NumericObservable& F, const NumericObservable& G, const ConstrainedFlow& flow,
                             const std::vector<std::size_t>& second_class, const std::vector<double>& x,
                             double h = 1e-6);

// Header: t, variables, drift per constraint, observables.
void write_csv(std::ostream& out, const Trajectory& traj);

// Largest |O(t) - O(0)| per observable.
std::vector<ObservableDelta> constancy_deltas(const Trajectory& traj);

}  // namespace cforge
