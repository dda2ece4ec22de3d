#include "cforge/dynamics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "cforge/brackets.hpp"
#include "cforge/errors.hpp"

namespace cforge {

// ------------------------------------------------------------- schedules

double Profile::operator()(double t) const {
    switch (kind) {
        case Zero: return 0;
        case Constant: return a;
        case Sinusoid: return a * std::sin(b * t);
        case Step: return t < a ? b : c;
    }
    return 0;
}

namespace {

std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

double parse_number(const std::string& raw) {
    std::string text = raw;
    text.erase(std::remove_if(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); }), text.end());
    if (text.empty()) throw Error("empty profile parameter");
    if (text.find_first_of(".eE") == std::string::npos) return to_double(parse_rational(text));
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) throw Error("bad number '" + raw + "'");
    return v;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

}  // namespace

std::string Profile::to_string() const {
    switch (kind) {
        case Zero: return "zero";
        case Constant: return "constant(" + fmt(a) + ")";
        case Sinusoid: return "sin(" + fmt(a) + "," + fmt(b) + ")";
        case Step: return "step(" + fmt(a) + "," + fmt(b) + "," + fmt(c) + ")";
    }
    return "zero";
}

std::vector<std::string> split_top_level(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char c : text) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == sep && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

Profile parse_profile(const std::string& raw) {
    std::string text = trim(raw);
    Profile p;
    if (text == "zero" || text == "0") return p;
    auto open = text.find('(');
    if (open == std::string::npos || text.back() != ')') {
        p.kind = Profile::Constant;
        p.a = parse_number(text);
        return p;
    }
    std::string fn = trim(text.substr(0, open));
    auto args = split_top_level(text.substr(open + 1, text.size() - open - 2));
    std::vector<double> v;
    for (const auto& a : args) v.push_back(parse_number(a));
    auto need = [&](std::size_t n) {
        if (v.size() != n) throw Error("profile " + fn + " takes " + std::to_string(n) + " arguments");
    };
    if (fn == "constant" || fn == "const") {
        need(1);
        p.kind = Profile::Constant;
        p.a = v[0];
    } else if (fn == "sin" || fn == "sinusoid") {
        need(2);
        p.kind = Profile::Sinusoid;
        p.a = v[0];
        p.b = v[1];
    } else if (fn == "step") {
        need(3);
        p.kind = Profile::Step;
        p.a = v[0];
        p.b = v[1];
        p.c = v[2];
    } else {
        throw Error("unknown profile '" + fn + "' (expected zero, constant, sin, step)");
    }
    return p;
}

USchedule USchedule::parse(const std::string& text) {
    USchedule s;
    if (trim(text).empty()) return s;
    for (const auto& item : split_top_level(text, ';')) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        std::string key = eq == std::string::npos ? "u" : trim(item.substr(0, eq));
        std::string value = eq == std::string::npos ? item : item.substr(eq + 1);
        if (s.profiles.count(key)) throw Error("multiplier '" + key + "' scheduled twice");
        s.profiles[key] = parse_profile(value);
    }
    return s;
}

std::string USchedule::to_string() const {
    std::string out;
    for (const auto& [k, p] : profiles) {
        if (!out.empty()) out += ';';
        out += k + "=" + p.to_string();
    }
    return out;
}

std::vector<Profile> USchedule::resolve(const std::vector<std::string>& names) const {
    std::set<std::string> known(names.begin(), names.end());
    for (const auto& [k, p] : profiles)
        if (k != "u" && !known.count(k)) throw Error("schedule names '" + k + "', which is not a free multiplier");
    std::vector<Profile> out;
    for (const auto& n : names) {
        auto it = profiles.find(n);
        if (it == profiles.end()) it = profiles.find("u");
        if (it == profiles.end()) throw Error("no profile for free multiplier '" + n + "'");
        out.push_back(it->second);
    }
    return out;
}

// ------------------------------------------------------------- observables

NumericObservable compile_observable(const std::string& name, const Expr& e, const VarTable& table) {
    CompiledPoly poly(e, table);
    return {name, [poly](const std::vector<double>& x) { return poly(x); }};
}

NumericObservable compile_observable(const std::string& name, const std::string& source, const VarTable& table) {
    NumericExpr f = NumericExpr::parse(source, table);
    return {name, [f](const std::vector<double>& x) { return f(x); }};
}

std::vector<NumericObservable> model_observables(const ConstraintAnalysis& analysis) {
    std::vector<NumericObservable> out;
    for (const auto& o : analysis.model.header.observables)
        out.push_back(o.expr ? compile_observable(o.name, *o.expr, analysis.table())
                             : compile_observable(o.name, o.source, analysis.table()));
    return out;
}

std::vector<double> Trajectory::series(const std::string& name) const {
    auto it = std::find(observable_names.begin(), observable_names.end(), name);
    if (it == observable_names.end()) throw Error("trajectory has no observable '" + name + "'");
    std::size_t k = static_cast<std::size_t>(it - observable_names.begin());
    std::vector<double> out;
    for (const auto& row : observables) out.push_back(row[k]);
    return out;
}

std::vector<double> Trajectory::coordinate(std::size_t slot) const {
    std::vector<double> out;
    for (const auto& s : states) out.push_back(s.x.at(slot));
    return out;
}

// ------------------------------------------------------------- flow

ConstrainedFlow::ConstrainedFlow(const ConstraintAnalysis& analysis, bool extended) {
    const VarTable& table = analysis.table();
    const auto& header = analysis.model.header;
    dim_ = 2 * table.pair_count();
    const std::vector<double> none(dim_, 0.0);
    for (const auto& c : header.bracket_scale) {
        if (c.has_phase_vars()) throw Error("bracket scale depends on phase-space variables");
        scales_.push_back(CompiledPoly(c, table)(none));
    }
    const DerivativeRules* rules = header.rules.empty() ? nullptr : &header.rules;
    auto gradient = [&](const Expr& e) {
        SparseGradient g;
        std::set<std::size_t> slots;
        for (Var v : e.variables())
            if (v.kind == VarKind::Coordinate || v.kind == VarKind::Momentum) slots.insert(state_slot(v));
        for (Var v : table.phase_vars()) {
            if (!slots.count(state_slot(v)) && !rules) continue;
            Expr d = differentiate(e, v, rules);
            if (!d.is_zero()) g.entries.emplace_back(state_slot(v), CompiledPoly(d, table));
        }
        return g;
    };

    auto psi = analysis.constraint_exprs();
    const MultiplierSolution& ms = extended ? analysis.multipliers : analysis.primary_multipliers;
    Expr fixed = analysis.model.h0;
    for (const auto& [u, value] : ms.particular)
        if (!value.is_zero() && u.index < psi.size()) fixed += value * psi[u.index];
    fixed_ = gradient(fixed);
    for (std::size_t f = 0; f < ms.free.size(); ++f) {
        Expr g;
        for (const auto& [u, c] : ms.null_space[f])
            if (u.index < psi.size()) g += c * psi[u.index];
        free_.push_back(gradient(g));
        free_names_.push_back(table.multiplier(ms.free[f].index));
    }
    for (const auto& p : psi) {
        constraints_.emplace_back(p, table);
        constraint_grad_.push_back(gradient(p));
    }
}

void ConstrainedFlow::velocity(const std::vector<double>& x, const std::vector<double>& s,
                               std::vector<double>& out) const {
    out.assign(dim_, 0.0);
    auto add = [&](const SparseGradient& g, double weight) {
        for (const auto& [slot, d] : g.entries) {
            double c = scales_[slot / 2] * weight * d(x);
            if (slot % 2 == 0)
                out[slot + 1] -= c;
            else
                out[slot - 1] += c;
        }
    };
    add(fixed_, 1.0);
    for (std::size_t f = 0; f < free_.size(); ++f)
        if (s[f] != 0) add(free_[f], s[f]);
}

std::vector<double> ConstrainedFlow::constraints(const std::vector<double>& x) const {
    std::vector<double> out;
    out.reserve(constraints_.size());
    for (const auto& c : constraints_) out.push_back(c(x));
    return out;
}

std::vector<std::vector<std::pair<std::size_t, double>>> ConstrainedFlow::constraint_gradients(
    const std::vector<double>& x) const {
    std::vector<std::vector<std::pair<std::size_t, double>>> out(constraints_.size());
    for (std::size_t a = 0; a < constraints_.size(); ++a)
        for (const auto& [slot, d] : constraint_grad_[a].entries) out[a].emplace_back(slot, d(x));
    return out;
}

// ------------------------------------------------------------- projection

namespace {

double max_abs(const std::vector<double>& v) {
    double m = 0;
    for (double e : v) m = std::max(m, std::isfinite(e) ? std::abs(e) : INFINITY);
    return m;
}

}  // namespace

ProjectionResult project_to_surface(const NumericState& state, const ConstrainedFlow& flow,
                                    const DynamicsOptions& options) {
    if (state.x.size() != flow.dimension())
        throw Error("state has " + std::to_string(state.x.size()) + " entries, expected " +
                    std::to_string(flow.dimension()));
    ProjectionResult r{state, 0, 0};
    if (flow.constraint_count() == 0) return r;
    const auto m = static_cast<Eigen::Index>(flow.constraint_count());
    const auto n = static_cast<Eigen::Index>(flow.dimension());
    for (;;) {
        auto psi = flow.constraints(r.state.x);
        r.residual = max_abs(psi);
        if (!std::isfinite(r.residual)) throw ProjectionFailure(r.residual);
        if (r.residual < options.tol_project) return r;
        if (r.iterations >= options.max_project_iterations) throw ProjectionFailure(r.residual);
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, n);
        auto grads = flow.constraint_gradients(r.state.x);
        for (Eigen::Index a = 0; a < m; ++a)
            for (const auto& [slot, d] : grads[static_cast<std::size_t>(a)]) J(a, static_cast<Eigen::Index>(slot)) = d;
        Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(psi.data(), m);
        Eigen::VectorXd dx = J.completeOrthogonalDecomposition().solve(rhs);
        for (Eigen::Index i = 0; i < n; ++i) r.state.x[static_cast<std::size_t>(i)] -= dx(i);
        ++r.iterations;
    }
}

ProjectionResult project_to_surface(const NumericState& state, const ConstraintAnalysis& analysis,
                                    const DynamicsOptions& options) {
    return project_to_surface(state, ConstrainedFlow(analysis, options.extended), options);
}

// ------------------------------------------------------------- integration

Trajectory integrate(const ConstrainedFlow& flow, const NumericState& state0, const USchedule& schedule,
                     const DynamicsOptions& options, const std::vector<NumericObservable>& observables) {
    if (state0.x.size() != flow.dimension())
        throw Error("state has " + std::to_string(state0.x.size()) + " entries, expected " +
                    std::to_string(flow.dimension()));
    if (!(options.dt > 0)) throw Error("dt must be positive");
    auto profiles = schedule.resolve(flow.free_names());
    const std::size_t n = flow.dimension();
    const long steps = std::max(0L, static_cast<long>(std::ceil(options.t_end / options.dt - 1e-9)));
    const int every = std::max(1, options.record_every);

    Trajectory traj;
    for (const auto& o : observables) traj.observable_names.push_back(o.name);
    auto record = [&](const NumericState& s) {
        auto psi = flow.constraints(s.x);
        for (double& e : psi) e = std::abs(e);
        double d = max_abs(psi);
        traj.max_drift = std::max(traj.max_drift, d);
        traj.drift.push_back(std::move(psi));
        std::vector<double> obs;
        for (const auto& o : observables) obs.push_back(o.eval(s.x));
        traj.observables.push_back(std::move(obs));
        traj.states.push_back(s);
    };

    std::vector<double> sv(profiles.size());
    auto multipliers_at = [&](double t) {
        for (std::size_t f = 0; f < profiles.size(); ++f) sv[f] = profiles[f](t);
        return sv;
    };
    NumericState s = state0;
    record(s);
    std::vector<double> k1, k2, k3, k4, tmp(n);
    const double h = steps > 0 ? options.t_end / static_cast<double>(steps) : options.dt;
    for (long i = 0; i < steps; ++i) {
        const double t = state0.t + static_cast<double>(i) * h;
        flow.velocity(s.x, multipliers_at(t), k1);
        for (std::size_t j = 0; j < n; ++j) tmp[j] = s.x[j] + 0.5 * h * k1[j];
        flow.velocity(tmp, multipliers_at(t + 0.5 * h), k2);
        for (std::size_t j = 0; j < n; ++j) tmp[j] = s.x[j] + 0.5 * h * k2[j];
        flow.velocity(tmp, multipliers_at(t + 0.5 * h), k3);
        for (std::size_t j = 0; j < n; ++j) tmp[j] = s.x[j] + h * k3[j];
        flow.velocity(tmp, multipliers_at(t + h), k4);
        for (std::size_t j = 0; j < n; ++j) {
            s.x[j] += h / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
            if (!std::isfinite(s.x[j]) || std::abs(s.x[j]) > options.blowup) throw BlowUp(t + h);
        }
        s.t = state0.t + static_cast<double>(i + 1) * h;
        if (options.reproject_every > 0 && (i + 1) % options.reproject_every == 0) {
            s = project_to_surface(s, flow, options).state;
            ++traj.reprojections;
        }
        if ((i + 1) % every == 0 || i + 1 == steps) record(s);
    }
    traj.drift_alarm = traj.max_drift > options.tol_drift;
    return traj;
}

namespace {

void label_trajectory(Trajectory& traj, const ConstraintAnalysis& analysis) {
    for (Var v : analysis.table().phase_vars()) traj.var_names.push_back(analysis.table().name(v));
    for (const auto& c : analysis.constraints) traj.constraint_names.push_back(c.name);
}

}  // namespace

Trajectory integrate(const ConstraintAnalysis& analysis, const NumericState& state0, const USchedule& schedule,
                     const DynamicsOptions& options) {
    ConstrainedFlow flow(analysis, options.extended);
    Trajectory traj = integrate(flow, state0, schedule, options, model_observables(analysis));
    label_trajectory(traj, analysis);
    return traj;
}

std::vector<double> evaluate_observable(const Trajectory& traj, const NumericObservable& F) {
    std::vector<double> out;
    out.reserve(traj.states.size());
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        double v = F.eval(traj.states[i].x);
        if (!std::isfinite(v)) throw EvaluationError(i, "'" + F.name + "' is not finite (division by zero)");
        out.push_back(v);
    }
    return out;
}

std::vector<double> evaluate_observable(const Trajectory& traj, const Expr& F, const VarTable& table) {
    return evaluate_observable(traj, compile_observable("F", F, table));
}

ComparisonReport gauge_orbit_compare(const ConstrainedFlow& flow, const NumericState& state0, const USchedule& a,
                                     const USchedule& b, const std::vector<NumericObservable>& observables,
                                     const DynamicsOptions& options) {
    ComparisonReport r;
    r.a = integrate(flow, state0, a, options, observables);
    r.b = integrate(flow, state0, b, options, observables);
    for (std::size_t k = 0; k < observables.size(); ++k) {
        ObservableDelta d{observables[k].name, 0};
        for (std::size_t i = 0; i < r.a.observables.size(); ++i)
            d.max_difference = std::max(d.max_difference, std::abs(r.a.observables[i][k] - r.b.observables[i][k]));
        r.observables.push_back(d);
    }
    for (std::size_t i = 0; i < r.a.states.size(); ++i)
        for (std::size_t j = 0; j < flow.dimension(); ++j)
            r.max_state_divergence = std::max(r.max_state_divergence, std::abs(r.a.states[i].x[j] - r.b.states[i].x[j]));
    return r;
}

double numeric_dirac_bracket(const NumericObservable& F, const NumericObservable& G, const ConstrainedFlow& flow,
                             const std::vector<std::size_t>& second_class, const std::vector<double>& x, double h) {
    const std::size_t n = flow.dimension();
    auto grad = [&](const NumericObservable& f) {
        std::vector<double> g(n), y = x;
        for (std::size_t j = 0; j < n; ++j) {
            y[j] = x[j] + h;
            double up = f.eval(y);
            y[j] = x[j] - h;
            double down = f.eval(y);
            y[j] = x[j];
            g[j] = (up - down) / (2 * h);
        }
        return g;
    };
    auto poisson = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0;
        for (std::size_t i = 0; i < n / 2; ++i)
            s += flow.bracket_scale(i) * (a[2 * i] * b[2 * i + 1] - a[2 * i + 1] * b[2 * i]);
        return s;
    };
    auto gf = grad(F), gg = grad(G);
    double result = poisson(gf, gg);
    if (second_class.empty()) return result;
    auto sparse = flow.constraint_gradients(x);
    std::vector<std::vector<double>> chi;
    for (std::size_t a : second_class) {
        std::vector<double> g(n, 0.0);
        for (const auto& [slot, d] : sparse.at(a)) g[slot] = d;
        chi.push_back(std::move(g));
    }
    const auto m = static_cast<Eigen::Index>(chi.size());
    Eigen::MatrixXd delta(m, m);
    Eigen::VectorXd fc(m), cg(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        fc(i) = poisson(gf, chi[static_cast<std::size_t>(i)]);
        cg(i) = poisson(chi[static_cast<std::size_t>(i)], gg);
        for (Eigen::Index j = 0; j < m; ++j)
            delta(i, j) = poisson(chi[static_cast<std::size_t>(i)], chi[static_cast<std::size_t>(j)]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(delta);
    if (!lu.isInvertible()) throw Error("second-class bracket matrix is singular at this state");
    return result - fc.dot(lu.solve(cg));
}

void write_csv(std::ostream& out, const Trajectory& traj) {
    out << "t";
    for (const auto& v : traj.var_names) out << ',' << v;
    for (const auto& c : traj.constraint_names) out << ",drift_" << c;
    for (const auto& o : traj.observable_names) out << ',' << o;
    out << '\n';
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        out << fmt(traj.states[i].t);
        for (double v : traj.states[i].x) out << ',' << fmt(v);
        for (double v : traj.drift[i]) out << ',' << fmt(v);
        for (double v : traj.observables[i]) out << ',' << fmt(v);
        out << '\n';
    }
}

std::vector<ObservableDelta> constancy_deltas(const Trajectory& traj) {
    std::vector<ObservableDelta> out;
    for (std::size_t k = 0; k < traj.observable_names.size(); ++k) {
        ObservableDelta d{traj.observable_names[k], 0};
        for (const auto& row : traj.observables)
            d.max_difference = std::max(d.max_difference, std::abs(row[k] - traj.observables.front()[k]));
        out.push_back(d);
    }
    return out;
}

}  // namespace cforge
