#include "cforge/report.hpp"

#include <algorithm>
#include <cmath>

namespace cforge {

namespace {

Json status_json(const AnalysisStatus& s) {
    Json j;
    j["converged"] = s.converged;
    j["inconsistent"] = s.inconsistent;
    j["generations"] = s.generations;
    if (!s.witness.empty()) j["witness"] = s.witness;
    if (!s.diagnostic.empty()) j["diagnostic"] = s.diagnostic;
    return j;
}

Json multipliers_json(const MultiplierSolution& ms, const VarTable& t) {
    Json out = Json::array();
    for (const auto& e : ms.entries)
        out.push_back({{"name", e.name}, {"status", to_string(e.status)}, {"value", to_string(e.value, t)}});
    return out;
}

}  // namespace

Json analysis_report(const ConstraintAnalysis& a) {
    const VarTable& t = a.table();
    Json j;
    j["model"] = a.model.name();
    j["input"] = to_string(a.model.provenance);
    j["status"] = status_json(a.status);
    Json cs = Json::array();
    for (const auto& c : a.constraints) {
        Json e{{"name", c.name}, {"expr", to_string(c.expr, t)}, {"provenance", c.provenance()},
               {"class", to_string(c.cls)}};
        e["parent"] = c.parent ? Json(a.constraints[*c.parent].name) : Json(nullptr);
        if (c.label) e["label"] = *c.label;
        cs.push_back(std::move(e));
    }
    j["constraints"] = cs;
    if (!a.status.converged) return j;

    j["h_total"] = to_string(a.h_total, t);
    j["primary_multipliers"] = multipliers_json(a.primary_multipliers, t);
    if (!a.classified) return j;

    std::size_t first = 0;
    for (const auto& c : a.constraints) first += c.cls == ConstraintClass::First;
    j["counts"] = {{"total", a.constraints.size()}, {"first_class", first}, {"second_class", a.second_class.size()}};
    Json delta = Json::array();
    for (const auto& row : a.delta_weak) {
        Json r = Json::array();
        for (const auto& e : row) r.push_back(to_string(e, t));
        delta.push_back(std::move(r));
    }
    j["delta_matrix"] = delta;
    Json fc = Json::array();
    for (const auto& g : a.first_class) {
        Json comb = Json::array();
        for (const auto& [b, c] : g.combination)
            comb.push_back({{"constraint", a.constraints[b].name}, {"coefficient", to_string(c, t)}});
        fc.push_back({{"name", g.name}, {"expr", to_string(g.expr, t)}, {"combination", comb}});
    }
    j["first_class"] = fc;
    Json sc = Json::array();
    for (std::size_t i : a.second_class) sc.push_back(a.constraints[i].name);
    j["second_class"] = sc;
    j["multipliers"] = multipliers_json(a.multipliers, t);

    Json alg;
    Json entries = Json::array();
    for (const auto& e : a.algebra.entries)
        entries.push_back({{"a", a.first_class[e.a].name},
                           {"b", a.first_class[e.b].name},
                           {"c", a.first_class[e.c].name},
                           {"f", to_string(e.f, t)}});
    alg["structure_functions"] = entries;
    alg["non_constant_pairs"] = a.algebra.non_constant;
    alg["window_deviations"] = a.algebra.deviations.size();
    j["gauge_algebra"] = alg;
    Json obs = Json::array();
    for (const auto& spec : a.model.header.observables) {
        if (!spec.expr) continue;
        auto r = check_observable(*spec.expr, a);
        Json off = Json::array();
        for (const auto& [name, e] : r.offending) off.push_back(Json{{"generator", name}, {"bracket", to_string(e, t)}});
        obs.push_back({{"name", spec.name},
                       {"expr", to_string(*spec.expr, t)},
                       {"observable", r.is_observable},
                       {"conserved_charge", r.is_conserved_charge},
                       {"offending", off}});
    }
    j["observables"] = obs;
    j["reduction"] = {{"groebner_complete", a.reducer ? a.reducer->complete() : true}};
    if (a.model.header.window) {
        j["window"] = {{"exact_window", *a.model.header.window},
                       {"bracket_deviations", a.window_deviations.size()}};
    }
    return j;
}

Json trajectory_summary(const Trajectory& traj, const NumericState& initial, int projection_iterations) {
    Json j;
    j["samples"] = traj.states.size();
    j["t_start"] = traj.states.front().t;
    j["t_end"] = traj.states.back().t;
    j["projection_iterations"] = projection_iterations;
    j["max_drift"] = traj.max_drift;
    j["drift_alarm"] = traj.drift_alarm;
    j["reprojections"] = traj.reprojections;
    double change = 0;
    for (const auto& s : traj.states)
        for (std::size_t i = 0; i < s.x.size(); ++i) change = std::max(change, std::abs(s.x[i] - initial.x[i]));
    j["max_state_change"] = change;
    Json fin = Json::object();
    for (std::size_t i = 0; i < traj.var_names.size(); ++i) fin[traj.var_names[i]] = traj.states.back().x[i];
    j["final_state"] = fin;
    Json obs = Json::array();
    for (const auto& d : constancy_deltas(traj)) {
        auto series = traj.series(d.name);
        obs.push_back({{"name", d.name}, {"initial", series.front()}, {"final", series.back()},
                       {"max_delta", d.max_difference}});
    }
    j["observables"] = obs;
    return j;
}

Json comparison_report(const ComparisonReport& r, const std::string& a, const std::string& b) {
    Json j;
    j["schedule_a"] = a;
    j["schedule_b"] = b;
    Json obs = Json::array();
    double worst = 0;
    for (const auto& d : r.observables) {
        obs.push_back({{"name", d.name}, {"max_difference", d.max_difference}});
        worst = std::max(worst, d.max_difference);
    }
    j["observables"] = obs;
    j["max_observable_difference"] = worst;
    j["max_state_divergence"] = r.max_state_divergence;
    return j;
}

Json central_term_report(const CentralTermReport& r) {
    Json j;
    j["space"] = {{"D", r.D}, {"K", r.K}, {"n_max", r.n_max}, {"signature", r.eta00 < 0 ? "lorentzian" : "euclidean"}};
    j["check"] = {{"family", to_string(r.family)}, {"k", r.k}, {"l", r.l}, {"N", r.N}, {"P", r.P}};
    j["predicted"] = {{"hbar_coefficient", r.predicted_algebra}, {"hbar2_central", r.predicted_central}};
    j["measured"] = {{"hbar_coefficient", r.algebra_identified ? Json(r.measured_algebra) : Json(nullptr)},
                     {"hbar2_central", r.measured_central}};
    j["max_deviation"] = r.max_deviation;
    Json grades = Json::object();
    for (int g = 0; g < Graded::kGrades; ++g)
        if (r.deviation_by_grade[static_cast<std::size_t>(g)] != 0)
            grades["hbar^" + (g % 2 ? std::to_string(g) + "/2" : std::to_string(g / 2))] =
                r.deviation_by_grade[static_cast<std::size_t>(g)];
    j["deviation_by_hbar_power"] = grades;
    j["exact_sector_level"] = r.exact_sector_level;
    j["sector_states"] = r.sector_states;
    j["notes"] = r.notes;
    return j;
}

Json kg_report(const KgReport& r) {
    return {{"alpha", to_string(r.alpha)},
            {"omega_rule_consistent", r.omega_rule_consistent},
            {"condition_holds", r.condition_holds},
            {"measure_weight", r.weight},
            {"weight_is_omega", r.weight_is_omega},
            {"notes", r.notes}};
}

Json property_report(const PropertyReport& r) {
    Json j{{"model", r.model},
           {"seed", r.seed},
           {"triples", r.triples},
           {"failures",
            {{"antisymmetry", r.antisymmetry}, {"linearity", r.linearity}, {"leibniz", r.leibniz}, {"jacobi", r.jacobi}}}};
    if (r.dirac_checked) {
        j["dirac_failures"] = {{"antisymmetry", r.dirac_antisymmetry},
                               {"leibniz", r.dirac_leibniz},
                               {"jacobi_weak", r.dirac_jacobi},
                               {"nullity", r.nullity}};
        j["nullity_samples"] = r.nullity_samples;
    }
    j["passed"] = r.passed();
    return j;
}

}  // namespace cforge
