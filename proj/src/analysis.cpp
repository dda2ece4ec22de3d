#include "cforge/analysis.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include "cforge/errors.hpp"
#include "cforge/linear_solve.hpp"

namespace cforge {

std::string to_string(ConstraintClass c) {
    switch (c) {
        case ConstraintClass::First: return "first";
        case ConstraintClass::Second: return "second";
        default: return "unclassified";
    }
}

std::string to_string(MultiplierStatus s) {
    switch (s) {
        case MultiplierStatus::Fixed: return "fixed";
        case MultiplierStatus::FreeWithOffset: return "free-with-offset";
        default: return "free";
    }
}

std::string Constraint::provenance() const {
    if (generation == 0) return "primary";
    return "secondary(" + std::to_string(generation) + ")";
}

std::vector<Expr> ConstraintAnalysis::constraint_exprs() const {
    std::vector<Expr> out;
    out.reserve(constraints.size());
    for (const auto& c : constraints) out.push_back(c.expr);
    return out;
}

namespace {

bool windowed(const ConstraintAnalysis& a, std::size_t i, std::size_t j) {
    return a.model.header.window && a.constraints[i].label && a.constraints[j].label && a.window_reducer;
}

// Reduction of a strong bracket between constraints i and j.
Expr reduce_constraint_bracket(const ConstraintAnalysis& a, const Expr& strong, std::size_t i, std::size_t j,
                               std::vector<WindowDeviation>* deviations) {
    if (!windowed(a, i, j)) return a.reduce(strong);
    int w = *a.model.header.window;
    int span = std::abs(*a.constraints[i].label) + std::abs(*a.constraints[j].label);
    if (span <= w) return a.window_reducer->reduce(project_to_window(strong, a.table(), w));
    Expr full = a.reduce(strong);
    if (!full.is_zero() && deviations) deviations->push_back({i, j, full.size()});
    return Expr();
}

void rebuild_reducers(ConstraintAnalysis& a, const ReductionOptions& base) {
    ReductionOptions opts = base;
    if (a.model.header.window) opts.complete = false;
    auto exprs = a.constraint_exprs();
    a.reducer = std::make_shared<WeakReducer>(exprs, a.table(), opts);
    if (a.model.header.window) {
        std::vector<Expr> projected;
        for (const auto& e : exprs) {
            Expr p = project_to_window(e, a.table(), *a.model.header.window);
            if (!p.is_zero()) projected.push_back(p);
        }
        ReductionOptions wopts = opts;
        wopts.complete = false;
        a.window_reducer = std::make_shared<WeakReducer>(projected, a.table(), wopts);
    }
}

MultiplierSolution to_multiplier_solution(const LinearSolution& sol, const std::vector<Var>& unknowns,
                                          const VarTable& table) {
    MultiplierSolution ms;
    ms.particular = sol.particular;
    ms.free = sol.free_unknowns;
    ms.null_space = sol.null_space;
    std::set<Var> free(sol.free_unknowns.begin(), sol.free_unknowns.end());
    for (Var u : unknowns) {
        MultiplierEntry e;
        e.name = table.name(u);
        e.var = u;
        e.value = sol.particular.at(u);
        if (free.count(u)) {
            e.status = MultiplierStatus::Free;
        } else {
            bool coupled = false;
            for (const auto& dir : sol.null_space) {
                auto it = dir.find(u);
                if (it != dir.end() && !it->second.is_zero()) coupled = true;
            }
            e.status = coupled ? MultiplierStatus::FreeWithOffset : MultiplierStatus::Fixed;
        }
        ms.entries.push_back(std::move(e));
    }
    return ms;
}

// sum_alpha u~_alpha psi_alpha with u~ = particular + sum_f u_f null_f.
Expr multiplier_combination(const MultiplierSolution& ms, const std::vector<Expr>& psi) {
    std::vector<Expr> coef(psi.size());
    auto idx = [&](Var u) { return static_cast<std::size_t>(u.index); };
    for (const auto& [u, v] : ms.particular)
        if (idx(u) < psi.size()) coef[idx(u)] += v;
    for (std::size_t f = 0; f < ms.free.size(); ++f)
        for (const auto& [u, v] : ms.null_space[f])
            if (idx(u) < psi.size()) coef[idx(u)] += v * Expr::var(ms.free[f]);
    Expr out;
    for (std::size_t i = 0; i < psi.size(); ++i)
        if (!coef[i].is_zero()) out += coef[i] * psi[i];
    return out;
}

std::string fresh_name(const ConstraintAnalysis& a, const std::string& stem, std::size_t start) {
    for (std::size_t k = start;; ++k) {
        std::string n = stem + std::to_string(k);
        bool taken = a.table().lookup(n).has_value();
        for (const auto& c : a.constraints) taken = taken || c.name == n;
        if (!taken) return n;
    }
}

}  // namespace

Expr ConstraintAnalysis::weak_constraint_bracket(std::size_t i, std::size_t j,
                                                 std::vector<WindowDeviation>* deviations) const {
    return reduce_constraint_bracket(*this, poisson_bracket(constraints[i].expr, constraints[j].expr, model), i, j,
                                     deviations);
}

Expr ConstraintAnalysis::bracket(const Expr& F, const Expr& G) const {
    if (block && !block->chi.empty()) return dirac_bracket(F, G, *block, model, *reducer).strong;
    return poisson_bracket(F, G, model);
}

Expr ConstraintAnalysis::weak_bracket(const Expr& F, const Expr& G) const { return reduce(bracket(F, G)); }

ConstraintAnalysis run_consistency(const PhaseSpaceModel& model, const ConsistencyOptions& options) {
    ConstraintAnalysis a;
    a.model = model;
    for (const auto& p : model.primaries) {
        Constraint c;
        c.name = p.name;
        c.expr = p.expr;
        c.label = p.label;
        a.constraints.push_back(std::move(c));
    }
    const std::size_t P = model.primaries.size();
    std::vector<Var> us;
    for (std::size_t b = 0; b < P; ++b) us.push_back(Var::u(static_cast<std::uint32_t>(b)));

    std::vector<Expr> with_h0;
    std::map<std::pair<std::size_t, std::size_t>, Expr> strong;
    auto strong_bracket = [&](std::size_t i, std::size_t j) -> const Expr& {
        auto key = std::make_pair(i, j);
        auto it = strong.find(key);
        if (it != strong.end()) return it->second;
        return strong.emplace(key, poisson_bracket(a.constraints[i].expr, a.constraints[j].expr, a.model))
            .first->second;
    };

    LinearSolution last;
    for (int gen = 1;; ++gen) {
        if (gen > options.max_generations) {
            a.status.diagnostic = "no convergence after " + std::to_string(options.max_generations) + " generations";
            a.status.generations = options.max_generations;
            return a;
        }
        rebuild_reducers(a, options.reduction);
        while (with_h0.size() < a.constraints.size())
            with_h0.push_back(poisson_bracket(a.constraints[with_h0.size()].expr, a.model.h0, a.model));
        std::vector<Expr> eqs;
        for (std::size_t i = 0; i < a.constraints.size(); ++i) {
            Expr eq = a.reduce(with_h0[i]);
            for (std::size_t b = 0; b < P; ++b) {
                Expr w = reduce_constraint_bracket(a, strong_bracket(i, b), i, b, nullptr);
                if (!w.is_zero()) eq += w * Expr::var(us[b]);
            }
            eqs.push_back(eq);
        }
        Reducer red = [&](const Expr& e) { return a.reduce(e); };
        try {
            last = solve_linear_system(eqs, us, a.table(), red);
        } catch (const InconsistentSystem& e) {
            a.status.inconsistent = true;
            a.status.witness = e.witness();
            a.status.generations = gen;
            a.status.diagnostic = e.what();
            return a;
        } catch (const NonUnitPivot& e) {
            a.status.generations = gen;
            a.status.diagnostic = std::string("rank instability in the multiplier equations: ") + e.what();
            return a;
        }
        std::vector<Expr> admitted;
        std::size_t before = a.constraints.size();
        for (std::size_t k = 0; k < last.residuals.size(); ++k) {
            Expr c = a.reduce(last.residuals[k]);
            if (!admitted.empty()) c = divide(c, admitted).remainder;
            if (c.is_zero()) continue;
            if (!c.has_phase_vars()) {
                a.status.inconsistent = true;
                a.status.witness = to_string(c, a.table());
                a.status.generations = gen;
                a.status.diagnostic = "inconsistent: " + a.status.witness + " must vanish";
                return a;
            }
            c = primitive_part(c);
            admitted.push_back(c);
            Constraint nc;
            nc.name = fresh_name(a, "psi", a.constraints.size() + 1);
            nc.expr = c;
            nc.generation = gen;
            nc.parent = last.residual_rows[k];
            a.constraints.push_back(std::move(nc));
        }
        if (a.constraints.size() == before) {
            a.status.converged = true;
            a.status.generations = gen;
            break;
        }
    }

    a.primary_multipliers = to_multiplier_solution(last, us, a.table());
    auto psi = a.constraint_exprs();
    a.h_total = a.model.h0 + multiplier_combination(a.primary_multipliers, psi);
    for (std::size_t i = P; i < a.constraints.size(); ++i)
        a.model.header.table.add_multiplier(fresh_name(a, "u", i + 1));
    return a;
}

ConstraintAnalysis classify_constraints(ConstraintAnalysis a) {
    if (!a.status.converged) throw AnalysisError("classification needs a converged consistency run");
    const std::size_t N = a.constraints.size();
    a.delta_weak.assign(N, std::vector<Expr>(N));
    a.window_deviations.clear();
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = i + 1; j < N; ++j) {
            a.delta_weak[i][j] = a.weak_constraint_bracket(i, j, &a.window_deviations);
            a.delta_weak[j][i] = -a.delta_weak[i][j];
        }

    VarTable scratch = a.table();
    std::vector<Var> cs;
    for (std::size_t j = 0; j < N; ++j) cs.push_back(Var::u(scratch.add_multiplier("nullc" + std::to_string(j))));
    std::vector<Expr> rows;
    for (std::size_t i = 0; i < N; ++i) {
        Expr r;
        for (std::size_t j = 0; j < N; ++j)
            if (!a.delta_weak[i][j].is_zero()) r += a.delta_weak[i][j] * Expr::var(cs[j]);
        rows.push_back(r);
    }
    LinearSolution sol;
    try {
        sol = solve_linear_system(rows, cs, scratch, [&](const Expr& e) { return a.reduce(e); });
    } catch (const NonUnitPivot& e) {
        throw AnalysisError(std::string("rank instability: ") + e.what());
    }
    auto index_of = [&](Var v) { return static_cast<std::size_t>(v.index - cs.front().index); };

    a.first_class.clear();
    a.second_class.clear();
    for (Var v : sol.pivot_unknowns) {
        a.second_class.push_back(index_of(v));
        a.constraints[index_of(v)].cls = ConstraintClass::Second;
    }
    std::sort(a.second_class.begin(), a.second_class.end());
    for (std::size_t f = 0; f < sol.free_unknowns.size(); ++f) {
        std::size_t own = index_of(sol.free_unknowns[f]);
        a.constraints[own].cls = ConstraintClass::First;
        FirstClassGenerator g;
        std::map<std::size_t, Expr> comb;
        Expr phi;
        for (const auto& [v, coef] : sol.null_space[f]) {
            if (coef.is_zero()) continue;
            comb[index_of(v)] = coef;
            phi += coef * a.constraints[index_of(v)].expr;
        }
        if (comb.size() == 1) {
            comb.begin()->second = Expr(1);
            phi = a.constraints[comb.begin()->first].expr;
        }
        Expr prim = comb.size() == 1 ? phi : primitive_part(phi);
        if (prim != phi) {
            Monomial shift = prim.leading().mono / phi.leading().mono;
            Rational scale = prim.leading().coef / phi.leading().coef;
            for (auto& [k, coef] : comb) coef = coef.times(shift, scale);
        }
        g.expr = prim;
        g.combination = std::move(comb);
        if (g.combination.size() == 1)
            g.name = a.constraints[own].name;
        else
            g.name = "phi" + std::to_string(a.first_class.size() + 1);
        a.first_class.push_back(std::move(g));
    }
    if (!a.second_class.empty()) {
        std::vector<Expr> chi;
        for (auto i : a.second_class) chi.push_back(a.constraints[i].expr);
        try {
            a.block = make_second_class_block(chi, a.model, *a.reducer);
        } catch (const SingularLambda& e) {
            throw AnalysisError(std::string("second-class block: ") + e.what());
        }
    } else {
        a.block.reset();
    }
    a.classified = true;
    return a;
}

MultiplierSolution solve_multipliers(const ConstraintAnalysis& a) {
    const std::size_t N = a.constraints.size();
    std::vector<Var> us;
    for (std::size_t b = 0; b < N; ++b) us.push_back(Var::u(static_cast<std::uint32_t>(b)));
    std::vector<Expr> eqs;
    for (std::size_t i = 0; i < N; ++i) {
        Expr eq = a.reduce(poisson_bracket(a.constraints[i].expr, a.model.h0, a.model));
        for (std::size_t b = 0; b < N; ++b) {
            Expr w = a.classified ? a.delta_weak[i][b] : a.weak_constraint_bracket(i, b, nullptr);
            if (!w.is_zero()) eq += w * Expr::var(us[b]);
        }
        eqs.push_back(eq);
    }
    LinearSolution sol = solve_linear_system(eqs, us, a.table(), [&](const Expr& e) { return a.reduce(e); });
    if (!sol.residuals.empty())
        throw AnalysisError("multiplier equations leave an unresolved condition: " +
                            to_string(sol.residuals.front(), a.table()));
    return to_multiplier_solution(sol, us, a.table());
}

namespace {

Monomial phase_part(const Monomial& m) {
    std::vector<Factor> fs;
    for (const auto& f : m.factors())
        if (!in_param_block(f.var.kind)) fs.push_back(f);
    return Monomial::from_factors(std::move(fs));
}

// Constant (phase-independent) f_c with B = sum_c f_c G_c, if they exist.
std::optional<std::map<std::size_t, Expr>> constant_fit(const Expr& B, const std::vector<Expr>& gens,
                                                        const VarTable& table) {
    std::set<Monomial, MonomialLeads> target;
    for (const auto& t : B.terms()) target.insert(phase_part(t.mono));
    std::vector<std::size_t> cand;
    for (std::size_t c = 0; c < gens.size(); ++c)
        for (const auto& t : gens[c].terms())
            if (target.count(phase_part(t.mono))) {
                cand.push_back(c);
                break;
            }
    if (cand.empty()) return std::nullopt;
    VarTable scratch = table;
    std::vector<Var> fs;
    for (std::size_t k = 0; k < cand.size(); ++k)
        fs.push_back(Var::u(scratch.add_multiplier("fitf" + std::to_string(k))));
    std::map<Monomial, Expr, MonomialLeads> eqs;
    for (const auto& t : B.terms()) {
        Monomial ph = phase_part(t.mono);
        eqs[ph] -= Expr::term(t.mono / ph, t.coef);
    }
    for (std::size_t k = 0; k < cand.size(); ++k)
        for (const auto& t : gens[cand[k]].terms()) {
            Monomial ph = phase_part(t.mono);
            eqs[ph] += Expr::term(t.mono / ph, t.coef) * Expr::var(fs[k]);
        }
    std::vector<Expr> list;
    for (auto& [m, e] : eqs) list.push_back(e);
    try {
        LinearSolution sol = solve_linear_system(list, fs, scratch);
        if (!sol.residuals.empty()) return std::nullopt;
        std::map<std::size_t, Expr> out;
        for (std::size_t k = 0; k < cand.size(); ++k) {
            const Expr& v = sol.particular.at(fs[k]);
            if (!v.is_zero()) out[cand[k]] = v;
        }
        return out;
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::optional<int> generator_label(const ConstraintAnalysis& a, const FirstClassGenerator& g) {
    std::optional<int> label;
    for (const auto& [k, coef] : g.combination) {
        auto l = a.constraints[k].label;
        if (!l) return std::nullopt;
        if (!label || std::abs(*l) > std::abs(*label)) label = l;
    }
    return label;
}

}  // namespace

GaugeAlgebra gauge_algebra(const ConstraintAnalysis& a) {
    GaugeAlgebra alg;
    const auto& fc = a.first_class;
    std::vector<Expr> gens, projected;
    for (const auto& g : fc) gens.push_back(g.expr);
    std::optional<int> w = a.model.header.window;
    if (w)
        for (const auto& g : gens) projected.push_back(project_to_window(g, a.table(), *w));
    for (std::size_t i = 0; i < fc.size(); ++i)
        for (std::size_t j = i + 1; j < fc.size(); ++j) {
            Expr B = poisson_bracket(gens[i], gens[j], a.model);
            if (B.is_zero()) continue;
            auto li = generator_label(a, fc[i]);
            auto lj = generator_label(a, fc[j]);
            bool win = w && li && lj && a.window_reducer;
            const std::vector<Expr>* basis = &gens;
            const WeakReducer* red = a.reducer.get();
            if (win) {
                if (std::abs(*li) + std::abs(*lj) > *w) {
                    alg.deviations.push_back({i, j, B.size()});
                    continue;
                }
                B = project_to_window(B, a.table(), *w);
                basis = &projected;
                red = a.window_reducer.get();
                if (B.is_zero()) continue;
            }
            if (!red->is_weakly_zero(B))
                throw AnalysisError("bracket of first-class " + fc[i].name + " and " + fc[j].name +
                                    " does not vanish on the surface");
            if (auto fit = constant_fit(B, *basis, a.table())) {
                for (auto& [c, f] : *fit) alg.entries.push_back({i, j, c, f});
                continue;
            }
            Division d = divide(B, *basis);
            if (!red->is_weakly_zero(d.remainder))
                throw AnalysisError("bracket of " + fc[i].name + " and " + fc[j].name +
                                    " is not a combination of first-class constraints");
            ++alg.non_constant;
            for (std::size_t c = 0; c < d.quotients.size(); ++c)
                if (!d.quotients[c].is_zero()) alg.entries.push_back({i, j, c, d.quotients[c]});
        }
    return alg;
}

ConstraintAnalysis analyze(const PhaseSpaceModel& model, const ConsistencyOptions& options) {
    ConstraintAnalysis a = run_consistency(model, options);
    if (!a.status.converged) return a;
    a = classify_constraints(std::move(a));
    a.multipliers = solve_multipliers(a);
    a.algebra = gauge_algebra(a);
    return a;
}

Expr gauge_transform(const Expr& F, const std::map<std::size_t, Expr>& params, const ConstraintAnalysis& a) {
    Expr out;
    for (const auto& [k, u] : params) out += u * poisson_bracket(F, a.first_class.at(k).expr, a.model);
    return a.reduce(out);
}

ObservableReport check_observable(const Expr& F, const ConstraintAnalysis& a) {
    ObservableReport r;
    for (const auto& g : a.first_class) {
        Expr w = a.weak_bracket(F, g.expr);
        if (!w.is_zero()) r.offending.emplace_back(g.name, w);
    }
    r.is_observable = r.offending.empty();
    Expr wh = a.weak_bracket(F, a.model.h0);
    if (!wh.is_zero()) r.offending.emplace_back("H0", wh);
    r.is_conserved_charge = r.is_observable && wh.is_zero();
    return r;
}

Division decompose_in_constraints(const Expr& e, const ConstraintAnalysis& a) {
    return divide(e, a.constraint_exprs());
}

}  // namespace cforge
