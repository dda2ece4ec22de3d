#include "cforge/model.hpp"

#include <algorithm>
#include <sstream>

#include "cforge/errors.hpp"
#include "cforge/linear_solve.hpp"
#include "cforge/modes.hpp"
#include "cforge/parse.hpp"
#include "cforge/weak_reduce.hpp"

namespace cforge {

namespace {

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::vector<std::string> words(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

struct Line {
    std::size_t number;
    std::string keyword;
    std::string rest;
};

bool valid_identifier(const std::string& s) {
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c); });
}

int parse_int(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ModelError(line, "expected an integer, got '" + s + "'");
    }
}

// "name = expr" or "name[k] = expr"
struct Binding {
    std::string name;
    std::optional<int> label;
    std::string expr;
};

Binding split_binding(const Line& l) {
    auto eq = l.rest.find('=');
    if (eq == std::string::npos) throw ModelError(l.number, "expected 'name = expression'");
    Binding b;
    std::string lhs = trim(l.rest.substr(0, eq));
    b.expr = trim(l.rest.substr(eq + 1));
    auto br = lhs.find('[');
    if (br != std::string::npos) {
        if (lhs.back() != ']') throw ModelError(l.number, "malformed label in '" + lhs + "'");
        b.label = parse_int(trim(lhs.substr(br + 1, lhs.size() - br - 2)), l.number);
        lhs = trim(lhs.substr(0, br));
    }
    if (!valid_identifier(lhs)) throw ModelError(l.number, "invalid name '" + lhs + "'");
    b.name = lhs;
    return b;
}

Expr parse_at(const std::string& text, const VarTable& table, std::size_t line) {
    try {
        return parse_expr(text, table);
    } catch (const UnknownIdentifier& e) {
        throw UndeclaredSymbol(line, e.token());
    } catch (const ParseError& e) {
        throw ModelError(line, e.what());
    }
}

}  // namespace

std::string to_string(Provenance p) { return p == Provenance::Legendre ? "legendre" : "direct"; }

ModelSpec parse_model(const std::string& text) {
    std::vector<Line> lines;
    {
        std::istringstream in(text);
        std::size_t n = 0;
        for (std::string raw; std::getline(in, raw);) {
            ++n;
            auto hash = raw.find('#');
            if (hash != std::string::npos) raw.erase(hash);
            raw = trim(raw);
            if (raw.empty()) continue;
            auto sp = raw.find_first_of(" \t");
            Line l{n, raw.substr(0, sp), sp == std::string::npos ? "" : trim(raw.substr(sp + 1))};
            lines.push_back(std::move(l));
        }
    }

    ModelHeader h;
    std::vector<std::pair<std::string, std::size_t>> nonzero;
    std::optional<Line> lagrangian, h0;
    bool direct = false;
    std::vector<Line> primaries, observables, charts, brackets;
    std::optional<Line> mode_bracket;
    std::vector<std::string> fields;
    std::optional<int> mode_dim;
    std::size_t modes_line = 0;

    for (const auto& l : lines) {
        const auto& k = l.keyword;
        if (k == "model") {
            if (l.rest.empty() || l.rest.find_first_of(" \t") != std::string::npos)
                throw ModelError(l.number, "model name must be a single word");
            h.name = l.rest;
        } else if (k == "params") {
            for (const auto& tok : words(l.rest)) {
                std::string name = tok, flags;
                auto comma = tok.find(',');
                if (comma != std::string::npos) {
                    name = tok.substr(0, comma);
                    flags = tok.substr(comma + 1);
                }
                std::optional<Rational> value;
                auto eq = name.find('=');
                if (eq != std::string::npos) {
                    try {
                        value = parse_rational(name.substr(eq + 1));
                    } catch (const std::exception&) {
                        throw ModelError(l.number, "invalid parameter value in '" + tok + "'");
                    }
                    name = name.substr(0, eq);
                }
                bool positive = false;
                std::istringstream fl(flags);
                for (std::string f; std::getline(fl, f, ',');) {
                    if (f == "positive")
                        positive = true;
                    else
                        throw ModelError(l.number, "unknown parameter flag '" + f + "'");
                }
                if (!valid_identifier(name)) throw ModelError(l.number, "invalid parameter name '" + name + "'");
                if (positive && value && *value <= 0)
                    throw ModelError(l.number, "parameter '" + name + "' declared positive with a non-positive value");
                try {
                    h.table.add_param(name, positive, value);
                } catch (const std::invalid_argument& e) {
                    throw ModelError(l.number, e.what());
                }
            }
        } else if (k == "coords") {
            for (const auto& c : words(l.rest)) {
                if (!valid_identifier(c)) throw ModelError(l.number, "invalid coordinate name '" + c + "'");
                try {
                    h.table.add_pair(c);
                } catch (const std::invalid_argument& e) {
                    throw ModelError(l.number, e.what());
                }
            }
        } else if (k == "nonzero") {
            for (const auto& c : words(l.rest)) nonzero.emplace_back(c, l.number);
        } else if (k == "metric") {
            std::string r = l.rest;
            if (r.rfind("diag(", 0) != 0 || r.back() != ')') throw ModelError(l.number, "expected metric diag(...)");
            std::istringstream in(r.substr(5, r.size() - 6));
            for (std::string s; std::getline(in, s, ',');) {
                int v = parse_int(trim(s), l.number);
                if (v != 1 && v != -1) throw ModelError(l.number, "metric entries must be +1 or -1");
                h.metric.push_back(v);
            }
        } else if (k == "modes") {
            auto w = words(l.rest);
            if (w.empty()) throw ModelError(l.number, "modes needs a cutoff");
            h.modes = parse_int(w[0], l.number);
            if (*h.modes < 1) throw ModelError(l.number, "mode cutoff must be at least 1");
            mode_dim = 1;
            if (w.size() == 3 && w[1] == "dim")
                mode_dim = parse_int(w[2], l.number);
            else if (w.size() != 1)
                throw ModelError(l.number, "expected 'modes K [dim d]'");
            modes_line = l.number;
        } else if (k == "fields") {
            for (const auto& f : words(l.rest)) {
                if (!valid_identifier(f)) throw ModelError(l.number, "invalid field name '" + f + "'");
                fields.push_back(f);
            }
        } else if (k == "mode_bracket") {
            mode_bracket = l;
        } else if (k == "bracket") {
            brackets.push_back(l);
        } else if (k == "window") {
            h.window = parse_int(l.rest, l.number);
        } else if (k == "lagrangian") {
            if (lagrangian) throw ModelError(l.number, "duplicate lagrangian");
            lagrangian = l;
        } else if (k == "direct") {
            direct = true;
        } else if (k == "h0") {
            h0 = l;
        } else if (k == "primary") {
            primaries.push_back(l);
        } else if (k == "parameter_time") {
            h.parameter_time = true;
        } else if (k == "observable") {
            observables.push_back(l);
        } else if (k == "chart") {
            charts.push_back(l);
        } else {
            throw ModelError(l.number, "unknown directive '" + k + "'");
        }
    }

    if (!fields.empty()) {
        if (!h.modes) throw ModelError(0, "fields given without a modes directive");
        for (const auto& mode : enumerate_modes(*h.modes, *mode_dim))
            for (const auto& f : fields) {
                try {
                    h.table.add_pair(mode_variable_name(f, mode), {}, {}, mode.label());
                } catch (const std::invalid_argument& e) {
                    throw ModelError(modes_line, e.what());
                }
            }
    }
    if (h.table.pair_count() == 0) throw ModelError(0, "no coordinates declared");
    for (const auto& [name, line] : nonzero) {
        auto v = h.table.lookup(name);
        if (!v) throw UndeclaredSymbol(line, name);
        try {
            h.table.mark_nonzero(*v);
        } catch (const std::invalid_argument& e) {
            throw ModelError(line, e.what());
        }
    }

    h.bracket_scale.assign(h.table.pair_count(), Expr(1));
    if (mode_bracket) {
        auto w = words(mode_bracket->rest);
        if (w.size() != 2) throw ModelError(mode_bracket->number, "expected 'mode_bracket <zero> <nonzero>'");
        Expr zero = parse_at(w[0], h.table, mode_bracket->number);
        Expr other = parse_at(w[1], h.table, mode_bracket->number);
        for (std::size_t i = 0; i < h.table.pair_count(); ++i) {
            const auto& mode = h.table.pair(i).mode;
            if (mode.empty()) continue;
            bool is_zero = std::all_of(mode.begin() + 1, mode.end(), [](int x) { return x == 0; });
            h.bracket_scale[i] = is_zero ? zero : other;
        }
    }
    for (const auto& l : brackets) {
        auto b = split_binding(l);
        auto v = h.table.lookup(b.name);
        if (!v || v->kind != VarKind::Coordinate) throw UndeclaredSymbol(l.number, b.name);
        h.bracket_scale[v->index] = parse_at(b.expr, h.table, l.number);
    }
    for (std::size_t i = 0; i < h.bracket_scale.size(); ++i) {
        const Expr& s = h.bracket_scale[i];
        if (s.is_zero() || s.has_phase_vars() || !is_unit(s, h.table))
            throw ModelError(0, "bracket constant for " + h.table.pair(i).coord + " must be a nonzero parameter monomial");
    }

    if (lagrangian && direct) throw ModelError(lagrangian->number, "a model is either lagrangian or direct");
    if (!lagrangian && !direct) throw ModelError(0, "missing 'lagrangian' or 'direct'");

    auto finish_observables = [&](ModelHeader& hd) {
        for (const auto& l : observables) {
            auto b = split_binding(l);
            hd.observables.push_back({b.name, b.expr, parse_at(b.expr, hd.table, l.number)});
        }
        for (const auto& l : charts) {
            auto b = split_binding(l);
            hd.observables.push_back({b.name, b.expr, std::nullopt});
        }
    };

    if (lagrangian) {
        if (h0 || !primaries.empty())
            throw ModelError(lagrangian->number, "h0/primary lines belong to direct models");
        LagrangianSpec spec;
        spec.lagrangian = parse_at(lagrangian->rest, h.table, lagrangian->number);
        for (const auto& v : spec.lagrangian.variables())
            if (v.kind == VarKind::Momentum)
                throw ModelError(lagrangian->number, "the Lagrangian may not contain momenta");
        spec.header = std::move(h);
        finish_observables(spec.header);
        try {
            decompose_lagrangian(spec);
        } catch (const NonQuadraticLagrangian& e) {
            throw NonQuadraticLagrangian(lagrangian->number, e.what());
        }
        return spec;
    }
    DirectSpec spec;
    if (!h0) throw ModelError(0, "direct model without h0");
    spec.h0 = parse_at(h0->rest, h.table, h0->number);
    for (const auto& l : primaries) {
        auto b = split_binding(l);
        Expr e = parse_at(b.expr, h.table, l.number);
        for (const auto& v : e.variables())
            if (v.kind == VarKind::Velocity) throw ModelError(l.number, "constraints may not contain velocities");
        spec.primaries.push_back({b.name, e, b.label});
    }
    for (const auto& v : spec.h0.variables())
        if (v.kind == VarKind::Velocity) throw ModelError(h0->number, "h0 may not contain velocities");
    spec.header = std::move(h);
    finish_observables(spec.header);
    return spec;
}

void decompose_lagrangian(LagrangianSpec& spec) {
    const auto& t = spec.header.table;
    std::size_t n = t.pair_count();
    spec.mass.assign(n, std::vector<Expr>(n));
    spec.linear.assign(n, Expr());
    std::vector<std::vector<std::vector<Term>>> mass_terms(n, std::vector<std::vector<Term>>(n));
    std::vector<std::vector<Term>> lin_terms(n);
    std::vector<Term> pot_terms;
    for (const auto& term : spec.lagrangian.terms()) {
        std::vector<std::pair<std::uint32_t, std::int64_t>> vs;
        std::vector<Factor> rest;
        for (const auto& f : term.mono.factors()) {
            if (f.var.kind == VarKind::Velocity) {
                if (!f.exp.is_integer() || f.exp.is_negative())
                    throw NonQuadraticLagrangian(0, "the Lagrangian is not polynomial in the velocities");
                vs.emplace_back(f.var.index, f.exp.num);
            } else {
                rest.push_back(f);
            }
        }
        Monomial r = Monomial::from_factors(std::move(rest));
        std::int64_t deg = 0;
        for (const auto& [i, e] : vs) deg += e;
        if (deg == 0) {
            pot_terms.push_back({r, -term.coef});
        } else if (deg == 1) {
            lin_terms[vs[0].first].push_back({r, term.coef});
        } else if (deg == 2 && vs.size() == 1) {
            mass_terms[vs[0].first][vs[0].first].push_back({r, term.coef * 2});
        } else if (deg == 2) {
            mass_terms[vs[0].first][vs[1].first].push_back({r, term.coef});
            mass_terms[vs[1].first][vs[0].first].push_back({r, term.coef});
        } else {
            throw NonQuadraticLagrangian(
                0, "the Lagrangian is not quadratic in the velocities (term of degree " + std::to_string(deg) +
                       "); enter the model through the direct path with h0 and primary constraints");
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        spec.linear[i] = Expr::from_terms(std::move(lin_terms[i]));
        for (std::size_t j = 0; j < n; ++j)
            if (!mass_terms[i][j].empty()) spec.mass[i][j] = Expr::from_terms(std::move(mass_terms[i][j]));
    }
    spec.potential = Expr::from_terms(std::move(pot_terms));

    Expr back = -spec.potential;
    for (std::size_t i = 0; i < n; ++i) {
        Expr vi = Expr::var(Var::v(static_cast<std::uint32_t>(i)));
        back += spec.linear[i] * vi;
        for (std::size_t j = 0; j < n; ++j)
            if (!spec.mass[i][j].is_zero())
                back += (spec.mass[i][j] * vi * Expr::var(Var::v(static_cast<std::uint32_t>(j)))).scaled(Rational(1, 2));
    }
    if (back != spec.lagrangian) throw NonQuadraticLagrangian(0, "mass-matrix decomposition does not reassemble L");
}

namespace {

void add_multipliers(PhaseSpaceModel& m) {
    for (std::size_t i = 0; i < m.primaries.size(); ++i) m.header.table.add_multiplier("u" + std::to_string(i + 1));
}

void check_parameter_time(const PhaseSpaceModel& m) {
    if (!m.header.parameter_time) return;
    std::vector<Expr> cs;
    for (const auto& p : m.primaries) cs.push_back(p.expr);
    Expr r = weak_reduce(m.h0, cs, m.header.table);
    if (!r.is_zero())
        throw ModelError(0, "model is flagged parameter_time but H0 does not vanish on the primary surface (remainder " +
                                to_string(r, m.header.table) + ")");
}

}  // namespace

PhaseSpaceModel legendre_transform(const LagrangianSpec& spec) {
    const auto& t = spec.header.table;
    std::size_t n = t.pair_count();
    std::vector<Expr> eqs;
    std::vector<Var> vel;
    for (std::size_t i = 0; i < n; ++i) {
        auto ii = static_cast<std::uint32_t>(i);
        vel.push_back(Var::v(ii));
        Expr eq = Expr::var(Var::p(ii)) - spec.linear[i];
        for (std::size_t j = 0; j < n; ++j)
            if (!spec.mass[i][j].is_zero()) eq -= spec.mass[i][j] * Expr::var(Var::v(static_cast<std::uint32_t>(j)));
        eqs.push_back(eq);
    }
    LinearSolution sol = solve_linear_system(eqs, vel, t);

    PhaseSpaceModel m;
    m.header = spec.header;
    m.provenance = Provenance::Legendre;
    for (const auto& r : sol.residuals) {
        Expr c = primitive_part(r);
        bool dup = std::any_of(m.primaries.begin(), m.primaries.end(), [&](const NamedExpr& p) { return p.expr == c; });
        if (!dup) m.primaries.push_back({"psi" + std::to_string(m.primaries.size() + 1), c, std::nullopt});
    }
    Expr pv;
    for (std::size_t i = 0; i < n; ++i) {
        auto ii = static_cast<std::uint32_t>(i);
        pv += Expr::var(Var::p(ii)) * sol.particular.at(Var::v(ii));
    }
    m.h0 = pv - substitute(spec.lagrangian, sol.particular);

    // H0 must not depend on the undetermined velocity directions on the surface.
    if (!sol.null_space.empty()) {
        VarTable scratch = t;
        std::map<Var, Expr> shifted = sol.particular;
        for (std::size_t j = 0; j < sol.null_space.size(); ++j) {
            Expr lam = Expr::var(Var::u(scratch.add_multiplier("lambda" + std::to_string(j))));
            for (const auto& [v, coef] : sol.null_space[j]) shifted[v] += coef * lam;
        }
        Expr pv2;
        for (std::size_t i = 0; i < n; ++i) {
            auto ii = static_cast<std::uint32_t>(i);
            pv2 += Expr::var(Var::p(ii)) * shifted.at(Var::v(ii));
        }
        Expr diff = pv2 - substitute(spec.lagrangian, shifted) - m.h0;
        std::vector<Expr> cs;
        for (const auto& p : m.primaries) cs.push_back(p.expr);
        Expr rem = weak_reduce(diff, cs, scratch);
        if (!rem.is_zero())
            throw IrregularLagrangian(0, "the extremum over free velocities is not constant: " + to_string(rem, scratch));
    }
    add_multipliers(m);
    check_parameter_time(m);
    return m;
}

PhaseSpaceModel build_phase_space(const DirectSpec& spec) {
    PhaseSpaceModel m;
    m.header = spec.header;
    m.provenance = Provenance::Direct;
    m.h0 = spec.h0;
    m.primaries = spec.primaries;
    add_multipliers(m);
    check_parameter_time(m);
    return m;
}

PhaseSpaceModel load_model(const std::string& text) {
    ModelSpec spec = parse_model(text);
    if (auto* l = std::get_if<LagrangianSpec>(&spec)) return legendre_transform(*l);
    return build_phase_space(std::get<DirectSpec>(spec));
}

}  // namespace cforge
