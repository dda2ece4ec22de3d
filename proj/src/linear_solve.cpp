#include "cforge/linear_solve.hpp"

#include <algorithm>

#include "cforge/errors.hpp"

namespace cforge {

namespace {

struct Row {
    std::map<std::size_t, Expr> coef;
    Expr rest;
};

Row split_affine(const Expr& eq, std::span<const Var> unknowns, const VarTable& table) {
    std::map<Var, std::size_t> column;
    for (std::size_t i = 0; i < unknowns.size(); ++i) column.emplace(unknowns[i], i);
    std::map<std::size_t, std::vector<Term>> parts;
    std::vector<Term> rest;
    for (const auto& t : eq.terms()) {
        std::optional<std::size_t> col;
        for (const auto& f : t.mono.factors()) {
            auto it = column.find(f.var);
            if (it == column.end()) continue;
            if (col || f.exp != Exponent(1))
                throw NotAffine("equation " + to_string(eq, table) + " is not affine in the unknowns");
            col = it->second;
        }
        if (col)
            parts[*col].push_back({t.mono.without(unknowns[*col]), t.coef});
        else
            rest.push_back(t);
    }
    Row row;
    for (auto& [c, terms] : parts) row.coef[c] = Expr::from_terms(std::move(terms));
    row.rest = Expr::from_terms(std::move(rest));
    return row;
}

int pivot_rank(const Expr& e, const VarTable& table) {
    if (e.is_zero() || !is_unit(e, table)) return -1;
    return e.is_number() ? 2 : 1;
}

}  // namespace

LinearSolution solve_linear_system(std::span<const Expr> eqs, std::span<const Var> unknowns, const VarTable& table,
                                   const Reducer& reduce) {
    auto red = [&](const Expr& e) { return reduce ? reduce(e) : e; };
    std::vector<Row> rows;
    rows.reserve(eqs.size());
    for (const auto& eq : eqs) {
        Row r = split_affine(eq, unknowns, table);
        for (auto it = r.coef.begin(); it != r.coef.end();) {
            it->second = red(it->second);
            it = it->second.is_zero() ? r.coef.erase(it) : std::next(it);
        }
        r.rest = red(r.rest);
        rows.push_back(std::move(r));
    }

    std::vector<bool> used(rows.size(), false);
    std::vector<std::optional<std::size_t>> pivot_row(unknowns.size());
    for (std::size_t col = 0; col < unknowns.size(); ++col) {
        std::optional<std::size_t> best;
        int best_rank = 0;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (used[r]) continue;
            auto it = rows[r].coef.find(col);
            if (it == rows[r].coef.end()) continue;
            int rank = pivot_rank(it->second, table);
            if (rank > best_rank) {
                best_rank = rank;
                best = r;
                if (rank == 2) break;
            }
        }
        if (!best) continue;
        Row& p = rows[*best];
        used[*best] = true;
        pivot_row[col] = *best;
        Expr inv = p.coef.at(col).inverse_monomial();
        for (auto& [c, e] : p.coef) e = c == col ? Expr(1) : red(e * inv);
        p.rest = red(p.rest * inv);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (r == *best) continue;
            auto it = rows[r].coef.find(col);
            if (it == rows[r].coef.end()) continue;
            Expr factor = it->second;
            rows[r].coef.erase(it);
            for (const auto& [c, e] : p.coef) {
                if (c == col) continue;
                Expr updated = red(rows[r].coef[c] - factor * e);
                if (updated.is_zero())
                    rows[r].coef.erase(c);
                else
                    rows[r].coef[c] = updated;
            }
            rows[r].rest = red(rows[r].rest - factor * p.rest);
        }
    }

    LinearSolution sol;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (used[r]) continue;
        if (!rows[r].coef.empty()) throw NonUnitPivot(to_string(rows[r].coef.begin()->second, table));
        if (rows[r].rest.is_zero()) continue;
        if (!rows[r].rest.has_phase_vars()) throw InconsistentSystem(to_string(rows[r].rest, table));
        sol.residuals.push_back(rows[r].rest);
        sol.residual_rows.push_back(r);
    }
    for (std::size_t col = 0; col < unknowns.size(); ++col) {
        if (pivot_row[col]) {
            sol.pivot_unknowns.push_back(unknowns[col]);
            sol.particular[unknowns[col]] = -rows[*pivot_row[col]].rest;
        } else {
            sol.free_unknowns.push_back(unknowns[col]);
            sol.particular[unknowns[col]] = Expr();
        }
    }
    for (std::size_t col = 0; col < unknowns.size(); ++col) {
        if (pivot_row[col]) continue;
        std::map<Var, Expr> dir;
        dir[unknowns[col]] = Expr(1);
        for (std::size_t pc = 0; pc < unknowns.size(); ++pc) {
            if (!pivot_row[pc]) continue;
            const auto& coef = rows[*pivot_row[pc]].coef;
            auto it = coef.find(col);
            if (it != coef.end()) dir[unknowns[pc]] = -it->second;
        }
        sol.null_space.push_back(std::move(dir));
    }
    return sol;
}

}  // namespace cforge
