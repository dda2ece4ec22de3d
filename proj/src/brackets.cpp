#include "cforge/brackets.hpp"

#include <set>

#include "cforge/errors.hpp"
#include "cforge/modes.hpp"

namespace cforge {

namespace {

void collect_pairs(const Expr& e, std::set<std::uint32_t>& qs, std::set<std::uint32_t>& ps) {
    for (const auto& t : e.terms())
        for (const auto& f : t.mono.factors()) {
            if (f.var.kind == VarKind::Coordinate)
                qs.insert(f.var.index);
            else if (f.var.kind == VarKind::Momentum)
                ps.insert(f.var.index);
        }
}

}  // namespace

Expr poisson_bracket(const Expr& F, const Expr& G, const PhaseSpaceModel& model) {
    if (F.is_zero() || G.is_zero()) return Expr();
    std::set<std::uint32_t> fq, fp, gq, gp;
    collect_pairs(F, fq, fp);
    collect_pairs(G, gq, gp);
    std::set<std::uint32_t> pairs;
    for (auto i : fq)
        if (gp.count(i)) pairs.insert(i);
    for (auto i : fp)
        if (gq.count(i)) pairs.insert(i);
    const auto* rules = model.header.rules.empty() ? nullptr : &model.header.rules;
    Expr out;
    for (auto i : pairs) {
        Expr term;
        if (fq.count(i) && gp.count(i)) term += differentiate(F, Var::q(i), rules) * differentiate(G, Var::p(i), rules);
        if (fp.count(i) && gq.count(i)) term -= differentiate(F, Var::p(i), rules) * differentiate(G, Var::q(i), rules);
        const Expr& c = model.header.bracket_scale[i];
        out += c == Expr(1) ? term : term * c;
    }
    return out;
}

ExprMatrix weak_inverse(const ExprMatrix& m, const VarTable& table, const WeakReducer& reducer) {
    std::size_t n = m.size();
    ExprMatrix a = m, inv(n, std::vector<Expr>(n));
    for (std::size_t i = 0; i < n; ++i) {
        inv[i][i] = Expr(1);
        for (auto& e : a[i]) e = reducer.reduce(e);
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::optional<std::size_t> piv;
        for (std::size_t r = col; r < n; ++r) {
            if (a[r][col].is_zero() || !is_unit(a[r][col], table)) continue;
            if (!piv || (a[r][col].is_number() && !a[*piv][col].is_number())) piv = r;
            if (a[r][col].is_number()) break;
        }
        if (!piv) {
            std::string witness = "0";
            for (std::size_t r = col; r < n; ++r)
                if (!a[r][col].is_zero()) witness = to_string(a[r][col], table);
            throw SingularLambda("bracket matrix is not weakly invertible (column " + std::to_string(col + 1) +
                                 ", entry " + witness + ")");
        }
        std::swap(a[col], a[*piv]);
        std::swap(inv[col], inv[*piv]);
        Expr s = a[col][col].inverse_monomial();
        for (std::size_t j = 0; j < n; ++j) {
            a[col][j] = reducer.reduce(a[col][j] * s);
            inv[col][j] = reducer.reduce(inv[col][j] * s);
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || a[r][col].is_zero()) continue;
            Expr f = a[r][col];
            for (std::size_t j = 0; j < n; ++j) {
                if (!a[col][j].is_zero()) a[r][j] = reducer.reduce(a[r][j] - f * a[col][j]);
                if (!inv[col][j].is_zero()) inv[r][j] = reducer.reduce(inv[r][j] - f * inv[col][j]);
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Expr acc = i == j ? Expr(-1) : Expr();
            for (std::size_t k = 0; k < n; ++k)
                if (!inv[i][k].is_zero() && !m[k][j].is_zero()) acc += inv[i][k] * m[k][j];
            if (!reducer.is_weakly_zero(acc))
                throw SingularLambda("weak inverse failed validation at entry (" + std::to_string(i + 1) + ", " +
                                     std::to_string(j + 1) + ")");
        }
    return inv;
}

SecondClassBlock make_second_class_block(std::vector<Expr> chi, const PhaseSpaceModel& model,
                                         const WeakReducer& reducer) {
    SecondClassBlock b;
    b.chi = std::move(chi);
    std::size_t n = b.chi.size();
    if (n % 2) throw SingularLambda("odd number of second-class constraints");
    b.delta.assign(n, std::vector<Expr>(n));
    b.delta_weak.assign(n, std::vector<Expr>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            b.delta[i][j] = poisson_bracket(b.chi[i], b.chi[j], model);
            b.delta[j][i] = -b.delta[i][j];
            b.delta_weak[i][j] = reducer.reduce(b.delta[i][j]);
            b.delta_weak[j][i] = -b.delta_weak[i][j];
        }
    b.lambda = weak_inverse(b.delta, model.table(), reducer);
    return b;
}

DiracResult dirac_bracket(const Expr& F, const Expr& G, const SecondClassBlock& block, const PhaseSpaceModel& model,
                          const WeakReducer& reducer) {
    Expr strong = poisson_bracket(F, G, model);
    std::size_t n = block.chi.size();
    std::vector<Expr> left(n), right(n);
    for (std::size_t i = 0; i < n; ++i) {
        left[i] = poisson_bracket(F, block.chi[i], model);
        right[i] = poisson_bracket(block.chi[i], G, model);
    }
    for (std::size_t m = 0; m < n; ++m) {
        if (left[m].is_zero()) continue;
        Expr row;
        for (std::size_t k = 0; k < n; ++k)
            if (!block.lambda[m][k].is_zero() && !right[k].is_zero()) row += block.lambda[m][k] * right[k];
        if (!row.is_zero()) strong -= left[m] * row;
    }
    return {strong, reducer.reduce(strong)};
}

Expr project_to_window(const Expr& e, const VarTable& table, int window) {
    std::vector<Term> keep;
    for (const auto& t : e.terms()) {
        bool inside = true;
        for (const auto& f : t.mono.factors()) {
            if (f.var.kind != VarKind::Coordinate && f.var.kind != VarKind::Momentum) continue;
            const auto& label = table.pair(f.var.index).mode;
            if (!label.empty() && Mode::from_label(label).max_abs() > window) {
                inside = false;
                break;
            }
        }
        if (inside) keep.push_back(t);
    }
    return Expr::from_sorted(std::move(keep));
}

}  // namespace cforge
