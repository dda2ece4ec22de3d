#include "cforge/weak_reduce.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>
#include <stdexcept>

#include "cforge/errors.hpp"

namespace cforge {

namespace {

using Poly = std::map<Monomial, Rational, MonomialLeads>;

Var inverse_of(Var v) {
    if (v.kind == VarKind::Parameter) return {VarKind::InverseParam, v.index};
    return {VarKind::InversePhase, (static_cast<std::uint32_t>(v.kind) << 28) | v.index};
}

Var original_of(Var inv) {
    if (inv.kind == VarKind::InverseParam) return {VarKind::Parameter, inv.index};
    return {static_cast<VarKind>(inv.index >> 28), inv.index & ((1u << 28) - 1)};
}

Expr monic(const Expr& e) {
    if (e.is_zero()) return e;
    return e.scaled(Rational(1) / e.leading().coef);
}

void axpy(Poly& acc, const Expr& g, const Monomial& shift, const Rational& c) {
    for (const auto& t : g.terms()) {
        Monomial m = t.mono * shift;
        auto it = acc.find(m);
        if (it == acc.end()) {
            acc.emplace(std::move(m), t.coef * c);
        } else {
            it->second += t.coef * c;
            if (it->second == 0) acc.erase(it);
        }
    }
}

// Full normal form of e by the monic basis (skipping index `skip`).
Expr normal_form(const Expr& e, const std::vector<Expr>& basis, std::size_t skip = static_cast<std::size_t>(-1),
                 std::size_t max_terms = 0) {
    if (basis.empty() || e.is_zero()) return e;
    Poly work;
    for (const auto& t : e.terms()) work.emplace(t.mono, t.coef);
    std::vector<Term> rem;
    while (!work.empty()) {
        auto it = work.begin();
        const Expr* hit = nullptr;
        for (std::size_t i = 0; i < basis.size(); ++i) {
            if (i == skip) continue;
            if (basis[i].leading().mono.divides(it->first)) {
                hit = &basis[i];
                break;
            }
        }
        if (!hit) {
            rem.push_back({it->first, it->second});
            work.erase(it);
            continue;
        }
        Monomial shift = it->first / hit->leading().mono;
        Rational c = -it->second;
        axpy(work, *hit, shift, c);
        if (max_terms && work.size() > max_terms) throw std::length_error("reduction blow-up");
    }
    return Expr::from_sorted(std::move(rem));
}

Expr s_poly(const Expr& f, const Expr& g) {
    Monomial l = f.leading().mono.lcm(g.leading().mono);
    return f.times(l / f.leading().mono, Rational(1)) - g.times(l / g.leading().mono, Rational(1));
}

std::vector<Expr> inter_reduce(std::vector<Expr> polys) {
    for (auto& p : polys) p = monic(p);
    polys.erase(std::remove_if(polys.begin(), polys.end(), [](const Expr& e) { return e.is_zero(); }), polys.end());
    bool changed = true;
    while (changed) {
        changed = false;
        std::sort(polys.begin(), polys.end(), [](const Expr& a, const Expr& b) {
            return compare_monomials(a.leading().mono, b.leading().mono) < 0;
        });
        for (std::size_t i = 0; i < polys.size(); ++i) {
            Expr r = monic(normal_form(polys[i], polys, i));
            if (r != polys[i]) {
                changed = true;
                polys[i] = r;
                if (r.is_zero()) {
                    polys.erase(polys.begin() + static_cast<std::ptrdiff_t>(i));
                    break;
                }
            }
        }
    }
    return polys;
}

}  // namespace

WeakReducer::WeakReducer(std::vector<Expr> constraints, const VarTable& table, ReductionOptions options)
    : constraints_(std::move(constraints)), table_(&table), options_(options) {
    for (const auto& c : constraints_) {
        Scaling s = scaling_for(c);
        for (const auto& [i, d] : s.den) {
            auto& cur = scaling_.den[i];
            cur = cur ? std::lcm(cur, d) : d;
        }
    }
    build();
}

WeakReducer::Scaling WeakReducer::scaling_for(const Expr& e) const {
    Scaling s;
    for (const auto& t : e.terms())
        for (const auto& f : t.mono.factors())
            if (f.var.kind == VarKind::Parameter && f.exp.den != 1) {
                auto& cur = s.den[f.var.index];
                cur = cur ? std::lcm(cur, f.exp.den) : f.exp.den;
            }
    return s;
}

Expr WeakReducer::to_ring(const Expr& e, const Scaling& s) const {
    std::vector<Term> terms;
    terms.reserve(e.size());
    for (const auto& t : e.terms()) {
        std::vector<Factor> fs;
        for (const auto& f : t.mono.factors()) {
            Exponent ex = f.exp;
            if (f.var.kind == VarKind::Parameter) {
                auto it = s.den.find(f.var.index);
                if (it != s.den.end()) ex = ex * Exponent(it->second);
                if (!ex.is_integer()) throw std::logic_error("parameter scaling mismatch");
            }
            if (ex.is_negative())
                fs.push_back({inverse_of(f.var), -ex});
            else
                fs.push_back({f.var, ex});
        }
        terms.push_back({Monomial::from_factors(std::move(fs)), t.coef});
    }
    return Expr::from_terms(std::move(terms));
}

Expr WeakReducer::from_ring(const Expr& e, const Scaling& s) const {
    std::vector<Term> terms;
    terms.reserve(e.size());
    for (const auto& t : e.terms()) {
        std::vector<Factor> fs;
        for (const auto& f : t.mono.factors()) {
            Var v = f.var;
            Exponent ex = f.exp;
            if (v.kind == VarKind::InverseParam || v.kind == VarKind::InversePhase) {
                v = original_of(v);
                ex = -ex;
            }
            if (v.kind == VarKind::Parameter) {
                auto it = s.den.find(v.index);
                if (it != s.den.end()) ex = ex * Exponent(1, it->second);
            }
            fs.push_back({v, ex});
        }
        terms.push_back({Monomial::from_factors(std::move(fs)), t.coef});
    }
    return Expr::from_terms(std::move(terms));
}

void WeakReducer::build() {
    std::vector<Expr> gens;
    std::vector<Var> invertible;
    for (const auto& c : constraints_) {
        if (c.is_zero()) continue;
        Expr r = to_ring(c, scaling_);
        gens.push_back(r);
        for (const auto& v : c.variables())
            if (table_->is_invertible(v)) invertible.push_back(v);
    }
    std::sort(invertible.begin(), invertible.end());
    invertible.erase(std::unique(invertible.begin(), invertible.end()), invertible.end());
    for (Var v : invertible)
        gens.push_back(Expr::term(Monomial::of(v) * Monomial::of(inverse_of(v)), Rational(1)) - Expr(1));

    basis_ = inter_reduce(gens);
    for (const auto& b : basis_)
        if (b.is_number()) {
            basis_.assign(1, Expr(1));
            complete_ = true;
            return;
        }
    complete_ = basis_.size() <= 1;
    if (basis_.size() <= 1 || !options_.complete) return;

    // Buchberger with the product and chain criteria, smallest lcm first.
    std::vector<Expr> g = basis_;
    struct Pair {
        std::size_t i, j;
        Monomial lcm;
    };
    std::vector<Pair> pairs;
    std::set<std::pair<std::size_t, std::size_t>> done;
    // Min-heap on the lcm, ties broken by index for determinism.
    auto later = [](const Pair& a, const Pair& b) {
        int c = compare_monomials(a.lcm, b.lcm);
        if (c != 0) return c > 0;
        return std::tie(a.j, a.i) > std::tie(b.j, b.i);
    };
    auto add_pairs = [&](std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            if (g[i].leading().mono.coprime(g[n].leading().mono)) {
                done.insert({i, n});
                continue;
            }
            pairs.push_back({i, n, g[i].leading().mono.lcm(g[n].leading().mono)});
            std::push_heap(pairs.begin(), pairs.end(), later);
        }
    };
    auto is_done = [&](std::size_t a, std::size_t b) { return done.count({std::min(a, b), std::max(a, b)}) > 0; };
    for (std::size_t n = 1; n < g.size(); ++n) add_pairs(n);
    std::size_t processed = 0;
    bool aborted = false;
    try {
        while (!pairs.empty()) {
            std::pop_heap(pairs.begin(), pairs.end(), later);
            Pair pr = pairs.back();
            pairs.pop_back();
            done.insert({pr.i, pr.j});
            bool chain = false;
            for (std::size_t k = 0; k < g.size() && !chain; ++k) {
                if (k == pr.i || k == pr.j || !g[k].leading().mono.divides(pr.lcm)) continue;
                chain = is_done(pr.i, k) && is_done(pr.j, k);
            }
            if (chain) continue;
            if (++processed > options_.max_pairs) {
                aborted = true;
                break;
            }
            Expr r = normal_form(s_poly(g[pr.i], g[pr.j]), g, static_cast<std::size_t>(-1), options_.max_terms);
            if (r.is_zero()) continue;
            if (r.is_number()) {
                basis_.assign(1, Expr(1));
                complete_ = true;
                return;
            }
            if (g.size() >= options_.max_basis) {
                aborted = true;
                break;
            }
            g.push_back(monic(r));
            add_pairs(g.size() - 1);
        }
    } catch (const std::length_error&) {
        aborted = true;
    }
    if (aborted) {
        complete_ = false;
        return;
    }
    // Reduced basis: drop redundant leading monomials, then tail-reduce.
    std::vector<Expr> minimal;
    for (std::size_t i = 0; i < g.size(); ++i) {
        bool redundant = false;
        for (std::size_t j = 0; j < g.size() && !redundant; ++j) {
            if (i == j) continue;
            const auto& lj = g[j].leading().mono;
            const auto& li = g[i].leading().mono;
            if (lj.divides(li) && (!(lj == li) || j < i)) redundant = true;
        }
        if (!redundant) minimal.push_back(g[i]);
    }
    basis_ = inter_reduce(minimal);
    complete_ = true;
}

Expr WeakReducer::reduce(const Expr& e) const {
    if (basis_.empty() || e.is_zero()) return e;
    Scaling need = scaling_for(e);
    for (const auto& [i, d] : need.den) {
        auto it = scaling_.den.find(i);
        if (it == scaling_.den.end() || it->second % d != 0) {
            if (!rescaled_) {
                auto r = std::make_shared<WeakReducer>();
                r->constraints_ = constraints_;
                r->table_ = table_;
                r->options_ = options_;
                r->scaling_ = scaling_;
                for (const auto& [pi, pd] : need.den) {
                    auto& cur = r->scaling_.den[pi];
                    cur = cur ? std::lcm(cur, pd) : pd;
                }
                r->build();
                rescaled_ = r;
            }
            return rescaled_->reduce(e);
        }
    }
    return from_ring(normal_form(to_ring(e, scaling_), basis_), scaling_);
}

std::vector<Expr> WeakReducer::basis() const {
    std::vector<Expr> out;
    for (const auto& b : basis_) out.push_back(from_ring(b, scaling_));
    return out;
}

Division divide(const Expr& e, const std::vector<Expr>& divisors) {
    Division d;
    d.quotients.assign(divisors.size(), Expr());
    std::vector<std::vector<Term>> q(divisors.size());
    Poly work;
    for (const auto& t : e.terms()) work.emplace(t.mono, t.coef);
    std::vector<Term> rem;
    std::size_t steps = 0;
    auto phase_part = [](const Monomial& m) {
        std::vector<Factor> fs;
        for (const auto& f : m.factors())
            if (!in_param_block(f.var.kind)) fs.push_back(f);
        return Monomial::from_factors(std::move(fs));
    };
    while (!work.empty()) {
        if (++steps > 1000000) throw AnalysisError("division did not terminate");
        auto it = work.begin();
        std::optional<std::size_t> hit;
        Monomial target = phase_part(it->first);
        for (std::size_t i = 0; i < divisors.size(); ++i) {
            if (divisors[i].is_zero()) continue;
            if (phase_part(divisors[i].leading().mono).divides(target)) {
                hit = i;
                break;
            }
        }
        if (!hit) {
            rem.push_back({it->first, it->second});
            work.erase(it);
            continue;
        }
        const Expr& g = divisors[*hit];
        Monomial shift = it->first / g.leading().mono;
        Rational c = it->second / g.leading().coef;
        q[*hit].push_back({shift, c});
        axpy(work, g, shift, -c);
    }
    for (std::size_t i = 0; i < divisors.size(); ++i) d.quotients[i] = Expr::from_terms(std::move(q[i]));
    d.remainder = Expr::from_sorted(std::move(rem));
    return d;
}

Expr weak_reduce(const Expr& e, const std::vector<Expr>& constraints, const VarTable& table,
                 ReductionOptions options) {
    return WeakReducer(constraints, table, options).reduce(e);
}

}  // namespace cforge
