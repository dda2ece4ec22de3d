#include "cforge/properties.hpp"

#include <algorithm>
#include <numeric>

#include "cforge/brackets.hpp"

namespace cforge {

Expr random_polynomial(std::mt19937_64& rng, const std::vector<Var>& vars, int max_terms, int max_degree) {
    std::uniform_int_distribution<int> nterms(1, max_terms), coef(-3, 3), deg(0, max_degree);
    std::uniform_int_distribution<std::size_t> pick(0, vars.size() - 1);
    Expr e;
    const int n = nterms(rng);
    for (int i = 0; i < n; ++i) {
        int c = coef(rng);
        if (c == 0) c = 1;
        Expr t(c);
        const int d = deg(rng);
        for (int j = 0; j < d; ++j) t *= Expr::var(vars[pick(rng)]);
        e += t;
    }
    return e;
}

PropertyReport check_bracket_properties(const ConstraintAnalysis& a, const PropertyOptions& opt) {
    PropertyReport r;
    r.model = a.model.name();
    r.seed = opt.seed;
    r.triples = opt.triples;
    std::mt19937_64 rng(opt.seed);
    const std::size_t pairs = a.table().pair_count();
    if (pairs == 0) return r;

    std::vector<std::uint32_t> order(pairs);
    std::iota(order.begin(), order.end(), 0u);
    auto sample_vars = [&] {
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<Var> vars;
        for (std::size_t i = 0; i < std::min(pairs, opt.pairs_per_sample); ++i) {
            vars.push_back(Var::q(order[i]));
            vars.push_back(Var::p(order[i]));
        }
        return vars;
    };
    auto pb = [&](const Expr& f, const Expr& g) { return poisson_bracket(f, g, a.model); };
    const bool dirac = a.block && !a.block->chi.empty();
    r.dirac_checked = dirac;
    auto db = [&](const Expr& f, const Expr& g) { return dirac_bracket(f, g, *a.block, a.model, *a.reducer).strong; };

    for (std::size_t t = 0; t < opt.triples; ++t) {
        auto vars = sample_vars();
        Expr F = random_polynomial(rng, vars, opt.max_terms, opt.max_degree);
        Expr G = random_polynomial(rng, vars, opt.max_terms, opt.max_degree);
        Expr K = random_polynomial(rng, vars, opt.max_terms, opt.max_degree);
        if (!(pb(F, G) + pb(G, F)).is_zero()) ++r.antisymmetry;
        if (pb(F + 2 * G, K) != pb(F, K) + 2 * pb(G, K)) ++r.linearity;
        if (pb(F * G, K) != F * pb(G, K) + pb(F, K) * G) ++r.leibniz;
        if (!(pb(F, pb(G, K)) + pb(G, pb(K, F)) + pb(K, pb(F, G))).is_zero()) ++r.jacobi;
        if (!dirac) continue;
        if (!a.reduce(db(F, G) + db(G, F)).is_zero()) ++r.dirac_antisymmetry;
        if (!a.reduce(db(F * G, K) - F * db(G, K) - db(F, K) * G).is_zero()) ++r.dirac_leibniz;
        if (!a.reduce(db(F, db(G, K)) + db(G, db(K, F)) + db(K, db(F, G))).is_zero()) ++r.dirac_jacobi;
    }
    if (dirac) {
        r.nullity_samples = opt.nullity_samples;
        for (std::size_t t = 0; t < opt.nullity_samples; ++t) {
            Expr F = random_polynomial(rng, sample_vars(), opt.max_terms, opt.max_degree + 1);
            for (const auto& chi : a.block->chi)
                if (!a.reduce(db(F, chi)).is_zero()) {
                    ++r.nullity;
                    break;
                }
        }
    }
    return r;
}

}  // namespace cforge
