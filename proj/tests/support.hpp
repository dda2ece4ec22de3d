#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <random>
#include <vector>

#include "cforge/expr.hpp"
#include "cforge/model.hpp"
#include "cforge/var_table.hpp"

namespace testsupport {

using cforge::Expr;
using cforge::Var;

inline cforge::VarTable circle_table() {
    cforge::VarTable t;
    t.add_pair("q1");
    t.add_pair("q2");
    t.add_pair("q3");
    t.add_param("m", true, cforge::Rational(1));
    t.add_param("r", true, cforge::Rational(1));
    return t;
}

// Random polynomial with small integer coefficients over the given variables.
inline Expr random_poly(std::mt19937_64& rng, const std::vector<Var>& vars, int max_terms = 3, int max_degree = 2) {
    std::uniform_int_distribution<int> nterms(1, max_terms), coef(-3, 3), deg(0, max_degree);
    std::uniform_int_distribution<std::size_t> pick(0, vars.size() - 1);
    Expr e;
    int n = nterms(rng);
    for (int i = 0; i < n; ++i) {
        int c = coef(rng);
        if (c == 0) c = 1;
        Expr t(c);
        int d = deg(rng);
        for (int j = 0; j < d; ++j) t = t * Expr::var(vars[pick(rng)]);
        e = e + t;
    }
    return e;
}

// Exact evaluation at a rational point (integer exponents only).
inline cforge::Rational eval_exact(const Expr& e, const std::map<Var, cforge::Rational>& point) {
    cforge::Rational sum = 0;
    for (const auto& t : e.terms()) {
        cforge::Rational prod = t.coef;
        for (const auto& f : t.mono.factors()) {
            const auto& x = point.at(f.var);
            long n = static_cast<long>(f.exp.num);
            cforge::Rational acc = 1;
            for (long i = 0; i < (n < 0 ? -n : n); ++i) acc *= x;
            prod *= n < 0 ? cforge::Rational(1 / acc) : acc;
        }
        sum += prod;
    }
    return sum;
}

inline std::string read_model_text(const std::string& name) {
    std::ifstream in(std::string(CFORGE_DATA_DIR) + "/" + name + ".model");
    if (!in) throw std::runtime_error("missing model file " + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline cforge::PhaseSpaceModel data_model(const std::string& name) { return cforge::load_model(read_model_text(name)); }

}  // namespace testsupport
