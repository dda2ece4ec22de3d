#include "cforge/expr.hpp"

#include <algorithm>
#include <stdexcept>

namespace cforge {

// ---------------------------------------------------------------- Monomial

Monomial Monomial::of(Var v, Exponent e) {
    Monomial m;
    if (!e.is_zero()) m.factors_.push_back({v, e});
    m.recompute();
    return m;
}

Monomial Monomial::from_factors(std::vector<Factor> factors) {
    std::sort(factors.begin(), factors.end(), [](const Factor& a, const Factor& b) { return a.var < b.var; });
    Monomial m;
    for (auto& f : factors) {
        if (!m.factors_.empty() && m.factors_.back().var == f.var) {
            m.factors_.back().exp = m.factors_.back().exp + f.exp;
            if (m.factors_.back().exp.is_zero()) m.factors_.pop_back();
        } else if (!f.exp.is_zero()) {
            m.factors_.push_back(f);
        }
    }
    m.recompute();
    return m;
}

void Monomial::recompute() {
    phase_degree_ = 0;
    param_degree_ = Exponent(0);
    for (const auto& f : factors_) {
        if (in_param_block(f.var.kind)) {
            param_degree_ = param_degree_ + f.exp;
        } else {
            if (!f.exp.is_integer()) throw std::invalid_argument("fractional power of a phase-space variable");
            phase_degree_ += f.exp.num;
        }
    }
}

Exponent Monomial::exponent(Var v) const {
    for (const auto& f : factors_)
        if (f.var == v) return f.exp;
    return Exponent(0);
}

bool Monomial::has_negative_exponent() const {
    return std::any_of(factors_.begin(), factors_.end(), [](const Factor& f) { return f.exp.is_negative(); });
}

bool Monomial::has_phase_vars() const {
    return !factors_.empty() && !in_param_block(factors_.front().var.kind);
}

namespace {

template <typename Op>
Monomial merge(const std::vector<Factor>& a, const std::vector<Factor>& b, Op op) {
    std::vector<Factor> out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].var < b[j].var)) {
            out.push_back({a[i].var, op(a[i].exp, Exponent(0))});
            ++i;
        } else if (i == a.size() || b[j].var < a[i].var) {
            out.push_back({b[j].var, op(Exponent(0), b[j].exp)});
            ++j;
        } else {
            Exponent e = op(a[i].exp, b[j].exp);
            if (!e.is_zero()) out.push_back({a[i].var, e});
            ++i;
            ++j;
        }
    }
    return Monomial::from_factors(std::move(out));
}

}  // namespace

Monomial Monomial::operator*(const Monomial& o) const {
    if (o.is_one()) return *this;
    if (is_one()) return o;
    return merge(factors_, o.factors_, [](Exponent x, Exponent y) { return x + y; });
}

Monomial Monomial::operator/(const Monomial& o) const {
    if (o.is_one()) return *this;
    return merge(factors_, o.factors_, [](Exponent x, Exponent y) { return x - y; });
}

Monomial Monomial::pow(Exponent e) const {
    if (e.is_zero()) return Monomial();
    Monomial m;
    m.factors_ = factors_;
    for (auto& f : m.factors_) f.exp = f.exp * e;
    m.recompute();
    return m;
}

Monomial Monomial::without(Var v) const {
    Monomial m;
    for (const auto& f : factors_)
        if (f.var != v) m.factors_.push_back(f);
    m.recompute();
    return m;
}

bool Monomial::divides(const Monomial& o) const {
    std::size_t j = 0;
    for (const auto& f : factors_) {
        while (j < o.factors_.size() && o.factors_[j].var < f.var) {
            if (o.factors_[j].exp.is_negative()) return false;
            ++j;
        }
        if (j < o.factors_.size() && o.factors_[j].var == f.var) {
            if (o.factors_[j].exp < f.exp) return false;
            ++j;
        } else if (f.exp > Exponent(0)) {
            return false;
        }
    }
    for (; j < o.factors_.size(); ++j)
        if (o.factors_[j].exp.is_negative()) return false;
    return true;
}

Monomial Monomial::lcm(const Monomial& o) const {
    return merge(factors_, o.factors_, [](Exponent x, Exponent y) { return std::max(x, y); });
}

bool Monomial::coprime(const Monomial& o) const {
    std::size_t i = 0, j = 0;
    while (i < factors_.size() && j < o.factors_.size()) {
        if (factors_[i].var == o.factors_[j].var) return false;
        if (factors_[i].var < o.factors_[j].var)
            ++i;
        else
            ++j;
    }
    return true;
}

std::size_t Monomial::hash() const {
    std::size_t h = 0x9e3779b97f4a7c15ull;
    for (const auto& f : factors_) {
        h ^= f.var.key() + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        h ^= static_cast<std::size_t>(f.exp.num * 31 + f.exp.den) + (h << 6) + (h >> 2);
    }
    return h;
}

namespace {

// Lexicographic comparison restricted to factors[from..to) of each side.
int lex_block(const std::vector<Factor>& a, std::size_t ia, std::size_t ea, const std::vector<Factor>& b,
              std::size_t ib, std::size_t eb) {
    while (true) {
        bool a_end = ia == ea;
        bool b_end = ib == eb;
        if (a_end && b_end) return 0;
        if (a_end) return b[ib].exp.is_negative() ? 1 : -1;
        if (b_end) return a[ia].exp.is_negative() ? -1 : 1;
        if (a[ia].var == b[ib].var) {
            if (a[ia].exp != b[ib].exp) return a[ia].exp > b[ib].exp ? 1 : -1;
            ++ia;
            ++ib;
        } else if (a[ia].var < b[ib].var) {
            return a[ia].exp.is_negative() ? -1 : 1;
        } else {
            return b[ib].exp.is_negative() ? 1 : -1;
        }
    }
}

std::size_t phase_end(const std::vector<Factor>& f) {
    std::size_t i = 0;
    while (i < f.size() && !in_param_block(f[i].var.kind)) ++i;
    return i;
}

}  // namespace

int compare_monomials(const Monomial& a, const Monomial& b) {
    if (a.phase_degree() != b.phase_degree()) return a.phase_degree() > b.phase_degree() ? 1 : -1;
    const auto& fa = a.factors();
    const auto& fb = b.factors();
    std::size_t pa = phase_end(fa), pb = phase_end(fb);
    if (int c = lex_block(fa, 0, pa, fb, 0, pb)) return c;
    if (a.param_degree() != b.param_degree()) return a.param_degree() > b.param_degree() ? 1 : -1;
    return lex_block(fa, pa, fa.size(), fb, pb, fb.size());
}

// -------------------------------------------------------------------- Expr

namespace {

const std::shared_ptr<const std::vector<Term>>& empty_terms() {
    static const auto empty = std::make_shared<const std::vector<Term>>();
    return empty;
}

}  // namespace

Expr::Expr() : terms_(empty_terms()) {}

Expr::Expr(const Rational& c) : terms_(empty_terms()) {
    if (c != 0) terms_ = std::make_shared<const std::vector<Term>>(std::vector<Term>{{Monomial(), c}});
}

Expr Expr::var(Var v) { return term(Monomial::of(v), Rational(1)); }

Expr Expr::term(Monomial m, Rational c) {
    if (c == 0) return Expr();
    return Expr(std::make_shared<const std::vector<Term>>(std::vector<Term>{{std::move(m), std::move(c)}}));
}

Expr Expr::from_sorted(std::vector<Term> terms) {
    if (terms.empty()) return Expr();
    return Expr(std::make_shared<const std::vector<Term>>(std::move(terms)));
}

Expr Expr::from_terms(std::vector<Term> terms) {
    std::sort(terms.begin(), terms.end(),
              [](const Term& a, const Term& b) { return compare_monomials(a.mono, b.mono) > 0; });
    std::vector<Term> out;
    out.reserve(terms.size());
    for (auto& t : terms) {
        if (!out.empty() && out.back().mono == t.mono) {
            out.back().coef += t.coef;
        } else {
            if (!out.empty() && out.back().coef == 0) out.pop_back();
            out.push_back(std::move(t));
        }
    }
    if (!out.empty() && out.back().coef == 0) out.pop_back();
    return from_sorted(std::move(out));
}

bool Expr::is_number() const { return terms_->empty() || (terms_->size() == 1 && terms_->front().mono.is_one()); }

std::optional<Rational> Expr::as_number() const {
    if (terms_->empty()) return Rational(0);
    if (terms_->size() == 1 && terms_->front().mono.is_one()) return terms_->front().coef;
    return std::nullopt;
}

bool Expr::depends_on(Var v) const {
    for (const auto& t : *terms_)
        if (!t.mono.exponent(v).is_zero()) return true;
    return false;
}

bool Expr::has_phase_vars() const {
    for (const auto& t : *terms_)
        if (t.mono.has_phase_vars()) return true;
    return false;
}

std::vector<Var> Expr::variables() const {
    std::vector<Var> out;
    for (const auto& t : *terms_)
        for (const auto& f : t.mono.factors()) out.push_back(f.var);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Expr Expr::operator-() const { return scaled(Rational(-1)); }

namespace {

Expr add_scaled(const Expr& a, const Expr& b, int sign) {
    if (b.is_zero()) return a;
    if (a.is_zero()) return sign > 0 ? b : -b;
    const auto& ta = a.terms();
    const auto& tb = b.terms();
    std::vector<Term> out;
    out.reserve(ta.size() + tb.size());
    std::size_t i = 0, j = 0;
    while (i < ta.size() || j < tb.size()) {
        int c;
        if (i == ta.size())
            c = -1;
        else if (j == tb.size())
            c = 1;
        else
            c = compare_monomials(ta[i].mono, tb[j].mono);
        if (c > 0) {
            out.push_back(ta[i++]);
        } else if (c < 0) {
            out.push_back(tb[j]);
            if (sign < 0) out.back().coef = -out.back().coef;
            ++j;
        } else {
            Rational s = sign > 0 ? Rational(ta[i].coef + tb[j].coef) : Rational(ta[i].coef - tb[j].coef);
            if (s != 0) out.push_back({ta[i].mono, std::move(s)});
            ++i;
            ++j;
        }
    }
    return Expr::from_sorted(std::move(out));
}

}  // namespace

Expr operator+(const Expr& a, const Expr& b) { return add_scaled(a, b, 1); }
Expr operator-(const Expr& a, const Expr& b) { return add_scaled(a, b, -1); }

Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_zero() || b.is_zero()) return Expr();
    if (a.size() == 1) return b.times(a.leading().mono, a.leading().coef);
    if (b.size() == 1) return a.times(b.leading().mono, b.leading().coef);
    const Expr& big = a.size() >= b.size() ? a : b;
    const Expr& small = a.size() >= b.size() ? b : a;
    std::vector<Term> prod;
    prod.reserve(a.size() * b.size());
    for (const auto& s : small.terms())
        for (const auto& t : big.terms()) prod.push_back({s.mono * t.mono, s.coef * t.coef});
    return Expr::from_terms(std::move(prod));
}

Expr Expr::scaled(const Rational& c) const {
    if (c == 0 || is_zero()) return Expr();
    if (c == 1) return *this;
    std::vector<Term> out(*terms_);
    for (auto& t : out) t.coef *= c;
    return from_sorted(std::move(out));
}

Expr Expr::times(const Monomial& m, const Rational& c) const {
    if (c == 0 || is_zero()) return Expr();
    if (m.is_one()) return scaled(c);
    std::vector<Term> out;
    out.reserve(terms_->size());
    for (const auto& t : *terms_) out.push_back({t.mono * m, t.coef * c});
    return from_sorted(std::move(out));
}

Expr Expr::pow(unsigned n) const {
    Expr result(1), base = *this;
    while (n) {
        if (n & 1u) result = result * base;
        n >>= 1u;
        if (n) base = base * base;
    }
    return result;
}

Expr Expr::inverse_monomial() const {
    if (!is_monomial()) throw std::domain_error("cannot invert a non-monomial expression");
    return term(leading().mono.inverse(), Rational(1) / leading().coef);
}

bool operator==(const Expr& a, const Expr& b) {
    if (a.terms_ == b.terms_) return true;
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& x = a.terms()[i];
        const auto& y = b.terms()[i];
        if (x.coef != y.coef || !(x.mono == y.mono)) return false;
    }
    return true;
}

std::size_t Expr::hash() const {
    std::size_t h = terms_->size();
    for (const auto& t : *terms_) {
        h ^= t.mono.hash() + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        h ^= std::hash<std::string>{}(t.coef.get_str()) + (h << 6) + (h >> 2);
    }
    return h;
}

// ------------------------------------------------------------- operations

Expr differentiate(const Expr& e, Var x, const DerivativeRules* rules) {
    std::vector<Term> direct;
    Expr chained;
    for (const auto& t : e.terms()) {
        for (const auto& f : t.mono.factors()) {
            if (f.var == x) {
                direct.push_back({t.mono * Monomial::of(x, Exponent(-1)), t.coef * f.exp.to_rational()});
            } else if (rules) {
                auto it = rules->find(f.var);
                if (it == rules->end()) continue;
                for (const auto& [dep, deriv] : it->second) {
                    if (dep != x) continue;
                    Monomial rest = t.mono * Monomial::of(f.var, Exponent(-1));
                    chained += deriv.times(rest, t.coef * f.exp.to_rational());
                }
            }
        }
    }
    return Expr::from_terms(std::move(direct)) + chained;
}

Expr substitute(const Expr& e, const std::map<Var, Expr>& bindings) {
    if (bindings.empty() || e.is_zero()) return e;
    std::map<std::pair<Var, Exponent>, Expr> powers;
    auto power_of = [&](Var v, const Expr& b, Exponent ex) -> const Expr& {
        auto key = std::make_pair(v, ex);
        auto it = powers.find(key);
        if (it != powers.end()) return it->second;
        Expr value;
        if (ex.is_integer() && ex.num > 0) {
            value = b.pow(static_cast<unsigned>(ex.num));
        } else if (ex.is_integer()) {
            value = b.inverse_monomial().pow(static_cast<unsigned>(-ex.num));
        } else {
            if (!b.is_monomial() || b.leading().coef != 1)
                throw std::domain_error("fractional power of a substituted expression must be a bare monomial");
            value = Expr::term(b.leading().mono.pow(ex), Rational(1));
        }
        return powers.emplace(key, std::move(value)).first->second;
    };
    Expr result;
    std::vector<Term> untouched;
    for (const auto& t : e.terms()) {
        std::vector<Factor> keep;
        Expr factor(t.coef);
        bool bound = false;
        for (const auto& f : t.mono.factors()) {
            auto it = bindings.find(f.var);
            if (it == bindings.end()) {
                keep.push_back(f);
            } else {
                bound = true;
                factor = factor * power_of(f.var, it->second, f.exp);
            }
        }
        if (!bound) {
            untouched.push_back(t);
            continue;
        }
        result += factor.times(Monomial::from_factors(std::move(keep)), Rational(1));
    }
    return result + Expr::from_terms(std::move(untouched));
}

namespace {

std::string format_rational_factor(const Rational& c) {
    if (c.get_den() == 1) return c.get_num().get_str();
    return "(" + c.get_str() + ")";
}

}  // namespace

std::string to_string(const Monomial& m, const VarTable& table) {
    std::string out;
    for (const auto& f : m.factors()) {
        if (!out.empty()) out += "*";
        out += table.name(f.var);
        if (f.exp == Exponent(1)) continue;
        if (f.exp.is_integer() && !f.exp.is_negative())
            out += "^" + std::to_string(f.exp.num);
        else
            out += "^(" + to_string(f.exp) + ")";
    }
    return out;
}

std::string to_string(const Expr& e, const VarTable& table) {
    if (e.is_zero()) return "0";
    std::string out;
    bool first = true;
    for (const auto& t : e.terms()) {
        Rational c = t.coef;
        if (first) {
            if (c < 0) {
                out += "-";
                c = -c;
            }
        } else {
            out += c < 0 ? " - " : " + ";
            if (c < 0) c = -c;
        }
        first = false;
        if (t.mono.is_one()) {
            out += format_rational_factor(c);
        } else {
            if (c != 1) out += format_rational_factor(c) + "*";
            out += to_string(t.mono, table);
        }
    }
    return out;
}

Expr primitive_part(const Expr& e) {
    if (e.is_zero()) return e;
    std::map<Var, Exponent> lowest;
    bool first = true;
    for (const auto& t : e.terms()) {
        std::map<Var, Exponent> here;
        for (const auto& f : t.mono.factors())
            if (in_param_block(f.var.kind)) here[f.var] = f.exp;
        if (first) {
            lowest = here;
            first = false;
            continue;
        }
        for (auto& [v, ex] : lowest) {
            auto it = here.find(v);
            ex = std::min(ex, it == here.end() ? Exponent(0) : it->second);
        }
        for (const auto& [v, ex] : here)
            if (!lowest.count(v)) lowest[v] = std::min(ex, Exponent(0));
    }
    std::vector<Factor> shift;
    for (const auto& [v, ex] : lowest)
        if (!ex.is_zero()) shift.push_back({v, -ex});
    mpz_class g = 0, l = 1;
    for (const auto& t : e.terms()) {
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), t.coef.get_num_mpz_t());
        mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), t.coef.get_den_mpz_t());
    }
    Rational scale(l, g);
    scale.canonicalize();
    if (e.leading().coef < 0) scale = -scale;
    Expr out = e.times(Monomial::from_factors(std::move(shift)), scale);
    return out;
}

bool is_unit(const Expr& e, const VarTable& table) {
    if (!e.is_monomial()) return false;
    for (const auto& f : e.leading().mono.factors())
        if (!table.is_invertible(f.var)) return false;
    return true;
}

}  // namespace cforge
