#include "cforge/quantum.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

#include "cforge/errors.hpp"
#include "cforge/expr.hpp"
#include "cforge/var_table.hpp"

namespace cforge {

Graded& Graded::operator+=(const Graded& o) {
    for (int g = 0; g < kGrades; ++g) c[g] += o.c[g];
    return *this;
}

double Graded::max_abs() const {
    double m = 0;
    for (double v : c) m = std::max(m, std::abs(v));
    return m;
}

double Graded::total() const {
    double s = 0;
    for (double v : c) s += v;
    return s;
}

// ------------------------------------------------------------- space

FockSpace::FockSpace(int D, int K, int n_max, int eta00, FamilySet families)
    : D_(D), K_(K), n_max_(n_max), eta00_(eta00), families_(families) {
    if (D < 1) throw std::invalid_argument("D must be at least 1");
    if (K < 1) throw std::invalid_argument("K must be at least 1");
    if (n_max < 0) throw std::invalid_argument("n_max must be non-negative");
    if (eta00 != -1 && eta00 != 1) throw std::invalid_argument("eta00 must be -1 or +1");
    for (int k = -K; k <= K; ++k) {
        if (k == 0) continue;
        if (k < 0 && families == FamilySet::A) continue;
        if (k > 0 && families == FamilySet::B) continue;
        for (int mu = 0; mu < D; ++mu) oscillators_.push_back({k, mu});
    }
    if (oscillators_.size() > std::numeric_limits<std::uint16_t>::max())
        throw SizeGuard("too many oscillators");
}

std::optional<std::uint16_t> FockSpace::oscillator_index(int k, int mu) const {
    for (std::size_t i = 0; i < oscillators_.size(); ++i)
        if (oscillators_[i].k == k && oscillators_[i].mu == mu) return static_cast<std::uint16_t>(i);
    return std::nullopt;
}

int FockSpace::level(const Occupation& occ) const {
    int n = 0;
    for (const auto& [i, c] : occ) n += oscillators_[i].weight() * c;
    return n;
}

std::uint64_t FockSpace::count_states(int n, std::optional<Family> only) const {
    if (n < 0) return 0;
    const std::uint64_t cap = std::numeric_limits<std::uint64_t>::max();
    std::vector<std::uint64_t> ways(static_cast<std::size_t>(n) + 1, 0);
    ways[0] = 1;
    for (const auto& o : oscillators_) {
        if (only && o.family() != *only) continue;
        for (int L = o.weight(); L <= n; ++L) {
            auto& w = ways[static_cast<std::size_t>(L)];
            std::uint64_t add = ways[static_cast<std::size_t>(L - o.weight())];
            w = (cap - w < add) ? cap : w + add;
        }
    }
    std::uint64_t total = 0;
    for (auto w : ways) total = (cap - total < w) ? cap : total + w;
    return total;
}

std::uint64_t max_states() {
    if (const char* env = std::getenv("CONSTRAINT_FORGE_MAX_STATES")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return v;
    }
    return 200000;
}

std::vector<Occupation> FockSpace::states_up_to(int n, std::optional<Family> only) const {
    std::uint64_t count = count_states(n, only);
    if (count > max_states())
        throw SizeGuard("Fock space of " + std::to_string(count) + " states exceeds the limit of " +
                        std::to_string(max_states()) + " (set CONSTRAINT_FORGE_MAX_STATES to raise it)");
    std::vector<Occupation> out;
    out.reserve(count);
    Occupation cur;
    auto rec = [&](auto&& self, std::size_t i, int budget) -> void {
        if (i == oscillators_.size()) {
            out.push_back(cur);
            return;
        }
        self(self, i + 1, budget);
        if (only && oscillators_[i].family() != *only) return;
        const int w = oscillators_[i].weight();
        for (int c = 1; c * w <= budget; ++c) {
            cur.emplace_back(static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(c));
            self(self, i + 1, budget - c * w);
            cur.pop_back();
        }
    };
    rec(rec, 0, n);
    std::vector<std::pair<int, Occupation>> keyed;
    keyed.reserve(out.size());
    for (auto& o : out) keyed.emplace_back(level(o), std::move(o));
    std::sort(keyed.begin(), keyed.end());
    out.clear();
    for (auto& [l, o] : keyed) out.push_back(std::move(o));
    return out;
}

FockBasis build_fock_space(int D, int K, int n_max, int eta00, FamilySet families) {
    FockBasis b{FockSpace(D, K, n_max, eta00, families), {}, {}};
    b.states = b.space.states_up_to(n_max);
    for (std::size_t i = 0; i < b.states.size(); ++i) b.index.emplace(b.states[i], i);
    return b;
}

// ------------------------------------------------------------- operators

namespace {

std::uint16_t count_of(const Occupation& occ, std::uint16_t osc) {
    for (const auto& [i, c] : occ)
        if (i == osc) return c;
    return 0;
}

void set_count(Occupation& occ, std::uint16_t osc, std::uint16_t c) {
    auto it = std::lower_bound(occ.begin(), occ.end(), osc, [](const auto& p, std::uint16_t o) { return p.first < o; });
    if (it != occ.end() && it->first == osc) {
        if (c == 0)
            occ.erase(it);
        else
            it->second = c;
    } else if (c != 0) {
        occ.insert(it, {osc, c});
    }
}

// Applies one word to a basis state; false if it annihilates or leaves the space.
bool apply_word(const FockOperator::Word& w, const FockSpace& space, Occupation& occ, double& amp) {
    int level = space.level(occ);
    amp = w.coef;
    for (auto it = w.ops.rbegin(); it != w.ops.rend(); ++it) {
        std::uint16_t n = count_of(occ, it->osc);
        const int weight = space.oscillators()[it->osc].weight();
        if (it->create) {
            level += weight;
            if (level > space.n_max()) return false;
            amp *= std::sqrt(static_cast<double>(n) + 1);
            set_count(occ, it->osc, static_cast<std::uint16_t>(n + 1));
        } else {
            if (n == 0) return false;
            level -= weight;
            amp *= std::sqrt(static_cast<double>(n));
            set_count(occ, it->osc, static_cast<std::uint16_t>(n - 1));
        }
    }
    return true;
}

}  // namespace

void FockOperator::add(Word w) {
    if (w.coef == 0) return;
    for (auto& existing : words_)
        if (existing.grade == w.grade && existing.ops.size() == w.ops.size() &&
            std::equal(existing.ops.begin(), existing.ops.end(), w.ops.begin(),
                       [](const Ladder& a, const Ladder& b) { return a.osc == b.osc && a.create == b.create; })) {
            existing.coef += w.coef;
            return;
        }
    words_.push_back(std::move(w));
}

FockVector FockOperator::apply(const Occupation& s) const {
    FockVector v;
    Graded one;
    one.c[0] = 1;
    v.emplace(s, one);
    return apply(v);
}

FockVector FockOperator::apply(const FockVector& v) const {
    FockVector out;
    if (!space_) return out;
    for (const auto& [occ, amp] : v)
        for (const auto& w : words_) {
            Occupation o = occ;
            double a = 0;
            if (!apply_word(w, *space_, o, a)) continue;
            Graded& dst = out[o];
            for (int g = 0; g < Graded::kGrades; ++g) {
                if (amp.c[g] == 0) continue;
                if (g + w.grade >= Graded::kGrades) throw std::overflow_error("hbar grade overflow");
                dst.c[g + w.grade] += amp.c[g] * a;
            }
        }
    return out;
}

FockOperator operator*(const FockOperator& a, const FockOperator& b) {
    FockOperator out(a.space_ ? a.space_ : b.space_);
    for (const auto& wa : a.words_)
        for (const auto& wb : b.words_) {
            FockOperator::Word w{wa.coef * wb.coef, wa.grade + wb.grade, wa.ops};
            w.ops.insert(w.ops.end(), wb.ops.begin(), wb.ops.end());
            out.add(std::move(w));
        }
    return out;
}

namespace {

// Single ladder factor of x_mu(k) for k != 0.
FockOperator::Word ladder_word(const FockSpace& space, int k, int mu, Family family) {
    if (k == 0) throw std::invalid_argument("k = 0 is the zero mode (total momentum), not a ladder operator");
    if (std::abs(k) > space.K()) throw std::invalid_argument("|k| exceeds the mode cutoff");
    if (mu < 0 || mu >= space.D()) throw std::invalid_argument("spacetime index out of range");
    const bool create = family == Family::A ? k > 0 : k < 0;
    const int label = family == Family::A ? std::abs(k) : -std::abs(k);
    auto osc = space.oscillator_index(label, mu);
    if (!osc) throw std::invalid_argument("the Fock space does not contain the " + to_string(family) + " family");
    double c = std::sqrt(M_PI * std::abs(k));
    if (!create) c *= space.metric(mu);
    return {c, 1, {{*osc, create}}};
}

}  // namespace

FockOperator ladder_operator(const FockSpace& space, int k, int mu, Family family) {
    FockOperator op(&space);
    op.add(ladder_word(space, k, mu, family));
    return op;
}

FockOperator virasoro_operator(const FockSpace& space, int k, double N, const std::vector<double>& P_in,
                               Family family) {
    std::vector<double> P = P_in.empty() ? std::vector<double>(static_cast<std::size_t>(space.D()), 0.0) : P_in;
    if (P.size() != static_cast<std::size_t>(space.D())) throw std::invalid_argument("P must have D components");
    FockOperator op(&space);
    const int K = space.K();
    for (int l = -K; l <= K; ++l) {
        const int m = k - l;
        if (std::abs(m) > K) continue;
        for (int mu = 0; mu < space.D(); ++mu) {
            const double pre = space.metric(mu) / (2 * M_PI);
            const double half_p = P[static_cast<std::size_t>(mu)] / 2;
            if (l == 0 && m == 0) {
                op.add({pre * half_p * half_p, 0, {}});
            } else if (l == 0 || m == 0) {
                auto w = ladder_word(space, l == 0 ? m : l, mu, family);
                w.coef *= pre * half_p;
                op.add(std::move(w));
            } else {
                auto x = ladder_word(space, l, mu, family);
                auto y = ladder_word(space, m, mu, family);
                FockOperator::Word w{pre * x.coef * y.coef, 2, {x.ops[0], y.ops[0]}};
                if (!w.ops[0].create && w.ops[1].create) std::swap(w.ops[0], w.ops[1]);
                op.add(std::move(w));
            }
        }
    }
    if (k == 0) op.add({N, 2, {}});
    return op;
}

std::size_t OperatorMatrix::nonzeros() const {
    std::size_t n = 0;
    for (const auto& [g, m] : grades) n += m.size();
    return n;
}

double OperatorMatrix::entry(std::size_t row, std::size_t col) const {
    double s = 0;
    for (const auto& [g, m] : grades) {
        auto it = m.find({row, col});
        if (it != m.end()) s += it->second;
    }
    return s;
}

OperatorMatrix to_matrix(const FockOperator& op, const FockBasis& basis) {
    OperatorMatrix m;
    m.dimension = basis.dimension();
    for (std::size_t col = 0; col < basis.states.size(); ++col)
        for (const auto& [occ, amp] : op.apply(basis.states[col])) {
            std::size_t row = basis.index.at(occ);
            for (int g = 0; g < Graded::kGrades; ++g)
                if (amp.c[g] != 0) m.grades[g][{row, col}] += amp.c[g];
        }
    for (auto& [g, entries] : m.grades)
        for (auto it = entries.begin(); it != entries.end();) it = it->second == 0 ? entries.erase(it) : std::next(it);
    return m;
}

FockVector subtract(const FockVector& a, const FockVector& b) {
    FockVector out = a;
    for (const auto& [occ, amp] : b) {
        Graded& d = out[occ];
        for (int g = 0; g < Graded::kGrades; ++g) d.c[g] -= amp.c[g];
    }
    return out;
}

double max_abs(const FockVector& v) {
    double m = 0;
    for (const auto& [occ, amp] : v) m = std::max(m, amp.max_abs());
    return m;
}

double commutator_norm_on_sector(const FockOperator& A, const FockOperator& B, const FockSpace& space,
                                 int sector_level) {
    double worst = 0;
    for (const auto& s : space.states_up_to(sector_level)) {
        FockVector v;
        Graded one;
        one.c[0] = 1;
        v.emplace(s, one);
        worst = std::max(worst, max_abs(subtract(A.apply(B.apply(v)), B.apply(A.apply(v)))));
    }
    return worst;
}

// ------------------------------------------------------------- central term

int exact_sector_level(const FockSpace& space, int k, int l) {
    int level = space.n_max() - std::abs(k) - std::abs(l);
    if ((k > 0 && l < 0) || (k < 0 && l > 0)) level = std::min(level, space.K() - std::max(std::abs(k), std::abs(l)));
    return level;
}

CentralTermReport commutator_check(const FockSpace& space, int k, int l, double N, const std::vector<double>& P_in,
                                   Family family) {
    CentralTermReport r;
    r.D = space.D();
    r.K = space.K();
    r.n_max = space.n_max();
    r.eta00 = space.eta00();
    r.family = family;
    r.k = k;
    r.l = l;
    r.N = N;
    r.P = P_in.empty() ? std::vector<double>(static_cast<std::size_t>(space.D()), 0.0) : P_in;
    if (std::abs(k) > 2 * space.K() || std::abs(l) > 2 * space.K())
        throw std::invalid_argument("mode numbers exceed the convolution range 2K");
    r.exact_sector_level = exact_sector_level(space, k, l);
    if (r.exact_sector_level < 0)
        throw Error("exact sector is empty: need n_max >= |k| + |l| and, for opposite signs, K >= max(|k|, |l|)");

    const double sign = family == Family::A ? 1.0 : -1.0;
    const bool diagonal = k + l == 0;
    r.predicted_algebra = -sign * (k - l);
    r.predicted_central = diagonal ? r.D * (std::pow(k, 3) - k) / 12.0 - 2.0 * k * N : 0.0;

    auto phi_k = virasoro_operator(space, k, N, r.P, family);
    auto phi_l = virasoro_operator(space, l, N, r.P, family);
    FockOperator phi_kl(&space);
    if (std::abs(k + l) <= 2 * space.K()) phi_kl = virasoro_operator(space, k + l, N, r.P, family);

    // Least squares for C = alpha hbar T + beta hbar^2 I over all components.
    double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0;
    auto sector = space.states_up_to(r.exact_sector_level, family);
    r.sector_states = sector.size();
    for (const auto& s : sector) {
        FockVector v;
        Graded one;
        one.c[0] = 1;
        v.emplace(s, one);
        FockVector C = subtract(phi_k.apply(phi_l.apply(v)), phi_l.apply(phi_k.apply(v)));
        FockVector T = phi_kl.apply(v);
        std::map<Occupation, std::pair<Graded, Graded>> rows;  // (C, hbar T)
        for (const auto& [o, a] : C) rows[o].first = a;
        for (const auto& [o, a] : T)
            for (int g = 0; g + 2 < Graded::kGrades; ++g) rows[o].second.c[g + 2] = a.c[g];
        rows[s];
        for (const auto& [o, pair] : rows) {
            const auto& [c, t] = pair;
            for (int g = 0; g < Graded::kGrades; ++g) {
                const double x2 = (o == s && g == 4) ? 1.0 : 0.0;
                s11 += t.c[g] * t.c[g];
                s12 += t.c[g] * x2;
                s22 += x2 * x2;
                b1 += c.c[g] * t.c[g];
                b2 += c.c[g] * x2;
                const double predicted =
                    -sign * ((k - l) * t.c[g] + (diagonal ? r.predicted_central * x2 : 0.0));
                const double dev = std::abs(c.c[g] - predicted);
                r.deviation_by_grade[static_cast<std::size_t>(g)] =
                    std::max(r.deviation_by_grade[static_cast<std::size_t>(g)], dev);
                r.max_deviation = std::max(r.max_deviation, dev);
            }
        }
    }
    const double det = s11 * s22 - s12 * s12;
    double alpha = 0, beta = 0;
    if (s11 > 0 && std::abs(det) > 1e-12 * s11 * s22) {
        alpha = (b1 * s22 - b2 * s12) / det;
        beta = (s11 * b2 - s12 * b1) / det;
    } else {
        alpha = s11 > 0 ? b1 / s11 : 0.0;
        beta = s22 > 0 ? (b2 - alpha * s12) / s22 : 0.0;
    }
    r.algebra_identified = s11 > 0;
    r.measured_algebra = alpha;
    r.measured_central = -sign * beta;
    if (r.D == 26) r.notes.push_back("D = 26 is the critical dimension of this model (annotation only)");
    if (N < 0) r.notes.push_back("N < 0 gives a ground state with negative mass squared (annotation only)");
    return r;
}

// ------------------------------------------------------------- EM

namespace {

double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

}  // namespace

CVec3 helicity_vector(const Vec3& k, int helicity) {
    if (helicity != 1 && helicity != -1) throw std::invalid_argument("helicity must be +1 or -1");
    const double n = norm3(k);
    if (n == 0) throw std::invalid_argument("helicity needs a nonzero wave vector");
    Vec3 kh{k[0] / n, k[1] / n, k[2] / n};
    std::size_t axis = 0;
    for (std::size_t i = 1; i < 3; ++i)
        if (std::abs(kh[i]) < std::abs(kh[axis])) axis = i;
    Vec3 a{0, 0, 0};
    a[axis] = 1;
    const double d = a[0] * kh[0] + a[1] * kh[1] + a[2] * kh[2];
    Vec3 e1{a[0] - d * kh[0], a[1] - d * kh[1], a[2] - d * kh[2]};
    const double n1 = norm3(e1);
    for (double& x : e1) x /= n1;
    Vec3 e2 = cross(kh, e1);
    CVec3 out;
    const std::complex<double> i(0, 1);
    for (std::size_t j = 0; j < 3; ++j) out[j] = (e1[j] + i * static_cast<double>(helicity) * e2[j]) / std::sqrt(2.0);
    return out;
}

double em_one_photon_norm(const std::map<ModeVector, CVec3>& omega, EmProduct product, double hbar) {
    const std::complex<double> i(0, 1);
    std::complex<double> sum = 0;
    for (const auto& [mode, w] : omega) {
        Vec3 k{static_cast<double>(mode[0]), static_cast<double>(mode[1]), static_cast<double>(mode[2])};
        const double kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if (kk == 0) throw std::invalid_argument("one-photon states cannot use the zero mode");
        if (product == EmProduct::ChernSimons) {
            CVec3 kxw{k[1] * w[2] - k[2] * w[1], k[2] * w[0] - k[0] * w[2], k[0] * w[1] - k[1] * w[0]};
            for (std::size_t j = 0; j < 3; ++j) sum += std::conj(w[j]) * i * kxw[j];
        } else {
            const double kn = std::sqrt(kk);
            for (std::size_t a = 0; a < 3; ++a)
                for (std::size_t b = 0; b < 3; ++b)
                    sum += std::conj(w[a]) * w[b] * (((a == b) ? kk : 0.0) - k[a] * k[b]) / kn;
        }
    }
    return 2 * hbar * sum.real();
}

std::array<double, 3> em_positivity_eigenvalues(const Vec3& k) {
    const double n = norm3(k);
    if (n == 0) throw std::invalid_argument("zero wave vector");
    Eigen::Matrix3d m;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            m(a, b) = ((a == b) ? n * n : 0.0) / n - k[static_cast<std::size_t>(a)] * k[static_cast<std::size_t>(b)] / n;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
    auto ev = es.eigenvalues();
    return {ev(0), ev(1), ev(2)};
}

// ------------------------------------------------------------- Klein-Gordon

KgReport kg_hermiticity_condition(const Rational& alpha) {
    KgReport r;
    r.alpha = alpha;
    VarTable t;
    std::vector<Var> k;
    for (int i = 1; i <= 3; ++i) k.push_back(Var::q(t.add_pair("k" + std::to_string(i))));
    Var omega = Var::param(t.add_param("omega", true));
    Var mu = Var::param(t.add_param("mu", true));
    DerivativeRules rules;
    for (Var ki : k) rules[omega].emplace_back(ki, Expr::var(ki) * Expr::term(Monomial::of(omega, -1), Rational(1)));

    Expr k2 = Expr::var(mu) * Expr::var(mu);
    for (Var ki : k) k2 += Expr::var(ki) * Expr::var(ki);
    Expr w2 = Expr::var(omega) * Expr::var(omega);
    r.omega_rule_consistent = true;
    for (Var ki : k)
        r.omega_rule_consistent &= differentiate(w2, ki, &rules) == differentiate(k2, ki, nullptr);

    mpz_class num = alpha.get_num() * 2, den = alpha.get_den();
    Exponent e(num.get_si(), den.get_si());
    Expr f = e.is_zero() ? Expr(1) : Expr::term(Monomial::of(omega, e), Rational(1));
    r.weight = to_string(f, t);
    r.condition_holds = true;
    for (Var ki : k) {
        Expr rhs = (Expr::var(ki) * Expr::term(Monomial::of(omega, -2), Rational(2) * alpha)) * f;
        r.condition_holds &= (differentiate(f, ki, &rules) - rhs).is_zero();
    }
    r.weight_is_omega = f == Expr::var(omega);
    if (alpha == Rational(1, 2))
        r.notes.push_back("standard angular momentum ordering; the measure weight is omega");
    else if (alpha == 0)
        r.notes.push_back("constant measure weight");
    else
        r.notes.push_back("Hermitian for this alpha, but the angular momentum operators need a nonstandard ordering");
    return r;
}

std::string to_string(Family f) { return f == Family::A ? "a" : "b"; }
std::string to_string(EmProduct p) { return p == EmProduct::ChernSimons ? "chern_simons" : "physical"; }

}  // namespace cforge
