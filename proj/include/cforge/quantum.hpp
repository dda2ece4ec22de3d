#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cforge/rational.hpp"

namespace cforge {

// Oscillator quanta created by a_mu(k > 0) and b_mu(k < 0).
enum class Family { A, B };
enum class FamilySet { A, B, Both };

struct Oscillator {
    int k;   // wave number, sign selects the family
    int mu;  // spacetime index
    int weight() const { return k < 0 ? -k : k; }
    Family family() const { return k > 0 ? Family::A : Family::B; }
};

// Sparse occupation numbers: sorted (oscillator index, count) pairs.
using Occupation = std::vector<std::pair<std::uint16_t, std::uint16_t>>;

// Coefficients of hbar^(g/2), g = 0 .. 8.
struct Graded {
    static constexpr int kGrades = 9;
    std::array<double, kGrades> c{};
    Graded& operator+=(const Graded& o);
    double max_abs() const;
    // Value with hbar = 1.
    double total() const;
};

using FockVector = std::map<Occupation, Graded>;

// Truncated oscillator Fock space.  The basis is level-major, then
// lexicographic in the sparse occupation list; the vacuum is index 0.
class FockSpace {
public:
    FockSpace(int D, int K, int n_max, int eta00 = -1, FamilySet families = FamilySet::Both);

    int D() const { return D_; }
    int K() const { return K_; }
    int n_max() const { return n_max_; }
    int eta00() const { return eta00_; }
    FamilySet families() const { return families_; }
    double metric(int mu) const { return mu == 0 ? eta00_ : 1.0; }

    const std::vector<Oscillator>& oscillators() const { return oscillators_; }
    std::optional<std::uint16_t> oscillator_index(int k, int mu) const;
    int level(const Occupation& occ) const;

    // Number of states with level <= n, counted without enumeration (saturates).
    // With a family given, only that family's oscillators may be excited.
    std::uint64_t count_states(int n, std::optional<Family> only = std::nullopt) const;
    std::uint64_t dimension() const { return count_states(n_max_); }
    // All states with level <= n, in basis order.  Throws SizeGuard.
    std::vector<Occupation> states_up_to(int n, std::optional<Family> only = std::nullopt) const;

private:
    int D_, K_, n_max_, eta00_;
    FamilySet families_;
    std::vector<Oscillator> oscillators_;
};

// Largest number of states the module will materialize (default 2e5, or
// CONSTRAINT_FORGE_MAX_STATES).
std::uint64_t max_states();

// Full basis; throws SizeGuard past max_states().
struct FockBasis {
    FockSpace space;
    std::vector<Occupation> states;
    std::map<Occupation, std::size_t> index;
    std::size_t dimension() const { return states.size(); }
};
FockBasis build_fock_space(int D, int K, int n_max, int eta00 = -1, FamilySet families = FamilySet::Both);

// Normal-ordered sum of ladder words acting on sparse Fock vectors.
class FockOperator {
public:
    struct Ladder {
        std::uint16_t osc;
        bool create;
    };
    struct Word {
        double coef = 0;
        int grade = 0;              // power of hbar^(1/2)
        std::vector<Ladder> ops;    // applied right to left
    };

    FockOperator() = default;
    explicit FockOperator(const FockSpace* space) : space_(space) {}

    void add(Word w);
    const std::vector<Word>& words() const { return words_; }
    bool is_zero() const { return words_.empty(); }

    FockVector apply(const FockVector& v) const;
    FockVector apply(const Occupation& s) const;

    friend FockOperator operator*(const FockOperator& a, const FockOperator& b);

private:
    const FockSpace* space_ = nullptr;
    std::vector<Word> words_;
};

// a_mu(k) or b_mu(k) with [a_mu(-k), a_nu(k)] = pi hbar k g and
// [b_mu(k), b_nu(-k)] = pi hbar k g for k > 0.
FockOperator ladder_operator(const FockSpace& space, int k, int mu, Family family);

// (1/2 pi) sum_l :x(l).x(k-l): over |l|, |k-l| <= K with x(0) = P/2, plus
// hbar N when k = 0.
FockOperator virasoro_operator(const FockSpace& space, int k, double N, const std::vector<double>& P,
                               Family family);

// Matrix elements on a materialized basis, one sparse matrix per hbar grade.
struct OperatorMatrix {
    std::size_t dimension = 0;
    std::map<int, std::map<std::pair<std::size_t, std::size_t>, double>> grades;  // (row, col)
    std::size_t nonzeros() const;
    double entry(std::size_t row, std::size_t col) const;  // hbar = 1
};
OperatorMatrix to_matrix(const FockOperator& op, const FockBasis& basis);

// v1 - v2 with hbar grades kept.
FockVector subtract(const FockVector& a, const FockVector& b);
double max_abs(const FockVector& v);

// [A, B] applied to each state of level <= sector_level; largest component.
double commutator_norm_on_sector(const FockOperator& A, const FockOperator& B, const FockSpace& space,
                                 int sector_level);

struct CentralTermReport {
    int D = 0, K = 0, n_max = 0, eta00 = -1;
    Family family = Family::A;
    int k = 0, l = 0;
    double N = 0;
    std::vector<double> P;
    int exact_sector_level = 0;
    std::size_t sector_states = 0;  // the other family is a spectator and stays empty
    bool algebra_identified = false;  // phi(k+l) acts nontrivially on the sector
    double predicted_algebra = 0;  // coefficient of hbar phi(k+l)
    double measured_algebra = 0;
    double predicted_central = 0;  // c in -hbar^2 c, with the family sign removed
    double measured_central = 0;
    double max_deviation = 0;
    std::array<double, Graded::kGrades> deviation_by_grade{};
    std::vector<std::string> notes;
    bool passed(double tol = 1e-9) const { return max_deviation < tol; }
};

// [phi(k), phi(l)] against -s hbar (k-l) phi(k+l) - s hbar^2 delta_{k+l} (D(k^3-k)/12 - 2kN),
// s = +1 for the a family and -1 for b, on the truncation-exact sector.
CentralTermReport commutator_check(const FockSpace& space, int k, int l, double N, const std::vector<double>& P,
                                   Family family = Family::A);

// Highest level on which the truncated commutator equals the untruncated one:
// n_max - |k| - |l|, and for opposite signs also K - max(|k|, |l|).  Negative
// when no such sector exists.
int exact_sector_level(const FockSpace& space, int k, int l);
// ---- EM one-photon states

using Vec3 = std::array<double, 3>;
using CVec3 = std::array<std::complex<double>, 3>;
using ModeVector = std::array<int, 3>;

enum class EmProduct { ChernSimons, Physical };

// Unit eigenvector of Omega -> i k x Omega with eigenvalue helicity * |k|.
CVec3 helicity_vector(const Vec3& k, int helicity);

double em_one_photon_norm(const std::map<ModeVector, CVec3>& omega, EmProduct product, double hbar = 1.0);

// Eigenvalues of (k^2 delta_ij - k_i k_j)/|k|, ascending.
std::array<double, 3> em_positivity_eigenvalues(const Vec3& k);

// ---- relativistic particle scalar product

struct KgReport {
    Rational alpha;
    bool omega_rule_consistent = false;  // d(omega^2)/dk_i = 2 k_i
    bool condition_holds = false;        // d_i f = 2 alpha k_i omega^-2 f
    std::string weight;                  // f = omega^(2 alpha)
    bool weight_is_omega = false;
    std::vector<std::string> notes;
};
KgReport kg_hermiticity_condition(const Rational& alpha);

std::string to_string(Family f);
std::string to_string(EmProduct p);

}  // namespace cforge
