#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <vector>

#include "cforge/expr.hpp"
#include "cforge/var_table.hpp"

namespace cforge {

struct ReductionOptions {
    // Run Buchberger completion on top of the inter-reduced constraint set.
    bool complete = true;
    std::size_t max_basis = 96;
    std::size_t max_pairs = 4000;
    std::size_t max_terms = 4000;
};

// Canonical remainders modulo the ideal generated by a constraint list.
//
// Parameters and declared-nonzero variables are invertible, so the reduction
// works in the ring where they have inverses.  When completion succeeds the
// basis is a reduced Groebner basis and reduce(e) is zero exactly when e lies
// in the ideal; otherwise the remainder is taken against the inter-reduced set.
class WeakReducer {
public:
    WeakReducer() = default;
    WeakReducer(std::vector<Expr> constraints, const VarTable& table, ReductionOptions options = {});

    Expr reduce(const Expr& e) const;
    bool is_weakly_zero(const Expr& e) const { return reduce(e).is_zero(); }
    bool complete() const { return complete_; }
    const std::vector<Expr>& constraints() const { return constraints_; }
    std::size_t basis_size() const { return basis_.size(); }
    // Basis back in user variables (for reports and tests).
    std::vector<Expr> basis() const;

private:
    struct Scaling {
        std::map<std::uint32_t, std::int64_t> den;  // per parameter index
        bool operator==(const Scaling&) const = default;
    };

    Expr to_ring(const Expr& e, const Scaling& s) const;
    Expr from_ring(const Expr& e, const Scaling& s) const;
    Scaling scaling_for(const Expr& e) const;
    void build();

    std::vector<Expr> constraints_;
    const VarTable* table_ = nullptr;
    ReductionOptions options_;
    Scaling scaling_;
    std::vector<Expr> basis_;  // ring form, monic
    bool complete_ = true;
    mutable std::shared_ptr<WeakReducer> rescaled_;
};

// Remainder of e modulo constraints inside the ring (no completion), with the
// quotients: e = sum quotients[i] * divisors[i] + remainder.
struct Division {
    std::vector<Expr> quotients;
    Expr remainder;
};
Division divide(const Expr& e, const std::vector<Expr>& divisors);

// Convenience wrapper building a fresh reducer.
Expr weak_reduce(const Expr& e, const std::vector<Expr>& constraints, const VarTable& table,
                 ReductionOptions options = {});

}  // namespace cforge
