#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cforge/rational.hpp"

namespace cforge {

// Kinds are listed in variable order.  Everything before Parameter forms the
// phase block of the monomial order; InversePhase and InverseParam are only
// used inside the reduction ring and never appear in user expressions.
enum class VarKind : std::uint8_t {
    Coordinate = 0,
    Momentum = 1,
    Velocity = 2,
    Multiplier = 3,
    InversePhase = 4,
    Parameter = 5,
    InverseParam = 6,
};

inline bool in_param_block(VarKind k) { return k >= VarKind::Parameter; }

struct Var {
    VarKind kind = VarKind::Coordinate;
    std::uint32_t index = 0;

    static Var q(std::uint32_t i) { return {VarKind::Coordinate, i}; }
    static Var p(std::uint32_t i) { return {VarKind::Momentum, i}; }
    static Var v(std::uint32_t i) { return {VarKind::Velocity, i}; }
    static Var u(std::uint32_t i) { return {VarKind::Multiplier, i}; }
    static Var param(std::uint32_t i) { return {VarKind::Parameter, i}; }

    std::uint64_t key() const { return (static_cast<std::uint64_t>(kind) << 32) | index; }
    friend bool operator==(const Var&, const Var&) = default;
    friend auto operator<=>(const Var& a, const Var& b) { return a.key() <=> b.key(); }
};

struct VarHash {
    std::size_t operator()(const Var& v) const { return std::hash<std::uint64_t>{}(v.key()); }
};

struct PairInfo {
    std::string coord;
    std::string momentum;
    std::string velocity;
    std::vector<int> mode;  // empty unless the pair came from a mode expansion
    bool coord_nonzero = false;
    bool momentum_nonzero = false;
};

struct ParamInfo {
    std::string name;
    bool positive = false;
    std::optional<Rational> value;
};

class VarTable {
public:
    // Adds a canonical pair.  Empty momentum/velocity names are derived from the
    // coordinate name: qX -> pX, vX; any other name N -> pN, vN.
    std::uint32_t add_pair(const std::string& coord, std::string momentum = {},
                           std::string velocity = {}, std::vector<int> mode = {});
    std::uint32_t add_param(const std::string& name, bool positive = false,
                            std::optional<Rational> value = std::nullopt);
    std::uint32_t add_multiplier(const std::string& name);
    void mark_nonzero(Var v);
    void set_param_value(std::uint32_t index, Rational value);

    std::optional<Var> lookup(std::string_view name) const;
    const std::string& name(Var v) const;

    std::size_t pair_count() const { return pairs_.size(); }
    std::size_t param_count() const { return params_.size(); }
    std::size_t multiplier_count() const { return multipliers_.size(); }

    const PairInfo& pair(std::size_t i) const { return pairs_.at(i); }
    const ParamInfo& param(std::size_t i) const { return params_.at(i); }
    const std::string& multiplier(std::size_t i) const { return multipliers_.at(i); }

    bool is_positive(Var v) const;
    bool is_nonzero(Var v) const;
    // Division by a power of v is allowed (parameters and declared-nonzero variables).
    bool is_invertible(Var v) const { return v.kind == VarKind::Parameter || is_nonzero(v); }

    // Phase-space variables in state order: q0, p0, q1, p1, ...
    std::vector<Var> phase_vars() const;

private:
    void claim(const std::string& name, Var v);

    std::vector<PairInfo> pairs_;
    std::vector<ParamInfo> params_;
    std::vector<std::string> multipliers_;
    std::unordered_map<std::string, Var> by_name_;
};

}  // namespace cforge
