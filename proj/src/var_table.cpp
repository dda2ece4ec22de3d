#include "cforge/var_table.hpp"

#include <stdexcept>

namespace cforge {

namespace {

std::string derived_name(const std::string& coord, char prefix) {
    if (coord.size() > 1 && coord[0] == 'q') return prefix + coord.substr(1);
    return prefix + coord;
}

}  // namespace

void VarTable::claim(const std::string& name, Var v) {
    if (name.empty()) throw std::invalid_argument("empty variable name");
    if (!by_name_.emplace(name, v).second) throw std::invalid_argument("duplicate symbol '" + name + "'");
}

std::uint32_t VarTable::add_pair(const std::string& coord, std::string momentum, std::string velocity,
                                 std::vector<int> mode) {
    auto i = static_cast<std::uint32_t>(pairs_.size());
    if (momentum.empty()) momentum = derived_name(coord, 'p');
    if (velocity.empty()) velocity = derived_name(coord, 'v');
    claim(coord, Var::q(i));
    claim(momentum, Var::p(i));
    claim(velocity, Var::v(i));
    pairs_.push_back({coord, std::move(momentum), std::move(velocity), std::move(mode)});
    return i;
}

std::uint32_t VarTable::add_param(const std::string& name, bool positive, std::optional<Rational> value) {
    auto i = static_cast<std::uint32_t>(params_.size());
    claim(name, Var::param(i));
    params_.push_back({name, positive, std::move(value)});
    return i;
}

std::uint32_t VarTable::add_multiplier(const std::string& name) {
    auto i = static_cast<std::uint32_t>(multipliers_.size());
    claim(name, Var::u(i));
    multipliers_.push_back(name);
    return i;
}

void VarTable::mark_nonzero(Var v) {
    switch (v.kind) {
        case VarKind::Coordinate: pairs_.at(v.index).coord_nonzero = true; break;
        case VarKind::Momentum: pairs_.at(v.index).momentum_nonzero = true; break;
        case VarKind::Parameter: break;
        default: throw std::invalid_argument("only coordinates and momenta can be declared nonzero");
    }
}

void VarTable::set_param_value(std::uint32_t index, Rational value) { params_.at(index).value = std::move(value); }

std::optional<Var> VarTable::lookup(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

const std::string& VarTable::name(Var v) const {
    switch (v.kind) {
        case VarKind::Coordinate: return pairs_.at(v.index).coord;
        case VarKind::Momentum: return pairs_.at(v.index).momentum;
        case VarKind::Velocity: return pairs_.at(v.index).velocity;
        case VarKind::Multiplier: return multipliers_.at(v.index);
        case VarKind::Parameter: return params_.at(v.index).name;
        default: break;
    }
    throw std::logic_error("internal reduction variable has no name");
}

bool VarTable::is_positive(Var v) const { return v.kind == VarKind::Parameter && params_.at(v.index).positive; }

bool VarTable::is_nonzero(Var v) const {
    switch (v.kind) {
        case VarKind::Coordinate: return pairs_.at(v.index).coord_nonzero;
        case VarKind::Momentum: return pairs_.at(v.index).momentum_nonzero;
        case VarKind::Parameter: return true;
        default: return false;
    }
}

std::vector<Var> VarTable::phase_vars() const {
    std::vector<Var> out;
    out.reserve(2 * pairs_.size());
    for (std::uint32_t i = 0; i < pairs_.size(); ++i) {
        out.push_back(Var::q(i));
        out.push_back(Var::p(i));
    }
    return out;
}

}  // namespace cforge
