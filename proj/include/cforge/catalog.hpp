#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cforge/model.hpp"

namespace cforge {

// Expected outcome of a fresh consistency run and classification.
struct Golden {
    std::size_t constraints = 0;
    std::size_t first_class = 0;
    std::size_t second_class = 0;
    int generations = 1;
    std::vector<std::string> primary_multipliers;  // status names, one per primary
};

struct DynamicsDefaults {
    double t_end = 1.0;
    double dt = 1e-2;
    std::vector<double> initial;         // interleaved (q, p) per pair; projected before use
    std::vector<std::string> schedules;  // gauge-orbit comparison set, e.g. "u=sin(1,1)"
};

struct CatalogEntry {
    std::string name;
    std::string file_stem;  // name of the shipped .model file
    std::string source;     // model DSL
    Golden golden;
    DynamicsDefaults dynamics;
    std::optional<int> cutoff;
};

// circle_particle, gauge_pair, free_particle, rel_particle, rel_particle_field,
// em_modes(K), string_modes(K) and string_modes(K,D).
CatalogEntry builtin(const std::string& name);
std::vector<std::string> builtin_names();
// Entries shipped as files under data/models.
std::vector<CatalogEntry> shipped_entries();

// Generated DSL for the mode-truncated field models.
std::string em_modes_source(int cutoff);
std::string string_modes_source(int cutoff, int dim);

}  // namespace cforge
