#pragma once

#include <json.hpp>

#include "cforge/analysis.hpp"
#include "cforge/dynamics.hpp"
#include "cforge/properties.hpp"
#include "cforge/quantum.hpp"

namespace cforge {

using Json = nlohmann::ordered_json;

Json analysis_report(const ConstraintAnalysis& analysis);
Json trajectory_summary(const Trajectory& traj, const NumericState& initial, int projection_iterations);
Json comparison_report(const ComparisonReport& r, const std::string& a, const std::string& b);
Json central_term_report(const CentralTermReport& r);
Json kg_report(const KgReport& r);
Json property_report(const PropertyReport& r);

}  // namespace cforge
