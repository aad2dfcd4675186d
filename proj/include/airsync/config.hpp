#pragma once

#include "airsync/scenario.hpp"

#include <json.hpp>

#include <string>

namespace airsync
{

inline constexpr int kSchemaVersion = 1;

/// Parses a scenario config tree. Unknown keys, wrong types and time values
/// that are not whole ticks raise InvalidConfig naming the field path.
///
/// Time fields take an integer tick count or a string with a unit suffix
/// (s, ms, us, ns, ticks). Skew accepts plain numbers or "ppm"/"ppb" strings.
ScenarioConfig parse_scenario_config(const nlohmann::json& doc);

/// Reads and parses a config file; JSON syntax errors become InvalidConfig.
ScenarioConfig load_scenario_config(const std::string& path);

/// Fully resolved config (defaults filled in, times as ticks). Re-parsing the
/// result yields an equivalent config.
nlohmann::json config_to_json(const ScenarioConfig& config);

/// Sets `value` at a dotted path ("sync_plan.sib.granularity", "nodes.ue1.clock.skew",
/// "nodes.0.position"). Array segments match an index or an element "id".
/// Missing object members are created. Throws InvalidConfig if the path cannot resolve.
void set_config_path(nlohmann::json& doc, const std::string& path, const nlohmann::json& value);

} // namespace airsync
