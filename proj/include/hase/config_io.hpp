#pragma once

#include <string>

#include <json.hpp>

#include "hase/fields.hpp"
#include "hase/initial_state.hpp"
#include "hase/polar_map.hpp"
#include "hase/scts.hpp"

namespace hase {

using json = nlohmann::ordered_json;

json to_json(const FieldConfig& cfg);
json to_json(const AmplitudeModel& m);
json to_json(const OffsetPhaseModel& m);
json to_json(const InitialStateModel& m);
json to_json(const GridSpec& g);
json to_json(const SctsConfig& cfg);  // worker count excluded
json to_json(const SctsStats& s);
json to_json(const PhaseDiffResult& r);

// Strict parsers: unknown keys and wrong types raise ConfigError naming the
// offending key path. `path` is the key prefix used in messages.
FieldConfig field_from_json(const json& j, const std::string& path = "field");
AmplitudeModel amplitude_from_json(const json& j, const std::string& path = "initial_state.amplitude");
OffsetPhaseModel offset_phase_from_json(const json& j, const std::string& path = "initial_state.offset_phase");
InitialStateModel initial_state_from_json(const json& j, const std::string& path = "initial_state");
GridSpec grid_from_json(const json& j, const std::string& path = "grid");
/// A field without an envelope gets sine_square_edges(14, 2).
SctsConfig scts_from_json(const json& j, const std::string& path = "scts");
RunPreset preset_from_string(const std::string& s);

/// Metadata snapshot attached to HASE maps.
json hase_run_json(const FieldConfig& cfg, double ip, const InitialStateModel& model, const GridSpec& grid,
                   RunPreset preset);

/// Parses JSON text; syntax errors become ConfigError with line and column.
json parse_json_text(const std::string& text, const std::string& source);

}  // namespace hase
