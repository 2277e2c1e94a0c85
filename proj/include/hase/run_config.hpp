#pragma once

#include <string>
#include <vector>

#include "hase/config_io.hpp"
#include "hase/fields.hpp"
#include "hase/initial_state.hpp"
#include "hase/polar_map.hpp"
#include "hase/scts.hpp"
#include "hase/spectra_analysis.hpp"
#include "hase/units.hpp"

namespace hase {

struct KappaScanSection {
    std::vector<double> kappas;  // rad per a.u. momentum
};

struct WignerSection {
    std::string grid_k;
    std::string grid_0;
    PhaseDiffOptions options;
};

struct AnalyzeSection {
    std::string map;         // HASE map CSV
    std::string reference;   // single-color map CSV; computed from the config when empty
    std::string scts_grid;   // alternatively an SCTS grid file
    std::string lookup;      // alpha lookup JSON for the Wigner map
    double px_half_width = 0.6;
    bool debias = true;
    AnalysisOptions analysis;
};

/// Everything one config file can hold; each command reads its sections.
struct RunConfig {
    FieldConfig field;
    double ip = units::argon_ip;
    InitialStateModel initial_state;
    GridSpec grid;
    RunPreset preset = RunPreset::custom;
    double max_invalid_fraction = 0.01;
    KappaScanSection kappa_scan;
    SctsConfig scts;
    WignerSection wigner;
    AnalyzeSection analyze;
};

/// Strict parse; relative paths are resolved against `base_dir`.
RunConfig run_config_from_json(const json& j, const std::string& base_dir = "");

/// Reads and parses a config file (ConfigError / IoError).
RunConfig load_run_config(const std::string& path, json* raw = nullptr);

/// JSON Schema (draft 2020-12) of the config file.
const std::string& config_schema();

}  // namespace hase
