#include "hase/run_config.hpp"

#include <filesystem>
#include <sstream>

#include "csv_util.hpp"
#include "hase/errors.hpp"
#include "json_reader.hpp"

namespace hase {

using detail::ObjectReader;

namespace {

std::string resolve(const std::string& p, const std::string& base) {
    if (p.empty() || base.empty() || std::filesystem::path(p).is_absolute()) return p;
    return (std::filesystem::path(base) / p).lexically_normal().string();
}

KappaScanSection kappa_scan_from_json(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    KappaScanSection s;
    const bool list = r.has("kappas");
    const bool range = r.has("start") || r.has("stop") || r.has("count");
    if (list && range) ObjectReader::fail(path, "takes either 'kappas' or 'start'/'stop'/'count', not both");
    if (list) {
        s.kappas = r.numbers("kappas");
    } else {
        const double start = r.number("start", 0.0);
        const double stop = r.number("stop", 2.0 * units::pi);
        const std::uint64_t count = r.unsigned_integer("count", 17);
        if (count < 2) ObjectReader::fail(r.key_path("count"), "must be >= 2");
        for (std::uint64_t i = 0; i < count; ++i)
            s.kappas.push_back(start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    r.finish();
    return s;
}

PhaseDiffOptions phase_diff_from_json(ObjectReader& r) {
    PhaseDiffOptions o;
    o.slice_half_width = r.number("slice_half_width", o.slice_half_width);
    o.energy_bin = r.number("energy_bin", o.energy_bin);
    const std::uint64_t w = r.unsigned_integer("window", o.window);
    if (w < 2 || w > 1000) ObjectReader::fail(r.key_path("window"), "must be in [2, 1000]");
    o.window = static_cast<std::size_t>(w);
    o.min_overlap = r.number("min_overlap", o.min_overlap);
    if (!(o.slice_half_width > 0.0)) ObjectReader::fail(r.key_path("slice_half_width"), "must be > 0");
    if (!(o.energy_bin > 0.0)) ObjectReader::fail(r.key_path("energy_bin"), "must be > 0");
    if (!(o.min_overlap >= 0.0 && o.min_overlap <= 1.0)) ObjectReader::fail(r.key_path("min_overlap"), "must be in [0, 1]");
    return o;
}

}  // namespace

RunConfig run_config_from_json(const json& j, const std::string& base_dir) {
    ObjectReader r(j, "");
    RunConfig c;
    if (r.has("field")) c.field = field_from_json(r.raw("field"), "field");
    c.ip = r.number("ip", c.ip);
    if (!(c.ip > 0.0)) ObjectReader::fail("ip", "must be > 0");
    if (r.has("initial_state")) c.initial_state = initial_state_from_json(r.raw("initial_state"), "initial_state");
    if (r.has("grid")) c.grid = grid_from_json(r.raw("grid"), "grid");
    if (r.has("preset")) {
        try {
            c.preset = preset_from_string(r.string("preset"));
        } catch (const Error&) {
            ObjectReader::fail("preset", "must be one of {simple, linear, lin_env, delayed, custom}");
        }
    }
    c.max_invalid_fraction = r.number("max_invalid_fraction", c.max_invalid_fraction);
    if (!(c.max_invalid_fraction >= 0.0 && c.max_invalid_fraction <= 1.0))
        ObjectReader::fail("max_invalid_fraction", "must be in [0, 1]");

    if (r.has("kappa_scan")) {
        c.kappa_scan = kappa_scan_from_json(r.raw("kappa_scan"), "kappa_scan");
    } else {
        c.kappa_scan = kappa_scan_from_json(json::object(), "kappa_scan");
    }
    if (r.has("scts")) c.scts = scts_from_json(r.raw("scts"), "scts");

    if (r.has("wigner")) {
        ObjectReader w = r.object("wigner");
        c.wigner.grid_k = resolve(w.string("grid_kappa", ""), base_dir);
        c.wigner.grid_0 = resolve(w.string("grid_zero", ""), base_dir);
        c.wigner.options = phase_diff_from_json(w);
        w.finish();
    }
    if (r.has("analyze")) {
        ObjectReader a = r.object("analyze");
        AnalyzeSection& s = c.analyze;
        s.map = resolve(a.string("map", ""), base_dir);
        s.reference = resolve(a.string("reference", ""), base_dir);
        s.scts_grid = resolve(a.string("scts_grid", ""), base_dir);
        s.lookup = resolve(a.string("lookup", ""), base_dir);
        if (!s.map.empty() && !s.scts_grid.empty()) ObjectReader::fail("analyze", "takes either 'map' or 'scts_grid'");
        s.px_half_width = a.number("px_half_width", s.px_half_width);
        if (!(s.px_half_width > 0.0)) ObjectReader::fail("analyze.px_half_width", "must be > 0");
        s.debias = a.boolean("debias", s.debias);
        s.analysis.normalize = a.boolean("normalize", s.analysis.normalize);
        const std::uint64_t h = a.unsigned_integer("envelope_harmonics", 0);
        if (h > 16) ObjectReader::fail("analyze.envelope_harmonics", "must be <= 16");
        s.analysis.envelope_harmonics = static_cast<int>(h);
        s.analysis.peaks.prominence_fraction = a.number("prominence_fraction", s.analysis.peaks.prominence_fraction);
        if (!(s.analysis.peaks.prominence_fraction > 0.0 && s.analysis.peaks.prominence_fraction < 1.0))
            ObjectReader::fail("analyze.prominence_fraction", "must be in (0, 1)");
        a.finish();
    }
    r.finish();
    return c;
}

RunConfig load_run_config(const std::string& path, json* raw) {
    auto is = detail::open_input(path);
    std::stringstream ss;
    ss << is.rdbuf();
    const json j = parse_json_text(ss.str(), path);
    const std::string base = std::filesystem::path(path).parent_path().string();
    RunConfig c = run_config_from_json(j, base);
    if (raw) *raw = j;
    return c;
}

const std::string& config_schema() {
    static const std::string schema = R"json({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "$id": "https://hase.invalid/config.schema.json",
  "title": "hase run configuration",
  "description": "Atomic units throughout except angles (degrees). Every section is optional; omitted keys take their defaults.",
  "type": "object",
  "additionalProperties": false,
  "properties": {
    "field": {"$ref": "#/$defs/field"},
    "ip": {"type": "number", "exclusiveMinimum": 0, "default": 0.5791561238, "description": "ionization potential (15.76 eV)"},
    "initial_state": {"$ref": "#/$defs/initial_state"},
    "grid": {"$ref": "#/$defs/grid"},
    "preset": {"enum": ["simple", "linear", "lin_env", "delayed", "custom"], "default": "custom"},
    "max_invalid_fraction": {"type": "number", "minimum": 0, "maximum": 1, "default": 0.01},
    "kappa_scan": {"$ref": "#/$defs/kappa_scan"},
    "scts": {"$ref": "#/$defs/scts"},
    "wigner": {"$ref": "#/$defs/wigner"},
    "analyze": {"$ref": "#/$defs/analyze"}
  },
  "$defs": {
    "envelope": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "kind": {"enum": ["flat", "sine_square"], "default": "flat"},
        "cycles": {"type": "number", "exclusiveMinimum": 0, "description": "flat: nominal duration in T780"},
        "total_cycles": {"type": "number", "exclusiveMinimum": 0},
        "flat_cycles": {"type": "number", "minimum": 0}
      }
    },
    "field": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "e390": {"type": "number", "minimum": 0, "default": 0.04},
        "e780": {"type": "number", "minimum": 0, "default": 0.004},
        "omega": {"type": "number", "exclusiveMinimum": 0, "default": 0.0584},
        "relative_phase_deg": {"type": "number", "default": 0},
        "envelope": {"$ref": "#/$defs/envelope"}
      }
    },
    "time_envelope": {
      "type": "object",
      "additionalProperties": false,
      "required": ["t", "g", "period"],
      "properties": {
        "t": {"type": "array", "items": {"type": "number"}},
        "g": {"type": "array", "items": {"type": "number"}},
        "period": {"type": "number", "exclusiveMinimum": 0}
      }
    },
    "amplitude": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "kind": {"enum": ["constant", "gaussian", "tabulated"], "default": "constant"},
        "value": {"type": "number"},
        "sigma": {"type": "number", "exclusiveMinimum": 0},
        "p0": {"type": "number"},
        "p": {"type": "array", "items": {"type": "number"}},
        "b": {"type": "array", "items": {"type": "number"}},
        "time_envelope": {"$ref": "#/$defs/time_envelope"}
      }
    },
    "offset_phase": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "kind": {"enum": ["linear", "tabulated"], "default": "linear"},
        "kappa": {"type": "number", "default": 0},
        "p": {"type": "array", "items": {"type": "number"}},
        "phi": {"type": "array", "items": {"type": "number"}}
      }
    },
    "initial_state": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "amplitude": {"$ref": "#/$defs/amplitude"},
        "offset_phase": {"$ref": "#/$defs/offset_phase"}
      }
    },
    "grid": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "pr_min": {"type": "number", "exclusiveMinimum": 0, "default": 0.2},
        "pr_max": {"type": "number", "exclusiveMinimum": 0, "default": 1.0},
        "pr_step": {"type": "number", "exclusiveMinimum": 0, "default": 0.002},
        "phi_step_deg": {"type": "number", "exclusiveMinimum": 0, "default": 1.0}
      }
    },
    "kappa_scan": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "kappas": {"type": "array", "items": {"type": "number"}, "minItems": 2},
        "start": {"type": "number", "default": 0},
        "stop": {"type": "number", "default": 6.283185307179586},
        "count": {"type": "integer", "minimum": 2, "default": 17}
      },
      "not": {"anyOf": [
        {"required": ["kappas", "start"]},
        {"required": ["kappas", "stop"]},
        {"required": ["kappas", "count"]}
      ]}
    },
    "scts": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "field": {"$ref": "#/$defs/field", "description": "envelope defaults to sine_square 14 total / 2 flat cycles"},
        "ip": {"type": "number", "exclusiveMinimum": 0},
        "z": {"type": "number", "minimum": 0, "default": 1},
        "n_traj": {"type": "number", "minimum": 1, "maximum": 2147483647, "default": 10000000},
        "seed": {"type": "integer", "minimum": 0, "default": 1},
        "window_cycles": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2, "default": [6, 8]},
        "sigma": {"type": "number", "exclusiveMinimum": 0, "default": 0.2},
        "p0_perp": {"type": "number", "default": 0.2},
        "p0x": {"type": "number", "default": 0},
        "box_sigmas": {"type": "number", "exclusiveMinimum": 0, "default": 4},
        "exit": {"enum": ["field_direction", "origin"], "default": "field_direction"},
        "bin_size": {"type": "number", "exclusiveMinimum": 0, "default": 0.01},
        "px_max": {"type": "number", "exclusiveMinimum": 0, "default": 0.6},
        "pyz_max": {"type": "number", "exclusiveMinimum": 0, "default": 1.2},
        "recollision_radius": {"type": "number", "minimum": 0, "default": 10},
        "recollision_filter": {"type": "boolean", "default": false},
        "kappas": {"type": "array", "items": {"type": "number"}, "minItems": 1, "default": [0]},
        "rtol": {"type": "number", "exclusiveMinimum": 0, "default": 1e-10},
        "atol": {"type": "number", "exclusiveMinimum": 0, "default": 1e-12},
        "max_discard_fraction": {"type": "number", "minimum": 0, "maximum": 1, "default": 0.2}
      }
    },
    "wigner": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "grid_kappa": {"type": "string"},
        "grid_zero": {"type": "string"},
        "slice_half_width": {"type": "number", "exclusiveMinimum": 0, "default": 0.01},
        "energy_bin": {"type": "number", "exclusiveMinimum": 0, "default": 0.005},
        "window": {"type": "integer", "minimum": 2, "maximum": 1000, "default": 5},
        "min_overlap": {"type": "number", "minimum": 0, "maximum": 1, "default": 0.5}
      }
    },
    "analyze": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "map": {"type": "string"},
        "reference": {"type": "string"},
        "scts_grid": {"type": "string"},
        "lookup": {"type": "string"},
        "px_half_width": {"type": "number", "exclusiveMinimum": 0, "default": 0.6},
        "debias": {"type": "boolean", "default": true},
        "normalize": {"type": "boolean", "default": false},
        "envelope_harmonics": {"type": "integer", "minimum": 0, "maximum": 16, "default": 0},
        "prominence_fraction": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1, "default": 0.05}
      },
      "not": {"required": ["map", "scts_grid"]}
    }
  }
}
)json";
    return schema;
}

}  // namespace hase
