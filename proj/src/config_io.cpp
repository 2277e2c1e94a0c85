#include "hase/config_io.hpp"

#include <algorithm>
#include <cmath>

#include "hase/errors.hpp"
#include "hase/units.hpp"
#include "json_reader.hpp"

namespace hase {

using detail::ObjectReader;

json to_json(const FieldConfig& cfg) {
    json env;
    if (cfg.envelope.kind == Envelope::Kind::flat) {
        env = {{"kind", "flat"}, {"cycles", cfg.envelope.total_cycles}};
    } else {
        env = {{"kind", "sine_square"},
               {"total_cycles", cfg.envelope.total_cycles},
               {"flat_cycles", cfg.envelope.flat_cycles}};
    }
    return {{"e390", cfg.e390},
            {"e780", cfg.e780},
            {"omega", cfg.omega},
            {"relative_phase_deg", cfg.relative_phase / units::deg},
            {"envelope", env}};
}

json to_json(const AmplitudeModel& m) {
    json j;
    switch (m.kind) {
        case AmplitudeModel::Kind::constant: j = {{"kind", "constant"}, {"value", m.value}}; break;
        case AmplitudeModel::Kind::gaussian: j = {{"kind", "gaussian"}, {"sigma", m.sigma}, {"p0", m.p0}}; break;
        case AmplitudeModel::Kind::tabulated: j = {{"kind", "tabulated"}, {"p", m.table_p}, {"b", m.table_b}}; break;
    }
    if (m.has_time_factor()) j["time_envelope"] = {{"t", m.time_t}, {"g", m.time_g}, {"period", m.time_period}};
    return j;
}

json to_json(const OffsetPhaseModel& m) {
    if (m.kind == OffsetPhaseModel::Kind::linear) return {{"kind", "linear"}, {"kappa", m.kappa}};
    return {{"kind", "tabulated"}, {"p", m.table_p}, {"phi", m.table_phi}};
}

json to_json(const InitialStateModel& m) {
    return {{"amplitude", to_json(m.amplitude)}, {"offset_phase", to_json(m.offset_phase)}};
}

json to_json(const GridSpec& g) {
    return {{"pr_min", g.pr_min}, {"pr_max", g.pr_max}, {"pr_step", g.pr_step}, {"phi_step_deg", g.phi_step_deg}};
}

json to_json(const SctsConfig& c) {
    return {{"field", to_json(c.field)},
            {"ip", c.ip},
            {"z", c.z},
            {"n_traj", c.n_traj},
            {"seed", c.seed},
            {"window_cycles", {c.window_start_cycles, c.window_end_cycles}},
            {"sigma", c.sigma},
            {"p0_perp", c.p0_perp},
            {"p0x", c.p0x},
            {"box_sigmas", c.box_sigmas},
            {"exit", c.exit_at_origin ? "origin" : "field_direction"},
            {"bin_size", c.bin_size},
            {"px_max", c.px_max},
            {"pyz_max", c.pyz_max},
            {"recollision_radius", c.recollision_radius},
            {"recollision_filter", c.recollision_filter},
            {"kappas", c.kappas},
            {"rtol", c.rtol},
            {"atol", c.atol},
            {"max_discard_fraction", c.max_discard_fraction}};
}

json to_json(const SctsStats& s) {
    return {{"n_traj", s.n_traj},
            {"step_failures", s.step_failures},
            {"bound", s.bound},
            {"recollided", s.recollided},
            {"filtered", s.filtered},
            {"out_of_grid", s.out_of_grid},
            {"binned", s.binned},
            {"recollision_fraction", s.recollision_fraction()},
            {"weighted_recollision_fraction", s.weighted_recollision_fraction()}};
}

json to_json(const PhaseDiffResult& r) {
    auto column = [](const std::vector<double>& v) {
        json a = json::array();
        for (double x : v) a.push_back(std::isfinite(x) ? json(x) : json(nullptr));
        return a;
    };
    return {{"kappa", r.kappa},
            {"overlap_fraction", r.overlap_fraction},
            {"energy", column(r.energy)},
            {"phase_diff", column(r.phase_diff)},
            {"weight", column(r.weight)},
            {"delay_au", column(r.delay_au)},
            {"delay_hase_au", column(r.delay_hase_au)}};
}

FieldConfig field_from_json(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    FieldConfig cfg;
    cfg.e390 = r.number("e390", cfg.e390);
    cfg.e780 = r.number("e780", cfg.e780);
    cfg.omega = r.number("omega", cfg.omega);
    cfg.relative_phase = r.number("relative_phase_deg", 0.0) * units::deg;
    if (r.has("envelope")) {
        ObjectReader e = r.object("envelope");
        const std::string kind = e.choice("kind", {"flat", "sine_square"}, "flat");
        if (kind == "flat") {
            cfg.envelope = Envelope::flat(e.number("cycles", 2.0));
        } else {
            const double total = e.number("total_cycles", 14.0);
            const double flat = e.number("flat_cycles", 2.0);
            cfg.envelope = Envelope::sine_square_edges(total, flat);
        }
        e.finish();
    }
    r.finish();
    cfg.validate();
    return cfg;
}

AmplitudeModel amplitude_from_json(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    AmplitudeModel m;
    const std::string kind = r.choice("kind", {"constant", "gaussian", "tabulated"}, "constant");
    if (kind == "constant") {
        m = AmplitudeModel::constant(r.number("value", 1.0));
    } else if (kind == "gaussian") {
        m = AmplitudeModel::gaussian(r.number("sigma", 0.2), r.number("p0", 0.2));
    } else {
        m = AmplitudeModel::tabulated(r.numbers("p"), r.numbers("b"));
    }
    if (r.has("time_envelope")) {
        ObjectReader t = r.object("time_envelope");
        m.time_t = t.numbers("t");
        m.time_g = t.numbers("g");
        m.time_period = t.number("period");
        t.finish();
    }
    r.finish();
    m.validate();
    return m;
}

OffsetPhaseModel offset_phase_from_json(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    OffsetPhaseModel m;
    const std::string kind = r.choice("kind", {"linear", "tabulated"}, "linear");
    if (kind == "linear") {
        m = OffsetPhaseModel::linear(r.number("kappa", 0.0));
    } else {
        m = OffsetPhaseModel::tabulated(r.numbers("p"), r.numbers("phi"));
    }
    r.finish();
    m.validate();
    return m;
}

InitialStateModel initial_state_from_json(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    InitialStateModel m;
    if (r.has("amplitude")) m.amplitude = amplitude_from_json(r.raw("amplitude"), r.key_path("amplitude"));
    if (r.has("offset_phase"))
        m.offset_phase = offset_phase_from_json(r.raw("offset_phase"), r.key_path("offset_phase"));
    r.finish();
    return m;
}

GridSpec grid_from_json(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    GridSpec g;
    g.pr_min = r.number("pr_min", g.pr_min);
    g.pr_max = r.number("pr_max", g.pr_max);
    g.pr_step = r.number("pr_step", g.pr_step);
    g.phi_step_deg = r.number("phi_step_deg", g.phi_step_deg);
    r.finish();
    g.validate();
    return g;
}

SctsConfig scts_from_json(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    SctsConfig c;
    if (r.has("field")) {
        const json& f = r.raw("field");
        const Envelope env = c.field.envelope;
        c.field = field_from_json(f, r.key_path("field"));
        if (f.is_object() && !f.contains("envelope")) c.field.envelope = env;
    }
    c.ip = r.number("ip", c.ip);
    c.z = r.number("z", c.z);
    c.n_traj = r.unsigned_integer("n_traj", c.n_traj);
    c.seed = r.unsigned_integer("seed", c.seed);
    if (r.has("window_cycles")) {
        const auto w = r.numbers("window_cycles");
        if (w.size() != 2) ObjectReader::fail(r.key_path("window_cycles"), "must be [start, end]");
        c.window_start_cycles = w[0];
        c.window_end_cycles = w[1];
    }
    c.sigma = r.number("sigma", c.sigma);
    c.p0_perp = r.number("p0_perp", c.p0_perp);
    c.p0x = r.number("p0x", c.p0x);
    c.box_sigmas = r.number("box_sigmas", c.box_sigmas);
    c.exit_at_origin = r.choice("exit", {"field_direction", "origin"}, "field_direction") == "origin";
    c.bin_size = r.number("bin_size", c.bin_size);
    c.px_max = r.number("px_max", c.px_max);
    c.pyz_max = r.number("pyz_max", c.pyz_max);
    c.recollision_radius = r.number("recollision_radius", c.recollision_radius);
    c.recollision_filter = r.boolean("recollision_filter", c.recollision_filter);
    if (r.has("kappas")) c.kappas = r.numbers("kappas");
    c.rtol = r.number("rtol", c.rtol);
    c.atol = r.number("atol", c.atol);
    c.max_discard_fraction = r.number("max_discard_fraction", c.max_discard_fraction);
    r.finish();
    c.validate();
    return c;
}

RunPreset preset_from_string(const std::string& s) {
    for (RunPreset p : {RunPreset::simple, RunPreset::linear, RunPreset::lin_env, RunPreset::delayed, RunPreset::custom})
        if (to_string(p) == s) return p;
    throw Error(ErrorKind::ConfigError, "'preset' must be one of {simple, linear, lin_env, delayed, custom}, got '" +
                                            s + "'");
}

json hase_run_json(const FieldConfig& cfg, double ip, const InitialStateModel& model, const GridSpec& grid,
                   RunPreset preset) {
    return {{"preset", to_string(preset)},
            {"ip", ip},
            {"field", to_json(cfg)},
            {"initial_state", to_json(model)},
            {"grid", to_json(grid)}};
}

json parse_json_text(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t pos = std::min<std::size_t>(e.byte, text.size());
        std::size_t line = 1;
        std::size_t col = 1;
        for (std::size_t i = 0; i + 1 < pos; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw Error(ErrorKind::ConfigError,
                    source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON syntax error");
    }
}

}  // namespace hase
