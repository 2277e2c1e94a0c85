// hase: command-line driver for HASE maps, kappa scans, SCTS ensembles and
// the analyses built on them.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hase/config_io.hpp"
#include "hase/errors.hpp"
#include "hase/hase_engine.hpp"
#include "hase/manifest.hpp"
#include "hase/run_config.hpp"
#include "hase/scts.hpp"
#include "hase/spectra_analysis.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kConfig = 2, kNumerical = 3, kIo = 4 };

struct Common {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
};

struct Context {
    std::string command;
    hase::RunConfig cfg;
    json raw = json::object();
    fs::path out;
    unsigned threads = 0;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;

    std::string path(const std::string& name) {
        const std::string p = (out / name).string();
        outputs.push_back(p);
        return p;
    }
};

int exit_code(hase::ErrorKind k) {
    switch (k) {
        case hase::ErrorKind::ConfigError: return kConfig;
        case hase::ErrorKind::IoError: return kIo;
        default: return kNumerical;
    }
}

void write_json(const std::string& path, const json& j) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw hase::Error(hase::ErrorKind::IoError, "cannot open '" + path + "' for writing");
    os << j.dump(2) << '\n';
    if (!os) throw hase::Error(hase::ErrorKind::IoError, "write failed for '" + path + "'");
}

hase::MapOptions map_options(const Context& c) {
    hase::MapOptions o;
    o.preset = c.cfg.preset;
    o.threads = c.threads;
    o.max_invalid_fraction = c.cfg.max_invalid_fraction;
    return o;
}

hase::PolarMomentumMap single_color_map(const Context& c, hase::FieldConfig field, const hase::GridSpec& grid) {
    field.e780 = 0.0;
    hase::MapOptions o = map_options(c);
    o.preset = hase::RunPreset::custom;
    return hase::evaluate_map(field, c.cfg.ip, c.cfg.initial_state, grid, o);
}

void cmd_hase_map(Context& c) {
    const auto& k = c.cfg;
    const auto map = hase::evaluate_map(k.field, k.ip, k.initial_state, k.grid, map_options(c));
    hase::write_map_csv(c.path("map.csv"), map);
    hase::write_spectrum_csv(c.path("spectrum.csv"), hase::radial_spectrum(map));

    const auto reference = single_color_map(c, k.field, k.grid);
    hase::write_map_csv(c.path("reference_map.csv"), reference);
    hase::write_spectrum_csv(c.path("reference_spectrum.csv"), hase::radial_spectrum(reference));

    const auto d21 = hase::differential_maps(k.field, k.ip, k.initial_state, hase::HalfCyclePair::second_vs_first,
                                             k.grid, map_options(c));
    hase::write_differential_csv(c.path("differential_21.csv"), d21);
    const auto d32 = hase::differential_maps(k.field, k.ip, k.initial_state, hase::HalfCyclePair::third_vs_second,
                                             k.grid, map_options(c));
    hase::write_differential_csv(c.path("differential_32.csv"), d32);
}

void cmd_kappa_scan(Context& c) {
    const auto& k = c.cfg;
    hase::LookupOptions o;
    o.grid = k.grid;
    o.analysis = k.analyze.analysis;
    o.threads = c.threads;
    o.ip = k.ip;
    const auto lookup = hase::build_lookup(k.field, k.initial_state.amplitude, k.kappa_scan.kappas, o);
    write_json(c.path("lookup.json"), hase::to_json(lookup));
    hase::write_alpha_curves_csv(c.path("alpha_curves.csv"), lookup);
}

void cmd_scts_run(Context& c) {
    hase::SctsConfig cfg = c.cfg.scts;
    cfg.threads = c.threads;
    const auto result = hase::run_ensemble(cfg);

    json files = json::array();
    for (std::size_t i = 0; i < result.grids.size(); ++i) {
        const auto& g = result.grids[i];
        const std::string tag = "_k" + std::to_string(i);
        hase::write_grid(c.path("scts" + tag + ".grid"), g);
        hase::write_projection_csv(c.path("projection" + tag + ".csv"), g);
        hase::write_slice_csv(c.path("slice" + tag + ".csv"), g);
        hase::ProjectionOptions po;
        po.polar = c.cfg.grid;
        po.px_half_width = c.cfg.analyze.px_half_width;
        po.debias = c.cfg.analyze.debias;
        const auto map = hase::project_polar(g, po);
        hase::write_map_csv(c.path("scts_map" + tag + ".csv"), map);
        hase::write_spectrum_csv(c.path("scts_spectrum" + tag + ".csv"), hase::radial_spectrum(map));
        files.push_back({{"kappa", g.kappa}, {"grid", "scts" + tag + ".grid"}});
    }
    write_json(c.path("scts_stats.json"),
               {{"config", hase::to_json(cfg)}, {"stats", hase::to_json(result.stats)}, {"grids", files}});
}

void cmd_wigner(Context& c) {
    const auto& w = c.cfg.wigner;
    if (w.grid_k.empty() || w.grid_0.empty())
        throw hase::Error(hase::ErrorKind::ConfigError, "'wigner.grid_kappa' and 'wigner.grid_zero' are required");
    c.inputs = {w.grid_k, w.grid_0};
    const auto gk = hase::read_grid(w.grid_k);
    const auto g0 = hase::read_grid(w.grid_0);
    const auto r = hase::phase_difference_analysis(gk, g0, w.options);
    hase::write_phase_diff_csv(c.path("phase_diff.csv"), r);
    json j = hase::to_json(r);
    j["options"] = {{"slice_half_width", w.options.slice_half_width},
                    {"energy_bin", w.options.energy_bin},
                    {"window", w.options.window},
                    {"min_overlap", w.options.min_overlap}};
    j["seed"] = gk.seed;
    j["n_traj"] = gk.n_traj;
    write_json(c.path("phase_diff.json"), j);
}

void cmd_analyze(Context& c) {
    const auto& a = c.cfg.analyze;
    hase::PolarMomentumMap map;
    hase::FieldConfig field = c.cfg.field;
    std::string source;
    if (!a.scts_grid.empty()) {
        c.inputs.push_back(a.scts_grid);
        const auto grid = hase::read_grid(a.scts_grid);
        hase::ProjectionOptions po;
        po.polar = c.cfg.grid;
        po.px_half_width = a.px_half_width;
        po.debias = a.debias;
        map = hase::project_polar(grid, po);
        field = c.cfg.scts.field;
        field.envelope = hase::Envelope::flat(2.0);
        source = "scts_grid";
    } else if (!a.map.empty()) {
        c.inputs.push_back(a.map);
        map = hase::read_map_csv(a.map);
        source = "map";
    } else {
        map = hase::evaluate_map(c.cfg.field, c.cfg.ip, c.cfg.initial_state, c.cfg.grid, map_options(c));
        source = "computed";
    }

    hase::PolarMomentumMap reference;
    if (!a.reference.empty()) {
        c.inputs.push_back(a.reference);
        reference = hase::read_map_csv(a.reference);
    } else {
        reference = single_color_map(c, field, map.grid);
    }

    const auto analysis = hase::analyze_map(map, reference, field.omega, a.analysis);
    json peaks = hase::to_json(analysis.peaks);
    peaks["source"] = source;
    write_json(c.path("peaks.json"), peaks);

    std::optional<hase::AlphaLookup> lookup;
    if (!a.lookup.empty()) {
        c.inputs.push_back(a.lookup);
        lookup = hase::read_lookup_json(a.lookup);
    }
    const double p_streak = field.streak_momentum();
    json entries = json::array();
    for (const auto& p : analysis.peaks.peaks) {
        json e{{"label", p.label}, {"class", hase::to_string(p.cls)}, {"p_r", p.p_r}, {"energy", p.energy}};
        if (p.has_alpha) e["alpha_deg"] = p.alpha_deg;
        e["model"] = hase::to_json(hase::wigner_delay_from_gradient(c.cfg.initial_state.offset_phase, p.p_r, p_streak));
        if (lookup && p.has_alpha) {
            try {
                lookup->curve(p.label);
                const double kappa = hase::invert_alpha(*lookup, p.label, p.alpha_deg);
                e["lookup"] = hase::to_json(hase::wigner_delay_from_gradient(kappa, p.p_r, p_streak));
            } catch (const hase::Error& err) {
                if (err.kind() != hase::ErrorKind::OutOfDomain && err.kind() != hase::ErrorKind::DomainError) throw;
                e["lookup"] = {{"error", err.what()}};
            }
        }
        entries.push_back(e);
    }
    write_json(c.path("wigner_map.json"), {{"source", source}, {"p_streak", p_streak}, {"peaks", entries}});
}

std::string run_id(const std::string& command, const json& config, const std::string& started) {
    return started + "-" + hase::git_blob_sha1_bytes(command + config.dump() + started).substr(0, 10);
}

int run(const std::string& command, const Common& opt, void (*body)(Context&)) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string started = hase::utc_now();
    Context c;
    c.command = command;
    c.threads = opt.threads;
    if (!opt.config.empty()) {
        c.cfg = hase::load_run_config(opt.config, &c.raw);
    } else {
        c.cfg = hase::run_config_from_json(json::object());
    }
    if (opt.seed) {
        c.cfg.scts.seed = *opt.seed;
        c.raw["scts"]["seed"] = *opt.seed;
    }

    c.out = opt.out;
    std::error_code ec;
    fs::create_directories(c.out, ec);
    if (ec || !fs::is_directory(c.out))
        throw hase::Error(hase::ErrorKind::IoError, "cannot create output directory '" + opt.out + "'");

    body(c);

    hase::RunManifest m;
    m.command = command;
    m.started_utc = started;
    m.run_id = run_id(command, c.raw, started);
    m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    m.config_path = opt.config;
    m.config = c.raw;
    m.inputs = c.inputs;
    m.outputs = c.outputs;
    hase::append_manifest((c.out / "manifest.jsonl").string(), m);
    for (const auto& p : c.outputs) std::cout << p << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"HASE maps, kappa scans, SCTS ensembles and their analysis"};
    app.require_subcommand(0, 1);
    bool print_schema = false;
    app.add_flag("--print-schema", print_schema, "Print the JSON Schema of the config file and exit");

    struct Sub {
        const char* name;
        const char* help;
        void (*body)(Context&);
        Common opt;
        CLI::App* app = nullptr;
    };
    std::vector<Sub> subs{
        {"hase-map", "HASE map, single-color reference, spectra and differential maps", cmd_hase_map, {}},
        {"kappa-scan", "Alpha lookup over the offset-phase slope", cmd_kappa_scan, {}},
        {"scts-run", "SCTS ensemble: one grid per kappa plus projections", cmd_scts_run, {}},
        {"wigner", "Phase difference between two SCTS grids", cmd_wigner, {}},
        {"analyze", "Peaks, alpha and Wigner delays of a map or SCTS grid", cmd_analyze, {}},
    };
    for (auto& s : subs) {
        s.app = app.add_subcommand(s.name, s.help);
        s.app->add_option("--config", s.opt.config, "JSON config file");
        s.app->add_option("--out", s.opt.out, "Output directory")->capture_default_str();
        s.app->add_option("--seed", s.opt.seed, "Override scts.seed");
        s.app->add_option("--threads", s.opt.threads, "Worker cap (0: all cores)")->capture_default_str();
        s.app->add_flag("--print-schema", print_schema, "Print the JSON Schema of the config file and exit");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    if (print_schema) {
        std::cout << hase::config_schema();
        return kOk;
    }
    for (auto& s : subs) {
        if (!s.app->parsed()) continue;
        try {
            return run(s.name, s.opt, s.body);
        } catch (const hase::Error& e) {
            std::cerr << "hase " << s.name << ": " << e.what() << '\n';
            return exit_code(e.kind());
        } catch (const json::exception& e) {
            std::cerr << "hase " << s.name << ": ConfigError: " << e.what() << '\n';
            return kConfig;
        } catch (const fs::filesystem_error& e) {
            std::cerr << "hase " << s.name << ": IoError: " << e.what() << '\n';
            return kIo;
        } catch (const std::exception& e) {
            std::cerr << "hase " << s.name << ": " << e.what() << '\n';
            return kNumerical;
        }
    }
    std::cerr << app.help();
    return kConfig;
}
