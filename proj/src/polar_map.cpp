#include "hase/polar_map.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "csv_util.hpp"
#include "hase/errors.hpp"
#include "hase/units.hpp"

namespace hase {

using nlohmann::ordered_json;

void GridSpec::validate() const {
    if (!(pr_step > 0.0)) throw Error(ErrorKind::ConfigError, "grid.pr_step must be > 0");
    if (!(pr_min > 0.0) || !(pr_max >= pr_min))
        throw Error(ErrorKind::ConfigError, "grid needs 0 < pr_min <= pr_max");
    if (!(phi_step_deg > 0.0) || phi_step_deg > 360.0)
        throw Error(ErrorKind::ConfigError, "grid.phi_step_deg must be in (0, 360]");
    const double n = 360.0 / phi_step_deg;
    if (std::abs(n - std::round(n)) > 1e-9)
        throw Error(ErrorKind::ConfigError, "grid.phi_step_deg must divide 360");
}

std::size_t GridSpec::n_radial() const {
    return static_cast<std::size_t>(std::floor((pr_max - pr_min) / pr_step + 1e-9)) + 1;
}

std::size_t GridSpec::n_angular() const { return static_cast<std::size_t>(std::llround(360.0 / phi_step_deg)); }

Vec3 polar_momentum(double p_r, double phi_deg) {
    const double phi = phi_deg * units::deg;
    return {0.0, p_r * std::cos(phi), -p_r * std::sin(phi)};
}

double polar_angle_deg(double py, double pz) {
    const double a = std::atan2(-pz, py) / units::deg;
    return a < 0.0 ? a + 360.0 : a;
}

std::string to_string(RunPreset preset) {
    switch (preset) {
        case RunPreset::simple: return "simple";
        case RunPreset::linear: return "linear";
        case RunPreset::lin_env: return "lin_env";
        case RunPreset::delayed: return "delayed";
        case RunPreset::custom: return "custom";
    }
    return "custom";
}

PolarMomentumMap PolarMomentumMap::empty(const GridSpec& grid) {
    grid.validate();
    PolarMomentumMap m;
    m.grid = grid;
    const std::size_t n = grid.n_radial() * grid.n_angular();
    m.amplitude.assign(n, {0.0, 0.0});
    m.intensity.assign(n, 0.0);
    m.valid.assign(n, 0);
    return m;
}

std::size_t PolarMomentumMap::invalid_count() const {
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{0}));
}

double PolarMomentumMap::valid_fraction() const {
    if (valid.empty()) return 0.0;
    return 1.0 - static_cast<double>(invalid_count()) / static_cast<double>(valid.size());
}

namespace {

ordered_json grid_json(const GridSpec& g) {
    return ordered_json{{"pr_min", g.pr_min}, {"pr_max", g.pr_max}, {"pr_step", g.pr_step},
                        {"phi_step_deg", g.phi_step_deg}};
}

void write_header(std::ostream& os, const std::string& kind, const std::string& label, const GridSpec& grid,
                  const std::string& metadata) {
    os << "# kind: " << kind << '\n';
    os << "# label: " << label << '\n';
    os << "# grid: " << grid_json(grid).dump() << '\n';
    os << "# config: " << metadata << '\n';
}

}  // namespace

void write_map_csv(std::ostream& os, const PolarMomentumMap& map) {
    write_header(os, "polar_momentum_map", map.label, map.grid, map.metadata);
    os << "p_r,phi_polar_deg,re_psi,im_psi,intensity,valid\n";
    std::string line;
    for (std::size_t i = 0; i < map.n_radial(); ++i) {
        for (std::size_t j = 0; j < map.n_angular(); ++j) {
            const std::size_t k = map.index(i, j);
            line.clear();
            detail::append_number(line, map.grid.pr(i));
            line += ',';
            detail::append_number(line, map.grid.phi_deg(j));
            line += ',';
            detail::append_number(line, map.has_amplitude() ? map.amplitude[k].real() : 0.0);
            line += ',';
            detail::append_number(line, map.has_amplitude() ? map.amplitude[k].imag() : 0.0);
            line += ',';
            detail::append_number(line, map.intensity[k]);
            line += map.valid[k] ? ",1\n" : ",0\n";
            os << line;
        }
    }
}

void write_map_csv(const std::string& path, const PolarMomentumMap& map) {
    auto os = detail::open_output(path);
    write_map_csv(os, map);
    if (!os) throw Error(ErrorKind::IoError, "write failed for '" + path + "'");
}

PolarMomentumMap read_map_csv(std::istream& is) {
    std::string line;
    std::string label = "custom";
    std::string metadata = "{}";
    GridSpec grid;
    bool have_grid = false;
    bool have_columns = false;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.rfind("# ", 0) == 0) {
            const auto colon = line.find(": ");
            if (colon == std::string::npos) continue;
            const std::string key = line.substr(2, colon - 2);
            const std::string value = line.substr(colon + 2);
            if (key == "label") label = value;
            if (key == "config") metadata = value;
            if (key == "grid") {
                const auto j = ordered_json::parse(value, nullptr, false);
                if (j.is_discarded()) throw Error(ErrorKind::IoError, "malformed grid metadata line");
                grid.pr_min = j.at("pr_min").get<double>();
                grid.pr_max = j.at("pr_max").get<double>();
                grid.pr_step = j.at("pr_step").get<double>();
                grid.phi_step_deg = j.at("phi_step_deg").get<double>();
                have_grid = true;
            }
            continue;
        }
        have_columns = true;
        break;
    }
    if (!have_grid || !have_columns) throw Error(ErrorKind::IoError, "map CSV lacks grid metadata or column header");
    PolarMomentumMap map = PolarMomentumMap::empty(grid);
    map.label = label;
    map.metadata = metadata;
    const std::size_t n = map.intensity.size();
    std::size_t k = 0;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        if (k >= n) throw Error(ErrorKind::IoError, "map CSV has more rows than the grid");
        const auto cols = detail::split(line);
        if (cols.size() != 6) throw Error(ErrorKind::IoError, "map CSV row needs 6 columns");
        map.amplitude[k] = {detail::parse_number(cols[2]), detail::parse_number(cols[3])};
        map.intensity[k] = detail::parse_number(cols[4]);
        map.valid[k] = detail::parse_number(cols[5]) != 0.0 ? 1 : 0;
        ++k;
    }
    if (k != n) throw Error(ErrorKind::IoError, "map CSV row count does not match the grid");
    return map;
}

PolarMomentumMap read_map_csv(const std::string& path) {
    auto is = detail::open_input(path);
    return read_map_csv(is);
}

void write_differential_csv(std::ostream& os, const DifferentialMaps& maps) {
    const std::string pair = maps.pair == HalfCyclePair::second_vs_first ? "2v1" : "3v2";
    write_header(os, "differential_maps", pair, maps.grid, maps.metadata);
    os << "p_r,phi_polar_deg,t_diff_as,p_diff,phi_diff,valid\n";
    const std::size_t na = maps.grid.n_angular();
    std::string line;
    for (std::size_t i = 0; i < maps.grid.n_radial(); ++i) {
        for (std::size_t j = 0; j < na; ++j) {
            const std::size_t k = i * na + j;
            line.clear();
            detail::append_number(line, maps.grid.pr(i));
            line += ',';
            detail::append_number(line, maps.grid.phi_deg(j));
            line += ',';
            detail::append_number(line, maps.t_diff_as[k]);
            line += ',';
            detail::append_number(line, maps.p_diff[k]);
            line += ',';
            detail::append_number(line, maps.phi_diff[k]);
            line += maps.valid[k] ? ",1\n" : ",0\n";
            os << line;
        }
    }
}

void write_differential_csv(const std::string& path, const DifferentialMaps& maps) {
    auto os = detail::open_output(path);
    write_differential_csv(os, maps);
    if (!os) throw Error(ErrorKind::IoError, "write failed for '" + path + "'");
}

}  // namespace hase
