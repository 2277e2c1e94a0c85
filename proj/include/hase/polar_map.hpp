#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hase/vec3.hpp"

namespace hase {

/// Polar grid in the polarization plane, sampled on [0, 360) deg. phi_polar
/// is measured from +y towards -z, the sense in which -A(t) rotates, so that
/// release time grows with the angle.
struct GridSpec {
    double pr_min = 0.2;
    double pr_max = 1.0;
    double pr_step = 0.002;
    double phi_step_deg = 1.0;

    void validate() const;
    std::size_t n_radial() const;
    std::size_t n_angular() const;
    double pr(std::size_t i) const { return pr_min + static_cast<double>(i) * pr_step; }
    double phi_deg(std::size_t j) const { return static_cast<double>(j) * phi_step_deg; }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

Vec3 polar_momentum(double p_r, double phi_deg);
double polar_angle_deg(double py, double pz);  // in [0, 360)

/// Run preset labels naming the wave functions of the model.
enum class RunPreset { simple, linear, lin_env, delayed, custom };

std::string to_string(RunPreset preset);

/// Final momentum map on a polar grid, row-major [radial][angular].
struct PolarMomentumMap {
    GridSpec grid;
    std::vector<std::complex<double>> amplitude;  // empty when only intensities are known
    std::vector<double> intensity;
    std::vector<std::uint8_t> valid;
    std::string label = "custom";
    std::string metadata = "{}";  // JSON snapshot of the producing configuration

    static PolarMomentumMap empty(const GridSpec& grid);

    std::size_t n_radial() const { return grid.n_radial(); }
    std::size_t n_angular() const { return grid.n_angular(); }
    std::size_t index(std::size_t ir, std::size_t iphi) const { return ir * grid.n_angular() + iphi; }
    bool has_amplitude() const { return !amplitude.empty(); }
    std::size_t invalid_count() const;
    double valid_fraction() const;
};

enum class HalfCyclePair { second_vs_first, third_vs_second };

/// Differences between the release-time solutions of two half-cycles.
struct DifferentialMaps {
    GridSpec grid;
    HalfCyclePair pair = HalfCyclePair::second_vs_first;
    std::vector<double> t_diff_as;  // attoseconds
    std::vector<double> p_diff;     // a.u.
    std::vector<double> phi_diff;   // rad, wrapped to [-pi, pi)
    std::vector<std::uint8_t> valid;
    std::string metadata = "{}";
};

// CSV: '#'-prefixed metadata lines, one column header, then one row per cell.
void write_map_csv(std::ostream& os, const PolarMomentumMap& map);
void write_map_csv(const std::string& path, const PolarMomentumMap& map);
PolarMomentumMap read_map_csv(std::istream& is);
PolarMomentumMap read_map_csv(const std::string& path);

void write_differential_csv(std::ostream& os, const DifferentialMaps& maps);
void write_differential_csv(const std::string& path, const DifferentialMaps& maps);

}  // namespace hase
