#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hase/fields.hpp"
#include "hase/polar_map.hpp"
#include "hase/units.hpp"
#include "hase/vec3.hpp"

namespace hase {

/// Monte Carlo tunnelling + classical propagation in laser and Coulomb field.
struct SctsConfig {
    FieldConfig field = [] {
        FieldConfig f;
        f.envelope = Envelope::sine_square_edges(14.0, 2.0);
        return f;
    }();
    double ip = units::argon_ip;
    double z = 1.0;                     // residual ion charge
    std::uint64_t n_traj = 10'000'000;
    std::uint64_t seed = 1;
    double window_start_cycles = 6.0;   // release window in units of T780
    double window_end_cycles = 8.0;
    double sigma = 0.2;                 // width of R(p)
    double p0_perp = 0.2;
    double p0x = 0.0;
    double box_sigmas = 4.0;            // uniform sampling box half-width in sigma
    bool exit_at_origin = false;        // r0 = 0 instead of the field-direction exit
    double bin_size = 0.01;
    double pyz_max = 1.2;               // grid half-extents
    double px_max = 0.6;
    double recollision_radius = 10.0;
    bool recollision_filter = false;
    std::vector<double> kappas{0.0};    // offset-phase slopes, one grid each
    double rtol = 1e-10;
    double atol = 1e-12;
    double max_discard_fraction = 0.2;
    unsigned threads = 0;               // not part of the result

    void validate() const;
    double window_start() const { return window_start_cycles * field.period_780(); }
    double window_end() const { return window_end_cycles * field.period_780(); }
    double reference_time() const { return 0.5 * (window_start() + window_end()); }
};

/// Stateless counter-based generator: the same (seed, index, lane) always
/// gives the same uniform double in [0, 1).
double counter_uniform(std::uint64_t seed, std::uint64_t index, std::uint32_t lane);

struct SampledTrajectory {
    std::uint64_t index = 0;
    double t0 = 0.0;
    double p0x = 0.0;
    double p0_perp = 0.0;
    double p0_par = 0.0;
    Vec3 e_hat;         // E(t0)/|E(t0)|
    Vec3 u_perp;        // transverse unit vector at t0
    Vec3 r0;
    Vec3 v0;
    double probability = 0.0;  // R = exp(-|p - p0|^2 / (2 sigma^2))
    double amplitude = 0.0;    // sqrt(R)

    // filled by propagate()
    double t = 0.0;
    Vec3 r;
    Vec3 v;
    double action = 0.0;     // integral of v^2/2 - 2Z/r from t0 to t
    double min_distance = 0.0;
    bool recollided = false;
};

SampledTrajectory sample_initial(const SctsConfig& cfg, std::uint64_t index);

/// Phase-space point carried through the integrator.
struct PhasePoint {
    double t = 0.0;
    Vec3 r;
    Vec3 v;
    double action = 0.0;
    double min_distance = 0.0;
};

struct Tolerances {
    double rtol = 1e-10;
    double atol = 1e-12;
};

/// Integrates r'' = -E(t) - Z r/|r|^3 together with the action integral up to
/// t_end (Runge-Kutta-Fehlberg 7(8), adaptive). Tracks the closest approach to
/// the origin. Throws StepFailure when the step size underflows.
void propagate_interval(const FieldConfig& field, double z, PhasePoint& s, double t_end, const Tolerances& tol);

/// Propagates a sampled trajectory to the end of the pulse.
void propagate(const SctsConfig& cfg, SampledTrajectory& traj);

/// Kepler asymptote of a field-free state. |p_inf| = sqrt(2E); for Z = 0 the
/// velocity itself. Throws BoundElectron for E <= 0.
Vec3 asymptotic_momentum(const Vec3& r, const Vec3& v, double z);

/// Phase accumulated after the state (r, v) at time t up to infinity, with the
/// terms that depend only on the final energy removed and the energy phase
/// referred to t_ref: E (t - t_ref) - (Z/k)(ln e + F), F the hyperbolic
/// anomaly at t. Throws BoundElectron for E <= 0.
double coulomb_tail_phase(const Vec3& r, const Vec3& v, double z, double t, double t_ref);

/// -v0.r0 + Ip t0 - action + tail + kappa p0_perp.
double scts_phase(const SctsConfig& cfg, const SampledTrajectory& traj, double kappa);

/// Cartesian momentum grid with bins of equal size.
struct BinGeometry {
    double bin = 0.01;
    std::uint32_t nx = 0, ny = 0, nz = 0;
    double x0 = 0.0, y0 = 0.0, z0 = 0.0;  // lower grid edges

    static BinGeometry centered(double bin, double px_max, double pyz_max);
    std::size_t size() const { return std::size_t{nx} * ny * nz; }
    std::size_t index(std::uint32_t ix, std::uint32_t iy, std::uint32_t iz) const {
        return (std::size_t{ix} * ny + iy) * nz + iz;
    }
    /// Flat index of the bin holding p, or size() if p is outside.
    std::size_t locate(const Vec3& p) const;
    Vec3 center(std::uint32_t ix, std::uint32_t iy, std::uint32_t iz) const {
        return {x0 + (ix + 0.5) * bin, y0 + (iy + 0.5) * bin, z0 + (iz + 0.5) * bin};
    }
    friend bool operator==(const BinGeometry&, const BinGeometry&) = default;
};

/// Coherent sums per bin kept in 32.32 fixed point, so accumulation is exact
/// and independent of the order in which trajectories arrive.
struct BinGrid3D {
    static constexpr double kScale = 4294967296.0;        // 2^32
    static constexpr double kMomentScale = 1073741824.0;  // 2^30

    BinGeometry geometry;
    double kappa = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t n_traj = 0;
    std::string metadata = "{}";
    std::vector<std::int64_t> re;
    std::vector<std::int64_t> im;
    std::shared_ptr<std::vector<std::uint32_t>> count;      // shared by grids of one run
    std::shared_ptr<std::vector<std::int64_t>> incoherent;  // sum of amplitude^2
    std::shared_ptr<std::vector<std::int64_t>> moment;      // sum of amplitude^2 * p_inf, 3 per bin

    std::complex<double> amplitude(std::size_t k) const { return {re[k] / kScale, im[k] / kScale}; }
    double intensity(std::size_t k) const { return std::norm(amplitude(k)); }
    double incoherent_sum(std::size_t k) const { return (*incoherent)[k] / kScale; }
    /// amplitude^2-weighted mean final momentum of the bin, the centre if empty.
    Vec3 mean_momentum(std::size_t k) const;
};

struct SctsStats {
    std::uint64_t n_traj = 0;
    std::uint64_t step_failures = 0;
    std::uint64_t bound = 0;
    std::uint64_t recollided = 0;
    std::uint64_t filtered = 0;
    std::uint64_t out_of_grid = 0;
    std::uint64_t binned = 0;
    double weight_total = 0.0;       // sum of R over propagated trajectories
    double weight_recollided = 0.0;

    double recollision_fraction() const;           // by count
    double weighted_recollision_fraction() const;  // weighted by R
};

struct SctsResult {
    std::vector<BinGrid3D> grids;  // one per kappa
    SctsStats stats;
};

/// Streams n_traj trajectories into one coherent grid per kappa. Aborts with
/// NumericalFailure if more than max_discard_fraction fail to integrate.
SctsResult run_ensemble(const SctsConfig& cfg);

// Binary container: "HASEGRID", u32 version (1), u64 JSON length, JSON,
// u64 seed, u64 n_traj, geometry (3 x u32 sizes, f64 bin, 3 x f64 edges),
// f64 kappa, then per bin (Re, Im) as f64, then per bin u32 count, then per
// bin f64 incoherent sum, then per bin the three f64 momentum moments. All
// little-endian, row-major [x][y][z].
void write_grid(const std::string& path, const BinGrid3D& grid);
BinGrid3D read_grid(const std::string& path);

/// Polarization-plane projection sum_x |amp|^2 with counts, nonzero rows only.
void write_projection_csv(const std::string& path, const BinGrid3D& grid);
/// Bins with |p_x| < half_width: Re, Im, count per bin, nonzero rows only.
void write_slice_csv(const std::string& path, const BinGrid3D& grid, double half_width = 0.01);

struct ProjectionOptions {
    GridSpec polar;
    double px_half_width = 0.6;  // slab of bins whose centres satisfy |p_x| < this
    bool debias = true;          // subtract the incoherent sum of amplitude^2
};

/// Intensity density on a polar grid in the polarization plane, bilinearly
/// resampled from the slab projection.
PolarMomentumMap project_polar(const BinGrid3D& grid, const ProjectionOptions& options);

struct PhaseDiffOptions {
    double slice_half_width = 0.01;
    double energy_bin = 0.005;
    std::size_t window = 5;
    double min_overlap = 0.5;
};

struct PhaseDiffResult {
    double kappa = 0.0;            // kappa of grid_k minus kappa of grid_0
    double overlap_fraction = 0.0;
    std::vector<double> energy;      // weighted mean bin-centre energy per populated energy bin
    std::vector<double> phase_diff;  // unwrapped along energy
    std::vector<double> weight;
    std::vector<double> delay_au;    // d(phase)/dE by sliding linear fit, NaN near the ends
    std::vector<double> delay_hase_au;  // kappa / sqrt(2E)
};

/// Per-bin arg(amp_k conj(amp_0)) in the thin slice, averaged into energy
/// bins (circular mean weighted by |amp_k amp_0|) and differentiated. The
/// energy of a bin is taken from its mean momentum. Both grids must come from the same seed and
/// trajectory count. Throws InsufficientOverlap if fewer than min_overlap of
/// the slice bins populated in either grid are populated in both.
PhaseDiffResult phase_difference_analysis(const BinGrid3D& grid_k, const BinGrid3D& grid_0,
                                          const PhaseDiffOptions& options = {});

void write_phase_diff_csv(const std::string& path, const PhaseDiffResult& r);

}  // namespace hase
