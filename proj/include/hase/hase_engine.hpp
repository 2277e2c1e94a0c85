#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "hase/fields.hpp"
#include "hase/initial_state.hpp"
#include "hase/polar_map.hpp"
#include "hase/vec3.hpp"

namespace hase {

/// One semi-classical path reaching a final momentum.
struct ReleaseSolution {
    int n = 0;           // path index 1..4
    double t = 0.0;      // release time (a.u.)
    Vec3 p_i;            // initial momentum vector, perpendicular to E(t)
    double p_n = 0.0;    // signed initial momentum along the transverse unit vector
    Vec3 p_f;            // final momentum this path reaches
    double phi_prop = 0.0;
    double phi_total = 0.0;
};

/// Unit vector in the yz-plane perpendicular to E(t), oriented so that it
/// points along -A(t). Positive p_n therefore means |p_f| > |A(t)|.
Vec3 transverse_unit_vector(const FieldConfig& cfg, double t);

/// Solves p_f = -A(t) + p_n u(t) for t within one half-cycle of a periodic
/// (flat envelope) field.
///
/// The scalar condition (p_f + A(t)) . E(t)/|E(t)| = 0 has two zeros per
/// half-cycle: one where p_f lies on the streaking side (p_f . (-A) > 0) and
/// one on the opposite side with p_n ~ -(|p_f| + |A|). Only the former is a
/// physical path; the latter is discarded. Windows are half-open,
/// window 1 = [0, T390) and window 2 = [T390, T780); a root within 1e-9 a.u.
/// of T390 belongs to window 2.
class ReleaseSolver {
public:
    enum class Status { ok, no_root, multiple_roots, degenerate };

    struct Outcome {
        Status status = Status::no_root;
        ReleaseSolution solution;
    };

    explicit ReleaseSolver(const FieldConfig& cfg, int subintervals_per_half_cycle = 2048);

    /// Throws NoRoot, MultipleRoots or DegenerateGeometry.
    ReleaseSolution solve(const Vec3& p_f, int window) const;

    /// Both windows from a single scan; never throws for per-point failures.
    std::array<Outcome, 2> try_solve_both(const Vec3& p_f) const;

    const FieldConfig& field() const { return cfg_; }

private:
    FieldConfig cfg_;
    double period_;
    double half_period_;
    std::vector<double> times_;
    std::vector<Vec3> neg_a_;   // -A(t_k)
    std::vector<Vec3> e_hat_;   // E(t_k)/|E(t_k)|
};

ReleaseSolution solve_release(const FieldConfig& cfg, const Vec3& p_f, int window);

/// Integral of the kinetic energy (p_f + A(t))^2 / 2 over [t_n, t_f]. Closed
/// form for the flat envelope, adaptive Gauss-Kronrod quadrature otherwise.
double propagation_phase(const FieldConfig& cfg, const Vec3& p_f, double t_n, double t_f);

/// Ip t_n - phi_prop(p_f, t_n, t_f) + phi_off(p_n).
double total_phase(const FieldConfig& cfg, double ip, const ReleaseSolution& sol, const InitialStateModel& model,
                   double t_f);

/// The four interfering paths for one final momentum and their coherent sum.
struct FourPathResult {
    bool valid = false;
    ReleaseSolver::Status failure = ReleaseSolver::Status::ok;
    std::array<ReleaseSolution, 4> paths;
    double t_f = 0.0;
    std::complex<double> psi{0.0, 0.0};
};

FourPathResult evaluate_four_paths(const ReleaseSolver& solver, double ip, const InitialStateModel& model,
                                   const Vec3& p_f);

struct MapOptions {
    RunPreset preset = RunPreset::custom;
    unsigned threads = 0;            // 0: hardware concurrency
    double max_invalid_fraction = 0.01;
};

/// |Psi(p_f)|^2 on the polar grid. Cells whose root solve fails are flagged
/// invalid; more than max_invalid_fraction invalid cells abort the run.
PolarMomentumMap evaluate_map(const FieldConfig& cfg, double ip, const InitialStateModel& model,
                              const GridSpec& grid, const MapOptions& options = {});

/// Release-time, initial-momentum and phase differences between two
/// consecutive half-cycle paths.
DifferentialMaps differential_maps(const FieldConfig& cfg, double ip, const InitialStateModel& model,
                                   HalfCyclePair pair, const GridSpec& grid, const MapOptions& options = {});

}  // namespace hase
