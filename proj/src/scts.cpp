#include "hase/scts.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include <boost/numeric/odeint/stepper/generation.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include "csv_util.hpp"
#include "hase/config_io.hpp"
#include "hase/errors.hpp"
#include "hase/hase_engine.hpp"
#include "hase/parallel.hpp"

namespace hase {

static_assert(std::endian::native == std::endian::little, "grid I/O assumes a little-endian host");

namespace {

constexpr std::uint64_t kMaxTrajectories = (std::uint64_t{1} << 31) - 1;
constexpr double kMinStep = 1e-11;
constexpr std::uint64_t kMaxSteps = 5'000'000;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::int64_t to_fixed(double v) { return std::llround(v * BinGrid3D::kScale); }
std::int64_t to_fixed_moment(double v) { return std::llround(v * BinGrid3D::kMomentScale); }

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::ConfigError, what);
}

using State = std::array<double, 7>;  // r, v, action

struct Equations {
    FieldEvaluator field;
    double z;

    void operator()(const State& x, State& dxdt, double t) const {
        const Vec3 e = field.electric(t);
        double ax = -e.x, ay = -e.y, az = -e.z;
        const double v2 = x[3] * x[3] + x[4] * x[4] + x[5] * x[5];
        double pot = 0.0;
        if (z != 0.0) {
            const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            const double r = std::sqrt(r2);
            const double c = z / (r2 * r);
            ax -= c * x[0];
            ay -= c * x[1];
            az -= c * x[2];
            pot = 2.0 * z / r;
        }
        dxdt[0] = x[3];
        dxdt[1] = x[4];
        dxdt[2] = x[5];
        dxdt[3] = ax;
        dxdt[4] = ay;
        dxdt[5] = az;
        dxdt[6] = 0.5 * v2 - pot;
    }
};

Vec3 position(const State& x) { return {x[0], x[1], x[2]}; }
Vec3 velocity(const State& x) { return {x[3], x[4], x[5]}; }

// Closest approach inside one accepted step, on the cubic Hermite
// interpolant of r(t) built from the positions and velocities at both ends.
double hermite_min_distance(const State& a, const State& b, double h) {
    const Vec3 ra = position(a), rb = position(b), va = velocity(a) * h, vb = velocity(b) * h;
    auto dist2 = [&](double s) {
        const double s2 = s * s, s3 = s2 * s;
        const Vec3 r = (2 * s3 - 3 * s2 + 1) * ra + (s3 - 2 * s2 + s) * va + (-2 * s3 + 3 * s2) * rb + (s3 - s2) * vb;
        return dot(r, r);
    };
    constexpr double g = 0.6180339887498949;
    double lo = 0.0, hi = 1.0;
    double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
    double f1 = dist2(m1), f2 = dist2(m2);
    for (int it = 0; it < 60; ++it) {
        if (f1 < f2) {
            hi = m2;
            m2 = m1;
            f2 = f1;
            m1 = hi - g * (hi - lo);
            f1 = dist2(m1);
        } else {
            lo = m1;
            m1 = m2;
            f1 = f2;
            m2 = lo + g * (hi - lo);
            f2 = dist2(m2);
        }
    }
    return std::sqrt(std::min({f1, f2, dist2(0.0), dist2(1.0)}));
}

struct KeplerElements {
    double energy = 0.0;
    double k = 0.0;
    Vec3 l;
};

KeplerElements kepler(const Vec3& r, const Vec3& v, double z) {
    const double rn = norm(r);
    KeplerElements el;
    el.energy = 0.5 * dot(v, v) - (z != 0.0 ? z / rn : 0.0);
    if (!(el.energy > 0.0))
        throw Error(ErrorKind::BoundElectron, "post-pulse energy " + std::to_string(el.energy) + " <= 0");
    el.k = std::sqrt(2.0 * el.energy);
    el.l = cross(r, v);
    return el;
}

// Closest approach still ahead on the field-free orbit, if r.v < 0.
double periapsis_ahead(const Vec3& r, const Vec3& v, double z) {
    if (dot(r, v) >= 0.0) return std::numeric_limits<double>::infinity();
    const double e_kin = 0.5 * dot(v, v);
    if (z == 0.0) return norm(cross(r, v)) / std::sqrt(2.0 * e_kin);
    const double energy = e_kin - z / norm(r);
    if (!(energy > 0.0)) return std::numeric_limits<double>::infinity();
    const double l2 = dot(cross(r, v), cross(r, v));
    const double ecc = std::sqrt(1.0 + 2.0 * energy * l2 / (z * z));
    return z / (2.0 * energy) * (ecc - 1.0);
}

}  // namespace

void SctsConfig::validate() const {
    field.validate();
    require(field.envelope.kind == Envelope::Kind::sine_square,
            "scts.field.envelope must be sine_square (the pulse has to end)");
    const double plateau_lo = 0.5 * (field.envelope.total_cycles - field.envelope.flat_cycles);
    const double plateau_hi = plateau_lo + field.envelope.flat_cycles;
    require(window_start_cycles < window_end_cycles, "scts.window: start must be before end");
    require(window_start_cycles >= plateau_lo - 1e-12 && window_end_cycles <= plateau_hi + 1e-12,
            "scts.window must lie inside the envelope plateau [" + std::to_string(plateau_lo) + ", " +
                std::to_string(plateau_hi) + "] cycles");
    require(std::isfinite(ip) && ip > 0.0, "scts.ip must be > 0");
    require(std::isfinite(z) && z >= 0.0, "scts.z must be >= 0");
    require(n_traj > 0 && n_traj <= kMaxTrajectories, "scts.n_traj must be in [1, 2^31 - 1]");
    require(std::isfinite(sigma) && sigma > 0.0, "scts.sigma must be > 0");
    require(std::isfinite(p0_perp) && std::isfinite(p0x), "scts.p0 must be finite");
    require(std::isfinite(box_sigmas) && box_sigmas > 0.0, "scts.box_sigmas must be > 0");
    require(std::isfinite(bin_size) && bin_size > 0.0, "scts.bin_size must be > 0");
    require(px_max >= bin_size && pyz_max >= bin_size, "scts grid extents must be at least one bin");
    require(std::isfinite(recollision_radius) && recollision_radius >= 0.0, "scts.recollision_radius must be >= 0");
    require(!kappas.empty(), "scts.kappas must not be empty");
    for (double k : kappas) require(std::isfinite(k), "scts.kappas must be finite");
    require(rtol > 0.0 && atol > 0.0, "scts tolerances must be > 0");
    require(max_discard_fraction >= 0.0 && max_discard_fraction <= 1.0, "scts.max_discard_fraction must be in [0, 1]");
    const BinGeometry g = BinGeometry::centered(bin_size, px_max, pyz_max);
    require(static_cast<double>(g.size()) * (16.0 * static_cast<double>(kappas.size()) + 36.0) < 8e9,
            "scts grid would need more than 8 GB");
}

double counter_uniform(std::uint64_t seed, std::uint64_t index, std::uint32_t lane) {
    const std::uint64_t h =
        mix64(mix64(seed ^ 0x243F6A8885A308D3ULL) + index * 0x9E3779B97F4A7C15ULL + (lane + 1) * 0xD1B54A32D192ED03ULL);
    return static_cast<double>(mix64(h) >> 11) * 0x1.0p-53;
}

SampledTrajectory sample_initial(const SctsConfig& cfg, std::uint64_t index) {
    SampledTrajectory s;
    s.index = index;
    const double ws = cfg.window_start(), we = cfg.window_end();
    s.t0 = ws + counter_uniform(cfg.seed, index, 0) * (we - ws);
    const double half = cfg.box_sigmas * cfg.sigma;
    s.p0x = cfg.p0x + (2.0 * counter_uniform(cfg.seed, index, 1) - 1.0) * half;
    s.p0_perp = cfg.p0_perp + (2.0 * counter_uniform(cfg.seed, index, 2) - 1.0) * half;
    s.p0_par = 0.0;
    const double dx = s.p0x - cfg.p0x, dp = s.p0_perp - cfg.p0_perp;
    const double d2 = dx * dx + dp * dp;
    s.probability = std::exp(-d2 / (2.0 * cfg.sigma * cfg.sigma));
    s.amplitude = std::exp(-d2 / (4.0 * cfg.sigma * cfg.sigma));

    const Vec3 e = eval_electric_field(cfg.field, s.t0);
    const double en = norm(e);
    if (!(en > 0.0)) throw Error(ErrorKind::DegenerateGeometry, "electric field vanishes at t0");
    s.e_hat = e / en;
    s.u_perp = transverse_unit_vector(cfg.field, s.t0);
    s.r0 = cfg.exit_at_origin ? Vec3{} : -(cfg.ip / en) * s.e_hat;
    s.v0 = Vec3{s.p0x, 0.0, 0.0} + s.p0_perp * s.u_perp + s.p0_par * s.e_hat;
    s.t = s.t0;
    s.r = s.r0;
    s.v = s.v0;
    s.min_distance = norm(s.r0);
    return s;
}

void propagate_interval(const FieldConfig& field, double z, PhasePoint& s, double t_end, const Tolerances& tol) {
    namespace ode = boost::numeric::odeint;
    if (!(t_end >= s.t)) throw Error(ErrorKind::DomainError, "propagation end lies before the start");
    auto stepper = ode::make_controlled(tol.atol, tol.rtol, ode::runge_kutta_fehlberg78<State>());
    const Equations eq{FieldEvaluator(field), z};
    State x{s.r.x, s.r.y, s.r.z, s.v.x, s.v.y, s.v.z, s.action};
    double t = s.t;
    double dt = std::min(1.0, t_end - t);
    double min_d = std::min(s.min_distance > 0.0 ? s.min_distance : norm(s.r), norm(s.r));
    std::uint64_t steps = 0;
    // the envelope is only C^1 at its breakpoints; never step across one
    std::vector<double> stops;
    if (field.envelope.kind == Envelope::Kind::sine_square) {
        const double t780 = field.period_780();
        const double rise = 0.5 * (field.envelope.total_cycles - field.envelope.flat_cycles);
        for (double c : {rise, rise + field.envelope.flat_cycles, field.envelope.total_cycles})
            if (c * t780 > t && c * t780 < t_end) stops.push_back(c * t780);
    }
    stops.push_back(t_end);
    const double end_slack = 1e-12 * std::max(1.0, std::abs(t_end));
    for (const double stop : stops) {
        while (stop - t > end_slack) {
            if (t + dt > stop) dt = stop - t;
            const State before = x;
            const double t_before = t;
            if (stepper.try_step(eq, x, t, dt) == ode::fail) {
                if (dt < kMinStep)
                    throw Error(ErrorKind::StepFailure, "step size underflow at t=" + std::to_string(t));
                continue;
            }
            if (++steps > kMaxSteps) throw Error(ErrorKind::StepFailure, "step budget exhausted at t=" + std::to_string(t));
            const double rv_a = before[0] * before[3] + before[1] * before[4] + before[2] * before[5];
            const double rv_b = x[0] * x[3] + x[1] * x[4] + x[2] * x[5];
            min_d = std::min(min_d, norm(position(x)));
            if (rv_a < 0.0 && rv_b >= 0.0) min_d = std::min(min_d, hermite_min_distance(before, x, t - t_before));
            if (!std::isfinite(x[6])) throw Error(ErrorKind::StepFailure, "non-finite state at t=" + std::to_string(t));
        }
    }
    s.t = t_end;
    s.r = position(x);
    s.v = velocity(x);
    s.action = x[6];
    s.min_distance = min_d;
}

void propagate(const SctsConfig& cfg, SampledTrajectory& traj) {
    PhasePoint s{traj.t0, traj.r0, traj.v0, 0.0, norm(traj.r0)};
    propagate_interval(cfg.field, cfg.z, s, cfg.field.pulse_end(), Tolerances{cfg.rtol, cfg.atol});
    traj.t = s.t;
    traj.r = s.r;
    traj.v = s.v;
    traj.action = s.action;
    // the field-free continuation may still pass closer to the ion
    traj.min_distance = std::min(s.min_distance, periapsis_ahead(s.r, s.v, cfg.z));
    traj.recollided = traj.min_distance < cfg.recollision_radius;
}

Vec3 asymptotic_momentum(const Vec3& r, const Vec3& v, double z) {
    const KeplerElements el = kepler(r, v, z);
    if (z == 0.0) return v;
    const Vec3 a = cross(v, el.l) - (z / norm(r)) * r;
    const double k = el.k;
    return (k / (z * z + k * k * dot(el.l, el.l))) * (k * cross(el.l, a) - z * a);
}

double coulomb_tail_phase(const Vec3& r, const Vec3& v, double z, double t, double t_ref) {
    const KeplerElements el = kepler(r, v, z);
    const double energy_phase = el.energy * (t - t_ref);
    if (z == 0.0) return energy_phase;
    const double ecc = std::sqrt(1.0 + 2.0 * el.energy * dot(el.l, el.l) / (z * z));
    const double f = std::asinh(dot(r, v) * el.k / (ecc * z));
    return energy_phase - (z / el.k) * (std::log(ecc) + f);
}

double scts_phase(const SctsConfig& cfg, const SampledTrajectory& traj, double kappa) {
    return -dot(traj.v0, traj.r0) + cfg.ip * traj.t0 - traj.action +
           coulomb_tail_phase(traj.r, traj.v, cfg.z, traj.t, cfg.reference_time()) + kappa * traj.p0_perp;
}

BinGeometry BinGeometry::centered(double bin, double px_max, double pyz_max) {
    BinGeometry g;
    g.bin = bin;
    g.nx = static_cast<std::uint32_t>(std::llround(2.0 * px_max / bin));
    g.ny = g.nz = static_cast<std::uint32_t>(std::llround(2.0 * pyz_max / bin));
    g.x0 = -0.5 * g.nx * bin;
    g.y0 = g.z0 = -0.5 * g.ny * bin;
    return g;
}

std::size_t BinGeometry::locate(const Vec3& p) const {
    const double fx = std::floor((p.x - x0) / bin), fy = std::floor((p.y - y0) / bin), fz = std::floor((p.z - z0) / bin);
    if (!(fx >= 0.0 && fx < nx && fy >= 0.0 && fy < ny && fz >= 0.0 && fz < nz)) return size();
    return index(static_cast<std::uint32_t>(fx), static_cast<std::uint32_t>(fy), static_cast<std::uint32_t>(fz));
}

Vec3 BinGrid3D::mean_momentum(std::size_t k) const {
    const std::int64_t w = (*incoherent)[k];
    if (w == 0) {
        const auto iz = static_cast<std::uint32_t>(k % geometry.nz);
        const auto iy = static_cast<std::uint32_t>((k / geometry.nz) % geometry.ny);
        const auto ix = static_cast<std::uint32_t>(k / (std::size_t{geometry.nz} * geometry.ny));
        return geometry.center(ix, iy, iz);
    }
    const double s = kScale / (kMomentScale * static_cast<double>(w));
    const auto& m = *moment;
    return {m[3 * k] * s, m[3 * k + 1] * s, m[3 * k + 2] * s};
}

double SctsStats::recollision_fraction() const {
    const std::uint64_t propagated = n_traj - step_failures;
    return propagated ? static_cast<double>(recollided) / static_cast<double>(propagated) : 0.0;
}

double SctsStats::weighted_recollision_fraction() const {
    return weight_total > 0.0 ? weight_recollided / weight_total : 0.0;
}

SctsResult run_ensemble(const SctsConfig& cfg) {
    cfg.validate();
    const BinGeometry geom = BinGeometry::centered(cfg.bin_size, cfg.px_max, cfg.pyz_max);
    const std::size_t nb = geom.size();
    const std::size_t nk = cfg.kappas.size();

    auto count = std::make_shared<std::vector<std::uint32_t>>(nb, 0u);
    auto incoherent = std::make_shared<std::vector<std::int64_t>>(nb, 0);
    auto moment = std::make_shared<std::vector<std::int64_t>>(3 * nb, 0);
    std::vector<std::vector<std::int64_t>> re(nk), im(nk);
    for (std::size_t k = 0; k < nk; ++k) {
        re[k].assign(nb, 0);
        im[k].assign(nb, 0);
    }

    std::atomic<std::uint64_t> step_failures{0}, bound{0}, recollided{0}, filtered{0}, out_of_grid{0}, binned{0};
    std::atomic<std::int64_t> weight_total{0}, weight_recollided{0};

    parallel_for(cfg.n_traj, cfg.threads, 256, [&](std::size_t i) {
        SampledTrajectory traj = sample_initial(cfg, i);
        try {
            propagate(cfg, traj);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::StepFailure) throw;
            step_failures.fetch_add(1, std::memory_order_relaxed);
            return;
        }
        const std::int64_t w = to_fixed(traj.probability);
        weight_total.fetch_add(w, std::memory_order_relaxed);
        if (traj.recollided) {
            recollided.fetch_add(1, std::memory_order_relaxed);
            weight_recollided.fetch_add(w, std::memory_order_relaxed);
        }
        Vec3 p_inf;
        double phase = 0.0;
        try {
            p_inf = asymptotic_momentum(traj.r, traj.v, cfg.z);
            phase = scts_phase(cfg, traj, 0.0);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::BoundElectron) throw;
            bound.fetch_add(1, std::memory_order_relaxed);
            return;
        }
        if (traj.recollided && cfg.recollision_filter) {
            filtered.fetch_add(1, std::memory_order_relaxed);
            return;
        }
        const std::size_t b = geom.locate(p_inf);
        if (b == nb || !std::isfinite(phase)) {
            out_of_grid.fetch_add(1, std::memory_order_relaxed);
            return;
        }
        binned.fetch_add(1, std::memory_order_relaxed);
        std::atomic_ref<std::uint32_t>((*count)[b]).fetch_add(1, std::memory_order_relaxed);
        std::atomic_ref<std::int64_t>((*incoherent)[b]).fetch_add(w, std::memory_order_relaxed);
        const double pw[3] = {p_inf.x, p_inf.y, p_inf.z};
        for (int c = 0; c < 3; ++c)
            std::atomic_ref<std::int64_t>((*moment)[3 * b + c])
                .fetch_add(to_fixed_moment(traj.probability * pw[c]), std::memory_order_relaxed);
        for (std::size_t k = 0; k < nk; ++k) {
            const double ph = phase + cfg.kappas[k] * traj.p0_perp;
            std::atomic_ref<std::int64_t>(re[k][b]).fetch_add(to_fixed(traj.amplitude * std::cos(ph)),
                                                              std::memory_order_relaxed);
            std::atomic_ref<std::int64_t>(im[k][b]).fetch_add(to_fixed(traj.amplitude * std::sin(ph)),
                                                              std::memory_order_relaxed);
        }
    });

    SctsResult out;
    SctsStats& st = out.stats;
    st.n_traj = cfg.n_traj;
    st.step_failures = step_failures;
    st.bound = bound;
    st.recollided = recollided;
    st.filtered = filtered;
    st.out_of_grid = out_of_grid;
    st.binned = binned;
    st.weight_total = static_cast<double>(weight_total.load()) / BinGrid3D::kScale;
    st.weight_recollided = static_cast<double>(weight_recollided.load()) / BinGrid3D::kScale;
    if (static_cast<double>(st.step_failures) > cfg.max_discard_fraction * static_cast<double>(cfg.n_traj))
        throw Error(ErrorKind::NumericalFailure, std::to_string(st.step_failures) + " of " +
                                                     std::to_string(cfg.n_traj) +
                                                     " trajectories failed to integrate");

    for (std::size_t k = 0; k < nk; ++k) {
        BinGrid3D g;
        g.geometry = geom;
        g.kappa = cfg.kappas[k];
        g.seed = cfg.seed;
        g.n_traj = cfg.n_traj;
        json meta;
        meta["kind"] = "scts_grid";
        meta["kappa"] = cfg.kappas[k];
        meta["config"] = to_json(cfg);
        meta["stats"] = to_json(st);
        g.metadata = meta.dump();
        g.re = std::move(re[k]);
        g.im = std::move(im[k]);
        g.count = count;
        g.incoherent = incoherent;
        g.moment = moment;
        out.grids.push_back(std::move(g));
    }
    return out;
}

namespace {

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is, const std::string& path) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T)))
        throw Error(ErrorKind::IoError, "'" + path + "' is truncated");
    return v;
}

constexpr char kMagic[8] = {'H', 'A', 'S', 'E', 'G', 'R', 'I', 'D'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void write_grid(const std::string& path, const BinGrid3D& grid) {
    auto os = detail::open_output(path, true);
    os.write(kMagic, sizeof(kMagic));
    put(os, kVersion);
    put(os, static_cast<std::uint64_t>(grid.metadata.size()));
    os.write(grid.metadata.data(), static_cast<std::streamsize>(grid.metadata.size()));
    put(os, grid.seed);
    put(os, grid.n_traj);
    const BinGeometry& g = grid.geometry;
    put(os, g.nx);
    put(os, g.ny);
    put(os, g.nz);
    put(os, g.bin);
    put(os, g.x0);
    put(os, g.y0);
    put(os, g.z0);
    put(os, grid.kappa);
    const std::size_t n = g.size();
    std::vector<double> buf(2 * n);
    for (std::size_t k = 0; k < n; ++k) {
        buf[2 * k] = static_cast<double>(grid.re[k]) / BinGrid3D::kScale;
        buf[2 * k + 1] = static_cast<double>(grid.im[k]) / BinGrid3D::kScale;
    }
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(double)));
    os.write(reinterpret_cast<const char*>(grid.count->data()), static_cast<std::streamsize>(n * sizeof(std::uint32_t)));
    buf.resize(n);
    for (std::size_t k = 0; k < n; ++k) buf[k] = static_cast<double>((*grid.incoherent)[k]) / BinGrid3D::kScale;
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(n * sizeof(double)));
    buf.resize(3 * n);
    for (std::size_t k = 0; k < 3 * n; ++k) buf[k] = static_cast<double>((*grid.moment)[k]) / BinGrid3D::kMomentScale;
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(3 * n * sizeof(double)));
    if (!os) throw Error(ErrorKind::IoError, "write failed for '" + path + "'");
}

BinGrid3D read_grid(const std::string& path) {
    auto is = detail::open_input(path, true);
    char magic[8];
    if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
        throw Error(ErrorKind::IoError, "'" + path + "' is not a grid file");
    const auto version = get<std::uint32_t>(is, path);
    if (version != kVersion) throw Error(ErrorKind::IoError, "'" + path + "' has unsupported version");
    const auto meta_len = get<std::uint64_t>(is, path);
    if (meta_len > (std::uint64_t{1} << 30)) throw Error(ErrorKind::IoError, "'" + path + "' has a corrupt header");
    BinGrid3D grid;
    grid.metadata.resize(meta_len);
    if (!is.read(grid.metadata.data(), static_cast<std::streamsize>(meta_len)))
        throw Error(ErrorKind::IoError, "'" + path + "' is truncated");
    grid.seed = get<std::uint64_t>(is, path);
    grid.n_traj = get<std::uint64_t>(is, path);
    BinGeometry& g = grid.geometry;
    g.nx = get<std::uint32_t>(is, path);
    g.ny = get<std::uint32_t>(is, path);
    g.nz = get<std::uint32_t>(is, path);
    g.bin = get<double>(is, path);
    g.x0 = get<double>(is, path);
    g.y0 = get<double>(is, path);
    g.z0 = get<double>(is, path);
    grid.kappa = get<double>(is, path);
    if (!(g.bin > 0.0) || g.size() == 0 || g.size() > (std::size_t{1} << 32))
        throw Error(ErrorKind::IoError, "'" + path + "' has a corrupt geometry");
    const std::size_t n = g.size();
    std::vector<double> buf(2 * n);
    if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(double))))
        throw Error(ErrorKind::IoError, "'" + path + "' is truncated");
    grid.re.resize(n);
    grid.im.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        grid.re[k] = to_fixed(buf[2 * k]);
        grid.im[k] = to_fixed(buf[2 * k + 1]);
    }
    grid.count = std::make_shared<std::vector<std::uint32_t>>(n);
    if (!is.read(reinterpret_cast<char*>(grid.count->data()), static_cast<std::streamsize>(n * sizeof(std::uint32_t))))
        throw Error(ErrorKind::IoError, "'" + path + "' is truncated");
    buf.resize(n);
    if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * sizeof(double))))
        throw Error(ErrorKind::IoError, "'" + path + "' is truncated");
    grid.incoherent = std::make_shared<std::vector<std::int64_t>>(n);
    for (std::size_t k = 0; k < n; ++k) (*grid.incoherent)[k] = to_fixed(buf[k]);
    buf.resize(3 * n);
    if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(3 * n * sizeof(double))))
        throw Error(ErrorKind::IoError, "'" + path + "' is truncated");
    grid.moment = std::make_shared<std::vector<std::int64_t>>(3 * n);
    for (std::size_t k = 0; k < 3 * n; ++k) (*grid.moment)[k] = to_fixed_moment(buf[k]);
    if (is.peek() != std::char_traits<char>::eof())
        throw Error(ErrorKind::IoError, "'" + path + "' has trailing bytes");
    return grid;
}

void write_projection_csv(const std::string& path, const BinGrid3D& grid) {
    const BinGeometry& g = grid.geometry;
    auto os = detail::open_output(path);
    os << "# kind: scts_projection\n";
    os << "# kappa: " << grid.kappa << '\n';
    os << "# config: " << grid.metadata << '\n';
    os << "p_y,p_z,intensity,incoherent,count\n";
    std::string line;
    for (std::uint32_t iy = 0; iy < g.ny; ++iy) {
        for (std::uint32_t iz = 0; iz < g.nz; ++iz) {
            double inten = 0.0, inc = 0.0;
            std::uint64_t c = 0;
            for (std::uint32_t ix = 0; ix < g.nx; ++ix) {
                const std::size_t k = g.index(ix, iy, iz);
                inten += grid.intensity(k);
                inc += grid.incoherent_sum(k);
                c += (*grid.count)[k];
            }
            if (c == 0) continue;
            const Vec3 p = g.center(0, iy, iz);
            line.clear();
            detail::append_number(line, p.y);
            line += ',';
            detail::append_number(line, p.z);
            line += ',';
            detail::append_number(line, inten);
            line += ',';
            detail::append_number(line, inc);
            line += ',';
            line += std::to_string(c);
            line += '\n';
            os << line;
        }
    }
    if (!os) throw Error(ErrorKind::IoError, "write failed for '" + path + "'");
}

void write_slice_csv(const std::string& path, const BinGrid3D& grid, double half_width) {
    const BinGeometry& g = grid.geometry;
    auto os = detail::open_output(path);
    os << "# kind: scts_slice\n";
    os << "# px_half_width: " << half_width << '\n';
    os << "# kappa: " << grid.kappa << '\n';
    os << "# config: " << grid.metadata << '\n';
    os << "p_x,p_y,p_z,re,im,count\n";
    std::string line;
    for (std::uint32_t ix = 0; ix < g.nx; ++ix) {
        if (!(std::abs(g.center(ix, 0, 0).x) < half_width)) continue;
        for (std::uint32_t iy = 0; iy < g.ny; ++iy) {
            for (std::uint32_t iz = 0; iz < g.nz; ++iz) {
                const std::size_t k = g.index(ix, iy, iz);
                if ((*grid.count)[k] == 0) continue;
                const Vec3 p = g.center(ix, iy, iz);
                const auto a = grid.amplitude(k);
                line.clear();
                for (double v : {p.x, p.y, p.z, a.real(), a.imag()}) {
                    detail::append_number(line, v);
                    line += ',';
                }
                line += std::to_string((*grid.count)[k]);
                line += '\n';
                os << line;
            }
        }
    }
    if (!os) throw Error(ErrorKind::IoError, "write failed for '" + path + "'");
}

PolarMomentumMap project_polar(const BinGrid3D& grid, const ProjectionOptions& options) {
    options.polar.validate();
    const BinGeometry& g = grid.geometry;
    std::vector<double> plane(std::size_t{g.ny} * g.nz, 0.0);
    for (std::uint32_t ix = 0; ix < g.nx; ++ix) {
        if (!(std::abs(g.center(ix, 0, 0).x) < options.px_half_width)) continue;
        for (std::uint32_t iy = 0; iy < g.ny; ++iy)
            for (std::uint32_t iz = 0; iz < g.nz; ++iz) {
                const std::size_t k = g.index(ix, iy, iz);
                if ((*grid.count)[k] == 0) continue;
                double v = grid.intensity(k);
                if (options.debias) v -= grid.incoherent_sum(k);
                plane[std::size_t{iy} * g.nz + iz] += v;
            }
    }
    PolarMomentumMap map = PolarMomentumMap::empty(options.polar);
    map.label = "scts";
    map.metadata = grid.metadata;
    for (std::size_t ir = 0; ir < map.n_radial(); ++ir) {
        for (std::size_t ip = 0; ip < map.n_angular(); ++ip) {
            const Vec3 p = polar_momentum(options.polar.pr(ir), options.polar.phi_deg(ip));
            const double fy = (p.y - g.y0) / g.bin - 0.5, fz = (p.z - g.z0) / g.bin - 0.5;
            const double iy0 = std::floor(fy), iz0 = std::floor(fz);
            const std::size_t cell = map.index(ir, ip);
            if (!(iy0 >= 0.0 && iy0 + 1 < g.ny && iz0 >= 0.0 && iz0 + 1 < g.nz)) {
                map.valid[cell] = 0;
                continue;
            }
            const double wy = fy - iy0, wz = fz - iz0;
            const std::size_t a = static_cast<std::size_t>(iy0) * g.nz + static_cast<std::size_t>(iz0);
            map.intensity[cell] = (1 - wy) * (1 - wz) * plane[a] + (1 - wy) * wz * plane[a + 1] +
                                  wy * (1 - wz) * plane[a + g.nz] + wy * wz * plane[a + g.nz + 1];
            map.valid[cell] = 1;
        }
    }
    return map;
}

PhaseDiffResult phase_difference_analysis(const BinGrid3D& grid_k, const BinGrid3D& grid_0,
                                          const PhaseDiffOptions& options) {
    if (!(grid_k.geometry == grid_0.geometry))
        throw Error(ErrorKind::DomainError, "phase difference needs grids with the same geometry");
    if (grid_k.seed != grid_0.seed || grid_k.n_traj != grid_0.n_traj)
        throw Error(ErrorKind::DomainError, "phase difference needs grids from the same seed and n_traj");
    if (!(options.energy_bin > 0.0) || options.window < 2)
        throw Error(ErrorKind::DomainError, "energy_bin must be > 0 and window >= 2");
    const BinGeometry& g = grid_k.geometry;

    std::vector<std::complex<double>> acc;
    std::vector<double> wsum, esum;
    std::size_t either = 0, both = 0;
    for (std::uint32_t ix = 0; ix < g.nx; ++ix) {
        if (!(std::abs(g.center(ix, 0, 0).x) < options.slice_half_width)) continue;
        for (std::uint32_t iy = 0; iy < g.ny; ++iy)
            for (std::uint32_t iz = 0; iz < g.nz; ++iz) {
                const std::size_t k = g.index(ix, iy, iz);
                const bool pk = (*grid_k.count)[k] > 0, p0 = (*grid_0.count)[k] > 0;
                if (pk || p0) ++either;
                if (!(pk && p0)) continue;
                ++both;
                const std::complex<double> z = grid_k.amplitude(k) * std::conj(grid_0.amplitude(k));
                if (std::abs(z) == 0.0) continue;
                const Vec3 p = grid_0.mean_momentum(k);
                const std::size_t eb = static_cast<std::size_t>(0.5 * dot(p, p) / options.energy_bin);
                if (eb >= acc.size()) {
                    acc.resize(eb + 1);
                    wsum.resize(eb + 1);
                    esum.resize(eb + 1);
                }
                acc[eb] += z;
                wsum[eb] += std::abs(z);
                esum[eb] += std::abs(z) * 0.5 * dot(p, p);
            }
    }
    PhaseDiffResult r;
    r.kappa = grid_k.kappa - grid_0.kappa;
    r.overlap_fraction = either ? static_cast<double>(both) / static_cast<double>(either) : 0.0;
    if (either == 0 || r.overlap_fraction < options.min_overlap)
        throw Error(ErrorKind::InsufficientOverlap, "only " + std::to_string(both) + " of " + std::to_string(either) +
                                                        " populated slice bins are shared");

    double prev = 0.0;
    bool first = true;
    for (std::size_t eb = 0; eb < acc.size(); ++eb) {
        if (!(wsum[eb] > 0.0)) continue;
        double ph = std::arg(acc[eb]);
        if (!first) ph = prev + std::remainder(ph - prev, 2.0 * units::pi);
        first = false;
        prev = ph;
        const double e = esum[eb] / wsum[eb];
        r.energy.push_back(e);
        r.phase_diff.push_back(ph);
        r.weight.push_back(wsum[eb]);
        r.delay_hase_au.push_back(r.kappa / std::sqrt(2.0 * e));
    }
    const std::size_t n = r.energy.size(), w = options.window, lo = (w - 1) / 2, hi = w - 1 - lo;
    r.delay_au.assign(n, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = lo; i + hi < n; ++i) {
        double se = 0, sp = 0, see = 0, sep = 0;
        for (std::size_t j = i - lo; j <= i + hi; ++j) {
            se += r.energy[j];
            sp += r.phase_diff[j];
            see += r.energy[j] * r.energy[j];
            sep += r.energy[j] * r.phase_diff[j];
        }
        const double m = static_cast<double>(w);
        const double den = m * see - se * se;
        if (den > 0.0) r.delay_au[i] = (m * sep - se * sp) / den;
    }
    return r;
}

void write_phase_diff_csv(const std::string& path, const PhaseDiffResult& r) {
    auto os = detail::open_output(path);
    os << "# kind: phase_difference\n";
    os << "# kappa: " << r.kappa << '\n';
    os << "# overlap_fraction: " << r.overlap_fraction << '\n';
    os << "energy,phase_diff,weight,delay_au,delay_hase_au,delay_as,delay_hase_as\n";
    std::string line;
    for (std::size_t i = 0; i < r.energy.size(); ++i) {
        line.clear();
        for (double v : {r.energy[i], r.phase_diff[i], r.weight[i], r.delay_au[i], r.delay_hase_au[i],
                         units::au_to_attoseconds(r.delay_au[i])}) {
            detail::append_number(line, v);
            line += ',';
        }
        detail::append_number(line, units::au_to_attoseconds(r.delay_hase_au[i]));
        line += '\n';
        os << line;
    }
    if (!os) throw Error(ErrorKind::IoError, "write failed for '" + path + "'");
}

}  // namespace hase
