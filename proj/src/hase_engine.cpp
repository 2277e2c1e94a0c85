#include "hase/hase_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "hase/config_io.hpp"
#include "hase/errors.hpp"
#include "hase/parallel.hpp"
#include "hase/units.hpp"

namespace hase {

namespace {

constexpr double kResidualTolerance = 1e-12;
constexpr double kWindowSnap = 1e-9;

double wrap_pi(double x) {
    const double two_pi = 2.0 * units::pi;
    return x - two_pi * std::floor((x + units::pi) / two_pi);
}

// (p_f + A(t)) . E_hat(t)
double release_condition(const FieldConfig& cfg, const Vec3& p_f, double t) {
    const FieldSample s = eval_field(cfg, t);
    return dot(p_f + s.A, s.E) / norm(s.E);
}

}  // namespace

Vec3 transverse_unit_vector(const FieldConfig& cfg, double t) {
    const FieldSample s = eval_field(cfg, t);
    const double e = norm(s.E);
    if (!(e > 0.0)) throw Error(ErrorKind::DegenerateGeometry, "electric field vanishes at t=" + std::to_string(t));
    const Vec3 u{0.0, -s.E.z / e, s.E.y / e};
    const double along = dot(u, -s.A);
    if (std::abs(along) <= 1e-14)
        throw Error(ErrorKind::DegenerateGeometry, "-A(t) is parallel to E(t) at t=" + std::to_string(t));
    return along > 0.0 ? u : -u;
}

ReleaseSolver::ReleaseSolver(const FieldConfig& cfg, int subintervals_per_half_cycle) : cfg_(cfg) {
    cfg_.validate();
    if (cfg_.envelope.kind != Envelope::Kind::flat)
        throw Error(ErrorKind::ConfigError, "the four-path model needs a flat (periodic) envelope");
    if (subintervals_per_half_cycle < 8)
        throw Error(ErrorKind::ConfigError, "release scan needs >= 8 subintervals per half-cycle");
    period_ = cfg_.period_780();
    half_period_ = 0.5 * period_;
    const std::size_t m = 2 * static_cast<std::size_t>(subintervals_per_half_cycle);
    times_.resize(m);
    neg_a_.resize(m);
    e_hat_.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double t = period_ * static_cast<double>(k) / static_cast<double>(m);
        const FieldSample s = eval_field(cfg_, t);
        const double e = norm(s.E);
        times_[k] = t;
        neg_a_[k] = -s.A;
        e_hat_[k] = e > 0.0 ? s.E / e : Vec3{};
    }
}

std::array<ReleaseSolver::Outcome, 2> ReleaseSolver::try_solve_both(const Vec3& p_f) const {
    std::array<Outcome, 2> out;
    if (p_f.x != 0.0 || !(norm(p_f) > 0.0)) {
        out[0].status = out[1].status = Status::degenerate;
        return out;
    }

    const std::size_t m = times_.size();
    std::vector<double> roots;
    bool refine_failed = false;
    auto f_at = [&](std::size_t k) { return dot(p_f - neg_a_[k], e_hat_[k]); };
    auto g = [&](double t) { return release_condition(cfg_, p_f, t); };

    double f_lo = f_at(0);
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t k1 = (k + 1) % m;
        const double f_hi = f_at(k1);
        const double t_lo = times_[k];
        const double t_hi = (k + 1 == m) ? period_ : times_[k1];
        double root = std::nan("");
        if (f_lo == 0.0) {
            root = t_lo;
        } else if ((f_lo < 0.0) != (f_hi < 0.0) && f_hi != 0.0) {
            boost::uintmax_t iters = 200;
            const auto bracket = boost::math::tools::toms748_solve(
                g, t_lo, t_hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(52), iters);
            const double ga = g(bracket.first);
            const double gb = g(bracket.second);
            root = std::abs(ga) <= std::abs(gb) ? bracket.first : bracket.second;
            if (std::abs(std::min(std::abs(ga), std::abs(gb))) >= kResidualTolerance) refine_failed = true;
        }
        f_lo = f_hi;
        if (std::isnan(root)) continue;
        if (!(dot(p_f, eval_vector_potential(cfg_, root)) < 0.0)) continue;  // not on the streaking side
        if (root > period_ - kWindowSnap) root -= period_;
        const bool duplicate = std::any_of(roots.begin(), roots.end(),
                                           [&](double r) { return std::abs(r - root) < kWindowSnap; });
        if (!duplicate) roots.push_back(root);
    }

    std::array<std::vector<double>, 2> per_window;
    for (double r : roots) per_window[r < half_period_ - kWindowSnap ? 0 : 1].push_back(r);

    for (int w = 0; w < 2; ++w) {
        Outcome& o = out[static_cast<std::size_t>(w)];
        const auto& list = per_window[static_cast<std::size_t>(w)];
        if (list.empty()) {
            o.status = refine_failed ? Status::degenerate : Status::no_root;
            continue;
        }
        if (list.size() > 1) {
            o.status = Status::multiple_roots;
            continue;
        }
        const double t = list.front();
        try {
            const Vec3 u = transverse_unit_vector(cfg_, t);
            const Vec3 neg_a = -eval_vector_potential(cfg_, t);
            ReleaseSolution& s = o.solution;
            s.n = w + 1;
            s.t = t;
            s.p_f = p_f;
            s.p_n = dot(p_f - neg_a, u);
            s.p_i = s.p_n * u;
            o.status = Status::ok;
        } catch (const Error&) {
            o.status = Status::degenerate;
        }
    }
    return out;
}

ReleaseSolution ReleaseSolver::solve(const Vec3& p_f, int window) const {
    if (window != 1 && window != 2) throw Error(ErrorKind::DomainError, "release window must be 1 or 2");
    const auto both = try_solve_both(p_f);
    const Outcome& o = both[static_cast<std::size_t>(window - 1)];
    switch (o.status) {
        case Status::ok: return o.solution;
        case Status::no_root: throw Error(ErrorKind::NoRoot, "no release time in window " + std::to_string(window));
        case Status::multiple_roots:
            throw Error(ErrorKind::MultipleRoots, "several release times in window " + std::to_string(window));
        case Status::degenerate: break;
    }
    throw Error(ErrorKind::DegenerateGeometry, "release solve failed in window " + std::to_string(window));
}

ReleaseSolution solve_release(const FieldConfig& cfg, const Vec3& p_f, int window) {
    return ReleaseSolver(cfg).solve(p_f, window);
}

double propagation_phase(const FieldConfig& cfg, const Vec3& p_f, double t_n, double t_f) {
    if (t_f < t_n) throw Error(ErrorKind::DomainError, "propagation_phase needs t_n <= t_f");
    if (t_f == t_n) return 0.0;
    if (cfg.envelope.kind != Envelope::Kind::flat) {
        auto integrand = [&](double t) {
            const Vec3 v = p_f + eval_vector_potential(cfg, t);
            return 0.5 * dot(v, v);
        };
        return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, t_n, t_f, 20, 1e-13);
    }

    // |A|^2 = a1^2 + a2^2 + 2 a1 a2 cos(w t - phi); p.A and |A|^2 integrate in closed form.
    const double w = cfg.omega;
    const double ph = cfg.relative_phase;
    const double a1 = cfg.e780 / w;
    const double a2 = cfg.e390 / (2.0 * w);
    const double py = p_f.y;
    const double pz = p_f.z;
    const double p2 = dot(p_f, p_f);
    auto antiderivative = [&](double t) {
        const double th1 = w * t + ph;
        const double th2 = 2.0 * w * t;
        const double quad = 0.5 * (a1 * a1 + a2 * a2 + p2) * t + a1 * a2 * std::sin(w * t - ph) / w;
        const double cross = py * (a1 * std::cos(th1) / w + a2 * std::cos(th2) / (2.0 * w)) -
                             pz * (a1 * std::sin(th1) / w + a2 * std::sin(th2) / (2.0 * w));
        return quad + cross;
    };
    return antiderivative(t_f) - antiderivative(t_n);
}

double total_phase(const FieldConfig& cfg, double ip, const ReleaseSolution& sol, const InitialStateModel& model,
                   double t_f) {
    return ip * sol.t - propagation_phase(cfg, sol.p_f, sol.t, t_f) + model.offset_phase.eval(sol.p_n);
}

FourPathResult evaluate_four_paths(const ReleaseSolver& solver, double ip, const InitialStateModel& model,
                                   const Vec3& p_f) {
    FourPathResult r;
    const auto both = solver.try_solve_both(p_f);
    for (const auto& o : both) {
        if (o.status != ReleaseSolver::Status::ok) {
            r.failure = o.status;
            return r;
        }
    }
    const FieldConfig& cfg = solver.field();
    const double period = cfg.period_780();
    r.paths[0] = both[0].solution;
    r.paths[1] = both[1].solution;
    r.paths[2] = both[0].solution;
    r.paths[3] = both[1].solution;
    r.paths[2].n = 3;
    r.paths[3].n = 4;
    r.paths[2].t += period;
    r.paths[3].t += period;
    r.t_f = r.paths[3].t;
    for (auto& path : r.paths) {
        path.phi_prop = propagation_phase(cfg, p_f, path.t, r.t_f);
        path.phi_total = ip * path.t - path.phi_prop + model.offset_phase.eval(path.p_n);
        r.psi += model.amplitude_at(path.p_n, path.t) * std::polar(1.0, path.phi_total);
    }
    r.valid = true;
    return r;
}

PolarMomentumMap evaluate_map(const FieldConfig& cfg, double ip, const InitialStateModel& model,
                              const GridSpec& grid, const MapOptions& options) {
    model.validate();
    const ReleaseSolver solver(cfg);
    PolarMomentumMap map = PolarMomentumMap::empty(grid);
    map.label = to_string(options.preset);
    map.metadata = hase_run_json(cfg, ip, model, grid, options.preset).dump();

    const std::size_t nr = grid.n_radial();
    const std::size_t na = grid.n_angular();
    parallel_for(nr, options.threads, 4, [&](std::size_t i) {
        const double pr = grid.pr(i);
        for (std::size_t j = 0; j < na; ++j) {
            const Vec3 p_f = polar_momentum(pr, grid.phi_deg(j));
            const FourPathResult r = evaluate_four_paths(solver, ip, model, p_f);
            const std::size_t k = map.index(i, j);
            if (!r.valid) continue;
            map.amplitude[k] = r.psi;
            map.intensity[k] = std::norm(r.psi);
            map.valid[k] = 1;
        }
    });

    const std::size_t bad = map.invalid_count();
    if (static_cast<double>(bad) > options.max_invalid_fraction * static_cast<double>(map.valid.size()))
        throw Error(ErrorKind::NumericalFailure,
                    std::to_string(bad) + " of " + std::to_string(map.valid.size()) + " cells failed the root solve");
    return map;
}

DifferentialMaps differential_maps(const FieldConfig& cfg, double ip, const InitialStateModel& model,
                                   HalfCyclePair pair, const GridSpec& grid, const MapOptions& options) {
    model.validate();
    grid.validate();
    const ReleaseSolver solver(cfg);
    const double t390 = cfg.period_390();
    DifferentialMaps out;
    out.grid = grid;
    out.pair = pair;
    out.metadata = hase_run_json(cfg, ip, model, grid, options.preset).dump();
    const std::size_t nr = grid.n_radial();
    const std::size_t na = grid.n_angular();
    out.t_diff_as.assign(nr * na, 0.0);
    out.p_diff.assign(nr * na, 0.0);
    out.phi_diff.assign(nr * na, 0.0);
    out.valid.assign(nr * na, 0);

    parallel_for(nr, options.threads, 4, [&](std::size_t i) {
        const double pr = grid.pr(i);
        for (std::size_t j = 0; j < na; ++j) {
            const Vec3 p_f = polar_momentum(pr, grid.phi_deg(j));
            const FourPathResult r = evaluate_four_paths(solver, ip, model, p_f);
            if (!r.valid) continue;
            const std::size_t k = i * na + j;
            const auto& lo = pair == HalfCyclePair::second_vs_first ? r.paths[0] : r.paths[1];
            const auto& hi = pair == HalfCyclePair::second_vs_first ? r.paths[1] : r.paths[2];
            out.t_diff_as[k] = units::au_to_attoseconds(hi.t - lo.t - t390);
            out.p_diff[k] = hi.p_n - lo.p_n;
            out.phi_diff[k] = wrap_pi(hi.phi_total - lo.phi_total);
            out.valid[k] = 1;
        }
    });

    std::size_t bad = static_cast<std::size_t>(std::count(out.valid.begin(), out.valid.end(), std::uint8_t{0}));
    if (static_cast<double>(bad) > options.max_invalid_fraction * static_cast<double>(out.valid.size()))
        throw Error(ErrorKind::NumericalFailure,
                    std::to_string(bad) + " of " + std::to_string(out.valid.size()) + " cells failed the root solve");
    return out;
}

}  // namespace hase
