#include <doctest.h>

#include <cmath>

#include "hase/errors.hpp"
#include "hase/hase_engine.hpp"
#include "hase/units.hpp"

using namespace hase;

namespace {

// composite Simpson, independent of the closed form and of Gauss-Kronrod
double simpson_phase(const FieldConfig& f, const Vec3& p, double a, double b, int n = 20000) {
    auto g = [&](double t) {
        const Vec3 v = p + eval_vector_potential(f, t);
        return 0.5 * dot(v, v);
    };
    const double h = (b - a) / n;
    double s = g(a) + g(b);
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * g(a + k * h);
    return s * h / 3.0;
}

GridSpec coarse() {
    GridSpec g;
    g.pr_min = 0.3;
    g.pr_max = 0.9;
    g.pr_step = 0.05;
    g.phi_step_deg = 10.0;
    return g;
}

}  // namespace

TEST_CASE("release solution reaches the requested final momentum") {
    FieldConfig f;
    const ReleaseSolver solver(f);
    for (double pr : {0.3, 0.5, 0.8})
        for (double phi : {0.0, 77.0, 181.0, 300.0})
            for (int w : {1, 2}) {
                const Vec3 pf = polar_momentum(pr, phi);
                const auto s = solver.solve(pf, w);
                const Vec3 u = transverse_unit_vector(f, s.t);
                CHECK(norm(-eval_vector_potential(f, s.t) + s.p_n * u - pf) < 1e-9);
                CHECK(std::abs(dot(s.p_i, eval_electric_field(f, s.t))) < 1e-9);
                CHECK(s.t >= (w - 1) * f.period_390() - 1e-9);
                CHECK(s.t < w * f.period_390() + 1e-9);
            }
}

TEST_CASE("closed-form propagation phase agrees with Simpson quadrature") {
    FieldConfig f;
    f.relative_phase = 0.4;
    const Vec3 p{0.1, 0.3, -0.5};
    const double a = 17.0, b = 17.0 + 1.7 * f.period_780();
    CHECK(propagation_phase(f, p, a, b) == doctest::Approx(simpson_phase(f, p, a, b)).epsilon(1e-11));
}

TEST_CASE("adaptive propagation phase for a pulsed field agrees with Simpson") {
    FieldConfig f;
    f.envelope = Envelope::sine_square_edges(14.0, 2.0);
    const Vec3 p{0.0, -0.4, 0.2};
    const double a = 5.5 * f.period_780(), b = f.pulse_end();
    CHECK(propagation_phase(f, p, a, b) == doctest::Approx(simpson_phase(f, p, a, b, 200000)).epsilon(1e-10));
}

TEST_CASE("four paths repeat with the 780 nm period") {
    FieldConfig f;
    const ReleaseSolver solver(f);
    const auto r = evaluate_four_paths(solver, units::argon_ip, {}, polar_momentum(0.6, 45.0));
    REQUIRE(r.valid);
    CHECK(r.paths[2].t - r.paths[0].t == doctest::Approx(f.period_780()));
    CHECK(r.paths[3].t - r.paths[1].t == doctest::Approx(f.period_780()));
    CHECK(r.t_f == r.paths[3].t);
}

TEST_CASE("constant offset phase leaves the map unchanged") {
    FieldConfig f;
    InitialStateModel a, b;
    b.offset_phase = OffsetPhaseModel::tabulated({0.0, 1.0}, {2.3, 2.3});
    MapOptions o;
    o.threads = 1;
    const auto ma = evaluate_map(f, units::argon_ip, a, coarse(), o);
    const auto mb = evaluate_map(f, units::argon_ip, b, coarse(), o);
    for (std::size_t k = 0; k < ma.intensity.size(); ++k)
        CHECK(mb.intensity[k] == doctest::Approx(ma.intensity[k]).epsilon(1e-9));
}

TEST_CASE("map is independent of the worker count") {
    FieldConfig f;
    MapOptions o1, o3;
    o1.threads = 1;
    o3.threads = 3;
    const auto a = evaluate_map(f, units::argon_ip, {}, coarse(), o1);
    const auto b = evaluate_map(f, units::argon_ip, {}, coarse(), o3);
    CHECK(a.intensity == b.intensity);
    CHECK(a.valid == b.valid);
}

TEST_CASE("single-color rings are isotropic") {
    FieldConfig f;
    f.e780 = 0.0;
    MapOptions o;
    o.threads = 1;
    const auto m = evaluate_map(f, units::argon_ip, {}, coarse(), o);
    for (std::size_t i = 0; i < m.n_radial(); ++i) {
        const double ref = m.intensity[m.index(i, 0)];
        for (std::size_t j = 1; j < m.n_angular(); ++j)
            CHECK(std::abs(m.intensity[m.index(i, j)] - ref) <= 1e-8 * std::max(ref, 1e-12));
    }
}

TEST_CASE("propagation phase rejects reversed intervals") {
    CHECK_THROWS_AS(propagation_phase(FieldConfig{}, {}, 10.0, 5.0), Error);
    CHECK(propagation_phase(FieldConfig{}, {}, 5.0, 5.0) == 0.0);
}
