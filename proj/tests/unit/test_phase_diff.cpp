#include <doctest.h>

#include <cmath>
#include <complex>
#include <functional>

#include "hase/errors.hpp"
#include "hase/scts.hpp"
#include "hase/units.hpp"

using namespace hase;

namespace {

// Synthetic grid with amplitude f(p) in every bin of the slice ring 0.2 < |p| < 1.
BinGrid3D synthetic(const std::function<std::complex<double>(const Vec3&)>& f, std::uint64_t seed = 1) {
    BinGrid3D g;
    g.geometry = BinGeometry::centered(0.01, 0.02, 1.0);
    g.seed = seed;
    g.n_traj = 1000;
    const std::size_t n = g.geometry.size();
    g.re.assign(n, 0);
    g.im.assign(n, 0);
    g.count = std::make_shared<std::vector<std::uint32_t>>(n, 0u);
    g.incoherent = std::make_shared<std::vector<std::int64_t>>(n, 0);
    g.moment = std::make_shared<std::vector<std::int64_t>>(3 * n, 0);
    const auto& geo = g.geometry;
    for (std::uint32_t ix = 0; ix < geo.nx; ++ix)
        for (std::uint32_t iy = 0; iy < geo.ny; ++iy)
            for (std::uint32_t iz = 0; iz < geo.nz; ++iz) {
                const Vec3 p = geo.center(ix, iy, iz);
                const double pr = std::hypot(p.y, p.z);
                if (pr < 0.2 || pr > 1.0) continue;
                const std::size_t k = geo.index(ix, iy, iz);
                const auto a = f(p);
                g.re[k] = std::llround(a.real() * BinGrid3D::kScale);
                g.im[k] = std::llround(a.imag() * BinGrid3D::kScale);
                (*g.count)[k] = 3;
                const double w = std::norm(a);
                (*g.incoherent)[k] = std::llround(w * BinGrid3D::kScale);
                (*g.moment)[3 * k] = std::llround(w * p.x * BinGrid3D::kMomentScale);
                (*g.moment)[3 * k + 1] = std::llround(w * p.y * BinGrid3D::kMomentScale);
                (*g.moment)[3 * k + 2] = std::llround(w * p.z * BinGrid3D::kMomentScale);
            }
    return g;
}

std::complex<double> base(const Vec3& p) {
    const double th = std::atan2(p.z, p.y);
    return std::polar(0.5 + 0.3 * std::cos(th), 7.0 * dot(p, p) + 2.0 * th);
}

}  // namespace

TEST_CASE("identical grids give zero phase difference") {
    const auto g = synthetic(base);
    const auto r = phase_difference_analysis(g, g);
    CHECK(r.overlap_fraction == 1.0);
    REQUIRE(!r.energy.empty());
    for (double d : r.phase_diff) CHECK(d == 0.0);
}

TEST_CASE("a phase of pi |p| reproduces pi / sqrt(2E)") {
    auto g0 = synthetic(base);
    auto gk = synthetic([](const Vec3& p) { return base(p) * std::polar(1.0, units::pi * norm(p)); });
    gk.kappa = units::pi;
    const auto r = phase_difference_analysis(gk, g0);
    CHECK(r.kappa == units::pi);
    int checked = 0;
    for (std::size_t i = 0; i < r.energy.size(); ++i) {
        if (std::isnan(r.delay_au[i]) || r.energy[i] < 0.05 || r.energy[i] > 0.45) continue;
        CHECK(r.delay_au[i] == doctest::Approx(units::pi / std::sqrt(2 * r.energy[i])).epsilon(0.02));
        CHECK(r.delay_hase_au[i] == doctest::Approx(units::pi / std::sqrt(2 * r.energy[i])).epsilon(1e-12));
        ++checked;
    }
    CHECK(checked > 20);
}

TEST_CASE("phase difference is invariant under a global phase on both grids") {
    const auto rot = std::polar(1.0, 1.234);
    auto f_k = [](const Vec3& p) { return base(p) * std::polar(1.0, 2.0 * norm(p) * norm(p)); };
    const auto a = phase_difference_analysis(synthetic(f_k), synthetic(base));
    const auto b = phase_difference_analysis(synthetic([&](const Vec3& p) { return rot * f_k(p); }),
                                             synthetic([&](const Vec3& p) { return rot * base(p); }));
    REQUIRE(a.energy.size() == b.energy.size());
    for (std::size_t i = 0; i < a.energy.size(); ++i) {
        CHECK(b.phase_diff[i] == doctest::Approx(a.phase_diff[i]).epsilon(1e-7));
        CHECK(b.energy[i] == doctest::Approx(a.energy[i]).epsilon(1e-7));
    }
}

TEST_CASE("grids from different runs or with little overlap are rejected") {
    const auto g0 = synthetic(base);
    CHECK_THROWS_AS(phase_difference_analysis(synthetic(base, 2), g0), Error);
    auto sparse = synthetic(base);
    for (std::size_t k = 0; k < sparse.count->size(); ++k)
        if (k % 3) (*sparse.count)[k] = 0;
    try {
        phase_difference_analysis(sparse, g0);
        FAIL("expected InsufficientOverlap");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InsufficientOverlap);
    }
}
