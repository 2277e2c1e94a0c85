#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hase/errors.hpp"
#include "hase/spectra_analysis.hpp"
#include "hase/units.hpp"

using namespace hase;

namespace {

std::vector<double> harmonic(double alpha0_deg, std::size_t n, double c0 = 2.0, double c2 = 0.0) {
    std::vector<double> x(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double th = 2.0 * units::pi * j / n;
        x[j] = c0 + std::cos(th - alpha0_deg * units::deg) + c2 * std::cos(2.0 * th + 0.3);
    }
    return x;
}

EnergySpectrum gaussians(const std::vector<double>& centres, const std::vector<double>& heights) {
    EnergySpectrum s;
    for (int i = 0; i < 600; ++i) {
        const double p = 0.2 + i * 0.002;
        double y = 1e-4;
        for (std::size_t k = 0; k < centres.size(); ++k)
            y += heights[k] * std::exp(-0.5 * std::pow((p - centres[k]) / 0.01, 2));
        s.p_r.push_back(p);
        s.energy.push_back(0.5 * p * p);
        s.intensity.push_back(y);
    }
    return s;
}

}  // namespace

TEST_CASE("alpha recovers the phase of a first-harmonic modulation") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-180.0, 180.0);
    for (int k = 0; k < 50; ++k) {
        const double a0 = u(rng);
        const auto sb = alpha_from_angular(harmonic(a0, 360, 2.0, 0.4), PeakClass::sideband);
        CHECK(std::abs(wrap_degrees(sb.alpha_deg - a0)) < 1e-9);
        const auto ati = alpha_from_angular(harmonic(a0, 360), PeakClass::ati);
        CHECK(std::abs(wrap_degrees(ati.alpha_deg - (a0 - 180.0))) < 1e-9);
    }
}

TEST_CASE("alpha rejects flat or short distributions") {
    CHECK_THROWS_AS(alpha_from_angular(std::vector<double>(360, 1.0), PeakClass::sideband), Error);
    CHECK_THROWS_AS(alpha_from_angular(std::vector<double>(10, 1.0), PeakClass::sideband), Error);
}

TEST_CASE("wrap_degrees lands in [-180, 180)") {
    for (double d : {-725.0, -180.0, -179.9, 0.0, 179.9, 180.0, 540.0, 1e4}) {
        const double w = wrap_degrees(d);
        CHECK(w >= -180.0);
        CHECK(w < 180.0);
        CHECK(std::abs(std::remainder(w - d, 360.0)) < 1e-9);
    }
}

TEST_CASE("uniform map gives a spectrum proportional to p_r") {
    GridSpec g;
    g.pr_step = 0.01;
    g.phi_step_deg = 5.0;
    auto m = PolarMomentumMap::empty(g);
    for (std::size_t k = 0; k < m.intensity.size(); ++k) {
        m.intensity[k] = 3.0;
        m.valid[k] = 1;
    }
    const auto s = radial_spectrum(m);
    for (std::size_t i = 1; i < s.p_r.size(); ++i)
        CHECK(s.intensity[i] / s.p_r[i] == doctest::Approx(s.intensity[0] / s.p_r[0]).epsilon(1e-12));
    CHECK(s.energy[3] == doctest::Approx(0.5 * s.p_r[3] * s.p_r[3]));
}

TEST_CASE("peaks near reference maxima are ATI, the others sidebands") {
    const double omega = 0.0584;
    std::vector<double> ati, all;
    for (int n = 0; n < 4; ++n) {
        const double e = 0.08 + 2.0 * omega * n;
        ati.push_back(std::sqrt(2.0 * e));
        all.push_back(std::sqrt(2.0 * e));
        all.push_back(std::sqrt(2.0 * (e + omega)));
    }
    std::sort(all.begin(), all.end());
    const auto spec = gaussians(all, std::vector<double>(all.size(), 1.0));
    const auto ref = gaussians(ati, std::vector<double>(ati.size(), 1.0));
    const auto set = find_peaks(spec, ref, omega);
    REQUIRE(set.peaks.size() >= 6);
    CHECK(set.peaks[0].label == "ATI1");
    CHECK(set.peaks[1].label == "SB2");
    CHECK(set.peaks[2].label == "ATI2");
    for (const auto& p : set.peaks) {
        double best = 1e9;
        for (double c : all) best = std::min(best, std::abs(c - p.p_r));
        CHECK(best < 0.002);
    }
}

TEST_CASE("alpha inversion round-trips on a linear lookup") {
    AlphaLookup l;
    AlphaCurve c;
    c.label = "SB2";
    c.cls = PeakClass::sideband;
    for (int k = 0; k <= 16; ++k) {
        l.kappa.push_back(2.0 * units::pi * k / 16);
        c.alpha_deg.push_back(40.0 + 15.0 * l.kappa.back());
    }
    l.curves.push_back(c);
    for (double kappa : {2.0, 3.0, 4.5}) {
        const double a = 40.0 + 15.0 * kappa;
        CHECK(invert_alpha(l, "SB2", a) == doctest::Approx(kappa).epsilon(1e-12));
        CHECK(invert_alpha(l, "SB2", a + 360.0) == doctest::Approx(kappa).epsilon(1e-12));
    }
    CHECK_THROWS_AS(invert_alpha(l, "SB2", 10.0), Error);
    CHECK_THROWS_AS(invert_alpha(l, "ATI9", 90.0), Error);
    CHECK(band_linearity_deviation(c, l.kappa, 60.0, 120.0) < 1e-9);
}

TEST_CASE("lookup JSON round trip") {
    AlphaLookup l;
    l.kappa = {0.0, 1.0, 2.0};
    l.curves.push_back({"ATI1", PeakClass::ati, 0.36, {90.0, 100.0, 110.5}});
    l.curves.push_back({"SB2", PeakClass::sideband, 0.51, {91.0, 95.0, 99.0}});
    const auto back = lookup_from_json(to_json(l));
    CHECK(back.kappa == l.kappa);
    REQUIRE(back.curves.size() == 2);
    CHECK(back.curves[1].label == "SB2");
    CHECK(back.curves[1].cls == PeakClass::sideband);
    CHECK(back.curves[0].alpha_deg == l.curves[0].alpha_deg);
    std::ostringstream os;
    write_alpha_curves_csv(os, l);
    CHECK(os.str().find("kappa,alpha_ATI1,alpha_SB2\n") != std::string::npos);
}

TEST_CASE("Wigner delay arithmetic") {
    CHECK(wigner_delay_linear_pi(0.5) == doctest::Approx(units::pi).epsilon(1e-15));
    const auto r = wigner_delay_from_gradient(units::pi, 1.0, 0.3);
    CHECK(r.delay_au == doctest::Approx(units::pi));
    CHECK(r.delay_as == doctest::Approx(75.99).epsilon(1e-3));
    for (double e : {0.05, 0.2, 0.5, 1.0})
        CHECK(wigner_delay_from_gradient(units::pi, std::sqrt(2.0 * e), 0.0).delay_au ==
              doctest::Approx(wigner_delay_linear_pi(e)).epsilon(1e-14));
    CHECK_THROWS_AS(wigner_delay_from_gradient(1.0, 0.0, 0.0), Error);
    CHECK_THROWS_AS(wigner_delay_linear_pi(-1.0), Error);
}

TEST_CASE("linear offset phase gradient drives the model delay") {
    const auto r = wigner_delay_from_gradient(OffsetPhaseModel::linear(2.0), 0.8, 0.34);
    CHECK(r.phi_prime == doctest::Approx(2.0));
    CHECK(r.delay_au == doctest::Approx(2.5));
}
