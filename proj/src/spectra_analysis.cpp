#include "hase/spectra_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <ostream>

#include <sstream>

#include "csv_util.hpp"
#include "json_reader.hpp"
#include "hase/config_io.hpp"
#include "hase/errors.hpp"
#include "hase/units.hpp"

namespace hase {

EnergySpectrum radial_spectrum(const PolarMomentumMap& map) {
    const std::size_t nr = map.n_radial();
    const std::size_t na = map.n_angular();
    const double dphi = map.grid.phi_step_deg * units::deg;
    EnergySpectrum s;
    s.metadata = map.metadata;
    s.p_r.resize(nr);
    s.energy.resize(nr);
    s.intensity.resize(nr);
    for (std::size_t i = 0; i < nr; ++i) {
        double sum = 0.0;
        std::size_t n_valid = 0;
        for (std::size_t j = 0; j < na; ++j) {
            const std::size_t k = map.index(i, j);
            if (!map.valid[k]) continue;
            sum += map.intensity[k];
            ++n_valid;
        }
        if (n_valid == 0)
            throw Error(ErrorKind::EmptyRing, "no valid cell at p_r=" + std::to_string(map.grid.pr(i)));
        const double pr = map.grid.pr(i);
        s.p_r[i] = pr;
        s.energy[i] = 0.5 * pr * pr;
        s.intensity[i] = pr * dphi * sum * static_cast<double>(na) / static_cast<double>(n_valid);
    }
    return s;
}

void write_spectrum_csv(std::ostream& os, const EnergySpectrum& s) {
    os << "# kind: energy_spectrum\n";
    os << "# config: " << s.metadata << '\n';
    os << "energy,p_r,intensity\n";
    std::string line;
    for (std::size_t i = 0; i < s.energy.size(); ++i) {
        line.clear();
        detail::append_number(line, s.energy[i]);
        line += ',';
        detail::append_number(line, s.p_r[i]);
        line += ',';
        detail::append_number(line, s.intensity[i]);
        line += '\n';
        os << line;
    }
}

void write_spectrum_csv(const std::string& path, const EnergySpectrum& s) {
    auto os = detail::open_output(path);
    write_spectrum_csv(os, s);
    if (!os) throw Error(ErrorKind::IoError, "write failed for '" + path + "'");
}

std::string to_string(PeakClass c) { return c == PeakClass::ati ? "ATI" : "SB"; }

const PeakRecord* PeakSet::find(const std::string& label) const {
    for (const auto& p : peaks)
        if (p.label == label) return &p;
    return nullptr;
}

namespace {

struct RawPeak {
    std::size_t index;
    double p_r;
    double prominence;
};

std::vector<RawPeak> detect_peaks(const EnergySpectrum& s, double fraction) {
    const auto& y = s.intensity;
    const std::size_t n = y.size();
    std::vector<RawPeak> out;
    if (n < 3) return out;
    const double ymax = *std::max_element(y.begin(), y.end());
    if (!(ymax > 0.0)) return out;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(y[i] > y[i - 1])) continue;
        // a flat top counts once, at its left end
        std::size_t r = i;
        while (r + 1 < n && y[r + 1] == y[i]) ++r;
        if (r + 1 >= n || !(y[r + 1] < y[i])) continue;

        double left_min = y[i];
        for (std::size_t k = i; k-- > 0;) {
            if (y[k] > y[i]) break;
            left_min = std::min(left_min, y[k]);
        }
        double right_min = y[i];
        for (std::size_t k = r + 1; k < n; ++k) {
            if (y[k] > y[i]) break;
            right_min = std::min(right_min, y[k]);
        }
        const double prominence = y[i] - std::max(left_min, right_min);
        if (prominence < fraction * ymax) continue;

        double p = s.p_r[i];
        if (r == i) {
            const double denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
            if (denom < 0.0) p += 0.5 * (y[i - 1] - y[i + 1]) / denom * (s.p_r[i + 1] - s.p_r[i]);
        } else {
            p = 0.5 * (s.p_r[i] + s.p_r[r]);
        }
        out.push_back({i, p, prominence / ymax});
    }
    return out;
}

}  // namespace

PeakSet find_peaks(const EnergySpectrum& spec, const EnergySpectrum& reference, double omega,
                   const PeakOptions& options) {
    const auto found = detect_peaks(spec, options.prominence_fraction);
    if (found.size() < 2)
        throw Error(ErrorKind::NoPeaks, "found " + std::to_string(found.size()) + " peak(s), need at least 2");
    // Only reference maxima that dominate their +-omega neighbourhood count as
    // ATI; the finite path sum also leaves weak subsidiary maxima in between.
    std::vector<RawPeak> ref;
    for (const auto& r : detect_peaks(reference, options.prominence_fraction)) {
        const double e = 0.5 * r.p_r * r.p_r;
        double local_max = 0.0;
        for (std::size_t i = 0; i < reference.energy.size(); ++i)
            if (std::abs(reference.energy[i] - e) <= omega) local_max = std::max(local_max, reference.intensity[i]);
        if (reference.intensity[r.index] >= options.reference_dominance * local_max) ref.push_back(r);
    }
    const double tol = options.match_fraction_of_omega * omega;

    PeakSet set;
    int ati_seen = 0;
    const double p_lo = spec.p_r.front();
    const double p_hi = spec.p_r.back();
    for (std::size_t k = 0; k < found.size(); ++k) {
        PeakRecord rec;
        rec.p_r = found[k].p_r;
        rec.energy = 0.5 * rec.p_r * rec.p_r;
        rec.prominence = found[k].prominence;
        const bool matched = std::any_of(ref.begin(), ref.end(), [&](const RawPeak& r) {
            return std::abs(0.5 * r.p_r * r.p_r - rec.energy) < tol;
        });
        rec.cls = matched ? PeakClass::ati : PeakClass::sideband;
        if (matched) ++ati_seen;
        rec.label = to_string(rec.cls) + std::to_string(matched ? ati_seen : ati_seen + 1);

        const double left_gap = k > 0 ? rec.p_r - found[k - 1].p_r : found[k + 1].p_r - rec.p_r;
        const double right_gap = k + 1 < found.size() ? found[k + 1].p_r - rec.p_r : rec.p_r - found[k - 1].p_r;
        rec.window_lo = std::max(p_lo, rec.p_r - 0.5 * left_gap);
        rec.window_hi = std::min(p_hi, rec.p_r + 0.5 * right_gap);
        set.peaks.push_back(rec);
    }
    return set;
}

double wrap_degrees(double deg) { return deg - 360.0 * std::floor((deg + 180.0) / 360.0); }

AlphaResult alpha_from_angular(const std::vector<double>& x, PeakClass cls) {
    const std::size_t n = x.size();
    if (n < 36) throw Error(ErrorKind::DomainError, "angular distribution needs >= 36 samples");
    std::array<std::complex<double>, 3> y{};
    for (std::size_t j = 0; j < n; ++j) {
        const double theta = 2.0 * units::pi * static_cast<double>(j) / static_cast<double>(n);
        for (int h = 0; h < 3; ++h) y[static_cast<std::size_t>(h)] += x[j] * std::polar(1.0, -h * theta);
    }
    AlphaResult r;
    for (std::size_t h = 0; h < 3; ++h) r.fourier[h] = std::abs(y[h]);
    if (!(r.fourier[1] >= 1e-6 * r.fourier[0]) || r.fourier[1] == 0.0)
        throw Error(ErrorKind::DegenerateAngular, "no first-harmonic modulation in the angular distribution");
    r.raw_angle_deg = -std::arg(y[1]) / units::deg;
    r.alpha_deg = wrap_degrees(cls == PeakClass::ati ? r.raw_angle_deg - 180.0 : r.raw_angle_deg);
    return r;
}

std::vector<double> angular_distribution(const PolarMomentumMap& map, double lo, double hi) {
    const std::size_t na = map.n_angular();
    std::vector<double> x(na, 0.0);
    std::size_t rings = 0;
    for (std::size_t i = 0; i < map.n_radial(); ++i) {
        const double pr = map.grid.pr(i);
        if (pr < lo || pr >= hi) continue;
        ++rings;
        for (std::size_t j = 0; j < na; ++j) {
            const std::size_t k = map.index(i, j);
            if (map.valid[k]) x[j] += map.intensity[k];
        }
    }
    if (rings == 0) throw Error(ErrorKind::EmptyRing, "no ring inside the peak window");
    return x;
}

AlphaResult extract_alpha(const PolarMomentumMap& map, const PeakRecord& peak) {
    return alpha_from_angular(angular_distribution(map, peak.window_lo, peak.window_hi), peak.cls);
}

NormalizedMap normalize_envelope(const PolarMomentumMap& map, int harmonics) {
    if (harmonics < 0) throw Error(ErrorKind::DomainError, "envelope harmonics must be >= 0");
    const std::size_t nr = map.n_radial();
    const std::size_t na = map.n_angular();
    NormalizedMap out;
    out.map = map;
    out.map.amplitude.clear();

    std::vector<std::vector<std::complex<double>>> coeff(nr);
    double largest = 0.0;
    for (std::size_t i = 0; i < nr; ++i) {
        coeff[i].assign(static_cast<std::size_t>(harmonics) + 1, {0.0, 0.0});
        std::size_t n_valid = 0;
        for (std::size_t j = 0; j < na; ++j) {
            const std::size_t k = map.index(i, j);
            if (!map.valid[k]) continue;
            ++n_valid;
            const double theta = 2.0 * units::pi * static_cast<double>(j) / static_cast<double>(na);
            for (int h = 0; h <= harmonics; ++h)
                coeff[i][static_cast<std::size_t>(h)] += map.intensity[k] * std::polar(1.0, -h * theta);
        }
        if (n_valid > 0)
            for (auto& c : coeff[i]) c /= static_cast<double>(n_valid);
        largest = std::max(largest, coeff[i][0].real());
    }

    for (std::size_t i = 0; i < nr; ++i) {
        std::vector<double> env(na);
        bool bad = !(coeff[i][0].real() > 1e-12 * largest);
        for (std::size_t j = 0; j < na && !bad; ++j) {
            const double theta = 2.0 * units::pi * static_cast<double>(j) / static_cast<double>(na);
            double e = coeff[i][0].real();
            for (int h = 1; h <= harmonics; ++h)
                e += 2.0 * (coeff[i][static_cast<std::size_t>(h)] * std::polar(1.0, h * theta)).real();
            env[j] = e;
            if (!(e > 1e-12 * largest)) bad = true;
        }
        for (std::size_t j = 0; j < na; ++j) {
            const std::size_t k = map.index(i, j);
            if (bad) {
                out.map.valid[k] = 0;
                out.map.intensity[k] = 0.0;
            } else {
                out.map.intensity[k] = map.intensity[k] / env[j];
            }
        }
        if (bad) out.flagged_rings.push_back(i);
    }
    return out;
}

void assign_alphas(const PolarMomentumMap& map, PeakSet& peaks, const AnalysisOptions& options) {
    PolarMomentumMap normalized;
    const PolarMomentumMap* work = &map;
    if (options.normalize) {
        normalized = normalize_envelope(map, options.envelope_harmonics).map;
        work = &normalized;
    }
    for (auto& p : peaks.peaks) {
        const AlphaResult a = extract_alpha(*work, p);
        p.alpha_deg = a.alpha_deg;
        p.raw_angle_deg = a.raw_angle_deg;
        p.fourier = a.fourier;
        p.has_alpha = true;
    }
}

MapAnalysis analyze_map(const PolarMomentumMap& map, const PolarMomentumMap& reference, double omega,
                        const AnalysisOptions& options) {
    MapAnalysis out;
    out.spectrum = radial_spectrum(map);
    out.reference = radial_spectrum(reference);
    out.peaks = find_peaks(out.spectrum, out.reference, omega, options.peaks);
    assign_alphas(map, out.peaks, options);
    return out;
}

const AlphaCurve& AlphaLookup::curve(const std::string& label) const {
    for (const auto& c : curves)
        if (c.label == label) return c;
    throw Error(ErrorKind::DomainError, "no lookup curve for peak '" + label + "'");
}

AlphaLookup build_lookup(const FieldConfig& cfg, const AmplitudeModel& amplitude, const std::vector<double>& kappas,
                         const LookupOptions& options) {
    if (kappas.size() < 2) throw Error(ErrorKind::DomainError, "kappa scan needs at least two values");
    for (std::size_t i = 1; i < kappas.size(); ++i)
        if (!(kappas[i] > kappas[i - 1])) throw Error(ErrorKind::DomainError, "kappa list must be strictly increasing");
    if (kappas.front() > 1e-9 || kappas.back() < 2.0 * units::pi - 1e-9)
        throw Error(ErrorKind::DomainError, "kappa list must span [0, 2 pi]");

    const double ip = options.ip > 0.0 ? options.ip : units::argon_ip;
    MapOptions mo;
    mo.threads = options.threads;
    mo.preset = RunPreset::linear;

    InitialStateModel model;
    model.amplitude = amplitude;
    model.offset_phase = OffsetPhaseModel::linear(0.0);
    FieldConfig single = cfg;
    single.e780 = 0.0;
    const PolarMomentumMap reference = evaluate_map(single, ip, model, options.grid, mo);
    const PolarMomentumMap base = evaluate_map(cfg, ip, model, options.grid, mo);
    const PeakSet peaks =
        find_peaks(radial_spectrum(base), radial_spectrum(reference), cfg.omega, options.analysis.peaks);

    AlphaLookup lookup;
    lookup.kappa = kappas;
    lookup.amplitude_model = to_json(amplitude).dump();
    for (const auto& p : peaks.peaks) lookup.curves.push_back({p.label, p.cls, p.p_r, {}});

    for (double kappa : kappas) {
        PeakSet scan = peaks;
        if (kappa == 0.0) {
            assign_alphas(base, scan, options.analysis);
        } else {
            model.offset_phase = OffsetPhaseModel::linear(kappa);
            assign_alphas(evaluate_map(cfg, ip, model, options.grid, mo), scan, options.analysis);
        }
        for (std::size_t k = 0; k < scan.peaks.size(); ++k) {
            auto& a = lookup.curves[k].alpha_deg;
            double v = scan.peaks[k].alpha_deg;
            if (!a.empty()) v += 360.0 * std::round((a.back() - v) / 360.0);
            a.push_back(v);
        }
    }
    return lookup;
}

namespace {

// Shift m such that v - 360 m lies in [lo, hi], or nullopt-like NaN.
double band_shift(double v, double lo, double hi) {
    const double m = std::floor((v - lo) / 360.0);
    return v - 360.0 * m <= hi ? m : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

double invert_alpha(const AlphaLookup& lookup, const std::string& label, double alpha_deg) {
    const AlphaCurve& c = lookup.curve(label);
    const auto& a = c.alpha_deg;
    const double lo = lookup.band_lo_deg;
    const double hi = lookup.band_hi_deg;
    const double m_meas = band_shift(alpha_deg, lo, hi);
    if (std::isnan(m_meas))
        throw Error(ErrorKind::OutOfDomain, "alpha " + std::to_string(alpha_deg) + " deg outside the inversion band");
    const double in_band = alpha_deg - 360.0 * m_meas;
    for (std::size_t k = 0; k + 1 < a.size(); ++k) {
        const double m0 = band_shift(a[k], lo, hi);
        const double m1 = band_shift(a[k + 1], lo, hi);
        if (std::isnan(m0) || std::isnan(m1) || m0 != m1 || a[k] == a[k + 1]) continue;
        const double target = in_band + 360.0 * m0;
        const double t = (target - a[k]) / (a[k + 1] - a[k]);
        if (t < 0.0 || t > 1.0) continue;
        return lookup.kappa[k] + t * (lookup.kappa[k + 1] - lookup.kappa[k]);
    }
    throw Error(ErrorKind::OutOfDomain,
                "alpha " + std::to_string(alpha_deg) + " deg not covered by the monotone band of " + label);
}

double band_linearity_deviation(const AlphaCurve& curve, const std::vector<double>& kappa, double lo_deg,
                                double hi_deg) {
    // Contiguous runs of samples inside the band (modulo 360), each fitted separately.
    double worst = std::numeric_limits<double>::quiet_NaN();
    std::size_t k = 0;
    const auto& a = curve.alpha_deg;
    while (k < a.size()) {
        const double m = band_shift(a[k], lo_deg, hi_deg);
        if (std::isnan(m)) {
            ++k;
            continue;
        }
        std::size_t end = k;
        while (end < a.size() && band_shift(a[end], lo_deg, hi_deg) == m) ++end;
        const std::size_t n = end - k;
        if (n >= 3) {
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (std::size_t i = k; i < end; ++i) {
                sx += kappa[i];
                sy += a[i];
                sxx += kappa[i] * kappa[i];
                sxy += kappa[i] * a[i];
            }
            const double dn = static_cast<double>(n);
            const double slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
            const double icpt = (sy - slope * sx) / dn;
            double dev = 0.0;
            for (std::size_t i = k; i < end; ++i) dev = std::max(dev, std::abs(a[i] - (icpt + slope * kappa[i])));
            worst = std::isnan(worst) ? dev : std::max(worst, dev);
        }
        k = end;
    }
    return worst;
}

WignerMapResult wigner_delay_from_gradient(double phi_prime, double p_f, double p_streak) {
    if (!(p_f > 0.0)) throw Error(ErrorKind::DomainError, "p_f must be > 0");
    WignerMapResult r;
    r.phi_prime = phi_prime;
    r.p_f = p_f;
    r.p_streak = p_streak;
    r.delay_au = phi_prime / p_f;
    r.delay_as = units::au_to_attoseconds(r.delay_au);
    return r;
}

WignerMapResult wigner_delay_from_gradient(const OffsetPhaseModel& model, double p_f, double p_streak) {
    if (!(p_f > 0.0)) throw Error(ErrorKind::DomainError, "p_f must be > 0");
    return wigner_delay_from_gradient(model.gradient(p_f - p_streak), p_f, p_streak);
}

double wigner_delay_linear_pi(double energy) {
    if (!(energy > 0.0)) throw Error(ErrorKind::DomainError, "energy must be > 0");
    return units::pi / std::sqrt(2.0 * energy);
}

double coulomb_corrected_alpha(double alpha_deg, double alpha_coulomb_deg) {
    return wrap_degrees(alpha_deg - alpha_coulomb_deg);
}

double two_channel_difference(double alpha_ch1_deg, double alpha_ch2_deg) {
    return wrap_degrees(alpha_ch1_deg - alpha_ch2_deg);
}

nlohmann::ordered_json to_json(const PeakSet& peaks) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& p : peaks.peaks) {
        nlohmann::ordered_json j{{"label", p.label},
                                 {"class", to_string(p.cls)},
                                 {"p_r", p.p_r},
                                 {"energy", p.energy},
                                 {"window", {p.window_lo, p.window_hi}},
                                 {"prominence", p.prominence}};
        if (p.has_alpha) {
            j["alpha_deg"] = p.alpha_deg;
            j["raw_angle_deg"] = p.raw_angle_deg;
            j["fourier_amplitudes"] = p.fourier;
            j["harmonic_contamination"] = p.fourier[1] > 0.0 ? p.fourier[2] / p.fourier[1] : 0.0;
        }
        arr.push_back(j);
    }
    return {{"peaks", arr}};
}

nlohmann::ordered_json to_json(const AlphaLookup& lookup) {
    nlohmann::ordered_json curves = nlohmann::ordered_json::array();
    for (const auto& c : lookup.curves)
        curves.push_back({{"label", c.label}, {"class", to_string(c.cls)}, {"p_r", c.p_r}, {"alpha_deg", c.alpha_deg}});
    return {{"kappa", lookup.kappa},
            {"band_deg", {lookup.band_lo_deg, lookup.band_hi_deg}},
            {"amplitude_model", nlohmann::ordered_json::parse(lookup.amplitude_model)},
            {"curves", curves}};
}

nlohmann::ordered_json to_json(const WignerMapResult& r) {
    return {{"delay_au", r.delay_au},
            {"delay_as", r.delay_as},
            {"phi_prime", r.phi_prime},
            {"p_f", r.p_f},
            {"p_streak", r.p_streak}};
}

AlphaLookup lookup_from_json(const nlohmann::ordered_json& j) {
    detail::ObjectReader r(j, "lookup");
    AlphaLookup l;
    l.kappa = r.numbers("kappa");
    if (r.has("band_deg")) {
        const auto band = r.numbers("band_deg");
        if (band.size() != 2) detail::ObjectReader::fail("lookup.band_deg", "must be [lo, hi]");
        l.band_lo_deg = band[0];
        l.band_hi_deg = band[1];
    }
    if (r.has("amplitude_model")) l.amplitude_model = r.raw("amplitude_model").dump();
    const auto& curves = r.raw("curves");
    if (!curves.is_array()) detail::ObjectReader::fail("lookup.curves", "must be an array");
    for (std::size_t i = 0; i < curves.size(); ++i) {
        detail::ObjectReader c(curves[i], "lookup.curves[" + std::to_string(i) + "]");
        AlphaCurve curve;
        curve.label = c.string("label");
        const std::string cls = c.choice("class", {"ATI", "SB"}, "ATI");
        curve.cls = cls == "ATI" ? PeakClass::ati : PeakClass::sideband;
        curve.p_r = c.number("p_r");
        curve.alpha_deg = c.numbers("alpha_deg");
        if (curve.alpha_deg.size() != l.kappa.size())
            detail::ObjectReader::fail(c.key_path("alpha_deg"), "must have one entry per kappa");
        c.finish();
        l.curves.push_back(std::move(curve));
    }
    r.finish();
    for (std::size_t i = 1; i < l.kappa.size(); ++i)
        if (!(l.kappa[i] > l.kappa[i - 1])) detail::ObjectReader::fail("lookup.kappa", "must be strictly increasing");
    return l;
}

AlphaLookup read_lookup_json(const std::string& path) {
    auto is = detail::open_input(path);
    std::stringstream ss;
    ss << is.rdbuf();
    return lookup_from_json(parse_json_text(ss.str(), path));
}

void write_alpha_curves_csv(std::ostream& os, const AlphaLookup& lookup) {
    os << "# kind: alpha_curves\n";
    os << "# amplitude_model: " << lookup.amplitude_model << '\n';
    os << "# band_deg: " << lookup.band_lo_deg << ',' << lookup.band_hi_deg << '\n';
    os << "# p_r:";
    for (const auto& c : lookup.curves) os << ' ' << c.label << '=' << c.p_r;
    os << "\nkappa";
    for (const auto& c : lookup.curves) os << ",alpha_" << c.label;
    os << '\n';
    std::string line;
    for (std::size_t k = 0; k < lookup.kappa.size(); ++k) {
        line.clear();
        detail::append_number(line, lookup.kappa[k]);
        for (const auto& c : lookup.curves) {
            line += ',';
            detail::append_number(line, c.alpha_deg[k]);
        }
        line += '\n';
        os << line;
    }
}

void write_alpha_curves_csv(const std::string& path, const AlphaLookup& lookup) {
    auto os = detail::open_output(path);
    write_alpha_curves_csv(os, lookup);
    if (!os) throw Error(ErrorKind::IoError, "write failed for '" + path + "'");
}

}  // namespace hase
