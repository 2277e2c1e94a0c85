#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "hase/fields.hpp"
#include "hase/hase_engine.hpp"
#include "hase/initial_state.hpp"
#include "hase/polar_map.hpp"

namespace hase {

/// Angle-integrated yield per radial bin, with the energy axis p_r^2/2.
/// Intensities are per radial bin (ring sum times p_r dphi), so a uniform
/// map gives a spectrum proportional to p_r.
struct EnergySpectrum {
    std::vector<double> p_r;
    std::vector<double> energy;
    std::vector<double> intensity;
    std::string metadata = "{}";
};

/// Invalid cells are skipped and the ring sum rescaled by n_total / n_valid.
/// Throws EmptyRing if a ring has no valid cell.
EnergySpectrum radial_spectrum(const PolarMomentumMap& map);

void write_spectrum_csv(std::ostream& os, const EnergySpectrum& s);
void write_spectrum_csv(const std::string& path, const EnergySpectrum& s);

enum class PeakClass { ati, sideband };

std::string to_string(PeakClass c);

struct PeakRecord {
    std::string label;        // ATI1, SB2, ATI2, ...
    PeakClass cls = PeakClass::ati;
    double p_r = 0.0;         // refined centre
    double energy = 0.0;
    double window_lo = 0.0;   // radial window in p_r
    double window_hi = 0.0;
    double prominence = 0.0;  // relative to the spectrum maximum
    double alpha_deg = 0.0;
    double raw_angle_deg = 0.0;                    // -arg Y(2), before the ATI shift
    std::array<double, 3> fourier{0.0, 0.0, 0.0};  // |Y(1)|, |Y(2)|, |Y(3)|
    bool has_alpha = false;
};

struct PeakSet {
    std::vector<PeakRecord> peaks;

    const PeakRecord* find(const std::string& label) const;
};

struct PeakOptions {
    double prominence_fraction = 0.05;
    double match_fraction_of_omega = 0.25;
    double reference_dominance = 0.5;
};

/// Local maxima of `spec` with topographic prominence above a fraction of the
/// spectrum maximum. A peak within omega/4 in energy of a `reference` peak
/// (single-color spectrum) is ATI, otherwise a sideband. Reference maxima
/// below `reference_dominance` of the largest reference value within +-omega
/// are ignored. Throws NoPeaks if
/// fewer than two maxima survive.
PeakSet find_peaks(const EnergySpectrum& spec, const EnergySpectrum& reference, double omega,
                   const PeakOptions& options = {});

struct AlphaResult {
    double alpha_deg = 0.0;
    double raw_angle_deg = 0.0;
    std::array<double, 3> fourier{0.0, 0.0, 0.0};
};

/// Offset angle from an angular distribution X(j) sampled at
/// theta_j = 2 pi j / N: alpha = -arg Y(2) for sidebands and -arg Y(2) - 180
/// deg for ATI peaks, wrapped to [-180, 180).
AlphaResult alpha_from_angular(const std::vector<double>& x, PeakClass cls);

/// Ring-summed angular distribution over p_r in [lo, hi] (valid cells only).
std::vector<double> angular_distribution(const PolarMomentumMap& map, double lo, double hi);

AlphaResult extract_alpha(const PolarMomentumMap& map, const PeakRecord& peak);

struct NormalizedMap {
    PolarMomentumMap map;
    std::vector<std::size_t> flagged_rings;
};

/// Divides each ring by its truncated Fourier envelope (harmonics 0..h).
/// Rings whose envelope falls below 1e-12 of the largest ring envelope are
/// flagged and marked invalid.
NormalizedMap normalize_envelope(const PolarMomentumMap& map, int harmonics = 0);

struct AnalysisOptions {
    PeakOptions peaks;
    bool normalize = false;
    int envelope_harmonics = 0;
};

struct MapAnalysis {
    EnergySpectrum spectrum;
    EnergySpectrum reference;
    PeakSet peaks;
};

/// Spectrum, peak classification and alpha for every peak of `map`.
MapAnalysis analyze_map(const PolarMomentumMap& map, const PolarMomentumMap& reference, double omega,
                        const AnalysisOptions& options = {});

/// Fills alpha for every peak using fixed windows.
void assign_alphas(const PolarMomentumMap& map, PeakSet& peaks, const AnalysisOptions& options = {});

struct AlphaCurve {
    std::string label;
    PeakClass cls = PeakClass::ati;
    double p_r = 0.0;
    std::vector<double> alpha_deg;  // unwrapped along kappa
};

struct AlphaLookup {
    std::vector<double> kappa;  // rad per a.u. momentum, strictly increasing
    std::vector<AlphaCurve> curves;
    double band_lo_deg = 60.0;
    double band_hi_deg = 120.0;
    std::string amplitude_model = "{}";

    const AlphaCurve& curve(const std::string& label) const;
};

struct LookupOptions {
    GridSpec grid;
    AnalysisOptions analysis;
    unsigned threads = 0;
    double ip = 0.0;  // 0: argon
};

/// Runs the HASE map for each kappa of the linear offset-phase model with the
/// given amplitude model and extracts alpha per peak. Peak windows come from
/// the kappa = 0 map and are kept fixed across the scan.
AlphaLookup build_lookup(const FieldConfig& cfg, const AmplitudeModel& amplitude, const std::vector<double>& kappas,
                         const LookupOptions& options = {});

/// Piecewise-linear inversion alpha -> kappa restricted to the monotone part
/// of the curve inside [band_lo, band_hi]. Measured angles are tried modulo
/// 360 deg. Throws OutOfDomain otherwise.
double invert_alpha(const AlphaLookup& lookup, const std::string& label, double alpha_deg);

/// Largest deviation (deg) of alpha from its least-squares line in kappa over
/// the samples with alpha inside the band; NaN if fewer than 3 such samples.
double band_linearity_deviation(const AlphaCurve& curve, const std::vector<double>& kappa, double lo_deg,
                                double hi_deg);

struct WignerMapResult {
    double delay_au = 0.0;
    double delay_as = 0.0;
    double phi_prime = 0.0;
    double p_f = 0.0;
    double p_streak = 0.0;
};

/// Delay = phi'_off / p_f (atomic units). Throws DomainError for p_f <= 0.
WignerMapResult wigner_delay_from_gradient(double phi_prime, double p_f, double p_streak);

/// Same, with the gradient taken from `model` at p_i = p_f - p_streak.
WignerMapResult wigner_delay_from_gradient(const OffsetPhaseModel& model, double p_f, double p_streak);

/// pi / sqrt(2E): delay for a linear offset phase of pi rad per a.u.
double wigner_delay_linear_pi(double energy);

double wrap_degrees(double deg);
double coulomb_corrected_alpha(double alpha_deg, double alpha_coulomb_deg);
double two_channel_difference(double alpha_ch1_deg, double alpha_ch2_deg);

nlohmann::ordered_json to_json(const PeakSet& peaks);
nlohmann::ordered_json to_json(const AlphaLookup& lookup);
/// Inverse of to_json(AlphaLookup); ConfigError on malformed input.
AlphaLookup lookup_from_json(const nlohmann::ordered_json& j);
AlphaLookup read_lookup_json(const std::string& path);

/// One row per kappa, one alpha column per curve.
void write_alpha_curves_csv(std::ostream& os, const AlphaLookup& lookup);
void write_alpha_curves_csv(const std::string& path, const AlphaLookup& lookup);
nlohmann::ordered_json to_json(const WignerMapResult& r);

}  // namespace hase
