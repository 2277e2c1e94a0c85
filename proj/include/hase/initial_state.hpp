#pragma once

#include <vector>

namespace hase {

/// Amplitude B(p_i) of the initial momentum distribution after tunneling,
/// optionally multiplied by a periodic release-time factor g(t).
struct AmplitudeModel {
    enum class Kind { constant, gaussian, tabulated };

    Kind kind = Kind::constant;
    double value = 1.0;   // constant
    double sigma = 0.2;   // gaussian width (a.u.)
    double p0 = 0.2;      // gaussian center (a.u.)
    std::vector<double> table_p;  // tabulated, strictly increasing
    std::vector<double> table_b;  // clamped to the end values outside the table

    // Release-time factor sampled over one period; empty means g == 1.
    std::vector<double> time_t;
    std::vector<double> time_g;
    double time_period = 0.0;

    static AmplitudeModel constant(double b = 1.0);
    static AmplitudeModel gaussian(double sigma, double p0);
    static AmplitudeModel tabulated(std::vector<double> p, std::vector<double> b);

    void validate() const;
    double eval(double p) const;
    double time_factor(double t) const;
    bool has_time_factor() const { return !time_t.empty(); }
};

/// Offset phase phi_off(p_i). The linear model has gradient kappa everywhere.
struct OffsetPhaseModel {
    enum class Kind { linear, tabulated };

    Kind kind = Kind::linear;
    double kappa = 0.0;
    std::vector<double> table_p;
    std::vector<double> table_phi;  // linearly extrapolated outside the table

    static OffsetPhaseModel linear(double kappa);
    static OffsetPhaseModel tabulated(std::vector<double> p, std::vector<double> phi);

    void validate() const;
    double eval(double p) const;
    double gradient(double p) const;
};

struct InitialStateModel {
    AmplitudeModel amplitude;
    OffsetPhaseModel offset_phase;

    void validate() const {
        amplitude.validate();
        offset_phase.validate();
    }

    double amplitude_at(double p, double t) const {
        const double b = amplitude.eval(p);
        return amplitude.has_time_factor() ? b * amplitude.time_factor(t) : b;
    }
};

}  // namespace hase
