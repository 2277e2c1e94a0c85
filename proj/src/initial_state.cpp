#include "hase/initial_state.hpp"

#include <algorithm>
#include <cmath>

#include "hase/errors.hpp"

namespace hase {

namespace {

void check_table(const std::vector<double>& x, const std::vector<double>& y, const char* what) {
    if (x.size() != y.size() || x.size() < 2)
        throw Error(ErrorKind::ConfigError, std::string(what) + ": table needs >= 2 matching samples");
    for (std::size_t i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1]))
            throw Error(ErrorKind::ConfigError, std::string(what) + ": table abscissa must be strictly increasing");
}

// Index of the segment [x[i], x[i+1]] used for x0, clamped to the end segments.
std::size_t segment(const std::vector<double>& x, double x0) {
    const auto it = std::upper_bound(x.begin(), x.end(), x0);
    const auto i = static_cast<std::size_t>(std::distance(x.begin(), it));
    return std::clamp<std::size_t>(i, 1, x.size() - 1) - 1;
}

double lerp_segment(const std::vector<double>& x, const std::vector<double>& y, std::size_t i, double x0) {
    const double w = (x0 - x[i]) / (x[i + 1] - x[i]);
    return y[i] + w * (y[i + 1] - y[i]);
}

}  // namespace

AmplitudeModel AmplitudeModel::constant(double b) {
    AmplitudeModel m;
    m.kind = Kind::constant;
    m.value = b;
    return m;
}

AmplitudeModel AmplitudeModel::gaussian(double sigma, double p0) {
    AmplitudeModel m;
    m.kind = Kind::gaussian;
    m.sigma = sigma;
    m.p0 = p0;
    return m;
}

AmplitudeModel AmplitudeModel::tabulated(std::vector<double> p, std::vector<double> b) {
    AmplitudeModel m;
    m.kind = Kind::tabulated;
    m.table_p = std::move(p);
    m.table_b = std::move(b);
    return m;
}

void AmplitudeModel::validate() const {
    switch (kind) {
        case Kind::constant:
            if (!(value >= 0.0)) throw Error(ErrorKind::ConfigError, "amplitude.value must be >= 0");
            break;
        case Kind::gaussian:
            if (!(sigma > 0.0)) throw Error(ErrorKind::ConfigError, "amplitude.sigma must be > 0");
            if (!std::isfinite(p0)) throw Error(ErrorKind::ConfigError, "amplitude.p0 must be finite");
            break;
        case Kind::tabulated:
            check_table(table_p, table_b, "amplitude");
            for (double b : table_b)
                if (!(b >= 0.0)) throw Error(ErrorKind::ConfigError, "amplitude table values must be >= 0");
            break;
    }
    if (!time_t.empty()) {
        check_table(time_t, time_g, "amplitude.time_envelope");
        if (!(time_period > 0.0))
            throw Error(ErrorKind::ConfigError, "amplitude.time_envelope.period must be > 0");
        for (double g : time_g)
            if (!(g >= 0.0)) throw Error(ErrorKind::ConfigError, "amplitude.time_envelope values must be >= 0");
    }
}

double AmplitudeModel::eval(double p) const {
    switch (kind) {
        case Kind::constant: return value;
        case Kind::gaussian: {
            const double d = (p - p0) / sigma;
            return std::exp(-0.5 * d * d);
        }
        case Kind::tabulated: {
            if (p <= table_p.front()) return table_b.front();
            if (p >= table_p.back()) return table_b.back();
            return lerp_segment(table_p, table_b, segment(table_p, p), p);
        }
    }
    return 0.0;
}

double AmplitudeModel::time_factor(double t) const {
    if (time_t.empty()) return 1.0;
    double tm = std::fmod(t, time_period);
    if (tm < 0.0) tm += time_period;
    if (tm <= time_t.front()) return time_g.front();
    if (tm >= time_t.back()) return time_g.back();
    return lerp_segment(time_t, time_g, segment(time_t, tm), tm);
}

OffsetPhaseModel OffsetPhaseModel::linear(double kappa) {
    OffsetPhaseModel m;
    m.kind = Kind::linear;
    m.kappa = kappa;
    return m;
}

OffsetPhaseModel OffsetPhaseModel::tabulated(std::vector<double> p, std::vector<double> phi) {
    OffsetPhaseModel m;
    m.kind = Kind::tabulated;
    m.table_p = std::move(p);
    m.table_phi = std::move(phi);
    return m;
}

void OffsetPhaseModel::validate() const {
    if (kind == Kind::linear) {
        if (!std::isfinite(kappa)) throw Error(ErrorKind::ConfigError, "offset_phase.kappa must be finite");
    } else {
        check_table(table_p, table_phi, "offset_phase");
    }
}

double OffsetPhaseModel::eval(double p) const {
    if (kind == Kind::linear) return kappa * p;
    return lerp_segment(table_p, table_phi, segment(table_p, p), p);
}

double OffsetPhaseModel::gradient(double p) const {
    if (kind == Kind::linear) return kappa;
    const std::size_t i = segment(table_p, p);
    return (table_phi[i + 1] - table_phi[i]) / (table_p[i + 1] - table_p[i]);
}

}  // namespace hase
