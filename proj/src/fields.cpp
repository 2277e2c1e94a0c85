#include "hase/fields.hpp"

#include <cmath>
#include <string>

#include "hase/errors.hpp"
#include "hase/units.hpp"

namespace hase {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::DegenerateField: return "DegenerateField";
        case ErrorKind::DegenerateGeometry: return "DegenerateGeometry";
        case ErrorKind::NoRoot: return "NoRoot";
        case ErrorKind::MultipleRoots: return "MultipleRoots";
        case ErrorKind::EmptyRing: return "EmptyRing";
        case ErrorKind::NoPeaks: return "NoPeaks";
        case ErrorKind::DegenerateAngular: return "DegenerateAngular";
        case ErrorKind::OutOfDomain: return "OutOfDomain";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::AxisError: return "AxisError";
        case ErrorKind::DegenerateInput: return "DegenerateInput";
        case ErrorKind::StepFailure: return "StepFailure";
        case ErrorKind::BoundElectron: return "BoundElectron";
        case ErrorKind::InsufficientOverlap: return "InsufficientOverlap";
        case ErrorKind::NumericalFailure: return "NumericalFailure";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

void FieldConfig::validate() const {
    if (!(e390 >= 0.0)) throw Error(ErrorKind::ConfigError, "field.e390 must be >= 0");
    if (!(e780 >= 0.0)) throw Error(ErrorKind::ConfigError, "field.e780 must be >= 0");
    if (!(omega > 0.0)) throw Error(ErrorKind::ConfigError, "field.omega must be > 0");
    if (!std::isfinite(relative_phase)) throw Error(ErrorKind::ConfigError, "field.relative_phase must be finite");
    if (envelope.kind == Envelope::Kind::sine_square) {
        if (!(envelope.total_cycles > 0.0) || !(envelope.flat_cycles >= 0.0) ||
            envelope.flat_cycles > envelope.total_cycles)
            throw Error(ErrorKind::ConfigError,
                        "field.envelope needs total_cycles > 0 and 0 <= flat_cycles <= total_cycles");
    } else if (!(envelope.total_cycles > 0.0)) {
        throw Error(ErrorKind::ConfigError, "field.envelope.cycles must be > 0");
    }
}

double FieldConfig::period_780() const { return 2.0 * units::pi / omega; }

double FieldConfig::pulse_end() const { return envelope.total_cycles * period_780(); }

namespace {

// Edge duration of the sine-square envelope in a.u.
double edge_duration(const FieldConfig& cfg) {
    return 0.5 * (cfg.envelope.total_cycles - cfg.envelope.flat_cycles) * cfg.period_780();
}

}  // namespace

double FieldConfig::envelope_value(double t) const {
    if (envelope.kind == Envelope::Kind::flat) return 1.0;
    const double end = pulse_end();
    if (t <= 0.0 || t >= end) return 0.0;
    const double edge = edge_duration(*this);
    if (edge <= 0.0) return 1.0;
    const double flat_end = end - edge;
    if (t < edge) {
        const double s = std::sin(0.5 * units::pi * t / edge);
        return s * s;
    }
    if (t <= flat_end) return 1.0;
    const double c = std::cos(0.5 * units::pi * (t - flat_end) / edge);
    return c * c;
}

double FieldConfig::envelope_derivative(double t) const {
    if (envelope.kind == Envelope::Kind::flat) return 0.0;
    const double end = pulse_end();
    if (t <= 0.0 || t >= end) return 0.0;
    const double edge = edge_duration(*this);
    if (edge <= 0.0) return 0.0;
    const double flat_end = end - edge;
    const double k = 0.5 * units::pi / edge;
    if (t < edge) return k * std::sin(2.0 * k * t);
    if (t <= flat_end) return 0.0;
    return -k * std::sin(2.0 * k * (t - flat_end));
}

FieldSample eval_field(const FieldConfig& cfg, double t) {
    const double w = cfg.omega;
    const double a1 = cfg.e780 / w;
    const double a2 = cfg.e390 / (2.0 * w);
    const double s1 = std::sin(w * t + cfg.relative_phase);
    const double c1 = std::cos(w * t + cfg.relative_phase);
    const double s2 = std::sin(2.0 * w * t);
    const double c2 = std::cos(2.0 * w * t);

    // Carrier g(t) with A = -f(t) g(t); E = f'(t) g(t) + f(t) g'(t).
    const double gy = a1 * s1 + a2 * s2;
    const double gz = a1 * c1 + a2 * c2;
    const double dgy = cfg.e780 * c1 + cfg.e390 * c2;
    const double dgz = -cfg.e780 * s1 - cfg.e390 * s2;

    const double f = cfg.envelope_value(t);
    const double df = cfg.envelope_derivative(t);

    FieldSample out;
    out.t = t;
    out.A = Vec3{0.0, -f * gy, -f * gz};
    out.E = Vec3{0.0, df * gy + f * dgy, df * gz + f * dgz};
    return out;
}

Vec3 eval_vector_potential(const FieldConfig& cfg, double t) { return eval_field(cfg, t).A; }

Vec3 eval_electric_field(const FieldConfig& cfg, double t) { return eval_field(cfg, t).E; }

FieldEvaluator::FieldEvaluator(const FieldConfig& cfg)
    : cfg_(cfg),
      a1_(cfg.e780 / cfg.omega),
      a2_(cfg.e390 / (2.0 * cfg.omega)),
      cos_phase_(std::cos(cfg.relative_phase)),
      sin_phase_(std::sin(cfg.relative_phase)),
      flat_(cfg.envelope.kind == Envelope::Kind::flat),
      end_(cfg.pulse_end()),
      edge_(flat_ ? 0.0 : edge_duration(cfg)),
      flat_end_(end_ - edge_),
      k_(edge_ > 0.0 ? 0.5 * units::pi / edge_ : 0.0) {}

void FieldEvaluator::envelope(double t, double& f, double& df) const {
    f = 1.0;
    df = 0.0;
    if (flat_) return;
    if (t <= 0.0 || t >= end_) {
        f = 0.0;
        return;
    }
    if (edge_ <= 0.0 || (t >= edge_ && t <= flat_end_)) return;
    const double u = t < edge_ ? k_ * t : k_ * (t - flat_end_) + 0.5 * units::pi;
    const double s = std::sin(u), c = std::cos(u);
    f = s * s;
    df = 2.0 * k_ * s * c;
}

FieldSample FieldEvaluator::operator()(double t) const {
    const double s = std::sin(cfg_.omega * t), c = std::cos(cfg_.omega * t);
    const double s1 = s * cos_phase_ + c * sin_phase_;
    const double c1 = c * cos_phase_ - s * sin_phase_;
    const double s2 = 2.0 * s * c;
    const double c2 = c * c - s * s;
    const double gy = a1_ * s1 + a2_ * s2;
    const double gz = a1_ * c1 + a2_ * c2;
    const double dgy = cfg_.e780 * c1 + cfg_.e390 * c2;
    const double dgz = -cfg_.e780 * s1 - cfg_.e390 * s2;
    double f, df;
    envelope(t, f, df);
    FieldSample out;
    out.t = t;
    out.A = Vec3{0.0, -f * gy, -f * gz};
    out.E = Vec3{0.0, df * gy + f * dgy, df * gz + f * dgz};
    return out;
}

Vec3 FieldEvaluator::electric(double t) const { return (*this)(t).E; }

double keldysh_gamma(const FieldConfig& cfg, double ip) {
    if (!(cfg.e390 > 0.0)) throw Error(ErrorKind::DegenerateField, "keldysh_gamma needs E390 > 0");
    if (ip < 0.0) throw Error(ErrorKind::DomainError, "ionization potential must be >= 0");
    const double omega_eff = 2.0 * cfg.omega;
    return omega_eff * std::sqrt(2.0 * ip) / cfg.e390;
}

}  // namespace hase
