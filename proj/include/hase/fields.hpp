#pragma once

#include "hase/vec3.hpp"

namespace hase {

/// Pulse envelope applied to the vector potential.
///
/// `flat` is constant one for all times; `cycles` only sets the nominal pulse
/// end used by trajectory propagation. `sine_square` rises as sin^2 over
/// (total - flat)/2 cycles, stays at one for `flat` cycles and falls as cos^2,
/// vanishing outside [0, total * T780].
struct Envelope {
    enum class Kind { flat, sine_square };

    Kind kind = Kind::flat;
    double total_cycles = 2.0;
    double flat_cycles = 2.0;

    static Envelope flat(double cycles) { return {Kind::flat, cycles, cycles}; }
    static Envelope sine_square_edges(double total, double flat) { return {Kind::sine_square, total, flat}; }

    friend bool operator==(const Envelope&, const Envelope&) = default;
};

/// Co-rotating two-color circular field: a strong component at 2*omega and
/// a weak one at omega, both polarized in the yz-plane.
struct FieldConfig {
    double e390 = 0.04;
    double e780 = 0.004;
    double omega = 0.0584;
    double relative_phase = 0.0;
    Envelope envelope = Envelope::flat(2.0);

    /// Throws ConfigError if any amplitude is negative or omega is not positive.
    void validate() const;

    double period_780() const;
    double period_390() const { return 0.5 * period_780(); }

    /// End of the pulse support in a.u. (envelope total duration).
    double pulse_end() const;

    double envelope_value(double t) const;
    double envelope_derivative(double t) const;

    /// Time-averaged streaking momentum of the 2*omega component, E390/(2 omega).
    double streak_momentum() const { return e390 / (2.0 * omega); }

    friend bool operator==(const FieldConfig&, const FieldConfig&) = default;
};

/// Field values sampled at one time.
struct FieldSample {
    double t = 0.0;
    Vec3 E;
    Vec3 A;
};

Vec3 eval_vector_potential(const FieldConfig& cfg, double t);
Vec3 eval_electric_field(const FieldConfig& cfg, double t);
FieldSample eval_field(const FieldConfig& cfg, double t);

/// Same field as eval_field with constants hoisted: one sincos of omega*t per
/// call, the harmonics by angle addition. For inner loops.
class FieldEvaluator {
public:
    explicit FieldEvaluator(const FieldConfig& cfg);

    FieldSample operator()(double t) const;
    Vec3 electric(double t) const;

private:
    void envelope(double t, double& f, double& df) const;

    FieldConfig cfg_;
    double a1_, a2_, cos_phase_, sin_phase_;
    bool flat_;
    double end_, edge_, flat_end_, k_;
};

/// Keldysh parameter gamma = omega_eff * sqrt(2 Ip) / E390 with omega_eff = 2 omega.
double keldysh_gamma(const FieldConfig& cfg, double ip);

}  // namespace hase
