#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace hase {

enum class AxisKind { momentum, position };

/// Complex amplitudes on a uniform 1D axis: axis(k) = origin + k * step.
struct WavePacket1D {
    AxisKind kind = AxisKind::momentum;
    double origin = 0.0;
    double step = 1.0;
    std::vector<std::complex<double>> values;

    double axis(std::size_t k) const { return origin + static_cast<double>(k) * step; }
    std::size_t size() const { return values.size(); }
    double norm() const;  // sum |psi|^2 * step
};

/// Samples f on n points spanning [p_min, p_max).
WavePacket1D sample_momentum_packet(const std::function<std::complex<double>(double)>& f, double p_min,
                                    double p_max, std::size_t n);

/// exp(-(p - center)^2 / (2 sigma^2)) on center +- half_width_sigmas * sigma.
WavePacket1D gaussian_packet(double sigma, double center = 0.0, std::size_t n = 1024,
                             double half_width_sigmas = 8.0);

/// Multiplies by exp(i kappa p). Throws AxisError for a position-space packet.
WavePacket1D apply_linear_phase(const WavePacket1D& w, double kappa);

/// psi(x) = (2 pi)^-1/2 * integral psi(p) exp(-i p x) dp, evaluated with an
/// FFT on x_k = (k - n/2) * 2 pi / (n dp). Discrete Parseval holds exactly,
/// and exp(i kappa p) moves the packet by +kappa. The size must be a power of
/// two >= 1024 (AxisError otherwise).
WavePacket1D to_position(const WavePacket1D& w);

/// Intensity-weighted mean of the axis. Throws DegenerateInput for zero norm.
double centroid(const WavePacket1D& w);

/// centroid(shifted) - centroid(ref); both must share the axis.
double centroid_shift(const WavePacket1D& ref, const WavePacket1D& shifted);

/// Delta t = Delta x / p_f in atomic units. Throws DomainError for p_f <= 0.
double delay_from_shift(double delta_x, double p_f);

void write_packet_csv(std::ostream& os, const WavePacket1D& w);
void write_packet_csv(const std::string& path, const WavePacket1D& w);

}  // namespace hase
