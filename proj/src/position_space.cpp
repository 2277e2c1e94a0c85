#include "hase/position_space.hpp"

#include <cmath>
#include <mutex>
#include <ostream>

#include <fftw3.h>

#include "csv_util.hpp"
#include "hase/errors.hpp"
#include "hase/units.hpp"

namespace hase {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

double WavePacket1D::norm() const {
    double s = 0.0;
    for (const auto& v : values) s += std::norm(v);
    return s * step;
}

WavePacket1D sample_momentum_packet(const std::function<std::complex<double>(double)>& f, double p_min,
                                    double p_max, std::size_t n) {
    if (n < 2 || !(p_max > p_min)) throw Error(ErrorKind::AxisError, "momentum axis needs n >= 2 and p_max > p_min");
    WavePacket1D w;
    w.kind = AxisKind::momentum;
    w.origin = p_min;
    w.step = (p_max - p_min) / static_cast<double>(n);
    w.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) w.values[k] = f(w.axis(k));
    return w;
}

WavePacket1D gaussian_packet(double sigma, double center, std::size_t n, double half_width_sigmas) {
    if (!(sigma > 0.0)) throw Error(ErrorKind::DomainError, "sigma must be > 0");
    const double half = half_width_sigmas * sigma;
    return sample_momentum_packet(
        [&](double p) {
            const double d = (p - center) / sigma;
            return std::complex<double>(std::exp(-0.5 * d * d), 0.0);
        },
        center - half, center + half, n);
}

WavePacket1D apply_linear_phase(const WavePacket1D& w, double kappa) {
    if (w.kind != AxisKind::momentum) throw Error(ErrorKind::AxisError, "linear phase needs a momentum-space packet");
    WavePacket1D out = w;
    for (std::size_t k = 0; k < out.size(); ++k) out.values[k] *= std::polar(1.0, kappa * w.axis(k));
    return out;
}

WavePacket1D to_position(const WavePacket1D& w) {
    if (w.kind != AxisKind::momentum) throw Error(ErrorKind::AxisError, "to_position needs a momentum-space packet");
    const std::size_t n = w.size();
    if (n < 1024 || !is_power_of_two(n))
        throw Error(ErrorKind::AxisError, "packet length must be a power of two >= 1024");
    if (!(w.step > 0.0)) throw Error(ErrorKind::AxisError, "axis step must be > 0");

    std::vector<std::complex<double>> in(n);
    std::vector<std::complex<double>> out(n);
    for (std::size_t j = 0; j < n; ++j) in[j] = (j % 2 == 0) ? w.values[j] : -w.values[j];

    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()),
                                reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    if (!plan) throw Error(ErrorKind::NumericalFailure, "FFTW plan creation failed");
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }

    WavePacket1D r;
    r.kind = AxisKind::position;
    r.step = 2.0 * units::pi / (static_cast<double>(n) * w.step);
    r.origin = -0.5 * static_cast<double>(n) * r.step;
    r.values.resize(n);
    const double scale = w.step / std::sqrt(2.0 * units::pi);
    for (std::size_t k = 0; k < n; ++k) r.values[k] = scale * std::polar(1.0, -w.origin * r.axis(k)) * out[k];
    return r;
}

double centroid(const WavePacket1D& w) {
    double s = 0.0;
    double sx = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double i = std::norm(w.values[k]);
        s += i;
        sx += i * w.axis(k);
    }
    if (!(s > 0.0)) throw Error(ErrorKind::DegenerateInput, "packet has zero norm");
    return sx / s;
}

double centroid_shift(const WavePacket1D& ref, const WavePacket1D& shifted) {
    if (ref.kind != shifted.kind || ref.size() != shifted.size() || ref.origin != shifted.origin ||
        ref.step != shifted.step)
        throw Error(ErrorKind::AxisError, "centroid_shift needs packets on the same axis");
    return centroid(shifted) - centroid(ref);
}

double delay_from_shift(double delta_x, double p_f) {
    if (!(p_f > 0.0)) throw Error(ErrorKind::DomainError, "p_f must be > 0");
    return delta_x / p_f;
}

void write_packet_csv(std::ostream& os, const WavePacket1D& w) {
    const bool mom = w.kind == AxisKind::momentum;
    os << "# kind: wave_packet\n";
    os << "# axis: " << (mom ? "momentum" : "position") << '\n';
    os << (mom ? "p" : "x") << ",re,im,abs2\n";
    std::string line;
    for (std::size_t k = 0; k < w.size(); ++k) {
        line.clear();
        detail::append_number(line, w.axis(k));
        line += ',';
        detail::append_number(line, w.values[k].real());
        line += ',';
        detail::append_number(line, w.values[k].imag());
        line += ',';
        detail::append_number(line, std::norm(w.values[k]));
        line += '\n';
        os << line;
    }
}

void write_packet_csv(const std::string& path, const WavePacket1D& w) {
    auto os = detail::open_output(path);
    write_packet_csv(os, w);
    if (!os) throw Error(ErrorKind::IoError, "write failed for '" + path + "'");
}

}  // namespace hase
