#include "nsdi/laser.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nsdi/errors.hpp"

namespace nsdi {

double intensity_to_field(double intensity_w_cm2) {
  if (!(intensity_w_cm2 > 0.0)) throw Error(ErrorKind::domain, "intensity must be positive");
  return std::sqrt(intensity_w_cm2 / kAtomicIntensity);
}

double chirp_limit(double T) {
  if (!(T > 0.0)) throw Error(ErrorKind::domain, "pulse width must be positive");
  return 1.0 / (2.0 * T * T);
}

double default_gaussian_T(double wavelength_nm) {
  const double period = 2.0 * std::numbers::pi * wavelength_nm / kPhotonEnergyNm;
  return 3.0 * period / std::sqrt(2.0 * std::numbers::ln2);
}

double PulseSpec::omega() const { return kPhotonEnergyNm / wavelength_nm; }

double PulseSpec::cycle_period() const { return 2.0 * std::numbers::pi / omega(); }

double PulseSpec::peak_field() const { return amplitude_scale * intensity_to_field(peak_intensity); }

double PulseSpec::gaussian_width() const { return gaussian_T > 0.0 ? gaussian_T : default_gaussian_T(wavelength_nm); }

double PulseSpec::start_time() const {
  return shape == PulseShape::trapezoid ? 0.0 : -window_T * gaussian_width();
}

double PulseSpec::end_time() const {
  return shape == PulseShape::trapezoid ? n_cycles * cycle_period() : window_T * gaussian_width();
}

double PulseSpec::envelope(double t) const {
  const double e0 = peak_field();
  if (shape == PulseShape::gaussian) {
    const double T = gaussian_width();
    return e0 * std::exp(-(t * t) / (T * T));
  }
  const double tc = cycle_period();
  const double ramp = ramp_cycles * tc;
  const double total = n_cycles * tc;
  if (t <= 0.0 || t >= total) return 0.0;
  if (t < ramp) return e0 * t / ramp;
  if (t > total - ramp) return e0 * (total - t) / ramp;
  return e0;
}

double field_at(const PulseSpec& pulse, double t) {
  const double w = pulse.omega();
  if (pulse.shape == PulseShape::gaussian) return pulse.envelope(t) * std::cos(w * t + pulse.chirp * t * t);
  return pulse.envelope(t) * std::cos(w * t);
}

double fluence(const PulseSpec& pulse) {
  double a = pulse.start_time();
  double b = pulse.end_time();
  if (pulse.shape == PulseShape::gaussian) {
    a = -6.0 * pulse.gaussian_width();
    b = -a;
  }
  // ~200 samples per optical cycle keeps Simpson well below 1e-12 relative.
  const double h_target = pulse.cycle_period() / 200.0;
  std::size_t intervals = static_cast<std::size_t>(std::ceil((b - a) / h_target));
  intervals += intervals % 2;
  const double h = (b - a) / static_cast<double>(intervals);
  double sum = 0.0;
  for (std::size_t m = 0; m <= intervals; ++m) {
    const double e = field_at(pulse, a + h * static_cast<double>(m));
    const double weight = (m == 0 || m == intervals) ? 1.0 : (m % 2 == 1 ? 4.0 : 2.0);
    sum += weight * e * e;
  }
  return sum * h / 3.0;
}

PulseSpec normalize_energy(const PulseSpec& pulse, const PulseSpec& reference) {
  if (pulse.shape != PulseShape::gaussian || reference.shape != PulseShape::gaussian)
    throw Error(ErrorKind::domain, "energy normalization applies to gaussian pulses");
  if (pulse.gaussian_width() != reference.gaussian_width() || pulse.omega() != reference.omega())
    throw Error(ErrorKind::domain, "energy normalization needs identical T and carrier frequency");
  if (reference.chirp != 0.0) throw Error(ErrorKind::domain, "reference pulse must be transform limited");
  const double target = fluence(reference);
  if (!(target > 0.0)) throw Error(ErrorKind::domain, "reference fluence is zero");
  PulseSpec out = pulse;
  out.amplitude_scale = 1.0;
  const double current = fluence(out);
  out.amplitude_scale = std::sqrt(target / current);
  return out;
}

}  // namespace nsdi
