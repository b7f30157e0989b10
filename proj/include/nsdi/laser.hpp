#pragma once

namespace nsdi {

enum class PulseShape { trapezoid, gaussian };

/// Atomic unit of intensity, W/cm^2.
inline constexpr double kAtomicIntensity = 3.50945e16;
/// omega[a.u.] = kPhotonEnergyNm / lambda[nm].
inline constexpr double kPhotonEnergyNm = 45.5633526;

/// Laser waveform in atomic units.
///
/// trapezoid: E0 * f(t) * cos(w0 t) on [0, n_cycles Tc], with linear turn-on and
///   turn-off of ramp_cycles each and a flat top in between.
/// gaussian:  E0 * exp(-t^2/T^2) * cos(w0 t + chirp t^2), centred on t = 0 and
///   sampled on [-window_T T, window_T T].
struct PulseSpec {
  PulseShape shape = PulseShape::trapezoid;
  double wavelength_nm = 248.0;
  double peak_intensity = 4.5e14;  // W/cm^2
  double n_cycles = 6.0;
  double ramp_cycles = 2.0;
  double gaussian_T = 0.0;   // a.u.; <= 0 selects the default 3 Tc / sqrt(2 ln 2)
  double chirp = 0.0;        // gamma, a.u.^-2
  double window_T = 6.0;     // gaussian half-window in units of T
  double amplitude_scale = 1.0;  // set by normalize_energy

  double omega() const;
  double cycle_period() const;
  /// Peak field including amplitude_scale.
  double peak_field() const;
  /// Gaussian T actually used.
  double gaussian_width() const;
  double start_time() const;
  double end_time() const;
  double duration() const { return end_time() - start_time(); }
  /// Envelope (without carrier), in a.u. of field.
  double envelope(double t) const;
};

double intensity_to_field(double intensity_w_cm2);

double field_at(const PulseSpec& pulse, double t);

/// Largest chirp the transform-limited spectrum supports: 1 / (2 T^2).
double chirp_limit(double T);

/// Default gaussian T: intensity FWHM equal to three optical cycles.
double default_gaussian_T(double wavelength_nm);

/// Integral of E(t)^2 over the pulse window (gaussian: +-6T), composite Simpson.
double fluence(const PulseSpec& pulse);

/// Rescales pulse so its fluence equals reference's. Both must be gaussian with
/// the same T and carrier; reference must be unchirped.
PulseSpec normalize_energy(const PulseSpec& pulse, const PulseSpec& reference);

}  // namespace nsdi
