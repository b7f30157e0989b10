#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace nsdi {

/// Uniformly sampled real waveform, e.g. one electron coordinate x_i^k(t).
struct RealTrace {
  std::vector<double> samples;
  double interval = 1.0;
  double start = 0.0;
};

/// Discrete analytic signal of a de-meaned trace.
struct AnalyticTrace {
  std::vector<std::complex<double>> z;
  double interval = 1.0;
  double start = 0.0;

  std::vector<double> envelope() const;
  /// Wrapped phase atan2(Im z, Re z).
  std::vector<double> phase() const;
};

/// Unit-modulus samples z/|z| with a validity mask. Samples inside the edge
/// guard or below the envelope floor are invalid.
struct PhaseOnlyTrace {
  std::vector<std::complex<double>> unit;
  std::vector<char> valid;
  double interval = 1.0;
  double start = 0.0;
  bool rejected = false;
  std::size_t invalid_interior = 0;
};

struct EnvelopeOptions {
  double floor_fraction = 1e-3;  // relative to the trace's max envelope
  double edge_guard = 0.05;      // fraction of samples dropped at each end
  double max_invalid = 0.10;     // rejection threshold on interior samples
};

/// Removes the mean, zeroes negative frequencies (doubling positive ones, DC
/// and Nyquist kept), transforms back. Throws ErrorKind::degenerate_trace for an
/// all-zero (after de-meaning) trace and ErrorKind::domain for < 16 samples.
AnalyticTrace analytic_signal(const RealTrace& trace);

PhaseOnlyTrace normalize_by_envelope(const AnalyticTrace& z, const EnvelopeOptions& options = {});

/// arg(z1 conj z2) wrapped to [-pi, pi) for samples in [t_a, t_b] valid in
/// both traces. Throws ErrorKind::domain on mismatched sampling or an empty
/// valid overlap.
std::vector<double> pair_phase_difference(const PhaseOnlyTrace& a, const PhaseOnlyTrace& b, double t_a,
                                          double t_b);

enum class Pooling {
  time_average,  // one circular-mean value per pair
  raw,           // every (pair, sample) value
};

struct HistogramOptions {
  std::size_t bins = 128;
  double sigma = 0.15;  // rad, wrapped Gaussian kernel
  Pooling pooling = Pooling::time_average;
  std::size_t min_entries = 100;  // histogram values: pairs, or samples when raw
};

struct PhaseMismatchStats {
  std::vector<double> centers;  // rad, over [-pi, pi)
  std::vector<double> density;  // unit integral
  double fwhm = 0.0;
  std::size_t pairs = 0;
  std::size_t entries = 0;  // (pair, sample) values seen
};

/// Smoothed circular histogram of the relative phases of all pairs; each
/// element of `pairs` is one pair's phase-difference series. FWHM is filled in.
PhaseMismatchStats phase_histogram(const std::vector<std::vector<double>>& pairs, const HistogramOptions& options = {});

/// Density only, without the FWHM; used where the width may be undefined.
PhaseMismatchStats smoothed_density(const std::vector<std::vector<double>>& pairs, const HistogramOptions& options);

/// Full width at half maximum around the global mode (ties go to the mode
/// nearest 0), measured circularly with linear interpolation between bins.
/// Throws ErrorKind::undefined_fwhm if the half-max region covers > 95% of
/// the circle.
double fwhm(const std::vector<double>& centers, const std::vector<double>& density);
inline double fwhm(const PhaseMismatchStats& stats) { return fwhm(stats.centers, stats.density); }

double wrap_phase(double phi);
/// Circular mean arg(sum exp(i phi)).
double circular_mean(const std::vector<double>& phases);

}  // namespace nsdi
