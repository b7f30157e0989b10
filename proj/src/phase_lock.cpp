#include "nsdi/phase_lock.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "nsdi/errors.hpp"
#include "nsdi/fft.hpp"

namespace nsdi {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

double wrap_phase(double phi) {
  double w = std::fmod(phi + kPi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w - kPi;
}

double circular_mean(const std::vector<double>& phases) {
  double s = 0.0;
  double c = 0.0;
  for (double p : phases) {
    s += std::sin(p);
    c += std::cos(p);
  }
  return wrap_phase(std::atan2(s, c));
}

std::vector<double> AnalyticTrace::envelope() const {
  std::vector<double> out(z.size());
  std::transform(z.begin(), z.end(), out.begin(), [](const complex& v) { return std::abs(v); });
  return out;
}

std::vector<double> AnalyticTrace::phase() const {
  std::vector<double> out(z.size());
  std::transform(z.begin(), z.end(), out.begin(), [](const complex& v) { return std::atan2(v.imag(), v.real()); });
  return out;
}

AnalyticTrace analytic_signal(const RealTrace& trace) {
  const std::size_t n = trace.samples.size();
  if (n < 16) throw Error(ErrorKind::domain, "analytic signal needs at least 16 samples, got " + std::to_string(n));
  for (double s : trace.samples)
    if (!std::isfinite(s)) throw Error(ErrorKind::domain, "trace contains non-finite samples");
  const double mean = std::accumulate(trace.samples.begin(), trace.samples.end(), 0.0) / static_cast<double>(n);
  ComplexArray buf(n);
  bool any = false;
  for (std::size_t m = 0; m < n; ++m) {
    buf[m] = trace.samples[m] - mean;
    any = any || buf[m] != 0.0;
  }
  if (!any) throw Error(ErrorKind::degenerate_trace, "trace is constant");

  FftPlan fft(n);
  fft.forward(buf);
  // Keep DC (and Nyquist for even n) once, double positive frequencies, drop negative.
  const std::size_t half = n / 2;
  for (std::size_t f = 1; f < n; ++f) {
    if (f < (n + 1) / 2)
      buf[f] *= 2.0;
    else if (!(n % 2 == 0 && f == half))
      buf[f] = 0.0;
  }
  fft.inverse(buf);
  AnalyticTrace out{std::vector<complex>(buf.begin(), buf.end()), trace.interval, trace.start};
  return out;
}

PhaseOnlyTrace normalize_by_envelope(const AnalyticTrace& z, const EnvelopeOptions& options) {
  const std::size_t n = z.z.size();
  PhaseOnlyTrace out{std::vector<complex>(n, complex{0.0, 0.0}), std::vector<char>(n, 0), z.interval, z.start, false, 0};
  double max_env = 0.0;
  for (const auto& v : z.z) max_env = std::max(max_env, std::abs(v));
  const double floor = options.floor_fraction * max_env;
  const auto guard = static_cast<std::size_t>(std::floor(options.edge_guard * static_cast<double>(n)));
  std::size_t interior = 0;
  for (std::size_t m = 0; m < n; ++m) {
    const bool in_guard = m < guard || m + guard >= n;
    const double env = std::abs(z.z[m]);
    if (!in_guard) ++interior;
    if (env < floor || env == 0.0) {
      if (!in_guard) ++out.invalid_interior;
      continue;
    }
    if (in_guard) continue;
    out.unit[m] = z.z[m] / env;
    out.valid[m] = 1;
  }
  out.rejected = interior == 0 ||
                 static_cast<double>(out.invalid_interior) > options.max_invalid * static_cast<double>(interior);
  return out;
}

std::vector<double> pair_phase_difference(const PhaseOnlyTrace& a, const PhaseOnlyTrace& b, double t_a,
                                          double t_b) {
  if (a.unit.size() != b.unit.size() || std::abs(a.interval - b.interval) > 1e-12 * a.interval ||
      std::abs(a.start - b.start) > 1e-9 * std::max(1.0, a.interval))
    throw Error(ErrorKind::domain, "phase traces have different sampling");
  std::vector<double> out;
  for (std::size_t m = 0; m < a.unit.size(); ++m) {
    const double t = a.start + a.interval * static_cast<double>(m);
    if (t < t_a - 1e-9 || t > t_b + 1e-9) continue;
    if (!a.valid[m] || !b.valid[m]) continue;
    out.push_back(wrap_phase(std::arg(a.unit[m] * std::conj(b.unit[m]))));
  }
  if (out.empty()) throw Error(ErrorKind::domain, "no valid overlap between the two phase traces");
  return out;
}

PhaseMismatchStats smoothed_density(const std::vector<std::vector<double>>& pairs, const HistogramOptions& options) {
  if (options.bins < 8) throw Error(ErrorKind::domain, "need at least 8 histogram bins");
  if (!(options.sigma > 0.0)) throw Error(ErrorKind::domain, "kernel width must be positive");
  PhaseMismatchStats stats;
  std::vector<double> values;
  for (const auto& series : pairs) {
    if (series.empty()) continue;
    stats.entries += series.size();
    ++stats.pairs;
    if (options.pooling == Pooling::time_average)
      values.push_back(circular_mean(series));
    else
      values.insert(values.end(), series.begin(), series.end());
  }
  if (values.size() < options.min_entries)
    throw Error(ErrorKind::insufficient_statistics,
                "phase histogram has " + std::to_string(values.size()) + " entries, need " +
                    std::to_string(options.min_entries));

  const std::size_t bins = options.bins;
  const double width = kTwoPi / static_cast<double>(bins);
  stats.centers.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) stats.centers[b] = -kPi + (static_cast<double>(b) + 0.5) * width;

  // Kernel density on the bin centres with a wrapped Gaussian; each bin sums
  // the samples in input order, so the result does not depend on threading.
  const double inv_two_var = 1.0 / (2.0 * options.sigma * options.sigma);
  const int images = 1 + static_cast<int>(std::ceil(6.0 * options.sigma / kTwoPi));
  stats.density.assign(bins, 0.0);
  const auto nbins = static_cast<std::ptrdiff_t>(bins);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nbins; ++b) {
    const double c = stats.centers[b];
    double acc = 0.0;
    for (double v : values) {
      const double d = wrap_phase(c - v);
      for (int w = -images; w <= images; ++w) {
        const double dd = d + kTwoPi * w;
        acc += std::exp(-dd * dd * inv_two_var);
      }
    }
    stats.density[b] = acc;
  }
  const double integral = std::accumulate(stats.density.begin(), stats.density.end(), 0.0) * width;
  for (double& d : stats.density) d /= integral;
  return stats;
}

PhaseMismatchStats phase_histogram(const std::vector<std::vector<double>>& pairs, const HistogramOptions& options) {
  PhaseMismatchStats stats = smoothed_density(pairs, options);
  stats.fwhm = fwhm(stats);
  return stats;
}

double fwhm(const std::vector<double>& centers, const std::vector<double>& density) {
  const std::size_t n = density.size();
  if (n < 3 || centers.size() != n) throw Error(ErrorKind::domain, "density and bin centres must match");
  const double width = kTwoPi / static_cast<double>(n);
  const double peak = *std::max_element(density.begin(), density.end());
  if (!(peak > 0.0)) throw Error(ErrorKind::undefined_fwhm, "density is identically zero");

  // Mode: global maximum, ties broken toward the bin nearest 0.
  std::size_t mode = 0;
  for (std::size_t b = 0; b < n; ++b) {
    if (density[b] < peak * (1.0 - 1e-12)) continue;
    if (density[mode] < peak * (1.0 - 1e-12) || std::abs(centers[b]) < std::abs(centers[mode])) mode = b;
  }
  const double half = 0.5 * peak;
  auto at = [&](std::ptrdiff_t offset) {
    const auto idx = ((static_cast<std::ptrdiff_t>(mode) + offset) % static_cast<std::ptrdiff_t>(n) +
                      static_cast<std::ptrdiff_t>(n)) %
                     static_cast<std::ptrdiff_t>(n);
    return density[static_cast<std::size_t>(idx)];
  };
  const auto limit = static_cast<std::ptrdiff_t>(n);
  // Walk outward until the density drops below half max; interpolate the crossing.
  auto crossing = [&](int dir) -> double {
    for (std::ptrdiff_t s = 1; s < limit; ++s) {
      const double inner = at(dir * (s - 1));
      const double outer = at(dir * s);
      if (outer < half) return (static_cast<double>(s - 1) + (inner - half) / (inner - outer)) * width;
    }
    return kTwoPi;
  };
  const double right = crossing(+1);
  const double left = crossing(-1);
  const double full = right + left;
  if (full > 0.95 * kTwoPi) throw Error(ErrorKind::undefined_fwhm, "half-maximum region covers the whole circle");
  return full;
}

}  // namespace nsdi
