#include "nsdi/bohmian.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "nsdi/errors.hpp"

namespace nsdi {

TrajectoryEnsemble::TrajectoryEnsemble(std::vector<Walker> initial, std::uint64_t seed)
    : current_(std::move(initial)), alive_(current_.size(), 1), seed_(seed) {}

std::size_t TrajectoryEnsemble::dead_count() const noexcept {
  return static_cast<std::size_t>(std::count(alive_.begin(), alive_.end(), 0));
}

void TrajectoryEnsemble::record(double t) {
  times_.push_back(t);
  history_.insert(history_.end(), current_.begin(), current_.end());
}

std::size_t TrajectoryEnsemble::sample_index(double t) const {
  const double tol = 1e-9 * std::max(1.0, std::abs(t));
  for (std::size_t m = times_.size(); m-- > 0;)
    if (std::abs(times_[m] - t) <= tol) return m;
  throw Error(ErrorKind::domain, "no trajectory sample at t=" + std::to_string(t));
}

std::vector<double> TrajectoryEnsemble::times_in(double t_a, double t_b) const {
  std::vector<double> out;
  for (double t : times_)
    if (t >= t_a - 1e-9 && t <= t_b + 1e-9) out.push_back(t);
  return out;
}

std::vector<double> TrajectoryEnsemble::trace(std::size_t walker, int electron, double t_a, double t_b) const {
  std::vector<double> out;
  for (std::size_t m = 0; m < times_.size(); ++m) {
    if (times_[m] < t_a - 1e-9 || times_[m] > t_b + 1e-9) continue;
    const Walker& w = sample(m, walker);
    out.push_back(electron == 1 ? w.x1 : w.x2);
  }
  return out;
}

namespace {

// 53-bit uniform double in [0, 1); independent of the standard library's
// distribution implementations so runs are reproducible across toolchains.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

std::vector<Walker> sample_positions(const WaveFunction2D& psi, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw Error(ErrorKind::domain, "walker count must be positive");
  const auto& values = psi.values();
  std::vector<double> cdf(values.size());
  double acc = 0.0;
  for (std::size_t p = 0; p < values.size(); ++p) {
    acc += std::norm(values[p]);
    cdf[p] = acc;
  }
  if (!(acc > 0.0)) throw Error(ErrorKind::invalid_state, "cannot sample from a zero wavefunction");

  const Axis& axis = psi.grid().axis();
  const std::size_t n = axis.size();
  const double dx = axis.spacing();
  std::mt19937_64 rng(seed);
  std::vector<Walker> walkers(count);
  for (auto& w : walkers) {
    const double u = uniform01(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t p = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), cdf.size() - 1));
    while (std::norm(values[p]) == 0.0 && p > 0) --p;  // u landed on a flat CDF step
    const std::size_t i = p / n;
    const std::size_t j = p % n;
    w.x1 = axis.x(i) + (uniform01(rng) - 0.5) * dx;
    w.x2 = axis.x(j) + (uniform01(rng) - 0.5) * dx;
  }
  return walkers;
}

TrajectoryEnsemble sample_initial(const WaveFunction2D& psi, std::size_t count, std::uint64_t seed) {
  return TrajectoryEnsemble(sample_positions(psi, count, seed), seed);
}

namespace {

struct SingleView {
  const ComplexArray& a;
  std::size_t n;
  complex operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

struct MidpointView {
  const ComplexArray& a;
  const ComplexArray& b;
  std::size_t n;
  complex operator()(std::size_t i, std::size_t j) const { return 0.5 * (a[i * n + j] + b[i * n + j]); }
};

// Fourth-order phase derivative along one axis from four neighbour phase
// differences; each difference is wrap-free while |k dx| < pi.
template <typename View>
Velocity node_velocity(const View& psi, std::size_t i, std::size_t j, double dx) {
  auto dphase = [](complex hi, complex lo) { return std::arg(hi * std::conj(lo)); };
  const double a1 = dphase(psi(i - 1, j), psi(i - 2, j));
  const double b1 = dphase(psi(i, j), psi(i - 1, j));
  const double c1 = dphase(psi(i + 1, j), psi(i, j));
  const double d1 = dphase(psi(i + 2, j), psi(i + 1, j));
  const double a2 = dphase(psi(i, j - 1), psi(i, j - 2));
  const double b2 = dphase(psi(i, j), psi(i, j - 1));
  const double c2 = dphase(psi(i, j + 1), psi(i, j));
  const double d2 = dphase(psi(i, j + 2), psi(i, j + 1));
  const double v1 = (2.0 / 3.0) * (b1 + c1) / dx - (1.0 / 12.0) * (a1 + b1 + c1 + d1) / dx;
  const double v2 = (2.0 / 3.0) * (b2 + c2) / dx - (1.0 / 12.0) * (a2 + b2 + c2 + d2) / dx;
  return {v1, v2};
}

template <typename View>
Velocity interpolate_velocity(const View& psi, const Axis& axis, Walker p, double max_density,
                              const GuidanceOptions& options, bool& clamped) {
  const double f1 = axis.fractional_index(p.x1);
  const double f2 = axis.fractional_index(p.x2);
  const double lo = 2.0;
  const double hi = static_cast<double>(axis.size()) - 4.0;
  if (!(f1 >= lo && f1 <= hi && f2 >= lo && f2 <= hi))
    throw Error(ErrorKind::out_of_domain, "point (" + std::to_string(p.x1) + ", " + std::to_string(p.x2) +
                                              ") is outside the grid interior");
  const auto i0 = static_cast<std::size_t>(f1);
  const auto j0 = static_cast<std::size_t>(f2);
  const double w1 = f1 - static_cast<double>(i0);
  const double w2 = f2 - static_cast<double>(j0);
  const double dx = axis.spacing();
  const double node_floor = options.node_epsilon * max_density;
  const double cap = options.velocity_cap;

  Velocity v;
  bool near_node = false;
  for (int di = 0; di < 2; ++di) {
    for (int dj = 0; dj < 2; ++dj) {
      const double weight = (di ? w1 : 1.0 - w1) * (dj ? w2 : 1.0 - w2);
      if (weight == 0.0) continue;
      const std::size_t i = i0 + di;
      const std::size_t j = j0 + dj;
      if (std::norm(psi(i, j)) < node_floor) near_node = true;
      const Velocity nv = node_velocity(psi, i, j, dx);
      v.v1 += weight * nv.v1;
      v.v2 += weight * nv.v2;
    }
  }
  if (near_node || std::abs(v.v1) > cap || std::abs(v.v2) > cap) {
    clamped = true;
    v.v1 = std::clamp(std::isfinite(v.v1) ? v.v1 : 0.0, -cap, cap);
    v.v2 = std::clamp(std::isfinite(v.v2) ? v.v2 : 0.0, -cap, cap);
  }
  return v;
}

// Walkers stay where the stencil is defined.
Walker clamp_to_interior(Walker w, const Axis& axis) {
  const double lo = axis.x(2);
  const double hi = axis.x(axis.size() - 4);
  return {std::clamp(w.x1, lo, hi), std::clamp(w.x2, lo, hi)};
}

}  // namespace

Velocity velocity_at(const WaveFunction2D& psi, Walker point, const GuidanceOptions& options) {
  const double max_density = kernels::omp::max_abs_sq(psi.values(), psi.size());
  bool clamped = false;
  return interpolate_velocity(SingleView{psi.values(), psi.size()}, psi.grid().axis(), point, max_density, options,
                              clamped);
}

AdvanceReport advance_walkers(TrajectoryEnsemble& ensemble, const WaveFunction2D& psi_t,
                              const WaveFunction2D& psi_next, double dt, const GuidanceOptions& options, Exec exec) {
  if (!(psi_t.grid() == psi_next.grid())) throw Error(ErrorKind::domain, "snapshots live on different grids");
  const Axis& axis = psi_t.grid().axis();
  const std::size_t n = psi_t.size();
  const SingleView start{psi_t.values(), n};
  const MidpointView mid{psi_t.values(), psi_next.values(), n};
  const double max_start = exec == Exec::parallel ? kernels::omp::max_abs_sq(psi_t.values(), n)
                                                  : kernels::serial::max_abs_sq(psi_t.values(), n);
  const double max_next = exec == Exec::parallel ? kernels::omp::max_abs_sq(psi_next.values(), n)
                                                 : kernels::serial::max_abs_sq(psi_next.values(), n);
  const double max_mid = 0.5 * (max_start + max_next);

  auto& walkers = ensemble.current();
  auto& alive = ensemble.alive();
  const auto count = static_cast<std::ptrdiff_t>(walkers.size());
  std::vector<char> died(walkers.size(), 0);
  std::vector<char> capped(walkers.size(), 0);
  std::vector<char> frozen(walkers.size(), 0);

  auto advance_one = [&](std::ptrdiff_t k) {
    if (!alive[k]) return;
    bool clamped = false;
    const Walker x0 = walkers[k];
    if (std::abs(x0.x1) >= options.freeze_radius || std::abs(x0.x2) >= options.freeze_radius) {
      frozen[k] = 1;
      return;
    }
    const Velocity v0 = interpolate_velocity(start, axis, x0, max_start, options, clamped);
    const Walker half = clamp_to_interior({x0.x1 + 0.5 * dt * v0.v1, x0.x2 + 0.5 * dt * v0.v2}, axis);
    const Velocity vm = interpolate_velocity(mid, axis, half, max_mid, options, clamped);
    const Walker next{x0.x1 + dt * vm.v1, x0.x2 + dt * vm.v2};
    if (!std::isfinite(next.x1) || !std::isfinite(next.x2)) {
      alive[k] = 0;
      died[k] = 1;
      return;
    }
    walkers[k] = clamp_to_interior(next, axis);
    capped[k] = clamped ? 1 : 0;
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < count; ++k) advance_one(k);
  } else {
    for (std::ptrdiff_t k = 0; k < count; ++k) advance_one(k);
  }

  AdvanceReport report;
  report.newly_dead = static_cast<std::size_t>(std::count(died.begin(), died.end(), 1));
  report.clamped = static_cast<std::size_t>(std::count(capped.begin(), capped.end(), 1));
  report.frozen = static_cast<std::size_t>(std::count(frozen.begin(), frozen.end(), 1));
  return report;
}

Classification classify_point(Walker w, double threshold) {
  const bool out1 = std::abs(w.x1) > threshold;
  const bool out2 = std::abs(w.x2) > threshold;
  if (out1 && out2) return {Channel::nsdi, w.x1 * w.x2 > 0.0 ? Quadrant::q13 : Quadrant::q24};
  if (out1 || out2) return {Channel::single, Quadrant::none};
  return {Channel::bound, Quadrant::none};
}

std::vector<Classification> classify(const TrajectoryEnsemble& ensemble, double when, double threshold) {
  const std::size_t m = ensemble.sample_index(when);
  std::vector<Classification> out(ensemble.size());
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    out[k] = ensemble.alive()[k] ? classify_point(ensemble.sample(m, k), threshold)
                                 : Classification{Channel::dead, Quadrant::none};
  }
  return out;
}

const char* to_string(Channel c) {
  switch (c) {
    case Channel::nsdi: return "NSDI";
    case Channel::single: return "SI";
    case Channel::bound: return "bound";
    case Channel::dead: return "dead";
  }
  return "?";
}

const char* to_string(Quadrant q) {
  switch (q) {
    case Quadrant::q13: return "Q13";
    case Quadrant::q24: return "Q24";
    case Quadrant::none: return "none";
  }
  return "?";
}

}  // namespace nsdi
