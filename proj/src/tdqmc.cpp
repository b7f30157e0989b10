#include "nsdi/tdqmc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "nsdi/absorber.hpp"
#include "nsdi/errors.hpp"
#include "nsdi/potential.hpp"

namespace nsdi {

namespace {

constexpr std::size_t kTableRefine = 64;

double axis_norm(const Axis& axis, const complex* phi) {
  double s = 0.0;
  for (std::size_t i = 0; i < axis.size(); ++i) s += std::norm(phi[i]);
  return s * axis.spacing();
}

// Fourth-order phase derivative at node i from neighbour phase differences.
template <typename View>
double node_velocity(const View& phi, std::size_t i, double dx) {
  auto dphase = [](complex hi, complex lo) { return std::arg(hi * std::conj(lo)); };
  const double a = dphase(phi(i - 1), phi(i - 2));
  const double b = dphase(phi(i), phi(i - 1));
  const double c = dphase(phi(i + 1), phi(i));
  const double d = dphase(phi(i + 2), phi(i + 1));
  return (2.0 / 3.0) * (b + c) / dx - (1.0 / 12.0) * (a + b + c + d) / dx;
}

template <typename View>
double guide_velocity(const View& phi, const Axis& axis, double x, double max_density, const GuidanceOptions& opt) {
  const double f = std::clamp(axis.fractional_index(x), 2.0, static_cast<double>(axis.size()) - 4.0);
  const auto i0 = static_cast<std::size_t>(f);
  const double w = f - static_cast<double>(i0);
  const double floor = opt.node_epsilon * max_density;
  const bool near_node = std::norm(phi(i0)) < floor || std::norm(phi(i0 + 1)) < floor;
  double v = (1.0 - w) * node_velocity(phi, i0, axis.spacing()) + w * node_velocity(phi, i0 + 1, axis.spacing());
  if (!std::isfinite(v)) v = 0.0;
  if (near_node || std::abs(v) > opt.velocity_cap) v = std::clamp(v, -opt.velocity_cap, opt.velocity_cap);
  return v;
}

double clamp_interior(double x, const Axis& axis) { return std::clamp(x, axis.x(2), axis.x(axis.size() - 4)); }

complex interpolate_column(const WaveFunction2D& psi, std::size_t i, double f2) {
  const auto j0 = static_cast<std::size_t>(std::clamp(std::floor(f2), 0.0, static_cast<double>(psi.size() - 2)));
  const double w = std::clamp(f2 - static_cast<double>(j0), 0.0, 1.0);
  return (1.0 - w) * psi(i, j0) + w * psi(i, j0 + 1);
}

complex interpolate_row(const WaveFunction2D& psi, double f1, std::size_t j) {
  const auto i0 = static_cast<std::size_t>(std::clamp(std::floor(f1), 0.0, static_cast<double>(psi.size() - 2)));
  const double w = std::clamp(f1 - static_cast<double>(i0), 0.0, 1.0);
  return (1.0 - w) * psi(i0, j) + w * psi(i0 + 1, j);
}

}  // namespace

TdqmcEnsemble::TdqmcEnsemble(Axis axis, std::vector<Walker> walkers, std::uint64_t seed)
    : axis_(std::move(axis)),
      walkers_(std::move(walkers)),
      alive_(walkers_.size(), 1),
      seed_(seed),
      guides_(2 * walkers_.size() * axis_.size(), complex{0.0, 0.0}) {}

std::size_t TdqmcEnsemble::dead_count() const noexcept {
  return static_cast<std::size_t>(std::count(alive_.begin(), alive_.end(), 0));
}

void TdqmcEnsemble::tag_channels() { tags_ = walkers_; }

TdqmcEnsemble tdqmc_init(const WaveFunction2D& psi0, std::size_t count, std::uint64_t seed) {
  TdqmcEnsemble ens(psi0.grid().axis(), sample_positions(psi0, count, seed), seed);
  const Axis& axis = ens.axis();
  const std::size_t n = axis.size();
  for (std::size_t k = 0; k < count; ++k) {
    const Walker w = ens.walkers()[k];
    complex* phi1 = ens.guide(k, 1);
    complex* phi2 = ens.guide(k, 2);
    const double f1 = axis.fractional_index(w.x1);
    const double f2 = axis.fractional_index(w.x2);
    for (std::size_t i = 0; i < n; ++i) {
      phi1[i] = interpolate_column(psi0, i, f2);
      phi2[i] = interpolate_row(psi0, f1, i);
    }
    for (complex* phi : {phi1, phi2}) {
      const double nrm = axis_norm(axis, phi);
      if (!(nrm > 0.0)) throw Error(ErrorKind::invalid_state, "conditional slice has zero norm");
      const double s = 1.0 / std::sqrt(nrm);
      for (std::size_t i = 0; i < n; ++i) phi[i] *= s;
    }
  }
  return ens;
}

TdqmcPropagator::TdqmcPropagator(const Axis& axis, double dt, TdqmcOptions options)
    : options_(options), op_(axis, dt, TimeMode::real), nucleus_(axis.size()), mask_(axis.size(), 1.0) {
  for (std::size_t i = 0; i < axis.size(); ++i) nucleus_[i] = -soft_core(axis.x(i), 2.0);
  if (options_.absorber) mask_ = make_absorber(axis, options_.absorber_fraction).profile;
  const std::size_t n = axis.size();
  ee_table_.resize(2 * n * kTableRefine + 1);
  for (std::size_t m = 0; m < ee_table_.size(); ++m) {
    const double d = (static_cast<double>(m) / static_cast<double>(kTableRefine) - static_cast<double>(n)) * axis.spacing();
    ee_table_[m] = std::polar(1.0, -0.5 * interaction_at(d) * dt);
  }
}

double TdqmcPropagator::interaction_at(double d) const {
  if (!options_.interaction) return 0.0;
  if (options_.smoothing_width <= 0.0) return soft_core(d);
  // Soft-core averaged over a Gaussian of width sigma: 9-point rule on [-4, 4] sigma.
  constexpr int kPoints = 9;
  double acc = 0.0;
  double wsum = 0.0;
  for (int p = 0; p < kPoints; ++p) {
    const double u = -4.0 + 8.0 * p / (kPoints - 1);
    const double w = std::exp(-0.5 * u * u);
    acc += w * soft_core(d - options_.smoothing_width * u);
    wsum += w;
  }
  return acc / wsum;
}

TdqmcStepReport TdqmcPropagator::step(TdqmcEnsemble& ens, double field_value, Exec exec) const {
  const Axis& axis = ens.axis();
  if (!(axis == op_.axis())) throw Error(ErrorKind::domain, "ensemble axis does not match the propagator");
  const std::size_t n = axis.size();
  const double dt = op_.dt();

  // exp(-i V dt/2) factors shared by all configurations: nucleus and dipole.
  std::vector<complex> shared(n);
  for (std::size_t i = 0; i < n; ++i)
    shared[i] = std::polar(1.0, -0.5 * (nucleus_[i] - axis.x(i) * field_value) * dt);

  auto& walkers = ens.walkers();
  auto& alive = ens.alive();
  const auto count = static_cast<std::ptrdiff_t>(ens.size());
  std::vector<char> died(ens.size(), 0);

  auto advance = [&](std::ptrdiff_t k, ComplexArray& before, std::vector<complex>& factor) {
    if (!alive[k]) return;
    const Walker start = walkers[k];
    Walker next = start;
    bool ok = true;
    for (int e = 1; e <= 2; ++e) {
      complex* phi = ens.guide(static_cast<std::size_t>(k), e);
      const double partner = e == 1 ? start.x2 : start.x1;
      const double own = e == 1 ? start.x1 : start.x2;
      // Offset table index for d = x_i - partner.
      const double base = (static_cast<double>(n) - axis.fractional_index(partner)) * kTableRefine;
      for (std::size_t i = 0; i < n; ++i) {
        const double pos = base + static_cast<double>(i * kTableRefine);
        const auto m = static_cast<std::size_t>(std::clamp(std::lround(pos), 0L, static_cast<long>(ee_table_.size() - 1)));
        factor[i] = shared[i] * ee_table_[m];
      }
      std::copy(phi, phi + n, before.begin());
      for (std::size_t i = 0; i < n; ++i) phi[i] *= factor[i];
      op_.kinetic(phi);
      for (std::size_t i = 0; i < n; ++i) phi[i] *= factor[i];

      double max_before = 0.0;
      double max_after = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        max_before = std::max(max_before, std::norm(before[i]));
        max_after = std::max(max_after, std::norm(phi[i]));
      }
      const auto view_t = [&](std::size_t i) { return before[i]; };
      const auto view_mid = [&](std::size_t i) { return 0.5 * (before[i] + phi[i]); };
      const double v0 = guide_velocity(view_t, axis, own, max_before, options_.guidance);
      const double half = clamp_interior(own + 0.5 * dt * v0, axis);
      const double vm = guide_velocity(view_mid, axis, half, 0.5 * (max_before + max_after), options_.guidance);
      const double moved = own + dt * vm;

      for (std::size_t i = 0; i < n; ++i) phi[i] *= mask_[i];
      const double nrm = axis_norm(axis, phi);
      if (!std::isfinite(nrm) || !(nrm > 0.0) || !std::isfinite(moved)) {
        ok = false;
        break;
      }
      const double s = 1.0 / std::sqrt(nrm);
      for (std::size_t i = 0; i < n; ++i) phi[i] *= s;
      (e == 1 ? next.x1 : next.x2) = clamp_interior(moved, axis);
    }
    if (!ok) {
      alive[k] = 0;
      died[k] = 1;
      return;
    }
    walkers[k] = next;
  };

  if (exec == Exec::parallel) {
#pragma omp parallel
    {
      ComplexArray before(n);
      std::vector<complex> factor(n);
#pragma omp for schedule(static)
      for (std::ptrdiff_t k = 0; k < count; ++k) advance(k, before, factor);
    }
  } else {
    ComplexArray before(n);
    std::vector<complex> factor(n);
    for (std::ptrdiff_t k = 0; k < count; ++k) advance(k, before, factor);
  }
  TdqmcStepReport report;
  report.newly_dead = static_cast<std::size_t>(std::count(died.begin(), died.end(), 1));
  return report;
}

TdqmcStepReport tdqmc_step(TdqmcEnsemble& ensemble, double field_value, double dt, const TdqmcOptions& options) {
  TdqmcPropagator prop(ensemble.axis(), dt, options);
  return prop.step(ensemble, field_value);
}

const char* to_string(Selector s) {
  switch (s) {
    case Selector::all: return "all";
    case Selector::nsdi: return "NSDI";
    case Selector::q13: return "Q13";
    case Selector::q24: return "Q24";
  }
  return "?";
}

bool selects(Selector s, Walker w, double threshold) {
  switch (s) {
    case Selector::all: return true;
    case Selector::nsdi: return std::abs(w.x1) > threshold && std::abs(w.x2) > threshold;
    case Selector::q13: return w.x1 * w.x2 > 0.0;
    case Selector::q24: return w.x1 * w.x2 < 0.0;
  }
  return false;
}

std::size_t count_selected(const TdqmcEnsemble& ens, Selector selector, double threshold) {
  const auto& positions = ens.selection_positions();
  std::size_t c = 0;
  for (std::size_t k = 0; k < ens.size(); ++k)
    if (ens.alive()[k] && selects(selector, positions[k], threshold)) ++c;
  return c;
}

Eigen::MatrixXcd accumulate_density(const TdqmcEnsemble& ens, Selector selector, int electron, std::size_t& selected,
                                    double threshold) {
  if (electron != 1 && electron != 2) throw Error(ErrorKind::domain, "electron must be 1 or 2");
  const auto n = static_cast<Eigen::Index>(ens.axis().size());
  const auto& positions = ens.selection_positions();
  std::vector<std::size_t> picked;
  for (std::size_t k = 0; k < ens.size(); ++k)
    if (ens.alive()[k] && selects(selector, positions[k], threshold)) picked.push_back(k);
  selected = picked.size();
  Eigen::MatrixXcd phis(n, static_cast<Eigen::Index>(picked.size()));
  for (std::size_t c = 0; c < picked.size(); ++c) {
    const complex* phi = ens.guide(picked[c], electron);
    for (Eigen::Index i = 0; i < n; ++i) phis(i, static_cast<Eigen::Index>(c)) = phi[i];
  }
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
  if (!picked.empty()) {
    rho.selfadjointView<Eigen::Lower>().rankUpdate(phis);
    rho = rho.selfadjointView<Eigen::Lower>();
  }
  return rho * ens.axis().spacing();
}

ReducedDensityMatrix restricted_density_matrix(const TdqmcEnsemble& ens, Selector selector, int electron,
                                               std::size_t min_selected, double threshold) {
  std::size_t selected = 0;
  Eigen::MatrixXcd sum = accumulate_density(ens, selector, electron, selected, threshold);
  if (selected < std::max<std::size_t>(min_selected, 1))
    throw Error(ErrorKind::insufficient_statistics, std::string("channel ") + to_string(selector) + " selects " +
                                                        std::to_string(selected) + " configurations, need " +
                                                        std::to_string(min_selected));
  sum /= static_cast<double>(selected);
  return make_reduced_density_matrix(std::move(sum));
}

std::vector<ChannelEntropy> entropy_by_channel(const TdqmcEnsemble& ens, int electron, std::size_t min_selected) {
  std::vector<ChannelEntropy> out;
  for (Selector s : {Selector::all, Selector::nsdi, Selector::q13, Selector::q24}) {
    ChannelEntropy ce{s, 0, std::nullopt};
    try {
      const auto rho = restricted_density_matrix(ens, s, electron, min_selected);
      ce.entropy = von_neumann_entropy(rho);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::insufficient_statistics) throw;
    }
    ce.selected = count_selected(ens, s);
    out.push_back(ce);
  }
  return out;
}

}  // namespace nsdi
