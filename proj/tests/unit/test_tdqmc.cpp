#include <doctest.h>

#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "nsdi/errors.hpp"
#include "nsdi/laser.hpp"
#include "nsdi/potential.hpp"
#include "nsdi/propagator.hpp"
#include "nsdi/tdqmc.hpp"

using namespace nsdi;

namespace {

WaveFunction2D from(const Grid2D& g, auto f) {
  WaveFunction2D psi(g);
  const Axis& a = g.axis();
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) psi(i, j) = f(a.x(i), a.x(j));
  psi.normalize();
  return psi;
}

std::vector<complex> normalized(const Axis& a, auto f) {
  std::vector<complex> phi(a.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    phi[i] = f(a.x(i));
    s += std::norm(phi[i]) * a.spacing();
  }
  for (auto& v : phi) v /= std::sqrt(s);
  return phi;
}

void set_guides(TdqmcEnsemble& ens, std::size_t k, const std::vector<complex>& phi) {
  for (int e = 1; e <= 2; ++e) std::copy(phi.begin(), phi.end(), ens.guide(k, e));
}

std::vector<Walker> spread_walkers(std::size_t n) {
  std::vector<Walker> w;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k);
    w.push_back({7.0 * std::sin(1.3 * t + 0.2), 6.5 * std::cos(0.7 * t + 0.4)});
  }
  return w;
}

double gauss(double x, double c) { return std::exp(-(x - c) * (x - c) / 2); }

const GroundState& helium() {
  static const GroundState gs = [] {
    RelaxOptions opt;
    opt.tol = 1e-12;
    return relax_ground_state(Grid2D(20.0, 128), opt);
  }();
  return gs;
}

}  // namespace

TEST_CASE("initialization of a product state") {
  const Grid2D g(20.0, 128);
  const auto psi = from(g, [](double x1, double x2) { return gauss(x1, 0.5) * gauss(x2, 0.5); });
  const auto ens = tdqmc_init(psi, 50, 3);
  const auto ref = normalized(g.axis(), [](double x) { return gauss(x, 0.5); });
  double worst = 0.0;
  for (std::size_t k = 0; k < ens.size(); ++k)
    for (int e = 1; e <= 2; ++e)
      for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(ens.guide(k, e)[i] - ref[i]));
  CHECK(worst < 1e-12);
  CHECK_THROWS_AS(tdqmc_init(psi, 0, 3), Error);
}

TEST_CASE("initial guide densities reproduce the one-body density") {
  const GroundState& gs = helium();
  const Axis& a = gs.psi.grid().axis();
  const std::size_t n = 2000;
  const auto ens = tdqmc_init(gs.psi, n, 11);
  for (double x : {-1.5, -0.5, 0.0, 0.7, 2.0}) {
    const auto i = static_cast<std::size_t>(std::lround(a.fractional_index(x)));
    double exact = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) exact += std::norm(gs.psi(i, j)) * a.spacing();
    double mean = 0.0, sq = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = std::norm(ens.guide(k, 1)[i]);
      mean += d;
      sq += d * d;
    }
    mean /= n;
    const double se = std::sqrt((sq / n - mean * mean) / (n - 1));
    CHECK(std::abs(mean - exact) < 3 * se);
  }
}

TEST_CASE("initialization is deterministic per seed") {
  const GroundState& gs = helium();
  const auto a = tdqmc_init(gs.psi, 100, 42);
  const auto b = tdqmc_init(gs.psi, 100, 42);
  const auto c = tdqmc_init(gs.psi, 100, 43);
  bool same = true, differ = false;
  for (std::size_t k = 0; k < 100; ++k) {
    same = same && a.walkers()[k].x1 == b.walkers()[k].x1 && a.walkers()[k].x2 == b.walkers()[k].x2;
    differ = differ || a.walkers()[k].x1 != c.walkers()[k].x1;
  }
  CHECK(same);
  CHECK(differ);
}

TEST_CASE("density matrix additivity over a partition") {
  const Axis a(20.0, 64);
  TdqmcEnsemble ens(a, spread_walkers(40), 1);
  for (std::size_t k = 0; k < ens.size(); ++k)
    set_guides(ens, k, normalized(a, [&](double x) { return std::polar(gauss(x, 0.1 * k - 2.0), 0.3 * k * x); }));
  std::size_t n_all = 0, n13 = 0, n24 = 0, n_nsdi = 0;
  const auto all = accumulate_density(ens, Selector::all, 1, n_all);
  const auto q13 = accumulate_density(ens, Selector::q13, 1, n13);
  const auto q24 = accumulate_density(ens, Selector::q24, 1, n24);
  const auto nsdi = accumulate_density(ens, Selector::nsdi, 1, n_nsdi);
  CHECK(n_all == n13 + n24);
  CHECK(n_nsdi > 0);
  CHECK(n_nsdi < n_all);
  CHECK((all - q13 - q24).cwiseAbs().maxCoeff() < 1e-12);

  // NSDI plus its complement, summed by hand
  Eigen::MatrixXcd other = Eigen::MatrixXcd::Zero(a.size(), a.size());
  for (std::size_t k = 0; k < ens.size(); ++k) {
    if (selects(Selector::nsdi, ens.walkers()[k])) continue;
    const complex* phi = ens.guide(k, 1);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < a.size(); ++j) other(i, j) += phi[i] * std::conj(phi[j]) * a.spacing();
  }
  CHECK((all - nsdi - other).cwiseAbs().maxCoeff() < 1e-12);

  const auto rho = restricted_density_matrix(ens, Selector::all);
  CHECK(rho.hermiticity_error < 1e-12);
  CHECK(von_neumann_entropy(rho) <= std::log(static_cast<double>(n_all)) + 1e-12);
}

TEST_CASE("mixtures and pure ensembles") {
  const Axis a(20.0, 128);
  const auto pa = normalized(a, [](double x) { return gauss(x, 0.0); });
  const auto pb = normalized(a, [](double x) { return x * gauss(x, 0.0); });
  TdqmcEnsemble mix(a, spread_walkers(20), 1);
  for (std::size_t k = 0; k < mix.size(); ++k) set_guides(mix, k, k % 2 ? pb : pa);
  CHECK(std::abs(von_neumann_entropy(restricted_density_matrix(mix, Selector::all)) - std::log(2.0)) < 1e-10);

  TdqmcEnsemble coherent(a, spread_walkers(20), 1);
  for (std::size_t k = 0; k < coherent.size(); ++k) set_guides(coherent, k, pa);
  CHECK(std::abs(von_neumann_entropy(restricted_density_matrix(coherent, Selector::all))) < 1e-8);

  TdqmcEnsemble single(a, {{6.0, -7.0}}, 1);
  set_guides(single, 0, pb);
  for (const auto& ch : entropy_by_channel(single, 1, 1)) {
    if (ch.entropy) CHECK(std::abs(*ch.entropy) < 1e-8);
  }
  const auto channels = entropy_by_channel(single, 1, 1);
  CHECK(channels[0].entropy.has_value());
  CHECK(channels[1].entropy.has_value());
  CHECK_FALSE(channels[2].entropy.has_value());
  CHECK(channels[3].entropy.has_value());
}

TEST_CASE("selectors and small selections") {
  CHECK(selects(Selector::nsdi, {6.0, -5.5}));
  CHECK_FALSE(selects(Selector::nsdi, {6.0, 4.0}));
  CHECK(selects(Selector::q13, {-1.0, -2.0}));
  CHECK(selects(Selector::q24, {-1.0, 2.0}));
  CHECK_FALSE(selects(Selector::q24, {0.0, 2.0}));
  CHECK(std::string(to_string(Selector::nsdi)) == "NSDI");

  const Axis a(20.0, 64);
  TdqmcEnsemble ens(a, spread_walkers(30), 1);
  for (std::size_t k = 0; k < ens.size(); ++k) set_guides(ens, k, normalized(a, [](double x) { return gauss(x, 0.0); }));
  try {
    restricted_density_matrix(ens, Selector::nsdi, 1, 1000);
    FAIL("expected insufficient statistics");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::insufficient_statistics);
  }
  // tags freeze the selection positions
  ens.tag_channels();
  const std::size_t before = count_selected(ens, Selector::q13);
  for (auto& w : ens.walkers()) w.x2 = w.x1;
  CHECK(count_selected(ens, Selector::q13) == before);
}

TEST_CASE("field-free, interaction-free eigenstate guides are stationary") {
  const Axis a(40.0, 256);
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = -soft_core(a.x(i), 2.0);
  const double dt = 0.01;
  RelaxOptions ro;
  ro.dt_imag = dt;
  ro.tol = 1e-14;
  const GroundState1D gs = relax_ground_state_1d(a, v, ro);

  TdqmcEnsemble ens(a, {{0.3, -0.4}, {1.0, 0.2}}, 1);
  for (std::size_t k = 0; k < ens.size(); ++k) set_guides(ens, k, std::vector<complex>(gs.phi.begin(), gs.phi.end()));
  TdqmcOptions opt;
  opt.interaction = false;
  opt.absorber = false;
  const TdqmcPropagator prop(a, dt, opt);
  PulseSpec p;
  const auto steps = static_cast<int>(std::ceil(p.cycle_period() / dt));
  for (int s = 0; s < steps; ++s) prop.step(ens, 0.0);
  for (std::size_t k = 0; k < ens.size(); ++k)
    for (int e = 1; e <= 2; ++e) {
      complex ov = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) ov += std::conj(gs.phi[i]) * ens.guide(k, e)[i] * a.spacing();
      CHECK(std::abs(std::abs(ov) - 1.0) < 1e-6);
    }
}

TEST_CASE("guide split step is unitary") {
  const Axis a(40.0, 256);
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = -soft_core(a.x(i), 2.0) + soft_core(a.x(i) - 1.5) - 0.1 * a.x(i);
  auto phi = normalized(a, [](double x) { return std::polar(gauss(x, 1.0), 0.5 * x); });
  const SplitOperator1D op(a, 0.05, TimeMode::real);
  for (int s = 0; s < 100; ++s) op.step(phi.data(), v);
  CHECK(std::abs(op.norm(phi.data()) - 1.0) < 1e-10);
}

TEST_CASE("identical configurations follow identical paths") {
  const Grid2D g(30.0, 128);
  const auto psi = from(g, [](double x1, double x2) { return gauss(x1, 0.3) * gauss(x2, -0.2); });
  TdqmcEnsemble ens(g.axis(), {{0.4, -0.3}, {0.4, -0.3}, {1.1, 0.9}}, 1);
  const auto phi = normalized(g.axis(), [](double x) { return gauss(x, 0.0); });
  for (std::size_t k = 0; k < ens.size(); ++k) set_guides(ens, k, phi);
  const TdqmcPropagator prop(g.axis(), 0.05);
  for (int s = 0; s < 200; ++s) prop.step(ens, 0.05 * std::sin(0.1837 * s * 0.05));
  CHECK(ens.walkers()[0].x1 == ens.walkers()[1].x1);
  CHECK(ens.walkers()[0].x2 == ens.walkers()[1].x2);
  CHECK(ens.walkers()[0].x1 != ens.walkers()[2].x1);
}

TEST_CASE("serial and parallel steps agree exactly") {
  const GroundState& gs = helium();
  auto a = tdqmc_init(gs.psi, 64, 9);
  auto b = a;
  const TdqmcPropagator prop(a.axis(), 0.05);
  for (int s = 0; s < 50; ++s) {
    prop.step(a, 0.08, Exec::serial);
    prop.step(b, 0.08, Exec::parallel);
  }
  bool same = true;
  for (std::size_t k = 0; k < a.size(); ++k) {
    same = same && a.walkers()[k].x1 == b.walkers()[k].x1 && a.walkers()[k].x2 == b.walkers()[k].x2;
    for (std::size_t i = 0; i < a.axis().size(); ++i) same = same && a.guide(k, 1)[i] == b.guide(k, 1)[i];
  }
  CHECK(same);
}

TEST_CASE("interaction-free product ensemble stays pure through a pulse") {
  const Grid2D g(40.0, 256);
  const auto psi = from(g, [](double x1, double x2) { return gauss(x1, 0.0) * gauss(x2, 0.0); });
  auto ens = tdqmc_init(psi, 200, 5);
  TdqmcOptions opt;
  opt.interaction = false;
  const TdqmcPropagator prop(g.axis(), 0.05, opt);
  PulseSpec p;
  p.n_cycles = 2;
  p.ramp_cycles = 0.5;
  double worst = 0.0;
  const auto steps = static_cast<int>(p.duration() / 0.05);
  for (int s = 0; s < steps; ++s) {
    prop.step(ens, field_at(p, s * 0.05 + 0.025));
    if (s % 100 == 0) worst = std::max(worst, von_neumann_entropy(restricted_density_matrix(ens, Selector::all)));
  }
  CHECK(worst < 0.05);
}

TEST_CASE("electron labels agree statistically at initialization") {
  const GroundState& gs = helium();
  std::vector<double> diff;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto ens = tdqmc_init(gs.psi, 200, seed);
    diff.push_back(von_neumann_entropy(restricted_density_matrix(ens, Selector::all, 1)) -
                   von_neumann_entropy(restricted_density_matrix(ens, Selector::all, 2)));
  }
  const double mean = std::accumulate(diff.begin(), diff.end(), 0.0) / diff.size();
  double var = 0.0;
  for (double d : diff) var += (d - mean) * (d - mean);
  const double se = std::sqrt(var / (diff.size() - 1) / diff.size());
  CHECK(std::abs(mean) <= 2 * se + 1e-12);
}
