#include <doctest.h>
#include <omp.h>

#include <random>
#include <vector>

#include "nsdi/absorber.hpp"
#include "nsdi/kernels.hpp"
#include "nsdi/propagator.hpp"

using namespace nsdi;

namespace {

struct Fixture {
  std::size_t n = 64;
  std::vector<complex> v, full, a;
  std::vector<double> w, m;
  std::vector<char> outside;

  Fixture() {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    v.resize(n * n);
    full.resize(n * n);
    w.resize(n * n);
    for (auto& z : v) z = {u(rng), u(rng)};
    for (auto& z : full) z = std::polar(1.0, 3.0 * u(rng));
    for (auto& x : w) x = u(rng);
    a.resize(n);
    m.resize(n);
    outside.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = std::polar(1.0, u(rng));
      m[i] = 0.5 + 0.5 * std::abs(u(rng));
      outside[i] = (i < 10 || i > 50) ? 1 : 0;
    }
  }
};

bool same(const std::vector<complex>& x, const std::vector<complex>& y) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != y[i]) return false;
  return true;
}

}  // namespace

TEST_CASE("parallel kernels are bitwise equal to serial ones") {
  omp_set_num_threads(4);
  Fixture f;

  auto s = f.v, p = f.v;
  kernels::serial::multiply_separable(s, f.full, f.a, f.n);
  kernels::omp::multiply_separable(p, f.full, f.a, f.n);
  CHECK(same(s, p));

  kernels::serial::multiply_axis_product(s, f.a, f.n);
  kernels::omp::multiply_axis_product(p, f.a, f.n);
  CHECK(same(s, p));

  CHECK(kernels::serial::sum_abs_sq(s, f.n) == kernels::omp::sum_abs_sq(p, f.n));
  CHECK(kernels::serial::max_abs_sq(s, f.n) == kernels::omp::max_abs_sq(p, f.n));
  CHECK(kernels::serial::weighted_abs_sq(s, f.w, f.n) == kernels::omp::weighted_abs_sq(p, f.w, f.n));

  const ChannelSums rs = kernels::serial::region_sums(s, f.outside, f.n);
  const ChannelSums rp = kernels::omp::region_sums(p, f.outside, f.n);
  CHECK(rs.double_ion == rp.double_ion);
  CHECK(rs.single_ion == rp.single_ion);
  CHECK(rs.bound == rp.bound);

  const ChannelSums ms = kernels::serial::mask_and_tally(s, f.m, f.outside, f.n);
  const ChannelSums mp = kernels::omp::mask_and_tally(p, f.m, f.outside, f.n);
  CHECK(ms.double_ion == mp.double_ion);
  CHECK(ms.single_ion == mp.single_ion);
  CHECK(ms.bound == mp.bound);
  CHECK(same(s, p));

  kernels::serial::symmetrize(s, f.n);
  kernels::omp::symmetrize(p, f.n);
  CHECK(same(s, p));
  kernels::serial::scale(s, 0.3);
  kernels::omp::scale(p, 0.3);
  CHECK(same(s, p));
}

TEST_CASE("kernel values against direct loops") {
  Fixture f;
  double sum = 0.0, weighted = 0.0;
  for (std::size_t k = 0; k < f.v.size(); ++k) {
    sum += std::norm(f.v[k]);
    weighted += f.w[k] * std::norm(f.v[k]);
  }
  CHECK(kernels::serial::sum_abs_sq(f.v, f.n) == doctest::Approx(sum).epsilon(1e-13));
  CHECK(kernels::serial::weighted_abs_sq(f.v, f.w, f.n) == doctest::Approx(weighted).epsilon(1e-12));

  const ChannelSums r = kernels::serial::region_sums(f.v, f.outside, f.n);
  CHECK(r.total() == doctest::Approx(sum).epsilon(1e-13));

  auto v = f.v;
  const ChannelSums removed = kernels::serial::mask_and_tally(v, f.m, f.outside, f.n);
  CHECK(removed.total() + kernels::serial::sum_abs_sq(v, f.n) == doctest::Approx(sum).epsilon(1e-13));

  kernels::serial::symmetrize(v, f.n);
  for (std::size_t i = 0; i < f.n; ++i)
    for (std::size_t j = 0; j < f.n; ++j) CHECK(v[i * f.n + j] == v[j * f.n + i]);
}

TEST_CASE("serial and parallel propagation agree exactly") {
  omp_set_num_threads(4);
  Grid2D g(15.0, 64);
  WaveFunction2D a = gaussian_seed(g, 1.5);
  WaveFunction2D b = a;
  SplitOperator2D ps(build_potential(g), Exec::serial);
  SplitOperator2D pp(build_potential(g), Exec::parallel);
  AbsorberMask ms = make_absorber(g.axis());
  AbsorberMask mp = make_absorber(g.axis());
  for (int n = 0; n < 20; ++n) {
    ps.step(a, 0.1, 0.05, TimeMode::real);
    pp.step(b, 0.1, 0.05, TimeMode::real);
    apply_absorber(a, ms, Exec::serial);
    apply_absorber(b, mp, Exec::parallel);
  }
  for (std::size_t k = 0; k < a.values().size(); ++k) REQUIRE(a.values()[k] == b.values()[k]);
  CHECK(ms.absorbed.total() == mp.absorbed.total());
}
