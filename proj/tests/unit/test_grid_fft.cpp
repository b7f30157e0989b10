#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "nsdi/errors.hpp"
#include "nsdi/fft.hpp"
#include "nsdi/grid.hpp"
#include "nsdi/wavefunction.hpp"

using namespace nsdi;

TEST_CASE("axis nodes and momenta") {
  Axis a(10.0, 8);
  CHECK(a.spacing() == doctest::Approx(2.5));
  CHECK(a.x(0) == -10.0);
  CHECK(a.x(7) == doctest::Approx(7.5));
  CHECK(a.momentum_spacing() == doctest::Approx(std::numbers::pi / 10.0));
  // FFT ordering: 0, 1, 2, 3, -4, -3, -2, -1 in units of dk
  const double dk = a.momentum_spacing();
  const int expect[8] = {0, 1, 2, 3, -4, -3, -2, -1};
  for (std::size_t n = 0; n < 8; ++n) CHECK(a.k(n) == doctest::Approx(expect[n] * dk));
  CHECK(a.fractional_index(a.x(5)) == doctest::Approx(5.0));
}

TEST_CASE("axis rejects non power of two sizes") {
  CHECK_THROWS_AS(Axis(10.0, 100), Error);
  CHECK_THROWS_AS(Axis(-1.0, 64), Error);
}

TEST_CASE("fft round trip and plane wave") {
  const std::size_t n = 64;
  FftPlan plan(n);
  ComplexArray v(n);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (auto& z : v) z = {g(rng), g(rng)};
  const ComplexArray orig = v;
  plan.forward(v);
  plan.inverse(v);
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(v[i] - orig[i]) < 1e-13);

  // exp(2 pi i 5 j / n) lands in bin 5 with weight n
  for (std::size_t j = 0; j < n; ++j) v[j] = std::polar(1.0, 2.0 * std::numbers::pi * 5.0 * j / n);
  plan.forward(v);
  for (std::size_t m = 0; m < n; ++m) CHECK(std::abs(v[m] - complex(m == 5 ? double(n) : 0.0, 0.0)) < 1e-10);
}

TEST_CASE("2d fft round trip") {
  FftPlan plan(16, 16);
  ComplexArray v(256);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = {std::sin(0.1 * i), std::cos(0.37 * i)};
  const ComplexArray orig = v;
  plan.forward(v);
  plan.inverse(v);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(v[i] - orig[i]) < 1e-13);
}

TEST_CASE("moved fft plan stays usable") {
  FftPlan a(32);
  FftPlan b(std::move(a));
  FftPlan c(8);
  c = std::move(b);
  ComplexArray v(32, complex(1.0, 0.0));
  c.forward(v);
  CHECK(std::abs(v[0] - complex(32.0, 0.0)) < 1e-12);
}

TEST_CASE("wavefunction norm and normalize") {
  Grid2D g(5.0, 16);
  WaveFunction2D psi(g);
  for (auto& z : psi.values()) z = {2.0, 0.0};
  // 4 * (2L)^2 = 400
  CHECK(psi.norm() == doctest::Approx(400.0));
  CHECK(psi.normalize() == doctest::Approx(400.0));
  CHECK(psi.norm() == doctest::Approx(1.0));
  WaveFunction2D zero(g);
  CHECK_THROWS_AS(zero.normalize(), Error);
}

TEST_CASE("snapshot round trip is exact") {
  Grid2D g(7.5, 16);
  WaveFunction2D psi(g, 12.25);
  for (std::size_t i = 0; i < psi.size(); ++i)
    for (std::size_t j = 0; j < psi.size(); ++j) psi(i, j) = {std::sin(i + 0.5 * j), std::cos(0.3 * i * j)};
  const auto path = std::filesystem::temp_directory_path() / "nsdi_snapshot_test.wf";
  write_snapshot(psi, path);
  CHECK(std::filesystem::file_size(path) == 8 + 8 + 8 + 8 + 8 + 16 * 16 * 16);
  const WaveFunction2D back = read_snapshot(path);
  CHECK(back.grid() == g);
  CHECK(back.time() == 12.25);
  for (std::size_t k = 0; k < psi.values().size(); ++k) CHECK(back.values()[k] == psi.values()[k]);

  // header layout: magic, then version, Nx, L, t
  std::ifstream in(path, std::ios::binary);
  char magic[8];
  in.read(magic, 8);
  CHECK(std::string(magic, 8) == "NSDIWF2D");
  std::uint64_t version = 0, nx = 0;
  double l = 0, t = 0;
  in.read(reinterpret_cast<char*>(&version), 8);
  in.read(reinterpret_cast<char*>(&nx), 8);
  in.read(reinterpret_cast<char*>(&l), 8);
  in.read(reinterpret_cast<char*>(&t), 8);
  CHECK(version == 1);
  CHECK(nx == 16);
  CHECK(l == 7.5);
  CHECK(t == 12.25);
  in.close();

  {
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.write("XXXX", 4);
  }
  CHECK_THROWS_AS(read_snapshot(path), Error);
  std::filesystem::remove(path);
}

TEST_CASE("exchange asymmetry") {
  Grid2D g(5.0, 16);
  WaveFunction2D psi(g);
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = 0; j < 16; ++j) psi(i, j) = double(i + j);
  CHECK(exchange_asymmetry(psi) == 0.0);
  psi(2, 3) += 0.5;
  CHECK(exchange_asymmetry(psi) == doctest::Approx(0.5));
}
