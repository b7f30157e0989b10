// Serial reference vs OpenMP kernels: wall time per call on a 2D grid.
//   bench_kernels [--points N] [--threads T] [--reps R]

#include <CLI11.hpp>
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "nsdi/absorber.hpp"
#include "nsdi/bohmian.hpp"
#include "nsdi/fft.hpp"
#include "nsdi/kernels.hpp"
#include "nsdi/propagator.hpp"

using namespace nsdi;

namespace {

double seconds_per_call(const std::function<void()>& f, int reps) {
  f();
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

void row(const char* name, double serial, double parallel) {
  std::printf("%-22s %12.3f %12.3f %8.2fx\n", name, 1e3 * serial, 1e3 * parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel benchmark"};
  std::size_t points = 512;
  int threads = omp_get_max_threads();
  int reps = 20;
  app.add_option("--points", points, "grid points per axis");
  app.add_option("--threads", threads, "OpenMP threads for the parallel column");
  app.add_option("--reps", reps, "timed repetitions");
  CLI11_PARSE(app, argc, argv);
  omp_set_num_threads(threads);

  const Grid2D g(100.0, points);
  WaveFunction2D psi = gaussian_seed(g, 3.0);
  const std::size_t n = g.size();
  std::vector<complex> axis_phase(n, std::polar(1.0, 0.01));
  std::vector<complex> full(g.points(), std::polar(1.0, -0.02));
  const auto outside = beyond_threshold(g.axis(), 5.0);
  AbsorberMask mask = make_absorber(g.axis());

  std::printf("grid %zu^2, %d threads, %d reps\n", n, threads, reps);
  std::printf("%-22s %12s %12s %9s\n", "kernel", "serial ms", "omp ms", "speedup");

  auto& v = psi.values();
  row("multiply_separable",
      seconds_per_call([&] { kernels::serial::multiply_separable(v, full, axis_phase, n); }, reps),
      seconds_per_call([&] { kernels::omp::multiply_separable(v, full, axis_phase, n); }, reps));
  row("sum_abs_sq", seconds_per_call([&] { (void)kernels::serial::sum_abs_sq(v, n); }, reps),
      seconds_per_call([&] { (void)kernels::omp::sum_abs_sq(v, n); }, reps));
  row("region_sums", seconds_per_call([&] { (void)kernels::serial::region_sums(v, outside, n); }, reps),
      seconds_per_call([&] { (void)kernels::omp::region_sums(v, outside, n); }, reps));
  row("mask_and_tally",
      seconds_per_call([&] { (void)kernels::serial::mask_and_tally(v, mask.profile, outside, n); }, reps),
      seconds_per_call([&] { (void)kernels::omp::mask_and_tally(v, mask.profile, outside, n); }, reps));
  row("symmetrize", seconds_per_call([&] { kernels::serial::symmetrize(v, n); }, reps),
      seconds_per_call([&] { kernels::omp::symmetrize(v, n); }, reps));

  psi = gaussian_seed(g, 3.0);
  SplitOperator2D serial_op(build_potential(g), Exec::serial);
  SplitOperator2D omp_op(build_potential(g), Exec::parallel);
  set_fft_threads(1);
  const double t_serial = seconds_per_call([&] { serial_op.step(psi, 0.05, 0.03, TimeMode::real); }, reps);
  set_fft_threads(threads);
  const double t_omp = seconds_per_call([&] { omp_op.step(psi, 0.05, 0.03, TimeMode::real); }, reps);
  row("split step", t_serial, t_omp);

  WaveFunction2D prev = psi;
  omp_op.step(psi, 0.05, 0.03, TimeMode::real);
  TrajectoryEnsemble a = sample_initial(prev, 10000, 1);
  TrajectoryEnsemble b = a;
  row("walker advance (1e4)",
      seconds_per_call([&] { advance_walkers(a, prev, psi, 0.03, {}, Exec::serial); }, reps),
      seconds_per_call([&] { advance_walkers(b, prev, psi, 0.03, {}, Exec::parallel); }, reps));
  return 0;
}
