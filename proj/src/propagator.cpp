#include "nsdi/propagator.hpp"

#include <cmath>
#include <string>

#include "nsdi/errors.hpp"

namespace nsdi {

namespace {

void multiply_separable(Exec exec, ComplexArray& v, const ComplexArray& full, const std::vector<complex>& a,
                        std::size_t n) {
  if (exec == Exec::parallel)
    kernels::omp::multiply_separable(v, full, a, n);
  else
    kernels::serial::multiply_separable(v, full, a, n);
}

void multiply_axis_product(Exec exec, ComplexArray& v, const std::vector<complex>& a, std::size_t n) {
  if (exec == Exec::parallel)
    kernels::omp::multiply_axis_product(v, a, n);
  else
    kernels::serial::multiply_axis_product(v, a, n);
}

double sum_abs_sq(Exec exec, const ComplexArray& v, std::size_t n) {
  return exec == Exec::parallel ? kernels::omp::sum_abs_sq(v, n) : kernels::serial::sum_abs_sq(v, n);
}

}  // namespace

SplitOperator2D::SplitOperator2D(PotentialField potential, Exec exec)
    : potential_(std::move(potential)),
      exec_(exec),
      fft_(potential_.grid.size(), potential_.grid.size()),
      kinetic_(potential_.grid.size()),
      dipole_(potential_.grid.size()) {}

void SplitOperator2D::prepare(double dt, TimeMode mode) {
  if (dt == cached_dt_ && mode == cached_mode_) return;
  const std::size_t n = grid().size();
  static_factor_.resize(grid().points());
  for (std::size_t p = 0; p < static_factor_.size(); ++p) {
    const double v = potential_.static_part[p];
    static_factor_[p] = mode == TimeMode::real ? std::polar(1.0, -0.5 * v * dt) : complex{std::exp(-0.5 * v * dt), 0.0};
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = grid().axis().k(i);
    const double phase = 0.5 * k * k * dt;
    kinetic_[i] = (mode == TimeMode::real ? std::polar(1.0, -phase) : complex{std::exp(-phase), 0.0}) * inv_n;
  }
  cached_dt_ = dt;
  cached_mode_ = mode;
}

void SplitOperator2D::step(WaveFunction2D& psi, double field_value, double dt, TimeMode mode) {
  if (!(dt > 0.0)) throw Error(ErrorKind::domain, "time step must be positive");
  if (!(psi.grid() == grid())) throw Error(ErrorKind::domain, "wavefunction grid does not match the propagator");
  prepare(dt, mode);
  const std::size_t n = grid().size();
  // Dipole term -(x1 + x2) E splits into per-axis factors exp(+i x E dt/2).
  for (std::size_t i = 0; i < n; ++i) {
    const double arg = 0.5 * grid().axis().x(i) * field_value * dt;
    dipole_[i] = mode == TimeMode::real ? std::polar(1.0, arg) : complex{std::exp(arg), 0.0};
  }
  auto& v = psi.values();
  multiply_separable(exec_, v, static_factor_, dipole_, n);
  fft_.forward(v);
  multiply_axis_product(exec_, v, kinetic_, n);
  fft_.backward(v);
  multiply_separable(exec_, v, static_factor_, dipole_, n);
  psi.set_time(psi.time() + dt);

  const double norm = sum_abs_sq(exec_, v, n) * grid().cell_area();
  if (!std::isfinite(norm) || norm <= 0.0)
    throw Error(ErrorKind::diverged, "non-finite amplitudes after step at t=" + std::to_string(psi.time()));
  if (mode == TimeMode::imaginary) {
    if (exec_ == Exec::parallel)
      kernels::omp::scale(v, 1.0 / std::sqrt(norm));
    else
      kernels::serial::scale(v, 1.0 / std::sqrt(norm));
  }
}

double SplitOperator2D::kinetic_energy(const WaveFunction2D& psi) {
  const std::size_t n = grid().size();
  if (kinetic_weight_.empty()) {
    kinetic_weight_.resize(grid().points());
    for (std::size_t i = 0; i < n; ++i) {
      const double ki = grid().axis().k(i);
      for (std::size_t j = 0; j < n; ++j) {
        const double kj = grid().axis().k(j);
        kinetic_weight_[grid().index(i, j)] = 0.5 * (ki * ki + kj * kj);
      }
    }
  }
  scratch_ = psi.values();
  fft_.forward(scratch_);
  const double weighted = exec_ == Exec::parallel ? kernels::omp::weighted_abs_sq(scratch_, kinetic_weight_, n)
                                                  : kernels::serial::weighted_abs_sq(scratch_, kinetic_weight_, n);
  // Parseval: sum |FFT psi|^2 = N^2 sum |psi|^2
  return weighted * grid().cell_area() / static_cast<double>(grid().points());
}

double SplitOperator2D::potential_energy(const WaveFunction2D& psi) const {
  const std::size_t n = grid().size();
  const double weighted = exec_ == Exec::parallel
                              ? kernels::omp::weighted_abs_sq(psi.values(), potential_.static_part, n)
                              : kernels::serial::weighted_abs_sq(psi.values(), potential_.static_part, n);
  return weighted * grid().cell_area();
}

double SplitOperator2D::energy(const WaveFunction2D& psi) {
  if (!(psi.grid() == grid())) throw Error(ErrorKind::domain, "wavefunction grid does not match the propagator");
  const double norm = psi.norm();
  if (std::abs(norm - 1.0) > 1e-6)
    throw Error(ErrorKind::invalid_state, "energy needs a normalized state, norm = " + std::to_string(norm));
  return kinetic_energy(psi) + potential_energy(psi);
}

double energy(const WaveFunction2D& psi, const PotentialField& potential) {
  SplitOperator2D op(potential);
  return op.energy(psi);
}

WaveFunction2D gaussian_seed(const Grid2D& grid, double sigma) {
  WaveFunction2D psi(grid);
  const auto& x = grid.axis().coords();
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = 0; j < grid.size(); ++j) psi(i, j) = std::exp(-(x[i] * x[i] + x[j] * x[j]) * inv);
  psi.normalize();
  return psi;
}

GroundState relax_ground_state(const Grid2D& grid, const RelaxOptions& options, Exec exec) {
  if (!(options.tol > 0.0)) throw Error(ErrorKind::domain, "relaxation tolerance must be positive");
  SplitOperator2D op(build_potential(grid), exec);
  GroundState gs{gaussian_seed(grid, options.seed_sigma), 0.0, 0, {}};
  double previous = op.energy(gs.psi);
  double delta = 0.0;
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    op.step(gs.psi, 0.0, options.dt_imag, TimeMode::imaginary);
    const double e = op.energy(gs.psi);
    gs.energy_trace.push_back(e);
    delta = std::abs(e - previous);
    previous = e;
    if (delta < options.tol) {
      if (exec == Exec::parallel)
        kernels::omp::symmetrize(gs.psi.values(), grid.size());
      else
        kernels::serial::symmetrize(gs.psi.values(), grid.size());
      gs.psi.normalize();
      gs.psi.set_time(0.0);
      gs.energy = op.energy(gs.psi);
      gs.iterations = it;
      return gs;
    }
  }
  throw Error(ErrorKind::convergence, "imaginary-time relaxation hit " + std::to_string(options.max_iterations) +
                                          " iterations, last dE = " + std::to_string(delta));
}

SplitOperator1D::SplitOperator1D(Axis axis, double dt, TimeMode mode)
    : axis_(std::move(axis)), dt_(dt), mode_(mode), fft_(axis_.size()), kinetic_(axis_.size()) {
  if (!(dt > 0.0)) throw Error(ErrorKind::domain, "time step must be positive");
  const double inv_n = 1.0 / static_cast<double>(axis_.size());
  for (std::size_t i = 0; i < axis_.size(); ++i) {
    const double phase = 0.5 * axis_.k(i) * axis_.k(i) * dt;
    kinetic_[i] = (mode == TimeMode::real ? std::polar(1.0, -phase) : complex{std::exp(-phase), 0.0}) * inv_n;
  }
}

void SplitOperator1D::step(complex* phi, std::span<const double> potential) const {
  const std::size_t n = axis_.size();
  auto half_potential = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      const double arg = 0.5 * potential[i] * dt_;
      phi[i] *= mode_ == TimeMode::real ? std::polar(1.0, -arg) : complex{std::exp(-arg), 0.0};
    }
  };
  half_potential();
  kinetic(phi);
  half_potential();
  if (mode_ == TimeMode::imaginary) {
    const double s = 1.0 / std::sqrt(norm(phi));
    for (std::size_t i = 0; i < n; ++i) phi[i] *= s;
  }
}

void SplitOperator1D::kinetic(complex* phi) const {
  fft_.forward(phi);
  for (std::size_t i = 0; i < axis_.size(); ++i) phi[i] *= kinetic_[i];
  fft_.backward(phi);
}

double SplitOperator1D::norm(const complex* phi) const {
  double s = 0.0;
  for (std::size_t i = 0; i < axis_.size(); ++i) s += std::norm(phi[i]);
  return s * axis_.spacing();
}

double SplitOperator1D::energy(const complex* phi, std::span<const double> potential) const {
  const std::size_t n = axis_.size();
  ComplexArray buf(phi, phi + n);
  fft_.forward(buf);
  double kinetic = 0.0;
  for (std::size_t i = 0; i < n; ++i) kinetic += 0.5 * axis_.k(i) * axis_.k(i) * std::norm(buf[i]);
  kinetic /= static_cast<double>(n);
  double pot = 0.0;
  double nrm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    pot += potential[i] * std::norm(phi[i]);
    nrm += std::norm(phi[i]);
  }
  return (kinetic + pot) / nrm;
}

GroundState1D relax_ground_state_1d(const Axis& axis, std::span<const double> potential, const RelaxOptions& options) {
  if (!(options.tol > 0.0)) throw Error(ErrorKind::domain, "relaxation tolerance must be positive");
  if (potential.size() != axis.size()) throw Error(ErrorKind::domain, "potential does not match the axis");
  SplitOperator1D op(axis, options.dt_imag, TimeMode::imaginary);
  GroundState1D gs{ComplexArray(axis.size()), 0.0, 0};
  const double inv = 1.0 / (2.0 * options.seed_sigma * options.seed_sigma);
  for (std::size_t i = 0; i < axis.size(); ++i) gs.phi[i] = std::exp(-axis.x(i) * axis.x(i) * inv);
  const double s = 1.0 / std::sqrt(op.norm(gs.phi.data()));
  for (auto& v : gs.phi) v *= s;
  double previous = op.energy(gs.phi.data(), potential);
  double delta = 0.0;
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    op.step(gs.phi.data(), potential);
    const double e = op.energy(gs.phi.data(), potential);
    delta = std::abs(e - previous);
    previous = e;
    if (delta < options.tol) {
      gs.energy = e;
      gs.iterations = it;
      return gs;
    }
  }
  throw Error(ErrorKind::convergence, "1D imaginary-time relaxation hit " + std::to_string(options.max_iterations) +
                                          " iterations, last dE = " + std::to_string(delta));
}

}  // namespace nsdi
