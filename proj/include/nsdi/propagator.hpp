#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nsdi/fft.hpp"
#include "nsdi/kernels.hpp"
#include "nsdi/potential.hpp"
#include "nsdi/wavefunction.hpp"

namespace nsdi {

enum class TimeMode { real, imaginary };

/// Second-order split-operator propagator for the two-electron Hamiltonian:
/// half potential step, full kinetic step in momentum space, half potential
/// step. The field enters the potential half-steps at the value supplied by the
/// caller, which should be E at the step midpoint.
///
/// Both the kinetic and the dipole factors are separable, so per step only two
/// length-N vectors are rebuilt; the static potential factor is cached per
/// (dt, mode).
class SplitOperator2D {
 public:
  explicit SplitOperator2D(PotentialField potential, Exec exec = Exec::parallel);

  const PotentialField& potential() const noexcept { return potential_; }
  const Grid2D& grid() const noexcept { return potential_.grid; }

  /// Advances psi by dt. Imaginary mode propagates exp(-H dt) and renormalizes.
  /// Throws ErrorKind::diverged if the result is not finite.
  void step(WaveFunction2D& psi, double field_value, double dt, TimeMode mode);

  /// <psi|H|psi> with the field off; requires a unit-norm state.
  double energy(const WaveFunction2D& psi);
  double kinetic_energy(const WaveFunction2D& psi);
  double potential_energy(const WaveFunction2D& psi) const;

 private:
  void prepare(double dt, TimeMode mode);

  PotentialField potential_;
  Exec exec_;
  FftPlan fft_;
  ComplexArray scratch_;
  ComplexArray static_factor_;     // exp(-i V dt/2) or exp(-V dt/2)
  std::vector<complex> kinetic_;   // per-axis kinetic factor, includes 1/N
  std::vector<complex> dipole_;    // per-axis field factor for this step
  std::vector<double> kinetic_weight_;  // (k1^2 + k2^2)/2, built on first energy() call
  double cached_dt_ = -1.0;
  TimeMode cached_mode_ = TimeMode::real;
};

struct RelaxOptions {
  double dt_imag = 0.01;
  double tol = 1e-10;
  std::size_t max_iterations = 200000;
  double seed_sigma = 1.0;
};

struct GroundState {
  WaveFunction2D psi;
  double energy;
  std::size_t iterations;
  std::vector<double> energy_trace;  // energy after every imaginary-time step
};

/// Imaginary-time relaxation from a symmetric Gaussian seed until successive
/// energies differ by less than tol. The converged state is symmetrized under
/// x1 <-> x2. Throws ErrorKind::convergence if the iteration cap is hit.
GroundState relax_ground_state(const Grid2D& grid, const RelaxOptions& options = {}, Exec exec = Exec::parallel);

double energy(const WaveFunction2D& psi, const PotentialField& potential);

/// One-electron split-operator step on a 1D axis for a fixed (dt, mode). The
/// potential is passed per call so each walker configuration can carry its own.
/// Safe to call concurrently on different arrays.
class SplitOperator1D {
 public:
  SplitOperator1D(Axis axis, double dt, TimeMode mode);

  const Axis& axis() const noexcept { return axis_; }
  double dt() const noexcept { return dt_; }

  /// phi must be AlignedAllocator storage of axis().size() points. Imaginary
  /// mode renormalizes to unit norm.
  void step(complex* phi, std::span<const double> potential) const;
  /// Full kinetic step only: FFT, exp(-i k^2 dt/2), inverse FFT.
  void kinetic(complex* phi) const;
  /// <phi|h|phi> / <phi|phi> for h = -1/2 d^2/dx^2 + potential.
  double energy(const complex* phi, std::span<const double> potential) const;
  double norm(const complex* phi) const;

 private:
  Axis axis_;
  double dt_;
  TimeMode mode_;
  FftPlan fft_;
  std::vector<complex> kinetic_;
};

struct GroundState1D {
  ComplexArray phi;
  double energy;
  std::size_t iterations;
};

/// 1D analogue of relax_ground_state for an arbitrary potential.
GroundState1D relax_ground_state_1d(const Axis& axis, std::span<const double> potential,
                                    const RelaxOptions& options = {});

/// Symmetric Gaussian exp(-(x1^2 + x2^2) / (2 sigma^2)), unit norm.
WaveFunction2D gaussian_seed(const Grid2D& grid, double sigma);

}  // namespace nsdi
