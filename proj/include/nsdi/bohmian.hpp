#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "nsdi/kernels.hpp"
#include "nsdi/wavefunction.hpp"

namespace nsdi {

struct Walker {
  double x1 = 0.0;
  double x2 = 0.0;
};

struct Velocity {
  double v1 = 0.0;
  double v2 = 0.0;
};

/// Regularization of the guidance equation near nodes of Psi.
struct GuidanceOptions {
  double node_epsilon = 1e-12;  // relative to max |Psi|^2
  double velocity_cap = 10.0;   // a.u.
  // Walkers with |x_i| >= freeze_radius stop moving: the absorber has removed
  // the amplitude that would guide them there.
  double freeze_radius = std::numeric_limits<double>::infinity();
};

/// Walker pairs (x1^k, x2^k) and their sampled history. History is stored
/// sample-major: position of walker k at sample m is history[m * count + k].
class TrajectoryEnsemble {
 public:
  TrajectoryEnsemble(std::vector<Walker> initial, std::uint64_t seed);

  std::size_t size() const noexcept { return current_.size(); }
  std::uint64_t seed() const noexcept { return seed_; }

  const std::vector<Walker>& current() const noexcept { return current_; }
  std::vector<Walker>& current() noexcept { return current_; }
  const std::vector<char>& alive() const noexcept { return alive_; }
  std::vector<char>& alive() noexcept { return alive_; }
  std::size_t dead_count() const noexcept;

  /// Appends the current positions as a sample at time t.
  void record(double t);
  const std::vector<double>& sample_times() const noexcept { return times_; }
  const Walker& sample(std::size_t m, std::size_t k) const noexcept { return history_[m * size() + k]; }
  /// Index of the sample recorded at t; throws ErrorKind::domain if none.
  std::size_t sample_index(double t) const;

  /// x_i^k(t) for all samples with t in [t_a, t_b]; electron is 1 or 2.
  std::vector<double> trace(std::size_t walker, int electron, double t_a, double t_b) const;
  std::vector<double> times_in(double t_a, double t_b) const;

 private:
  std::vector<Walker> current_;
  std::vector<char> alive_;
  std::uint64_t seed_;
  std::vector<double> times_;
  std::vector<Walker> history_;
};

/// N walkers distributed as |psi|^2: inverse CDF over grid cells, then uniform
/// jitter inside the chosen cell. Deterministic for a given seed.
TrajectoryEnsemble sample_initial(const WaveFunction2D& psi, std::size_t count, std::uint64_t seed);
std::vector<Walker> sample_positions(const WaveFunction2D& psi, std::size_t count, std::uint64_t seed);

/// de Broglie-Bohm velocity Im[(dPsi/dx_i) / Psi] at an arbitrary point: the
/// phase gradient is taken on the grid with a fourth-order stencil of
/// nearest-neighbour phase differences, then interpolated bilinearly. Throws
/// ErrorKind::out_of_domain outside the stencil-safe interior.
Velocity velocity_at(const WaveFunction2D& psi, Walker point, const GuidanceOptions& options = {});

struct AdvanceReport {
  std::size_t newly_dead = 0;
  std::size_t clamped = 0;  // velocity evaluations that hit the cap
  std::size_t frozen = 0;   // walkers held at the absorber
};

/// Explicit midpoint step of every live walker between two consecutive
/// snapshots; the midpoint velocity uses (psi_t + psi_next) / 2.
AdvanceReport advance_walkers(TrajectoryEnsemble& ensemble, const WaveFunction2D& psi_t,
                              const WaveFunction2D& psi_next, double dt, const GuidanceOptions& options = {},
                              Exec exec = Exec::parallel);

enum class Channel { nsdi, single, bound, dead };
enum class Quadrant { q13, q24, none };

struct Classification {
  Channel channel;
  Quadrant quadrant;
};

Classification classify_point(Walker w, double threshold = 5.0);

/// Channel of every walker at the sample recorded at `when`.
std::vector<Classification> classify(const TrajectoryEnsemble& ensemble, double when, double threshold = 5.0);

const char* to_string(Channel c);
const char* to_string(Quadrant q);

}  // namespace nsdi
