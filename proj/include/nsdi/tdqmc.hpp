#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nsdi/bohmian.hpp"
#include "nsdi/fft.hpp"
#include "nsdi/grid.hpp"
#include "nsdi/observables.hpp"
#include "nsdi/propagator.hpp"
#include "nsdi/wavefunction.hpp"

namespace nsdi {

/// Ensemble of walker pairs, each carrying two one-body guide waves phi_1^k,
/// phi_2^k on a shared 1D axis. Guide storage is configuration-major:
/// [k][electron][x].
class TdqmcEnsemble {
 public:
  TdqmcEnsemble(Axis axis, std::vector<Walker> walkers, std::uint64_t seed);

  const Axis& axis() const noexcept { return axis_; }
  std::size_t size() const noexcept { return walkers_.size(); }
  std::uint64_t seed() const noexcept { return seed_; }

  complex* guide(std::size_t k, int electron) noexcept {
    return guides_.data() + (2 * k + static_cast<std::size_t>(electron - 1)) * axis_.size();
  }
  const complex* guide(std::size_t k, int electron) const noexcept {
    return guides_.data() + (2 * k + static_cast<std::size_t>(electron - 1)) * axis_.size();
  }

  std::vector<Walker>& walkers() noexcept { return walkers_; }
  const std::vector<Walker>& walkers() const noexcept { return walkers_; }
  std::vector<char>& alive() noexcept { return alive_; }
  const std::vector<char>& alive() const noexcept { return alive_; }
  std::size_t dead_count() const noexcept;

  /// Freezes the current walker positions as the channel tags (pulse end).
  void tag_channels();
  bool tagged() const noexcept { return !tags_.empty(); }
  /// Positions used for channel selection: tagged ones if present.
  const std::vector<Walker>& selection_positions() const noexcept { return tags_.empty() ? walkers_ : tags_; }

 private:
  Axis axis_;
  std::vector<Walker> walkers_;
  std::vector<char> alive_;
  std::uint64_t seed_;
  ComplexArray guides_;
  std::vector<Walker> tags_;
};

/// Walkers sampled from |psi0|^2; phi_1^k is the normalized slice
/// psi0(., x2^k) and phi_2^k the slice psi0(x1^k, .), interpolated linearly
/// between grid lines.
TdqmcEnsemble tdqmc_init(const WaveFunction2D& psi0, std::size_t count, std::uint64_t seed);

struct TdqmcOptions {
  bool interaction = true;
  double smoothing_width = 0.0;  // Gaussian smoothing of the e-e term, 0 = bare soft-core
  bool absorber = true;
  double absorber_fraction = 0.9;
  GuidanceOptions guidance;
};

struct TdqmcStepReport {
  std::size_t newly_dead = 0;
};

/// Advances every configuration by dt: each guide wave takes one split step in
/// its own effective potential
///   -2/sqrt(1+x^2) + 1/sqrt(1+(x - x_partner)^2) - x E,
/// the walker follows its own guide by the midpoint rule, then the guide is
/// masked at the box edge and renormalized.
class TdqmcPropagator {
 public:
  TdqmcPropagator(const Axis& axis, double dt, TdqmcOptions options = {});

  TdqmcStepReport step(TdqmcEnsemble& ensemble, double field_value, Exec exec = Exec::parallel) const;

  double dt() const noexcept { return op_.dt(); }

 private:
  double interaction_at(double d) const;

  TdqmcOptions options_;
  SplitOperator1D op_;
  std::vector<double> nucleus_;      // -2/sqrt(1+x^2)
  std::vector<double> mask_;         // absorber profile
  // exp(-i V_ee(d) dt/2) on a fine offset grid d = (m / kTableRefine - N) dx
  std::vector<complex> ee_table_;
};

TdqmcStepReport tdqmc_step(TdqmcEnsemble& ensemble, double field_value, double dt, const TdqmcOptions& options = {});

enum class Selector { all, nsdi, q13, q24 };

const char* to_string(Selector s);
bool selects(Selector s, Walker w, double threshold = 5.0);

std::size_t count_selected(const TdqmcEnsemble& ensemble, Selector selector, double threshold = 5.0);

/// Unnormalized sum over selected configurations of phi(x) phi*(x') dx.
/// `selected` receives the number of contributing configurations.
Eigen::MatrixXcd accumulate_density(const TdqmcEnsemble& ensemble, Selector selector, int electron,
                                    std::size_t& selected, double threshold = 5.0);

/// Trace-normalized density matrix over the selected configurations.
/// Throws ErrorKind::insufficient_statistics below min_selected.
ReducedDensityMatrix restricted_density_matrix(const TdqmcEnsemble& ensemble, Selector selector, int electron = 1,
                                               std::size_t min_selected = 10, double threshold = 5.0);

struct ChannelEntropy {
  Selector selector;
  std::size_t selected = 0;
  std::optional<double> entropy;  // empty when the selection was too small
};

/// Entropy of each channel {all, NSDI, Q13, Q24}. Channels with fewer than
/// min_selected configurations come back without a value.
std::vector<ChannelEntropy> entropy_by_channel(const TdqmcEnsemble& ensemble, int electron = 1,
                                               std::size_t min_selected = 10);

}  // namespace nsdi
