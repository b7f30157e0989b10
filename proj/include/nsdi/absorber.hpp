#pragma once

#include <vector>

#include "nsdi/kernels.hpp"
#include "nsdi/wavefunction.hpp"

namespace nsdi {

/// Separable boundary mask m(x1) m(x2). The 1D profile is 1 for |x| <= r_abs
/// and falls as cos^(exponent) to zero at the box edge. Probability removed by
/// the mask is booked into DI / SI / bound according to where it was removed.
struct AbsorberMask {
  Axis axis;
  double inner_radius;
  double threshold;
  std::vector<double> profile;  // m(x_i)
  std::vector<char> outside;    // |x_i| > threshold
  ChannelSums absorbed;         // running totals, probability units

  double value(std::size_t i, std::size_t j) const noexcept { return profile[i] * profile[j]; }
};

inline constexpr double kIonizationThreshold = 5.0;

/// Default absorber: flat out to 0.9 L, cos^(1/8) ramp over the outer 10%.
AbsorberMask make_absorber(const Axis& axis, double inner_fraction = 0.9, double exponent = 0.125,
                           double threshold = kIonizationThreshold);

/// Flags |x_i| > threshold on one axis.
std::vector<char> beyond_threshold(const Axis& axis, double threshold);

/// Multiplies psi by the mask, adds the removed probability to the mask's
/// accumulators and returns what was removed in this call.
ChannelSums apply_absorber(WaveFunction2D& psi, AbsorberMask& mask, Exec exec = Exec::parallel);

}  // namespace nsdi
