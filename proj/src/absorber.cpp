#include "nsdi/absorber.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nsdi/errors.hpp"

namespace nsdi {

std::vector<char> beyond_threshold(const Axis& axis, double threshold) {
  std::vector<char> flags(axis.size());
  for (std::size_t i = 0; i < axis.size(); ++i) flags[i] = std::abs(axis.x(i)) > threshold ? 1 : 0;
  return flags;
}

AbsorberMask make_absorber(const Axis& axis, double inner_fraction, double exponent, double threshold) {
  if (!(inner_fraction > 0.0 && inner_fraction <= 1.0))
    throw Error(ErrorKind::domain, "absorber inner fraction must lie in (0, 1]");
  const double r_abs = inner_fraction * axis.half_width();
  const double width = axis.half_width() - r_abs;
  AbsorberMask mask{axis, r_abs, threshold, std::vector<double>(axis.size(), 1.0), beyond_threshold(axis, threshold), {}};
  for (std::size_t i = 0; i < axis.size(); ++i) {
    const double depth = std::abs(axis.x(i)) - r_abs;
    if (depth <= 0.0 || width <= 0.0) continue;
    const double c = std::cos(0.5 * std::numbers::pi * std::min(depth / width, 1.0));
    mask.profile[i] = c > 0.0 ? std::pow(c, exponent) : 0.0;
  }
  return mask;
}

ChannelSums apply_absorber(WaveFunction2D& psi, AbsorberMask& mask, Exec exec) {
  if (!(psi.grid().axis() == mask.axis)) throw Error(ErrorKind::domain, "absorber and wavefunction grids differ");
  ChannelSums removed = exec == Exec::parallel
                            ? kernels::omp::mask_and_tally(psi.values(), mask.profile, mask.outside, psi.size())
                            : kernels::serial::mask_and_tally(psi.values(), mask.profile, mask.outside, psi.size());
  const double area = psi.grid().cell_area();
  removed.double_ion *= area;
  removed.single_ion *= area;
  removed.bound *= area;
  mask.absorbed += removed;
  return removed;
}

}  // namespace nsdi
