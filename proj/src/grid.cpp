#include "nsdi/grid.hpp"

#include <numbers>
#include <string>

#include "nsdi/errors.hpp"

namespace nsdi {

Axis::Axis(double half_width, std::size_t points)
    : half_width_(half_width), points_(points), spacing_(2.0 * half_width / static_cast<double>(points)) {
  if (!(half_width > 0.0)) throw Error(ErrorKind::domain, "grid half width must be positive");
  if (points < 2 || (points & (points - 1)) != 0)
    throw Error(ErrorKind::domain, "points per axis must be a power of two, got " + std::to_string(points));
  coords_.resize(points);
  momenta_.resize(points);
  const double dk = momentum_spacing();
  const auto n = static_cast<std::ptrdiff_t>(points);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    coords_[i] = x(static_cast<std::size_t>(i));
    momenta_[i] = dk * static_cast<double>(i < n / 2 ? i : i - n);
  }
}

double Axis::momentum_spacing() const noexcept { return std::numbers::pi / half_width_; }

}  // namespace nsdi
