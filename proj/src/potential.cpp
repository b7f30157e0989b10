#include "nsdi/potential.hpp"

#include <cmath>

namespace nsdi {

double soft_core(double x, double charge) noexcept { return charge / std::sqrt(1.0 + x * x); }

double helium_potential(double x1, double x2) noexcept {
  return -soft_core(x1, 2.0) - soft_core(x2, 2.0) + soft_core(x1 - x2);
}

PotentialField build_potential(const Grid2D& grid) {
  PotentialField pot{grid, std::vector<double>(grid.points()), std::vector<double>(grid.points())};
  const auto& x = grid.axis().coords();
  const std::size_t n = grid.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      pot.static_part[grid.index(i, j)] = helium_potential(x[i], x[j]);
      pot.dipole[grid.index(i, j)] = -(x[i] + x[j]);
    }
  }
  return pot;
}

}  // namespace nsdi
