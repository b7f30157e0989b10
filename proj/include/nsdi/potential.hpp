#pragma once

#include <vector>

#include "nsdi/grid.hpp"

namespace nsdi {

/// Soft-core 1D helium: each electron sees -2/sqrt(1+x^2) from the nucleus and
/// the pair repels through +1/sqrt(1+(x1-x2)^2). The laser couples through the
/// dipole term -(x1+x2) E(t), kept separate from the static part.
struct PotentialField {
  Grid2D grid;
  std::vector<double> static_part;  // N*N, x1-major
  std::vector<double> dipole;       // -(x1 + x2)

  double at(std::size_t i, std::size_t j) const noexcept { return static_part[grid.index(i, j)]; }
  double total(std::size_t i, std::size_t j, double field) const noexcept {
    return static_part[grid.index(i, j)] + dipole[grid.index(i, j)] * field;
  }
};

double soft_core(double x, double charge = 1.0) noexcept;

/// V(x1, x2) without the field term.
double helium_potential(double x1, double x2) noexcept;

PotentialField build_potential(const Grid2D& grid);

}  // namespace nsdi
