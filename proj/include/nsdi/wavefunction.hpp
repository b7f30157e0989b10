#pragma once

#include <cstdint>
#include <filesystem>

#include "nsdi/fft.hpp"
#include "nsdi/grid.hpp"

namespace nsdi {

/// Two-electron amplitude Psi(x1, x2, t) sampled on a square grid.
class WaveFunction2D {
 public:
  explicit WaveFunction2D(Grid2D grid, double time = 0.0);

  const Grid2D& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return grid_.size(); }
  double time() const noexcept { return time_; }
  void set_time(double t) noexcept { time_ = t; }

  ComplexArray& values() noexcept { return values_; }
  const ComplexArray& values() const noexcept { return values_; }

  complex& operator()(std::size_t i, std::size_t j) noexcept { return values_[grid_.index(i, j)]; }
  const complex& operator()(std::size_t i, std::size_t j) const noexcept { return values_[grid_.index(i, j)]; }

  /// Integral of |Psi|^2 over the box.
  double norm() const;
  /// Rescales to unit norm and returns the norm before rescaling.
  double normalize();

 private:
  Grid2D grid_;
  double time_;
  ComplexArray values_;
};

/// Largest |Psi(x1,x2) - Psi(x2,x1)| over the grid.
double exchange_asymmetry(const WaveFunction2D& psi);

// Snapshot record, little-endian: 8-byte magic, u64 version, u64 Nx, f64 L,
// f64 t, then Nx*Nx (re, im) f64 pairs with x1 as the slow index.
inline constexpr char kSnapshotMagic[8] = {'N', 'S', 'D', 'I', 'W', 'F', '2', 'D'};
inline constexpr std::uint64_t kSnapshotVersion = 1;

void write_snapshot(const WaveFunction2D& psi, const std::filesystem::path& path);
WaveFunction2D read_snapshot(const std::filesystem::path& path);

}  // namespace nsdi
