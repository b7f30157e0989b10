#pragma once

#include <cstddef>
#include <vector>

namespace nsdi {

/// Uniform axis on [-L, L) with a power-of-two number of points. Node i sits at
/// x_i = -L + i*dx; the momentum grid follows the standard FFT ordering.
class Axis {
 public:
  Axis(double half_width, std::size_t points);

  double half_width() const noexcept { return half_width_; }
  std::size_t size() const noexcept { return points_; }
  double spacing() const noexcept { return spacing_; }
  double momentum_spacing() const noexcept;

  double x(std::size_t i) const noexcept { return -half_width_ + spacing_ * static_cast<double>(i); }
  double k(std::size_t n) const noexcept { return momenta_[n]; }

  const std::vector<double>& coords() const noexcept { return coords_; }
  const std::vector<double>& momenta() const noexcept { return momenta_; }

  /// Position in units of dx measured from the first node.
  double fractional_index(double x) const noexcept { return (x + half_width_) / spacing_; }

  bool operator==(const Axis& other) const noexcept {
    return points_ == other.points_ && half_width_ == other.half_width_;
  }

 private:
  double half_width_;
  std::size_t points_;
  double spacing_;
  std::vector<double> coords_;
  std::vector<double> momenta_;
};

/// Square grid with the same axis for both electrons. Storage is row-major with
/// x1 as the slow index: value(i, j) = Psi(x1_i, x2_j).
class Grid2D {
 public:
  Grid2D(double half_width, std::size_t points) : axis_(half_width, points) {}
  explicit Grid2D(Axis axis) : axis_(std::move(axis)) {}

  const Axis& axis() const noexcept { return axis_; }
  std::size_t size() const noexcept { return axis_.size(); }
  std::size_t points() const noexcept { return axis_.size() * axis_.size(); }
  double spacing() const noexcept { return axis_.spacing(); }
  double half_width() const noexcept { return axis_.half_width(); }
  double cell_area() const noexcept { return axis_.spacing() * axis_.spacing(); }
  std::size_t index(std::size_t i, std::size_t j) const noexcept { return i * axis_.size() + j; }

  bool operator==(const Grid2D& other) const noexcept { return axis_ == other.axis_; }

 private:
  Axis axis_;
};

}  // namespace nsdi
