#include "nsdi/wavefunction.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "nsdi/errors.hpp"
#include "nsdi/kernels.hpp"

namespace nsdi {

static_assert(std::endian::native == std::endian::little, "snapshot IO assumes a little-endian host");

WaveFunction2D::WaveFunction2D(Grid2D grid, double time)
    : grid_(std::move(grid)), time_(time), values_(grid_.points(), complex{0.0, 0.0}) {}

double WaveFunction2D::norm() const {
  return kernels::omp::sum_abs_sq(values_, grid_.size()) * grid_.cell_area();
}

double WaveFunction2D::normalize() {
  const double n = norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw Error(ErrorKind::invalid_state, "cannot normalize a zero or non-finite state");
  kernels::omp::scale(values_, 1.0 / std::sqrt(n));
  return n;
}

double exchange_asymmetry(const WaveFunction2D& psi) {
  const std::size_t n = psi.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) worst = std::max(worst, std::abs(psi(i, j) - psi(j, i)));
  return worst;
}

namespace {

template <typename T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

}  // namespace

void write_snapshot(const WaveFunction2D& psi, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  out.write(kSnapshotMagic, sizeof(kSnapshotMagic));
  put<std::uint64_t>(out, kSnapshotVersion);
  put<std::uint64_t>(out, psi.size());
  put<double>(out, psi.grid().half_width());
  put<double>(out, psi.time());
  out.write(reinterpret_cast<const char*>(psi.values().data()),
            static_cast<std::streamsize>(psi.values().size() * sizeof(complex)));
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

WaveFunction2D read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kSnapshotMagic, sizeof(magic)) != 0)
    throw Error(ErrorKind::io, path.string() + " is not a wavefunction snapshot");
  const auto version = get<std::uint64_t>(in);
  if (version != kSnapshotVersion) throw Error(ErrorKind::io, "unsupported snapshot version " + std::to_string(version));
  const auto n = get<std::uint64_t>(in);
  const auto half_width = get<double>(in);
  const auto t = get<double>(in);
  if (!in || n == 0 || (n & (n - 1)) != 0) throw Error(ErrorKind::io, "corrupt snapshot header in " + path.string());
  WaveFunction2D psi(Grid2D(half_width, n), t);
  in.read(reinterpret_cast<char*>(psi.values().data()),
          static_cast<std::streamsize>(psi.values().size() * sizeof(complex)));
  if (!in) throw Error(ErrorKind::io, "truncated snapshot " + path.string());
  return psi;
}

}  // namespace nsdi
