#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

namespace nsdi {

using complex = std::complex<double>;

/// Allocator returning SIMD-aligned storage so any buffer can be handed to a
/// precomputed FFTW plan through the new-array execute interface.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  AlignedAllocator() noexcept = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n);
  void deallocate(T* p, std::size_t) noexcept;

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

void* aligned_alloc_bytes(std::size_t bytes);
void aligned_free_bytes(void* p) noexcept;

template <typename T>
T* AlignedAllocator<T>::allocate(std::size_t n) {
  return static_cast<T*>(aligned_alloc_bytes(n * sizeof(T)));
}

template <typename T>
void AlignedAllocator<T>::deallocate(T* p, std::size_t) noexcept {
  aligned_free_bytes(p);
}

using ComplexArray = std::vector<complex, AlignedAllocator<complex>>;

/// In-place complex FFT of fixed shape. forward() is unnormalized; inverse()
/// divides by the number of points so inverse(forward(x)) == x.
class FftPlan {
 public:
  /// 1D transform of length n.
  explicit FftPlan(std::size_t n);
  /// 2D transform of shape rows x cols (row-major).
  FftPlan(std::size_t rows, std::size_t cols);
  ~FftPlan();
  FftPlan(FftPlan&&) noexcept;
  FftPlan& operator=(FftPlan&&) noexcept;
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::size_t size() const noexcept { return size_; }

  void forward(complex* data) const;
  /// Unnormalized backward transform.
  void backward(complex* data) const;
  void inverse(complex* data) const;

  void forward(ComplexArray& data) const { forward(data.data()); }
  void backward(ComplexArray& data) const { backward(data.data()); }
  void inverse(ComplexArray& data) const { inverse(data.data()); }

 private:
  struct Plans;
  std::unique_ptr<Plans> plans_;
  std::size_t size_ = 0;
};

/// Number of threads FFTW may use inside one transform. Call before planning.
void set_fft_threads(int threads);

}  // namespace nsdi
