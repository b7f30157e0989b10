#include "nsdi/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <new>

namespace nsdi {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

int& fft_threads() {
  static int threads = 1;
  return threads;
}

void init_threads_once() {
  static const bool ok = fftw_init_threads() != 0;
  (void)ok;
}

fftw_complex* as_fftw(complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

void* aligned_alloc_bytes(std::size_t bytes) {
  void* p = fftw_malloc(bytes == 0 ? 1 : bytes);
  if (p == nullptr) throw std::bad_alloc();
  return p;
}

void aligned_free_bytes(void* p) noexcept { fftw_free(p); }

void set_fft_threads(int threads) {
  std::lock_guard lock(planner_mutex());
  fft_threads() = threads < 1 ? 1 : threads;
}

struct FftPlan::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  Plans() = default;
  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

FftPlan::FftPlan(std::size_t n) : plans_(std::make_unique<Plans>()), size_(n) {
  std::lock_guard lock(planner_mutex());
  init_threads_once();
  fftw_plan_with_nthreads(1);
  ComplexArray scratch(n);
  const int len = static_cast<int>(n);
  plans_->forward = fftw_plan_dft_1d(len, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_FORWARD,
                                     FFTW_ESTIMATE);
  plans_->backward = fftw_plan_dft_1d(len, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_BACKWARD,
                                      FFTW_ESTIMATE);
}

FftPlan::FftPlan(std::size_t rows, std::size_t cols) : plans_(std::make_unique<Plans>()), size_(rows * cols) {
  std::lock_guard lock(planner_mutex());
  init_threads_once();
  fftw_plan_with_nthreads(fft_threads());
  ComplexArray scratch(rows * cols);
  const int r = static_cast<int>(rows);
  const int c = static_cast<int>(cols);
  plans_->forward =
      fftw_plan_dft_2d(r, c, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_FORWARD, FFTW_ESTIMATE);
  plans_->backward =
      fftw_plan_dft_2d(r, c, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_BACKWARD, FFTW_ESTIMATE);
}

FftPlan::~FftPlan() = default;

FftPlan::FftPlan(FftPlan&&) noexcept = default;
FftPlan& FftPlan::operator=(FftPlan&&) noexcept = default;

void FftPlan::forward(complex* data) const { fftw_execute_dft(plans_->forward, as_fftw(data), as_fftw(data)); }

void FftPlan::backward(complex* data) const { fftw_execute_dft(plans_->backward, as_fftw(data), as_fftw(data)); }

void FftPlan::inverse(complex* data) const {
  backward(data);
  const double scale = 1.0 / static_cast<double>(size_);
  for (std::size_t i = 0; i < size_; ++i) data[i] *= scale;
}

}  // namespace nsdi
