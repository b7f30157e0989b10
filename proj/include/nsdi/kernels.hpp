#pragma once

// Pointwise and reduction kernels over square N x N complex grids. Every kernel
// exists twice: a plain loop in `serial` (the reference kept for testing) and
// an OpenMP version in `omp`. Reductions accumulate one partial per row and sum
// the rows in order, so both variants return bit-identical results for any
// thread count.

#include <cstddef>
#include <span>

#include "nsdi/fft.hpp"

namespace nsdi {

enum class Exec { serial, parallel };

/// Probability split by ionization region: both coordinates beyond the
/// threshold (double), exactly one (single), neither (bound).
struct ChannelSums {
  double double_ion = 0.0;
  double single_ion = 0.0;
  double bound = 0.0;

  double total() const noexcept { return double_ion + single_ion + bound; }
  ChannelSums& operator+=(const ChannelSums& o) noexcept {
    double_ion += o.double_ion;
    single_ion += o.single_ion;
    bound += o.bound;
    return *this;
  }
};

namespace kernels {

namespace serial {
#include "nsdi/detail/kernel_decls.inc"
}  // namespace serial

namespace omp {
#include "nsdi/detail/kernel_decls.inc"
}  // namespace omp

}  // namespace kernels
}  // namespace nsdi
