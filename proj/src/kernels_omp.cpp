#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "nsdi/kernels.hpp"

#define NSDI_PARALLEL_FOR _Pragma("omp parallel for schedule(static)")

namespace nsdi::kernels::omp {

#include "kernels_body.inc"

}  // namespace nsdi::kernels::omp
