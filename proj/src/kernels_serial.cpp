#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "nsdi/kernels.hpp"

#define NSDI_PARALLEL_FOR 

namespace nsdi::kernels::serial {

#include "kernels_body.inc"

}  // namespace nsdi::kernels::serial
