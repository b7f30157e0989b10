#include "nsdi/errors.hpp"

namespace nsdi {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain error";
    case ErrorKind::out_of_domain: return "out of domain";
    case ErrorKind::diverged: return "propagation diverged";
    case ErrorKind::convergence: return "convergence failure";
    case ErrorKind::invalid_state: return "invalid state";
    case ErrorKind::degenerate_trace: return "degenerate trace";
    case ErrorKind::insufficient_statistics: return "insufficient statistics";
    case ErrorKind::undefined_fwhm: return "undefined FWHM";
    case ErrorKind::numerical_hermiticity: return "numerical hermiticity";
    case ErrorKind::validation: return "validation error";
    case ErrorKind::io: return "io error";
  }
  return "error";
}

}  // namespace nsdi
