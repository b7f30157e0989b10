#pragma once

#include <stdexcept>
#include <string>

namespace nsdi {

enum class ErrorKind {
  domain,
  out_of_domain,
  diverged,
  convergence,
  invalid_state,
  degenerate_trace,
  insufficient_statistics,
  undefined_fwhm,
  numerical_hermiticity,
  validation,
  io,
};

const char* to_string(ErrorKind kind);

/// Base exception for everything the library throws on a violated contract.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace nsdi
