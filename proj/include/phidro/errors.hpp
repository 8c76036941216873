#pragma once

#include <stdexcept>
#include <string>

namespace phidro {

// Bad flag / config / argument values; mapped to exit code 2 by the CLI.
class ParameterError : public std::runtime_error {
 public:
  explicit ParameterError(const std::string& what) : std::runtime_error(what) {}
};

// An operation was asked of a divergence that cannot provide it.
class UnsupportedDivergenceError : public ParameterError {
 public:
  explicit UnsupportedDivergenceError(const std::string& what)
      : ParameterError(what) {}
};

// Numerical failure at runtime (non-finite gradients, resolution limits);
// mapped to exit code 3 by the CLI.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace phidro
