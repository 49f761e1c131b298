#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sublin {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (bad grid, empty scenario set, unknown tag...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values produced while evaluating or time-stepping.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::ptrdiff_t step = -1)
      : Error(step >= 0 ? what + " (step " + std::to_string(step) + ")" : what), step_(step) {}

  std::ptrdiff_t step() const noexcept { return step_; }

 private:
  std::ptrdiff_t step_;
};

/// Argument outside the mathematical domain of a closed-form bound.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A runtime invariant was breached, e.g. a policy selected an out-of-bounds variance.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace sublin
