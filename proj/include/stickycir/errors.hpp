#pragma once

#include <stdexcept>
#include <string>

namespace stickycir {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A numerical procedure failed (non-convergence, stalled sampler, bad grid).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IntegrabilityError : public NumericError {
 public:
  using NumericError::NumericError;
};

class GridResolutionError : public NumericError {
 public:
  using NumericError::NumericError;
};

class SamplerStallError : public NumericError {
 public:
  using NumericError::NumericError;
};

class InsufficientDataError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Invalid user configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {
// Writes "warning: <msg>" to stderr. Thread-safe.
void warn(const std::string& msg);
}  // namespace detail

}  // namespace stickycir
