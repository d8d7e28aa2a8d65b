#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace simoml {

/// Raised when arguments violate an operation's preconditions.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical routine cannot produce a result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A Cholesky pivot fell below the negative tolerance.
class NotPositiveSemidefinite : public NumericalError {
 public:
  NotPositiveSemidefinite(std::size_t pivot_index, double pivot_value, double tolerance);

  std::size_t pivot_index() const noexcept { return pivot_index_; }
  double pivot_value() const noexcept { return pivot_value_; }

 private:
  std::size_t pivot_index_;
  double pivot_value_;
};

/// Exhaustive enumeration refused because the candidate count exceeds the cap.
class CapExceeded : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

}  // namespace simoml
