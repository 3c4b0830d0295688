#pragma once

#include <stdexcept>
#include <string>

namespace catmppi {

/// Raised when vector or matrix arguments disagree with the model dimensions.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A robot, scenario or campaign file could not be read or parsed.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parsed input violates a model invariant. The message names the offending field.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite numbers reached a computation that requires finite input.
class NumericalError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline void require_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": expected size " + std::to_string(want) +
                         ", got " + std::to_string(got));
  }
}

}  // namespace catmppi
