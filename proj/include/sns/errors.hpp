#pragma once

#include <stdexcept>
#include <string>

namespace sns {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition or hypothesis on the inputs does not hold (bad grid, M < 10,
/// frequency gaps too small, invalid (p, q) for a construction, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Frequency support does not fit inside the grid, so sampling would alias.
class AliasingError : public Error {
 public:
  using Error::Error;
};

/// A singular multiplier met significant mass at the origin node.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// A quadrature failed its refinement self-check, or a tolerance check failed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A requested computation exceeds the configured node or frequency budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

}  // namespace sns
