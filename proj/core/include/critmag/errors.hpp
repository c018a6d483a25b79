#pragma once

#include <stdexcept>
#include <string>

namespace critmag {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

// Quadrature could not reach the requested tolerance within its point budget.
struct ToleranceNotMet : Error {
  ToleranceNotMet(const std::string& what, double achieved_error, double estimate)
      : Error(what), achieved_error(achieved_error), estimate(estimate) {}
  double achieved_error;
  double estimate;
};

// The integrand returned a non-finite value.
struct IntegrandFailure : Error {
  using Error::Error;
};

struct ConfigError : Error {
  ConfigError(const std::string& what, int line = 0, int column = 0)
      : Error(what), line(line), column(column) {}
  int line;
  int column;
};

}  // namespace critmag
