#pragma once

#include <stdexcept>
#include <string>

namespace nsoc {

// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mixed direction widths (k) in one LD expression.
struct DimensionError : Error {
  using Error::Error;
};

// Model evaluation failure: domain violation or non-finite output.
struct ModelError : Error {
  using Error::Error;
};

// Consistent initialization / steady-state solve failure.
struct InitError : Error {
  using Error::Error;
};

// Newton divergence while stepping; carries the failing time.
struct IntegrationError : Error {
  IntegrationError(const std::string& what, double t_fail)
      : Error(what), t(t_fail) {}
  double t;
};

// |dg/dy| pivot fell below the configured floor; carries the time.
struct RegularityError : Error {
  RegularityError(const std::string& what, double t_fail)
      : Error(what), t(t_fail) {}
  double t;
};

// Query outside the valid range (horizon, bounds, table span).
struct RangeError : Error {
  using Error::Error;
};

// Scenario configuration / schema violation.
struct ConfigError : Error {
  using Error::Error;
};

// Wind data file problems (missing, malformed, non-monotone).
struct DataError : Error {
  using Error::Error;
};

}  // namespace nsoc
