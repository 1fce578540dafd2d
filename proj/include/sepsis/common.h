#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace sepsis {

// Missing values are carried as quiet NaN throughout the pipeline.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

// Base for every error raised by the library. The CLI maps the concrete
// subclasses onto its exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data: bad patient files, empty cohorts, unmatched stems.
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid experiment configuration or model file contents.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A precondition on a function argument was violated.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// A metric that is undefined for the given input (e.g. AUROC with one class).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace sepsis
