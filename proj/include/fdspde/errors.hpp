#pragma once

#include <stdexcept>
#include <string>

namespace fdspde {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Grid construction or grid-membership failure (off-grid times, bad n).
class GridError : public Error {
 public:
  using Error::Error;
};

/// The time step violates c in (0, 1/2).
class CflViolation : public GridError {
 public:
  using GridError::GridError;
};

/// Two grids that were expected to nest dyadically do not.
class NestingError : public GridError {
 public:
  using GridError::GridError;
};

/// Field length does not match 2n, or an index is out of range.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Noise realisation too short for the requested horizon.
class NoiseExhausted : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Report persistence failures. The three kinds are distinguished so callers
/// can tell a missing file from an old schema from a corrupt document.
class ReportIoError : public Error {
 public:
  using Error::Error;
};
class ReportVersionError : public Error {
 public:
  using Error::Error;
};
class ReportParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace fdspde
