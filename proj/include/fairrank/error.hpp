#pragma once

#include <stdexcept>
#include <string>

namespace fairrank {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (CSV cells, shapes, labels).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument or configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The sum-rank band cannot be reached for the given partition sizes.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Exhaustive routines refuse instances above their enumeration limit.
class InstanceTooLarge : public Error {
 public:
  using Error::Error;
};

}  // namespace fairrank
