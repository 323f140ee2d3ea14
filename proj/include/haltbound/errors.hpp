#pragma once

#include <stdexcept>
#include <string>

namespace haltbound {

// Error categories map one-to-one onto CLI exit codes.

/// Invalid configuration or parameter values (exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed or inconsistent input data (exit code 3).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite or otherwise unusable intermediate numbers (exit code 4).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace haltbound
