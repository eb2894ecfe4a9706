#pragma once

#include <stdexcept>
#include <string>

namespace ringml {

/// Caller misused an API or the command line (CLI exit code 2).
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

/// Input data is malformed or unusable (CLI exit code 3).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// A numeric procedure failed: divergence, singular system (CLI exit code 4).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ringml
