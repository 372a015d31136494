#pragma once

#include <stdexcept>
#include <string>

namespace tmd {

/// Bad inputs: out-of-range fields, malformed files, conflicting options.
/// The CLI maps these to exit code 2.
class validation_error : public std::invalid_argument {
 public:
  explicit validation_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Failures of the numerics themselves (singular systems, diverging
/// iterations). The CLI maps these to exit code 3.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tmd
