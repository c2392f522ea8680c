#pragma once

#include <stdexcept>
#include <string>

namespace specnoise {

/// Precondition violation on an input to a library operation.
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Experiment configuration could not be parsed or validated.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A Monte Carlo run exceeded its replicate failure budget.
class RunAborted : public std::runtime_error {
 public:
  explicit RunAborted(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace specnoise
