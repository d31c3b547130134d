#pragma once

#include <stdexcept>
#include <string>

namespace ecomb {

// Invalid or inconsistent input (bad parameters, malformed config files).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A solver failed to meet its accuracy contract (truncation too small,
// norm drift, non-converged iteration).
class ConvergenceError : public std::runtime_error {
public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem-level failure while reading or writing datasets.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ecomb
