#pragma once

#include <stdexcept>
#include <string>

namespace sparsegan {

/// Invalid user-supplied configuration (bad file, bad shapes, bad ranges).
/// CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite values encountered during training. A run that throws this is
/// marked FAILED; partial logs are preserved. CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Broken internal contract (stale cache, bookkeeping mismatch). Indicates a
/// bug in this library, not in user input.
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace sparsegan
