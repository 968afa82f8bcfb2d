#pragma once

#include <stdexcept>
#include <string>

namespace porefrac {

/// Raised for invalid scenario / parameter input.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when element assembly hits a degenerate cell mapping.
struct AssemblyError : std::runtime_error {
  explicit AssemblyError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a nonlinear or coupling loop exhausts its iteration budget.
struct SolveError : std::runtime_error {
  explicit SolveError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace porefrac
