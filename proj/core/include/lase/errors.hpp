#pragma once

#include <stdexcept>
#include <string>

namespace lase {

// Invalid problem/topology/config input. The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A caller violated an operation contract (empty report set, duplicate
// labels, ...). Also exit code 2 at the CLI boundary.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lase
