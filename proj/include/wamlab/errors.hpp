#pragma once

#include <stdexcept>
#include <string>

namespace wamlab {

// Invalid configuration or usage (CLI exit code 2), as opposed to runtime
// failures (exit code 1).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace wamlab
