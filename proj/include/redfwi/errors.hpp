#pragma once

#include <stdexcept>
#include <string>

namespace redfwi {

// Invalid user-supplied configuration (ranges, schedule parameters, ...).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated call contract (shape mismatch, index out of range).
struct ContractError : std::runtime_error {
  explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

// Explicit time stepping would be unstable for the requested dt.
struct StabilityError : std::runtime_error {
  explicit StabilityError(const std::string& msg) : std::runtime_error(msg) {}
};

// NaN/overflow encountered while stepping or training.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or truncated file.
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Memory budget exceeded without checkpointing enabled.
struct ResourceError : std::runtime_error {
  explicit ResourceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace redfwi
