#pragma once

#include <stdexcept>
#include <string>

namespace wgs {

// Invalid parameter values (bad angle, bad site index, non-integer alpha
// where an integer is required, ...).  CLI exit code 1.
class domain_error : public std::runtime_error {
 public:
  explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

// Structurally valid request that exceeds a hard resource cap (state vectors
// beyond 20 qubits, dense weight matrices beyond the configured size, ...).
// CLI exit code 2.
class capacity_error : public std::runtime_error {
 public:
  explicit capacity_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace wgs
