#pragma once

#include <stdexcept>
#include <string>

namespace apep {

// Malformed input: bad references, broken invariants, precondition failures.
class InvalidInput : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// The constraint profile does not match what the algorithm accepts.
class UnsupportedMix : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// The instance is too large for an exact search within the configured budget.
class CapacityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace apep
