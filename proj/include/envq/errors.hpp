#pragma once

#include <stdexcept>
#include <string>

namespace envq {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed spec or config; maps to CLI exit code 2.
struct SpecError : Error {
  using Error::Error;
};

struct DomainViolation : Error {
  using Error::Error;
};

struct BoundViolation : Error {
  using Error::Error;
};

// Overflow, divergence, non-convergence.
struct NumericalError : Error {
  using Error::Error;
};

struct BudgetExceeded : Error {
  using Error::Error;
};

}  // namespace envq
