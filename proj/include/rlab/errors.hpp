#pragma once

#include <stdexcept>

namespace rlab {

// Violated precondition or shape mismatch on a public operation.
struct ContractViolation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A sampler was asked for more data than the buffer holds.
struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Degenerate numeric state: zero priority mass, non-positive-definite
// covariance after regularization, non-finite gradient entries.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss; the run is aborted with diagnostics.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rlab
