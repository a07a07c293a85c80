#pragma once

#include <stdexcept>
#include <string>

namespace lindley {

// Base for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An integral or series does not converge for the given arguments.
struct DivergenceError : Error {
  using Error::Error;
};

// A distribution spec violates its own constraints (bad parameters,
// tail not a tail, transform not a transform).
struct SpecError : Error {
  using Error::Error;
};

// The model has no usable steady state for the requested method
// (e.g. P[X<0] = 0 without the explicit opt-in, or P[X>0] >= 1).
struct StabilityError : Error {
  using Error::Error;
};

// An iterative method hit its cap without meeting its tolerance.
struct ConvergenceError : Error {
  using Error::Error;
};

// A computed solution failed a mandatory post-check.
struct ValidationError : Error {
  using Error::Error;
};

// The requested quantity is below what the data or the floating-point
// format can resolve (deep-tail probes, underflowing probabilities).
struct ResolutionError : Error {
  using Error::Error;
};

}  // namespace lindley
