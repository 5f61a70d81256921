#pragma once

#include <stdexcept>
#include <string>

namespace galtrap {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad argument value (nonpositive step, margin <= 0, wrong dimension, ...).
struct ParameterError : Error {
  using Error::Error;
};

/// A construction hypothesis does not hold for the requested parameters.
struct HypothesisError : Error {
  using Error::Error;
};

/// Input violates an operation precondition (e.g. field outside W(D, gamma)).
struct PreconditionError : Error {
  using Error::Error;
};

/// A data invariant (incompressibility, reality, symmetry) is broken.
struct InvariantError : Error {
  using Error::Error;
};

/// Physical grid too coarse for an alias-free product.
struct ResolutionError : Error {
  using Error::Error;
};

/// Derived quantity inconsistent with its defining equation.
struct ConsistencyError : Error {
  using Error::Error;
};

/// Integrator step drifted off the invariant manifold.
struct StepRejected : Error {
  using Error::Error;
};

/// Boundary sample with zero modulus on a modulus facet.
struct DegenerateFacet : Error {
  using Error::Error;
};

}  // namespace galtrap
