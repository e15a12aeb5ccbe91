#pragma once

#include <stdexcept>
#include <string>

namespace finsleroid {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite or otherwise meaningless arguments.
struct DomainError : Error {
  using Error::Error;
};

// Evaluation requested inside the guard band around a light cone or the time axis.
struct ConeProximityError : DomainError {
  using DomainError::DomainError;
};

// A point lies in a different sector or region than the requested formula.
struct RegionMismatch : Error {
  using Error::Error;
};

struct BranchError : Error {
  using Error::Error;
};

// L = 0 in the spacelike plane-wave formulas.
struct CausticError : DomainError {
  using DomainError::DomainError;
};

struct ShellError : Error {
  using Error::Error;
};

// Root finding, quadrature or step adaptation did not settle.
struct ConvergenceError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace finsleroid
