#pragma once

#include <stdexcept>
#include <string>

namespace nhemit {

// Base for every numerical or modelling failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed lattice, jump or emitter description.
class ModelError : public Error {
 public:
  using Error::Error;
};

// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// z lies on (or numerically too close to) the spectrum of some h_k.
class SingularResolventError : public Error {
 public:
  SingularResolventError(const std::string& what, double k0, double k1)
      : Error(what), k{k0, k1} {}
  double k[2];
};

// A root of the characteristic polynomial sits on the unit circle,
// so the first-sheet value is ambiguous.
class BranchAmbiguityError : public Error {
 public:
  using Error::Error;
};

// Grid refinement, Newton iteration or adaptive integration did not converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace nhemit
