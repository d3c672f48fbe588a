#pragma once

#include <stdexcept>
#include <string>

namespace nhgeo {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad call-site input: wrong dimensions, non-finite values, malformed specs.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

// A registry lookup with an id that names nothing.
class UnknownIdError : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

// Evaluation requested outside the declared domain of validity.
class DomainError : public Error {
public:
  using Error::Error;
};

// Numerical breakdown: singular solve, loss of positive-definiteness,
// negative radicand, non-finite intermediate.
class NumericalError : public Error {
public:
  using Error::Error;
};

// An iterative scheme ran out of iterations or stalled.
class ConvergenceError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

} // namespace nhgeo
