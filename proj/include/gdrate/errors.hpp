#pragma once

#include <stdexcept>
#include <string>

namespace gdrate {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Step-size interval constant(s) produce an empty or inverted interval.
class InvalidC : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// Multiplier weights violate the admissibility conditions at the given rate.
class WeightOutOfRange : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

/// The ellipsoid backend ran out of iterations before it could either
/// produce a feasible point or certify infeasibility.
class SolverBudgetExceeded : public Error {
 public:
  using Error::Error;
};

class UnknownPolicy : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class CertificateMissing : public Error {
 public:
  using Error::Error;
};

}  // namespace gdrate
