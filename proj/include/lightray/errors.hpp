#pragma once

#include <stdexcept>
#include <string>

namespace lightray {

// Common base so callers can catch toolkit failures in one clause.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Event lies outside the chart (or metric data is singular there).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Observer normalization asked for a non-timelike or past-directed vector.
class NotTimelikeError : public Error {
 public:
  using Error::Error;
};

// A vector that should be unit (observer, cosphere covector) is not.
class NotUnitError : public Error {
 public:
  using Error::Error;
};

// Candidate surface fails the spacelike test (induced metric not positive).
class NotSpacelikeError : public Error {
 public:
  using Error::Error;
};

// No future null vector exists over the requested spatial direction.
class NoNullSolutionError : public Error {
 public:
  using Error::Error;
};

// Adaptive integrator drove the step below the floor without a chart exit.
class StepFailureError : public Error {
 public:
  using Error::Error;
};

// Finite-difference step so small that cancellation noise dominates.
class StepTooSmallError : public Error {
 public:
  using Error::Error;
};

// An operation that needs a surface crossing found none in the stored range.
class NoIntersectionError : public Error {
 public:
  using Error::Error;
};

// More than one crossing where the geometry promises a single one.
class MultipleIntersectionError : public Error {
 public:
  using Error::Error;
};

// Two independent evaluation paths disagreed beyond tolerance.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

// Contact form evaluated below the noise floor; ratio would be meaningless.
class ContactKernelError : public Error {
 public:
  using Error::Error;
};

// Config file rejected; message carries line/field diagnostics.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Expression text rejected by the parser; message carries the position.
class ExprError : public Error {
 public:
  using Error::Error;
};

}  // namespace lightray
