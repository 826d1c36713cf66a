#pragma once

#include <stdexcept>
#include <string>

namespace specphase {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad or out-of-range user parameters (CLI exit code 2).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// The requested structure cannot exist, e.g. a stub-parity violation.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Randomized construction exhausted its retry budget.
class GenerationError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class OperatorError : public Error {
 public:
  using Error::Error;
};

class DegenerateVectorError : public Error {
 public:
  using Error::Error;
};

class SingularPartitionError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class InternalConsistencyError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_residual)
      : Error(what), best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

}  // namespace specphase
