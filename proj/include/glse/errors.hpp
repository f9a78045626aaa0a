#pragma once

#include <stdexcept>
#include <string>

namespace glse {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonInvertible : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class SupportViolation : public Error {
 public:
  using Error::Error;
};

class PoleAtOne : public Error {
 public:
  using Error::Error;
};

class NoSolution : public Error {
 public:
  using Error::Error;
};

class InfeasibleTargets : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

// Raised by an iterative solver that hit its budget; carries the best residual.
class MaxIterations : public Error {
 public:
  MaxIterations(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class Divergence : public Error {
 public:
  Divergence(const std::string& what, int iteration)
      : Error(what), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

}  // namespace glse
