#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>

namespace zermelo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A function evaluated to a non-finite value inside a finite-difference stencil.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, Vec point)
      : Error(what), point_(std::move(point)) {}
  const Vec& point() const { return point_; }

 private:
  Vec point_;
};

/// Adaptive step size collapsed below the representable resolution.
class StiffnessError : public Error {
 public:
  StiffnessError(const std::string& what, double t, Vec state)
      : Error(what), t_(t), state_(std::move(state)) {}
  double time() const { return t_; }
  const Vec& last_state() const { return state_; }

 private:
  double t_;
  Vec state_;
};

/// An iterative method hit its iteration cap; carries the best iterate.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, Vec best)
      : Error(what), best_(std::move(best)) {}
  const Vec& best_iterate() const { return best_; }

 private:
  Vec best_;
};

/// Argument outside the mathematical domain of an operation (e.g. v = 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

class InversionError : public Error {
 public:
  using Error::Error;
};

class EmptyConeError : public Error {
 public:
  using Error::Error;
};

class UnboundedFiberError : public Error {
 public:
  using Error::Error;
};

/// Zermelo data with h(W,W) too close to (or above) one.
class InvalidWindError : public Error {
 public:
  using Error::Error;
};

/// Randers data with |beta|_a too close to (or above) one.
class InvalidFormError : public Error {
 public:
  using Error::Error;
};

class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// A trajectory left the working region of its scene.
class DomainExitError : public Error {
 public:
  DomainExitError(const std::string& what, double exit_time)
      : Error(what), exit_time_(exit_time) {}
  double exit_time() const { return exit_time_; }

 private:
  double exit_time_;
};

class UnreachableError : public Error {
 public:
  using Error::Error;
};

class SearchFailureError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class WellDefinednessError : public Error {
 public:
  using Error::Error;
};

class NotSubmersionError : public Error {
 public:
  using Error::Error;
};

}  // namespace zermelo
