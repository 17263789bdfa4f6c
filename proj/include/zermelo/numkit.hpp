#pragma once

#include "zermelo/common.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

/// Shared numerical plumbing: finite differences, adaptive Runge-Kutta,
/// smooth minimization, nonlinear least squares and numerical rank.
namespace zermelo::numkit {

struct Tolerances {
  double fd_step = 1e-5;
  double ode_rel_tol = 1e-9;
  double ode_abs_tol = 1e-11;
  double opt_grad_tol = 1e-9;
  /// Relative to the largest singular value.
  double rank_sv_cutoff = 1e-6;

  /// Throws DomainError when a field is non-positive or fd_step^2 underflows.
  void validate() const;
};

using ScalarField = std::function<double(const Vec&)>;
using VectorField = std::function<Vec(const Vec&)>;

// ─── Finite differences ──────────────────────────────────────────────────────

/// Central-difference gradient with a fixed step.
Vec fd_gradient(const ScalarField& f, const Vec& x, double step);

/// Symmetric central-difference Hessian, (H + H^T)/2.
Mat fd_hessian(const ScalarField& f, const Vec& x, double step);

/// order 1 returns the gradient as an n x 1 matrix, order 2 the Hessian.
Mat fd_derivative(const ScalarField& f, const Vec& x, int order,
                  const Tolerances& tol = {});

/// Central-difference Jacobian of a vector map (m x n).
Mat fd_jacobian(const VectorField& f, const Vec& x, double step);

// ─── ODE integration ─────────────────────────────────────────────────────────

using OdeField = std::function<Vec(double, const Vec&)>;

struct OdeOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
  bool dense = true;
  double initial_step = 0.0;  // 0 selects a step automatically
  double max_step = 0.0;      // 0 means unbounded
  std::size_t max_steps = 500000;
  /// Checked after every accepted step; integration stops when it returns true.
  std::function<bool(double, const Vec&)> stop;

  static OdeOptions from(const Tolerances& tol) {
    OdeOptions o;
    o.rel_tol = tol.ode_rel_tol;
    o.abs_tol = tol.ode_abs_tol;
    return o;
  }
};

/// Accepted steps of a Dormand-Prince 5(4) run with its continuous extension.
class Trajectory {
 public:
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Vec>& states() const { return states_; }
  const Vec& final_state() const { return states_.back(); }
  bool stopped_early() const { return stopped_early_; }
  bool has_dense_output() const { return dense_; }

  /// Fourth-order interpolation inside [t_begin, t_end]; requires dense output.
  Vec at(double t) const;

 private:
  friend Trajectory integrate_ivp(const OdeField&, const Vec&, double, double,
                                  const OdeOptions&);
  struct StepCoefficients {
    Vec r1, r2, r3, r4, r5;
  };
  std::vector<double> times_;
  std::vector<Vec> states_;
  std::vector<StepCoefficients> coeffs_;
  bool dense_ = true;
  bool stopped_early_ = false;
};

/// Adaptive Dormand-Prince 5(4) with FSAL and dense output.  Throws
/// StiffnessError when the step size underflows.
Trajectory integrate_ivp(const OdeField& field, const Vec& y0, double t0,
                         double t1, const OdeOptions& opts = {});

// ─── Minimization ────────────────────────────────────────────────────────────

/// The feasible set {x : A x = b}.
struct AffineConstraint {
  Mat A;
  Vec b;
};

struct MinimizeOptions {
  double grad_tol = 1e-9;
  double fd_step = 1e-5;
  int max_iterations = 200;
  /// Iterates with norm above this are reported as escaping.
  double escape_norm = 1e8;
  /// Optional exact derivatives in the ambient coordinates.
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;
};

struct MinimizeResult {
  Vec argmin;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
};

/// Damped Newton with backtracking on the (reduced) feasible set.  Deterministic.
/// Throws NonConvergenceError after the iteration cap and UnboundedFiberError
/// if the iterates escape.
MinimizeResult minimize_smooth(const ScalarField& f, const Vec& x0,
                               const std::optional<AffineConstraint>& constraint = {},
                               const MinimizeOptions& opts = {});

// ─── Nonlinear least squares ─────────────────────────────────────────────────

struct LeastSquaresOptions {
  double residual_tol = 1e-10;
  double fd_step = 1e-6;
  int max_iterations = 60;
};

struct LeastSquaresResult {
  Vec x;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Levenberg-Marquardt on |r(x)|^2 with central-difference Jacobians.  Never
/// throws on non-convergence; callers inspect `converged`.  Library errors raised
/// by `r` at a trial point reject that trial; at x0 or inside a Jacobian they
/// propagate.
LeastSquaresResult solve_least_squares(const VectorField& r, const Vec& x0,
                                       const LeastSquaresOptions& opts = {});

// ─── Rank ────────────────────────────────────────────────────────────────────

/// Number of singular values >= cutoff * sigma_max; 0 for the zero matrix.
int numeric_rank(const Mat& m, double cutoff);

/// Number of singular values >= cutoff * reference_scale.
int numeric_rank(const Mat& m, double cutoff, double reference_scale);

// ─── Concurrency ─────────────────────────────────────────────────────────────

/// Worker count from ZERMELO_THREADS, else the hardware concurrency.
unsigned thread_count();

/// Runs fn(0..n-1) on a pool of threads; results are stored by index.
template <class T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& fn);

}  // namespace zermelo::numkit

#include "zermelo/detail/parallel.hpp"
