#include "zermelo/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <string>
#include <thread>

namespace zermelo::numkit {

void Tolerances::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw DomainError(std::string("tolerance '") + name + "' must be strictly positive");
  };
  positive(fd_step, "fd_step");
  positive(ode_rel_tol, "ode_rel_tol");
  positive(ode_abs_tol, "ode_abs_tol");
  positive(opt_grad_tol, "opt_grad_tol");
  positive(rank_sv_cutoff, "rank_sv_cutoff");
  if (fd_step * fd_step <= std::numeric_limits<double>::epsilon())
    throw DomainError("fd_step^2 must exceed machine epsilon");
}

namespace {

std::string format_point(const Vec& x) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

double checked(const ScalarField& f, const Vec& x) {
  const double v = f(x);
  if (!std::isfinite(v))
    throw EvaluationError("non-finite function value at stencil point " + format_point(x), x);
  return v;
}

}  // namespace

// ─── Finite differences ──────────────────────────────────────────────────────

Vec fd_gradient(const ScalarField& f, const Vec& x, double step) {
  const Eigen::Index n = x.size();
  Vec g(n);
  Vec xp = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    xp[i] = x[i] + step;
    const double fp = checked(f, xp);
    xp[i] = x[i] - step;
    const double fm = checked(f, xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

Mat fd_hessian(const ScalarField& f, const Vec& x, double step) {
  const Eigen::Index n = x.size();
  Mat h(n, n);
  const double f0 = checked(f, x);
  Vec xp = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    xp[i] = x[i] + 2.0 * step;
    const double fp = checked(f, xp);
    xp[i] = x[i] - 2.0 * step;
    const double fm = checked(f, xp);
    xp[i] = x[i];
    h(i, i) = (fp - 2.0 * f0 + fm) / (4.0 * step * step);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      auto at = [&](double si, double sj) {
        xp[i] = x[i] + si * step;
        xp[j] = x[j] + sj * step;
        const double v = checked(f, xp);
        xp[i] = x[i];
        xp[j] = x[j];
        return v;
      };
      const double v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * step * step);
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  return 0.5 * (h + h.transpose());
}

Mat fd_derivative(const ScalarField& f, const Vec& x, int order, const Tolerances& tol) {
  if (order == 1) return fd_gradient(f, x, tol.fd_step);
  if (order == 2) return fd_hessian(f, x, tol.fd_step);
  throw DomainError("fd_derivative: order must be 1 or 2");
}

Mat fd_jacobian(const VectorField& f, const Vec& x, double step) {
  const Eigen::Index n = x.size();
  Vec xp = x;
  Mat jac;
  for (Eigen::Index i = 0; i < n; ++i) {
    xp[i] = x[i] + step;
    const Vec fp = f(xp);
    xp[i] = x[i] - step;
    const Vec fm = f(xp);
    xp[i] = x[i];
    if (i == 0) jac.resize(fp.size(), n);
    if (!fp.allFinite() || !fm.allFinite())
      throw EvaluationError("non-finite map value near " + format_point(x), x);
    jac.col(i) = (fp - fm) / (2.0 * step);
  }
  return jac;
}

// ─── Dormand-Prince 5(4) ─────────────────────────────────────────────────────

namespace dp {
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
}  // namespace dp

Vec Trajectory::at(double t) const {
  if (!dense_) throw DomainError("trajectory was integrated without dense output");
  const bool forward = times_.back() >= times_.front();
  const double lo = forward ? times_.front() : times_.back();
  const double hi = forward ? times_.back() : times_.front();
  const double slack = 1e-12 * std::max(1.0, std::abs(hi - lo));
  if (t < lo - slack || t > hi + slack)
    throw DomainError("trajectory evaluated outside its time span");
  if (times_.size() == 1) return states_.front();
  // Index of the step containing t.
  std::size_t k;
  if (forward) {
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    k = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
  } else {
    auto it = std::upper_bound(times_.begin(), times_.end(), t, std::greater<double>());
    k = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
  }
  k = std::min(k, coeffs_.size() - 1);
  const double h = times_[k + 1] - times_[k];
  const double theta = (t - times_[k]) / h;
  const double theta1 = 1.0 - theta;
  const auto& c = coeffs_[k];
  return c.r1 + theta * (c.r2 + theta1 * (c.r3 + theta * (c.r4 + theta1 * c.r5)));
}

Trajectory integrate_ivp(const OdeField& field, const Vec& y0, double t0, double t1,
                         const OdeOptions& opts) {
  using namespace dp;
  Trajectory traj;
  traj.dense_ = opts.dense;
  traj.times_.push_back(t0);
  traj.states_.push_back(y0);
  if (t1 == t0) return traj;

  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  auto scale = [&](const Vec& a, const Vec& b) {
    return (opts.abs_tol + opts.rel_tol * a.cwiseAbs().cwiseMax(b.cwiseAbs()).array()).matrix();
  };

  Vec y = y0;
  Vec k1 = field(t0, y);
  if (!k1.allFinite()) throw StiffnessError("non-finite derivative at initial state", t0, y0);

  double h = opts.initial_step;
  if (h <= 0.0) {
    // Hairer's starting-step heuristic.
    const Vec sc = scale(y, y);
    const double d0 = std::sqrt((y.array() / sc.array()).square().mean());
    const double d1n = std::sqrt((k1.array() / sc.array()).square().mean());
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min(h0, span);
    const Vec y1 = y + dir * h0 * k1;
    const Vec k1b = field(t0 + dir * h0, y1);
    const double d2 = std::sqrt(((k1b - k1).array() / sc.array()).square().mean()) / h0;
    const double m = std::max(d1n, d2);
    const double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 0.2);
    h = std::min(100.0 * h0, h1);
  }
  if (opts.max_step > 0.0) h = std::min(h, opts.max_step);
  h = std::min(h, span);

  double t = t0;
  double err_prev = 1e-4;
  bool rejected_last = false;
  std::size_t steps = 0;
  while (dir * (t1 - t) > 0.0) {
    if (++steps > opts.max_steps)
      throw StiffnessError("maximum number of integration steps exceeded", t, y);
    const double remaining = std::abs(t1 - t);
    bool last = false;
    if (h >= remaining * (1.0 - 1e-12)) {
      h = remaining;
      last = true;
    }
    if (h <= 1e-14 * std::max(1.0, std::abs(t)))
      throw StiffnessError("step size underflow", t, y);
    const double hs = dir * h;

    const Vec k2 = field(t + c2 * hs, y + hs * (a21 * k1));
    const Vec k3 = field(t + c3 * hs, y + hs * (a31 * k1 + a32 * k2));
    const Vec k4 = field(t + c4 * hs, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec k5 = field(t + c5 * hs, y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vec k6 =
        field(t + hs, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vec ynew = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const Vec k7 = field(t + hs, ynew);

    const Vec errv = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double err = std::sqrt((errv.array() / scale(y, ynew).array()).square().mean());
    if (!std::isfinite(err) || !ynew.allFinite()) err = 1e10;

    if (err <= 1.0) {
      if (opts.dense) {
        Trajectory::StepCoefficients c;
        c.r1 = y;
        c.r2 = ynew - y;
        c.r3 = hs * k1 - c.r2;
        c.r4 = c.r2 - hs * k7 - c.r3;
        c.r5 = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        traj.coeffs_.push_back(std::move(c));
      }
      t = last ? t1 : t + hs;
      y = ynew;
      k1 = k7;
      traj.times_.push_back(t);
      traj.states_.push_back(y);
      if (opts.stop && opts.stop(t, y)) {
        traj.stopped_early_ = dir * (t1 - t) > 0.0;
        break;
      }
      // PI step control.
      const double e = std::max(err, 1e-10);
      double fac = 0.9 * std::pow(e, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
      fac = std::clamp(fac, 0.2, 10.0);
      if (rejected_last) fac = std::min(fac, 1.0);
      err_prev = std::max(err, 1e-4);
      h *= fac;
      rejected_last = false;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      rejected_last = true;
    }
    if (opts.max_step > 0.0) h = std::min(h, opts.max_step);
  }
  return traj;
}

// ─── Minimization ────────────────────────────────────────────────────────────

namespace {

Mat null_space(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const Eigen::Index n = a.cols();
  const double smax = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > 1e-12 * std::max(1.0, smax)) ++r;
  return svd.matrixV().rightCols(n - r);
}

}  // namespace

MinimizeResult minimize_smooth(const ScalarField& f, const Vec& x0,
                               const std::optional<AffineConstraint>& constraint,
                               const MinimizeOptions& opts) {
  // Reduce to unconstrained coordinates z with x = base + basis z.
  Vec base = x0;
  Mat basis = Mat::Identity(x0.size(), x0.size());
  if (constraint) {
    const auto& c = *constraint;
    if (c.A.cols() != x0.size() || c.A.rows() != c.b.size())
      throw DomainError("minimize_smooth: constraint dimensions do not match");
    // Project x0 onto the feasible set (minimal correction).
    base = x0 + c.A.completeOrthogonalDecomposition().solve(c.b - c.A * x0);
    basis = null_space(c.A);
  }
  const Eigen::Index m = basis.cols();
  auto lift = [&](const Vec& z) -> Vec { return base + basis * z; };
  auto fz = [&](const Vec& z) { return checked(f, lift(z)); };
  auto grad = [&](const Vec& z) -> Vec {
    if (opts.gradient) return basis.transpose() * opts.gradient(lift(z));
    return fd_gradient(fz, z, opts.fd_step);
  };
  auto hess = [&](const Vec& z) -> Mat {
    if (opts.hessian) return basis.transpose() * opts.hessian(lift(z)) * basis;
    if (opts.gradient) {
      Mat h = fd_jacobian([&](const Vec& w) { return grad(w); }, z, opts.fd_step);
      return 0.5 * (h + h.transpose());
    }
    return fd_hessian(fz, z, opts.fd_step * 10.0);
  };

  MinimizeResult res;
  Vec z = Vec::Zero(m);
  if (m == 0) {
    res.argmin = base;
    res.value = checked(f, base);
    return res;
  }
  double fval = fz(z);
  for (int it = 0; it < opts.max_iterations; ++it) {
    const Vec g = grad(z);
    const double gn = g.norm();
    res.iterations = it;
    if (gn <= opts.grad_tol) {
      res.argmin = lift(z);
      res.value = fval;
      res.grad_norm = gn;
      return res;
    }
    Mat h = hess(z);
    Vec step;
    double shift = 0.0;
    for (int attempt = 0; attempt < 30; ++attempt) {
      Eigen::LLT<Mat> llt(h + shift * Mat::Identity(m, m));
      if (llt.info() == Eigen::Success) {
        step = -llt.solve(g);
        break;
      }
      shift = shift == 0.0 ? 1e-8 * std::max(1.0, h.cwiseAbs().maxCoeff()) : shift * 10.0;
    }
    if (step.size() == 0 || g.dot(step) >= 0.0) step = -g;

    double alpha = 1.0;
    bool accepted = false;
    // Near the minimum the predicted decrease is below the rounding of f, so an
    // Armijo test cannot see progress; take the full Newton step.
    if (-g.dot(step) <= 1e-14 * std::max(1.0, std::abs(fval))) {
      z += step;
      fval = fz(z);
      accepted = true;
    }
    for (int ls = 0; ls < 60 && !accepted; ++ls) {
      const Vec trial = z + alpha * step;
      const double ft = fz(trial);
      if (ft <= fval + 1e-4 * alpha * g.dot(step)) {
        z = trial;
        fval = ft;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (lift(z).norm() > opts.escape_norm)
      throw UnboundedFiberError("minimize_smooth: iterates escape to infinity");
    if (!accepted) {
      // Stalled at the rounding floor of f; accept if the gradient is tiny.
      if (gn <= 1e3 * opts.grad_tol) {
        res.argmin = lift(z);
        res.value = fval;
        res.grad_norm = gn;
        return res;
      }
      throw NonConvergenceError("minimize_smooth: line search failed", lift(z));
    }
  }
  throw NonConvergenceError("minimize_smooth: iteration cap exceeded", lift(z));
}

// ─── Least squares ───────────────────────────────────────────────────────────

LeastSquaresResult solve_least_squares(const VectorField& r, const Vec& x0,
                                       const LeastSquaresOptions& opts) {
  LeastSquaresResult out;
  Vec x = x0;
  Vec res = r(x);
  double cost = res.squaredNorm();
  double mu = 1e-3;
  for (int it = 0; it < opts.max_iterations; ++it) {
    out.iterations = it;
    if (std::sqrt(cost) <= opts.residual_tol) break;
    const Mat jac = fd_jacobian(r, x, opts.fd_step);
    const Mat jtj = jac.transpose() * jac;
    const Vec jtr = jac.transpose() * res;
    const double diag_scale = std::max(1e-12, jtj.diagonal().maxCoeff());
    bool improved = false;
    for (int attempt = 0; attempt < 12; ++attempt) {
      const Mat lhs = jtj + mu * diag_scale * Mat::Identity(x.size(), x.size());
      const Vec dx = -lhs.ldlt().solve(jtr);
      Vec trial = x + dx;
      Vec trial_res;
      try {
        trial_res = r(trial);
      } catch (const Error&) {
        // Trial left the domain of r (chart cover, wind bound, ...).
        mu *= 10.0;
        continue;
      }
      const double trial_cost = trial_res.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        x = trial;
        res = trial_res;
        cost = trial_cost;
        mu = std::max(1e-12, mu * 0.1);
        improved = true;
        break;
      }
      mu *= 10.0;
    }
    if (!improved) break;
  }
  out.x = x;
  out.residual_norm = std::sqrt(cost);
  out.converged = out.residual_norm <= opts.residual_tol;
  return out;
}

// ─── Rank ────────────────────────────────────────────────────────────────────

int numeric_rank(const Mat& m, double cutoff) {
  if (m.size() == 0) return 0;
  const Vec sv = Eigen::JacobiSVD<Mat>(m).singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return 0;
  return numeric_rank(m, cutoff, sv[0]);
}

int numeric_rank(const Mat& m, double cutoff, double reference_scale) {
  if (m.size() == 0) return 0;
  const Vec sv = Eigen::JacobiSVD<Mat>(m).singularValues();
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > 0.0 && sv[i] >= cutoff * reference_scale) ++r;
  return r;
}

unsigned thread_count() {
  if (const char* env = std::getenv("ZERMELO_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

}  // namespace zermelo::numkit
