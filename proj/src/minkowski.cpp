#include "zermelo/minkowski.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace zermelo::minkowski {

namespace {

void require_nonzero(const Vec& v, const char* what) {
  if (v.size() == 0 || v.norm() == 0.0) throw DomainError(what);
}

/// Finite-difference step scaled to the magnitude of v (F^2 is 2-homogeneous,
/// so relative steps keep the stencil error uniform).
double scaled_step(const Vec& v, double base) { return base * std::max(1.0, v.norm()); }

}  // namespace

MinkowskiNorm euclidean_norm(int dim) {
  MinkowskiNorm n;
  n.dim = dim;
  n.eval = [](const Vec& v) { return v.norm(); };
  n.closed_form_tensor = [dim](const Vec&) { return Mat(Mat::Identity(dim, dim)); };
  return n;
}

MinkowskiNorm quadratic_norm(const Mat& q) {
  MinkowskiNorm n;
  n.dim = static_cast<int>(q.rows());
  n.eval = [q](const Vec& v) { return std::sqrt(std::max(0.0, v.dot(q * v))); };
  n.closed_form_tensor = [q](const Vec&) { return q; };
  return n;
}

MinkowskiNorm reversed(const MinkowskiNorm& n) {
  MinkowskiNorm r;
  r.dim = n.dim;
  r.eval = [f = n.eval](const Vec& v) { return f(-v); };
  if (n.closed_form_tensor)
    r.closed_form_tensor = [g = n.closed_form_tensor](const Vec& v) { return g(-v); };
  return r;
}

Mat fundamental_tensor(const MinkowskiNorm& n, const Vec& v, const numkit::Tolerances& tol) {
  require_nonzero(v, "fundamental tensor undefined at the zero section");
  if (n.closed_form_tensor) return n.closed_form_tensor(v);
  auto half_sq = [&](const Vec& x) {
    const double f = n.eval(x);
    return 0.5 * f * f;
  };
  // Second differences need a coarser step than first differences.
  return numkit::fd_hessian(half_sq, v, scaled_step(v, 10.0 * tol.fd_step));
}

double cartan_contraction(const MinkowskiNorm& n, const Vec& v, const Vec& w1, const Vec& w2,
                          const Vec& w3, const numkit::Tolerances& tol) {
  require_nonzero(v, "Cartan tensor undefined at the zero section");
  const double h = scaled_step(v, 10.0 * tol.fd_step) / std::max(1.0, w1.norm());
  const double gp = w2.dot(fundamental_tensor(n, v + h * w1, tol) * w3);
  const double gm = w2.dot(fundamental_tensor(n, v - h * w1, tol) * w3);
  return 0.5 * (gp - gm) / (2.0 * h);
}

Vec legendre(const MinkowskiNorm& n, const Vec& v, const numkit::Tolerances& tol) {
  require_nonzero(v, "Legendre transform undefined at the zero section");
  return fundamental_tensor(n, v, tol) * v;
}

Vec legendre_inverse(const MinkowskiNorm& n, const Vec& p, const numkit::Tolerances& tol) {
  require_nonzero(p, "inverse Legendre transform undefined at the zero covector");
  // Riemannian proxy: treat g at the direction of p as a fixed inner product.
  Vec v = fundamental_tensor(n, p, tol).ldlt().solve(p);
  if (!v.allFinite() || v.norm() == 0.0) v = p;
  const double target = 1e-14 * std::max(1.0, p.norm());
  auto residual = [&](const Vec& x) { return (legendre(n, x, tol) - p).norm(); };
  double r = residual(v);
  for (int it = 0; it < 100; ++it) {
    if (r <= target) return v;
    const Vec step = fundamental_tensor(n, v, tol).ldlt().solve(p - legendre(n, v, tol));
    double damping = 1.0;
    bool improved = false;
    for (int k = 0; k < 40; ++k) {
      const Vec trial = v + damping * step;
      if (trial.norm() > 0.0) {
        const double rt = residual(trial);
        if (rt < r) {
          v = trial;
          r = rt;
          improved = true;
          break;
        }
      }
      damping *= 0.5;
    }
    if (!improved) break;
  }
  if (r <= 1e-9 * std::max(1.0, p.norm())) return v;
  throw InversionError("Legendre inversion did not converge (badly scaled norm data?)");
}

double orthogonality_residual(const MinkowskiNorm& n, const Vec& u, const Mat& subspace,
                              const numkit::Tolerances& tol) {
  const Vec l = legendre(n, u, tol);
  const double fu = n.eval(u);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < subspace.cols(); ++j) {
    const double tn = subspace.col(j).norm();
    if (tn == 0.0) continue;
    worst = std::max(worst, std::abs(l.dot(subspace.col(j))) / (fu * tn));
  }
  return worst;
}

std::vector<Vec> orthogonal_cone(const MinkowskiNorm& n, const Mat& subspace,
                                 const ConeOptions& opts, const numkit::Tolerances& tol) {
  const int dim = n.dim;
  const int r = subspace.cols() == 0 ? 0 : numkit::numeric_rank(subspace, 1e-10);
  if (r >= dim) throw DomainError("orthogonal cone requires dim span(T) < n");

  // Orthonormal basis of span(T) so the equations are well conditioned.
  Mat tbasis(dim, r);
  if (r > 0) {
    Eigen::JacobiSVD<Mat> svd(subspace, Eigen::ComputeThinU);
    tbasis = svd.matrixU().leftCols(r);
  }

  std::mt19937_64 rng(opts.rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat gauss(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) gauss(i, j) = normal(rng);
  const Mat frame = Eigen::HouseholderQR<Mat>(gauss).householderQ();

  std::vector<Vec> found;
  for (int s = 0; s < opts.seeds; ++s) {
    Vec coords(dim);
    for (int i = 0; i < dim; ++i) coords[i] = normal(rng);
    Vec u = frame * coords;
    u /= n.eval(u);

    // Newton on [g_u(u, t_i) = 0, F(u) = 1] with minimum-norm steps.
    // d/du g_u(u, t) = g_u t and dF = g_u u / F.
    bool ok = false;
    for (int it = 0; it < 60; ++it) {
      const Mat g = fundamental_tensor(n, u, tol);
      const Vec l = g * u;
      const double fu = n.eval(u);
      Vec res(r + 1);
      Mat jac(r + 1, dim);
      for (int i = 0; i < r; ++i) {
        res[i] = l.dot(tbasis.col(i));
        jac.row(i) = (g * tbasis.col(i)).transpose();
      }
      res[r] = fu - 1.0;
      jac.row(r) = (l / fu).transpose();
      if (res.cwiseAbs().maxCoeff() <= 1e-13) {
        ok = true;
        break;
      }
      const Vec step = jac.completeOrthogonalDecomposition().solve(-res);
      u += step;
      if (!u.allFinite() || u.norm() == 0.0) break;
    }
    if (!ok) {
      if (!u.allFinite() || u.norm() == 0.0) continue;
      u /= n.eval(u);
    }
    if (std::abs(n.eval(u) - 1.0) > 1e-10) continue;
    if (r > 0 && orthogonality_residual(n, u, tbasis, tol) > opts.residual_tol) continue;
    const bool dup = std::any_of(found.begin(), found.end(), [&](const Vec& f) {
      return (f - u).norm() <= opts.dedup_tol;
    });
    if (!dup) found.push_back(u);
  }
  if (found.empty()) throw EmptyConeError("no orthogonal direction found from any seed");
  return found;
}

QuotientResult quotient_norm(const MinkowskiNorm& n, const Mat& projection, const Vec& w,
                             const numkit::Tolerances& tol) {
  require_nonzero(w, "quotient norm evaluated at w = 0");
  if (projection.cols() != n.dim || projection.rows() != w.size())
    throw DomainError("quotient norm: projection has the wrong shape");
  if (numkit::numeric_rank(projection, 1e-10) < projection.rows())
    throw UnboundedFiberError("quotient norm: projection is not surjective");

  auto half_sq = [&](const Vec& v) {
    const double f = n.eval(v);
    return 0.5 * f * f;
  };
  numkit::MinimizeOptions mo;
  mo.grad_tol = tol.opt_grad_tol * std::max(1.0, w.norm());
  mo.fd_step = tol.fd_step;
  mo.gradient = [&](const Vec& v) { return legendre(n, v, tol); };
  mo.hessian = [&](const Vec& v) { return fundamental_tensor(n, v, tol); };
  const Vec start = projection.completeOrthogonalDecomposition().solve(w);
  mo.escape_norm = 1e8 * std::max(1.0, start.norm());
  const auto res =
      numkit::minimize_smooth(half_sq, start, numkit::AffineConstraint{projection, w}, mo);

  QuotientResult out;
  out.minimizer = res.argmin;
  out.value = n.eval(res.argmin);
  Eigen::JacobiSVD<Mat> svd(projection, Eigen::ComputeFullV);
  const Mat kernel = svd.matrixV().rightCols(n.dim - projection.rows());
  out.horizontality = kernel.cols() ? orthogonality_residual(n, out.minimizer, kernel, tol) : 0.0;
  return out;
}

MinkowskiNorm induced_quotient_norm(const MinkowskiNorm& n, const Mat& projection,
                                    const numkit::Tolerances& tol) {
  MinkowskiNorm q;
  q.dim = static_cast<int>(projection.rows());
  q.eval = [n, projection, tol](const Vec& w) {
    if (w.norm() == 0.0) return 0.0;
    return quotient_norm(n, projection, w, tol).value;
  };
  return q;
}

}  // namespace zermelo::minkowski
