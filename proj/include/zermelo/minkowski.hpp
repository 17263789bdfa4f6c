#pragma once

#include "zermelo/common.hpp"
#include "zermelo/numkit.hpp"

#include <cstdint>
#include <functional>
#include <vector>

/// Minkowski norms on a single tangent space.
namespace zermelo::minkowski {

/// A positively homogeneous, strongly convex norm on R^dim.
///
/// `eval` must be smooth away from the origin.  Norms with a known fundamental
/// tensor (Randers-backed norms) supply it through `closed_form_tensor`;
/// otherwise the tensor is half the finite-difference Hessian of F^2.
struct MinkowskiNorm {
  int dim = 0;
  std::function<double(const Vec&)> eval;
  std::function<Mat(const Vec&)> closed_form_tensor;  // may be empty

  double operator()(const Vec& v) const { return eval(v); }
};

MinkowskiNorm euclidean_norm(int dim);

/// The norm v -> sqrt(v^T q v) for a symmetric positive-definite q.
MinkowskiNorm quadratic_norm(const Mat& q);

/// The reverse norm v -> F(-v).
MinkowskiNorm reversed(const MinkowskiNorm& n);

/// g_v; throws DomainError at v = 0.
Mat fundamental_tensor(const MinkowskiNorm& n, const Vec& v,
                       const numkit::Tolerances& tol = {});

/// C_v(w1,w2,w3) = 1/2 d/dz g_{v+z w1}(w2,w3) at z = 0.
double cartan_contraction(const MinkowskiNorm& n, const Vec& v, const Vec& w1,
                          const Vec& w2, const Vec& w3, const numkit::Tolerances& tol = {});

/// v -> g_v(v, .) as a coefficient vector.
Vec legendre(const MinkowskiNorm& n, const Vec& v, const numkit::Tolerances& tol = {});

/// Solves g_v(v, .) = p by damped Newton (halving, at most 100 iterations).
/// Throws InversionError on failure.
Vec legendre_inverse(const MinkowskiNorm& n, const Vec& p,
                     const numkit::Tolerances& tol = {});

struct ConeOptions {
  int seeds = 8;
  std::uint64_t rng_seed = 1;
  double residual_tol = 1e-8;
  double dedup_tol = 1e-6;
};

/// Unit vectors u (F(u) = 1) with g_u(u, t) = 0 for every column t of
/// `subspace`.  Returns at most `seeds` distinct solutions found by Newton
/// root-finding on the indicatrix from random seeds.  Throws EmptyConeError if
/// no seed converges.
std::vector<Vec> orthogonal_cone(const MinkowskiNorm& n, const Mat& subspace,
                                 const ConeOptions& opts = {},
                                 const numkit::Tolerances& tol = {});

/// max_t |g_u(u,t)| / (F(u) |t|) over the columns of `subspace`.
double orthogonality_residual(const MinkowskiNorm& n, const Vec& u, const Mat& subspace,
                              const numkit::Tolerances& tol = {});

struct QuotientResult {
  double value = 0.0;
  Vec minimizer;
  /// max over a basis of ker P of |g_{v*}(v*, k)| / (F(v*) |k|).
  double horizontality = 0.0;
};

/// inf { F(v) : P v = w } over the affine fiber.  Throws DomainError for w = 0
/// and UnboundedFiberError for a non-surjective P or an escaping minimizer.
QuotientResult quotient_norm(const MinkowskiNorm& n, const Mat& projection, const Vec& w,
                             const numkit::Tolerances& tol = {});

/// The quotient norm w -> inf { F(v) : P v = w } packaged as a MinkowskiNorm.
MinkowskiNorm induced_quotient_norm(const MinkowskiNorm& n, const Mat& projection,
                                    const numkit::Tolerances& tol = {});

}  // namespace zermelo::minkowski
