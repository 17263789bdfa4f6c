#pragma once

#include "zermelo/common.hpp"
#include "zermelo/manifold.hpp"
#include "zermelo/numkit.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

/// Geodesics of the Randers metric Z of a scene.
namespace zermelo::geodesic {

using manifold::Point;
using manifold::Scene;

struct PathSample {
  double t = 0.0;
  Point point;
  /// Velocity in the chart of `point`.
  Vec velocity;
};

/// A curve t -> (gamma(t), gamma'(t)) with a continuous evaluator and a
/// discrete sample list.
class GeodesicPath {
 public:
  using Evaluator = std::function<PathSample(double)>;

  GeodesicPath(Scene scene, double t0, double t1, Evaluator eval,
               const std::vector<double>& sample_times, const numkit::Tolerances& tol = {});

  const std::vector<PathSample>& samples() const { return samples_; }
  PathSample at(double t) const { return eval_(t); }
  const PathSample& start() const { return samples_.front(); }
  const PathSample& end() const { return samples_.back(); }
  double t_begin() const { return t0_; }
  double t_end() const { return t1_; }
  /// F(gamma'(t)).
  double speed(double t) const;
  /// Max normalised Euler-Lagrange defect over the interior samples.
  double residual() const { return residual_; }
  const Scene& scene() const { return scene_; }

 private:
  Scene scene_;
  double t0_, t1_;
  Evaluator eval_;
  std::vector<PathSample> samples_;
  double residual_ = 0.0;
};

/// Acceleration of the Euler-Lagrange system of L = Z^2/2 in chart `chart`.
/// Throws DegeneracyError if the fundamental tensor cannot be inverted.
Vec geodesic_acceleration(const Scene& scene, int chart, const Vec& x, const Vec& v,
                          double fd_step = 1e-5);

/// |d/dt L_v - L_x| / max(1, Z(v)^2) from a continuous evaluator at time t.
double equation_defect(const Scene& scene, const GeodesicPath::Evaluator& eval, double t,
                       double delta, double fd_step = 1e-5);

/// Integrates gamma'' = a(gamma, gamma') on [0, T] with gamma(0) = p, gamma'(0) = v.
GeodesicPath geodesic_ivp(const Scene& scene, const Point& p, const Vec& v, double T,
                          const numkit::Tolerances& tol = {});

/// gamma_v(1); exp_p(0) = p.
Point exp_map(const Scene& scene, const Point& p, const Vec& v,
              const numkit::Tolerances& tol = {});

// ─── Arc-length reparametrisation ────────────────────────────────────────────

/// s(t) = -(2/sigma)(exp(-sigma t/2) - 1), and s = t at sigma = 0.
double arc_reparam(double sigma, double t);

struct ArcReparam {
  double sigma = 0.0;
  double operator()(double t) const { return arc_reparam(sigma, t); }
  /// ds/dt = exp(-sigma t/2).
  double derivative(double t) const;
};

// ─── Navigation construction ─────────────────────────────────────────────────

struct NavigationOptions {
  /// Maximum homothety fit residual accepted as "W is a homothety".
  double homothety_threshold = 1e-6;
  /// Number of uniform samples on [0, T].
  int samples = 41;
  /// Reparametrise with arc_reparam(sigma, t) instead of arc_reparam(-sigma, t).
  bool literal_reparam = false;
  numkit::Tolerances tol;
};

struct NavigationPath {
  GeodesicPath path;
  double sigma = 0.0;
  double homothety_residual = 0.0;
  /// Initial velocity of the underlying h-geodesic, v - W(p).
  Vec h_velocity;
};

/// gamma(t) = phi_t(h-geodesic(s(t))) with h-geodesic'(0) = v - W(p).  With
/// L_W h = -sigma h the h-speed of the inner curve is exp(sigma t/2), i.e.
/// s(t) = arc_reparam(-sigma, t).  Throws PreconditionError if W is not an
/// infinitesimal homothety near p and DomainError unless Z(v) = 1.
NavigationPath navigation_geodesic(const Scene& scene, const Point& p, const Vec& v, double T,
                                   const NavigationOptions& opts = {});

/// sup_t |gamma_1(t) - gamma_2(t)| in ambient coordinates over `samples` uniform times.
double sup_deviation(const Scene& scene, const GeodesicPath& a, const GeodesicPath& b,
                     int samples = 101);

// ─── Boundary-value problems ─────────────────────────────────────────────────

struct ShootingOptions {
  /// Direction seeds on the indicatrix after the chart-difference guess.
  int seeds = 16;
  /// Converged when the ambient endpoint miss is below this.
  double miss_tol = 1e-9;
  std::uint64_t rng_seed = 7;
  numkit::Tolerances tol = tight_tolerances();

  static numkit::Tolerances tight_tolerances() {
    numkit::Tolerances t;
    t.ode_rel_tol = 1e-11;
    t.ode_abs_tol = 1e-13;
    return t;
  }
};

struct ShootingResult {
  double distance = 0.0;
  /// Initial velocity at p with exp_p(v) = q.
  Vec velocity;
  double miss = 0.0;
  int seeds_tried = 0;
};

/// d(p, q) by multi-start shooting.  Throws UnreachableError if no shot converges.
ShootingResult shoot(const Scene& scene, const Point& p, const Point& q,
                     const ShootingOptions& opts = {});

double distance(const Scene& scene, const Point& p, const Point& q,
                const ShootingOptions& opts = {});

enum class Direction { forward, backward };

const char* to_string(Direction d);

struct PatchDistanceOptions {
  /// Tubular-neighbourhood scale; connectors longer than this are rejected.
  double scale = std::numeric_limits<double>::infinity();
  /// Patch samples per parameter used to pick foot-point seeds.
  int grid = 48;
  /// Number of nearest grid samples used as seeds.
  int foot_seeds = 3;
  double miss_tol = 1e-9;
  numkit::Tolerances tol = ShootingOptions::tight_tolerances();
};

struct PatchDistance {
  double distance = 0.0;
  Point foot;
  Vec foot_param;
  /// Forward: initial velocity of the connector at the foot.  Backward: the
  /// velocity with which the Z-geodesic from x arrives at the foot.  Both
  /// scaled so that the connector is parametrised on [0, 1].
  Vec velocity;
  /// max |g_u(u, T_foot P)| / (Z(u) |t|) for the reported velocity.
  double cone_residual = 0.0;
  double miss = 0.0;
};

/// Shortest connector between P and x leaving P orthogonally (forward) or
/// arriving at P orthogonally (backward, computed on the reversed scene).
/// Throws SearchFailureError if no orthogonal connector is found.
PatchDistance distance_to_patch(const Scene& scene, const manifold::SubmanifoldPatch& patch,
                                const Point& x, Direction direction,
                                const PatchDistanceOptions& opts = {});

// ─── Endpoint map ────────────────────────────────────────────────────────────

/// A normal field over a patch: parameter s and base point -> vector in the
/// chart of the base point.
using NormalField = std::function<Vec(const Vec& s, const Point& at)>;

struct EndpointSample {
  Vec param;
  Point image;
  Vec image_ambient;
  int rank = 0;
  /// Singular values of the Jacobian of s -> image, relative to those of the patch.
  Vec singular_values;
};

struct EndpointOptions {
  double fd_step = 1e-4;
  numkit::Tolerances tol = ShootingOptions::tight_tolerances();
};

/// eta_xi(x) = exp_x(xi(x)) over the given patch parameters, with the rank of
/// its finite-difference Jacobian relative to the scale of the patch frame.
std::vector<EndpointSample> endpoint_map(const Scene& scene, const manifold::SubmanifoldPatch& U,
                                         const NormalField& xi, const std::vector<Vec>& params,
                                         const EndpointOptions& opts = {});

// ─── Export ──────────────────────────────────────────────────────────────────

/// Columns: t, X1..XN (ambient point), V1..VN (ambient velocity), speed, residual.
void write_path_csv(std::ostream& os, const GeodesicPath& path, const std::string& label,
                    bool header);

}  // namespace zermelo::geodesic
