#pragma once

#include "zermelo/common.hpp"
#include "zermelo/geodesic.hpp"
#include "zermelo/manifold.hpp"
#include "zermelo/report.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

/// Singular foliations given by invariant maps, and their verification.
namespace zermelo::foliation {

using geodesic::Direction;
using manifold::Point;
using manifold::Scene;
using manifold::SubmanifoldPatch;

/// Leaves are the connected components of the level sets of `invariant`.
/// Everything is expressed in ambient coordinates of the scene's embedding.
struct FoliationModel {
  std::string name;
  int regular_leaf_dim = 0;
  std::function<Vec(const Vec&)> invariant;
  /// Ambient tangent vectors spanning the leaf through X (columns vanish on
  /// lower-dimensional leaves).
  std::function<Mat(const Vec&)> leaf_frame;
  /// A plaque of the leaf through X.
  std::function<SubmanifoldPatch(const Vec&)> leaf_through;
  /// Patches covering the minimal stratum.
  std::vector<SubmanifoldPatch> minimal_strata;
  /// Random point of the regular stratum away from the singular set.
  std::function<Vec(std::mt19937_64&)> sample_regular;

  /// Numerical rank of the leaf frame at X (absolute cutoff 1e-9).
  int stratum_label(const Vec& X) const;
  /// Leaf frame at p in the chart of p.
  Mat frame_at(const Scene& scene, const Point& p) const;
  /// d(rho) at p in the chart of p (k x n).
  Mat invariant_differential(const Scene& scene, const Point& p) const;
  /// Largest componentwise range of rho over the points.
  double spread(const std::vector<Vec>& ambient_points) const;
};

std::vector<std::string> foliation_names();
/// horizontal-lines | concentric-circles | latitudes | axial-circles | hopf-fibers
FoliationModel make_foliation(const std::string& name);

// ─── Finsler condition ───────────────────────────────────────────────────────

struct FinslerCheckOptions {
  int trials = 8;
  std::uint64_t seed = 1;
  /// Z-length of each integrated geodesic (each direction).
  double length = 1.0;
  int samples = 40;
  double threshold = 1e-4;
  /// Points whose leaf frame is shorter than this are treated as singular.
  double singular_margin = 0.05;
  numkit::Tolerances tol;
};

/// Orthogonal geodesics, forward and (reverse metric) backward, must stay
/// orthogonal to every leaf they cross.
Report check_finsler(const Scene& scene, const FoliationModel& fol,
                     const FinslerCheckOptions& opts = {});

// ─── Equidistance and homothetic transformations ─────────────────────────────

struct EquidistanceOptions {
  int samples = 12;
  double relative_threshold = 1e-3;
  geodesic::PatchDistanceOptions patch;
};

struct EquidistanceResult {
  Direction direction = Direction::forward;
  double mean = 0.0;
  double spread = 0.0;
  std::vector<Vec> targets;
  std::vector<double> distances;
  bool pass = false;
};

/// Distances from the plaque through `source` to samples of the leaf through
/// `target` (forward: d(P, x); backward: d(x, P)).
EquidistanceResult check_equidistance(const Scene& scene, const FoliationModel& fol,
                                      const Vec& source, const Vec& target, Direction direction,
                                      const EquidistanceOptions& opts = {});

/// Both directions as report rows (value = spread / mean).
Report equidistance_report(const Scene& scene, const FoliationModel& fol, const Vec& source,
                           const Vec& target, const EquidistanceOptions& opts = {},
                           std::vector<EquidistanceResult>* results = nullptr);

/// h_lambda(x): slides x along its orthogonal connector to the plaque P so its
/// distance becomes lambda times the original (future for forward, past for backward).
Point homothetic_transform(const Scene& scene, const SubmanifoldPatch& plaque, const Point& x,
                           double lambda, Direction direction = Direction::forward,
                           const geodesic::PatchDistanceOptions& opts = {});

// ─── Strata and the wind ─────────────────────────────────────────────────────

/// Norm of the h-normal part of W at samples of each stratum patch.
Report check_wind_tangency(const Scene& scene, const std::vector<SubmanifoldPatch>& strata,
                           int samples = 9, double threshold = 1e-6);

struct MinkowskiLemmaOptions {
  int leaves = 6;
  int leaf_samples = 12;
  int stratum_samples = 7;
  double perpendicular_threshold = 1e-6;
  double containment_threshold = 1e-10;
  FinslerCheckOptions finsler;
  std::uint64_t seed = 3;
};

/// Leaf tangents a-perpendicular to beta_sharp, leaves inside planes
/// <y, beta_sharp>_a = c, beta_sharp in the span of the minimal stratum, and the
/// Finsler condition for the Euclidean (wind-free) metric a.  Requires constant
/// h and W; throws PreconditionError otherwise.
Report check_minkowski_lemmas(const Scene& scene, const FoliationModel& fol,
                              const MinkowskiLemmaOptions& opts = {});

// ─── Riemannian reduction ────────────────────────────────────────────────────

struct Theorem1Options {
  FinslerCheckOptions finsler;
  /// (source, target) leaf points for the equidistance part.
  std::vector<std::pair<Vec, Vec>> leaf_pairs;
  EquidistanceOptions equidistance;
  std::vector<double> flow_times{0.5, 1.0};
  int flow_leaves = 4;
  int flow_leaf_samples = 12;
  double flow_threshold = 1e-5;
};

/// Gated on check_finsler for the Randers scene; then the Finsler condition and
/// equidistance for h alone, and leaf preservation by the flow of W.
Report check_theorem1(const Scene& scene, const FoliationModel& fol,
                      const Theorem1Options& opts = {});

// ─── Equifocality ────────────────────────────────────────────────────────────

struct EquifocalOptions {
  int samples = 20;
  std::vector<double> times{0.25, 0.5, 0.75, 1.3, 1.8};
  std::optional<double> focal_time;
  /// xi is the Z-unit vector whose Legendre covector is a positive multiple of
  /// sum_i coefficients_i d(rho_i).
  Vec coefficients = Vec::Ones(1);
  double homothety_threshold = 1e-8;
  double spread_threshold = 1e-4;
  double identity_threshold = 1e-4;
  geodesic::EndpointOptions endpoint;
};

struct EquifocalTime {
  double t = 0.0;
  double s = 0.0;
  bool focal = false;
  std::vector<geodesic::EndpointSample> images;
  double leaf_spread = 0.0;
  double point_spread = 0.0;
  int min_rank = 0, max_rank = 0;
  double identity_error = 0.0;
  /// Same identity with the literal arc_reparam(sigma, t).
  double identity_error_literal = 0.0;
};

struct EquifocalResult {
  Report report;
  double sigma = 0.0;
  double homothety_residual = 0.0;
  std::vector<EquifocalTime> times;
};

/// Z-unit basic normal field over the leaf patch built from d(rho).
geodesic::NormalField basic_normal_field(const Scene& scene, const FoliationModel& fol,
                                         const SubmanifoldPatch& U, const Vec& coefficients);

/// Endpoint maps of t * xi over samples of the leaf through `leaf_point`:
/// images on one leaf, constant rank, and eta_{t xi} = phi_t(eta^h_{s xi~}).
EquifocalResult check_equifocal(const Scene& scene, const FoliationModel& fol,
                                const Vec& leaf_point, const EquifocalOptions& opts = {});

// ─── Blow-up of the slice metric ─────────────────────────────────────────────

/// Randers data on the affine chart slice q + N y (N an h-orthonormal frame of
/// the h-orthogonal complement of the leaf at q): the quotient of Z by the leaf
/// tangents.
Scene slice_scene(const Scene& scene, const FoliationModel& fol, const Point& q, double radius);

struct BlowupOptions {
  std::vector<double> lambdas;  // default 1, 1/2, ..., 1/1024
  int directions = 8;
  double y_scale = 0.5;
  double threshold = 1e-3;
  double noise = 1e-9;
  double fd_step = 1e-4;
  numkit::Tolerances tol = geodesic::ShootingOptions::tight_tolerances();
};

struct BlowupResult {
  std::vector<double> lambdas;
  std::vector<double> differences;
  bool monotone = false;
  Report report;
};

/// sup over sampled (y, u) of |F^lambda(y, u) - F_q(u)| with
/// F^lambda(y, u) = F_{exp_q(lambda y)}(d exp_q|_{lambda y} u) on the slice.
BlowupResult blowup_metric_check(const Scene& scene, const FoliationModel& fol, const Point& q,
                                 const BlowupOptions& opts = {});

}  // namespace zermelo::foliation
