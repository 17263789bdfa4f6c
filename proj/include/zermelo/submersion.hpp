#pragma once

#include "zermelo/common.hpp"
#include "zermelo/manifold.hpp"
#include "zermelo/minkowski.hpp"
#include "zermelo/randers.hpp"
#include "zermelo/report.hpp"

#include <functional>
#include <random>
#include <string>
#include <vector>

/// Finsler submersions onto m-dimensional bases given in one coordinate chart.
namespace zermelo::submersion {

using manifold::Point;
using manifold::Scene;

/// Norm of the base at base coordinates y.
using BaseNormField = std::function<minkowski::MinkowskiNorm(const Vec& y)>;
using BaseZermeloField = std::function<randers::ZermeloData(const Vec& y)>;

struct SubmersionSpec {
  SubmersionSpec(std::string name_, Scene total_)
      : name(std::move(name_)), total(std::move(total_)) {}

  std::string name;
  Scene total;
  int base_dim = 0;
  /// pi on ambient points of the total scene, into base coordinates.
  std::function<Vec(const Vec& ambient)> map;
  /// Optional analytic d(pi) in the chart of p (m x n).
  std::function<Mat(const Point& p)> differential;
  /// Random ambient point of the total space inside the domain of the base chart.
  std::function<Vec(std::mt19937_64&)> sample_total;
  /// Ambient points of the fiber over base coordinates y (at least two).
  std::function<std::vector<Vec>(const Vec& y)> fiber;

  Vec project(const Point& p) const;
  /// d(pi) at p in the chart of p; finite differences unless overridden.
  Mat dpi(const Point& p) const;
};

BaseNormField norm_field(BaseZermeloField base);

struct SubmersionCheckOptions {
  int samples = 12;
  int directions = 12;
  std::uint64_t seed = 5;
  double threshold = 1e-6;
  double horizontality_threshold = 1e-7;
  numkit::Tolerances tol;
};

/// Compares the quotient of Z_total through d(pi) with Z_base at pi(p).
/// Throws NotSubmersionError when d(pi) has rank below m at a sample.
Report check_submersion(const SubmersionSpec& spec, const BaseNormField& base,
                        const SubmersionCheckOptions& opts = {});

/// The induced base norm of w at y, checked at two fiber points.
/// Throws WellDefinednessError when they differ by more than `tolerance`.
double induced_base_metric(const SubmersionSpec& spec, const Vec& y, const Vec& w,
                           double tolerance = 1e-5, const numkit::Tolerances& tol = {});

struct RandersStructureOptions {
  /// Base points to fit at; sampled images of the total space when empty.
  std::vector<Vec> base_points;
  int samples = 6;
  std::uint64_t seed = 9;
  double fit_threshold = 1e-6;
  double wind_threshold = 1e-6;
  double riemannian_threshold = 1e-6;
  numkit::Tolerances tol;
};

struct RandersStructure {
  Report report;
  std::vector<Vec> base_points;
  std::vector<randers::ZermeloData> fitted;
};

/// Fits Randers data to the induced base norm, then checks that the base wind
/// is d(pi) W and that pi is an h-Riemannian submersion once winds are removed.
RandersStructure check_randers_submersion_structure(const SubmersionSpec& spec,
                                                    const RandersStructureOptions& opts = {});

/// Randers data (a, beta) fitted from norms of directions w and -w.
/// `residual` receives the largest |Z(w) - fitted(w)|.
randers::RandersData fit_randers(const std::vector<Vec>& directions,
                                 const std::vector<double>& forward,
                                 const std::vector<double>& backward, double* residual = nullptr);

/// Same total and base with winds translated by (W~, d(pi) W~).
SubmersionSpec translated(const SubmersionSpec& spec, const manifold::WindField& extra);
BaseZermeloField translated_base(BaseZermeloField base, std::function<Vec(const Vec& y)> extra);

// ─── Builtin submersions ─────────────────────────────────────────────────────

/// Identity of a scene onto itself (single-chart scenes).
SubmersionSpec identity_submersion(const Scene& scene, std::function<Vec(std::mt19937_64&)> sample);

/// (x, y) -> x on the ball of radius 3 with constant wind; base data (1, wind_x).
SubmersionSpec plane_projection(const Vec& wind);
BaseZermeloField plane_projection_base(const Vec& wind);

/// Hopf map S^3 -> S^2(1/2), followed by stereographic coordinates of S^2(1/2)
/// from (0, 0, -1/2).  `wind` is a hopf-vertical or hopf-horizontal WindSpec.
SubmersionSpec hopf_submersion(const manifold::WindSpec& wind);
/// Round S^2(1/2) in those coordinates with wind 2 epsilon (-y2, y1) for the
/// horizontal rotation wind and zero for the vertical one.
BaseZermeloField hopf_base(const manifold::WindSpec& wind);

std::vector<std::string> submersion_names();
/// plane-projection (wind.vector) | hopf (hopf-vertical or hopf-horizontal wind)
SubmersionSpec make_submersion(const std::string& name, const manifold::WindSpec& wind);
BaseZermeloField make_base(const std::string& name, const manifold::WindSpec& wind);

}  // namespace zermelo::submersion
