#pragma once

#include "zermelo/common.hpp"
#include "zermelo/minkowski.hpp"
#include "zermelo/numkit.hpp"
#include "zermelo/randers.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

/// Chart-based model spaces carrying a Riemannian metric h and a wind W.
///
/// Every builtin manifold is an embedded submanifold of a Euclidean space;
/// points are stored in chart coordinates and compared through the embedding.
namespace zermelo::manifold {

struct Chart {
  std::string name;
  int dim = 0;
  int ambient_dim = 0;
  std::function<Vec(const Vec&)> to_ambient;
  /// ambient_dim x dim differential of to_ambient.
  std::function<Mat(const Vec&)> jacobian;
  /// Left inverse of to_ambient on the embedded manifold.
  std::function<Vec(const Vec&)> from_ambient;
  /// Distortion measure; integrations switch charts once it exceeds switch_threshold.
  std::function<double(const Vec&)> badness;
  double switch_threshold = std::numeric_limits<double>::infinity();
  /// Working region; leaving it is a domain exit.
  std::function<bool(const Vec&)> in_region;
};

struct Point {
  int chart = 0;
  Vec x;
};

using MetricField = std::function<Mat(int chart, const Vec& x)>;
using WindField = std::function<Vec(int chart, const Vec& x)>;
using AmbientField = std::function<Vec(const Vec& ambient)>;

class Scene {
 public:
  Scene(std::string name, std::vector<Chart> charts, MetricField metric, WindField wind);
  Scene(std::string name, std::shared_ptr<const std::vector<Chart>> charts, MetricField metric,
        WindField wind);

  const std::string& name() const { return name_; }
  int dim() const { return charts_->front().dim; }
  int ambient_dim() const { return charts_->front().ambient_dim; }
  int chart_count() const { return static_cast<int>(charts_->size()); }
  const Chart& chart(int i) const { return charts_->at(static_cast<std::size_t>(i)); }
  const std::shared_ptr<const std::vector<Chart>>& charts() const { return charts_; }

  Mat metric(const Point& p) const { return metric_(p.chart, p.x); }
  Vec wind(const Point& p) const { return wind_(p.chart, p.x); }
  Mat metric(int chart, const Vec& x) const { return metric_(chart, x); }
  Vec wind(int chart, const Vec& x) const { return wind_(chart, x); }
  const MetricField& metric_field() const { return metric_; }
  const WindField& wind_field() const { return wind_; }

  Vec ambient(const Point& p) const;
  /// Chart with the smallest badness at the given ambient point.
  Point locate(const Vec& ambient) const;
  Point to_chart(const Point& p, int chart) const;
  /// Re-expresses a tangent vector at p in the coordinates of `target_chart`.
  Vec transfer(const Point& p, const Vec& v, int target_chart) const;
  /// Chart components of an ambient tangent vector at p.
  Vec from_ambient_vector(const Point& p, const Vec& ambient_vector) const;
  Vec to_ambient_vector(const Point& p, const Vec& v) const;
  bool in_region(const Point& p) const;
  /// Moves p to a better chart if its badness exceeds the switch threshold.
  Point rechart(const Point& p) const;

  /// Throws InvalidWindError naming the point when h(W,W) >= 1 there.
  randers::ZermeloData zermelo_at(const Point& p) const;
  randers::RandersData randers_at(const Point& p) const;
  minkowski::MinkowskiNorm norm_at(const Point& p) const;

  Scene with_wind(WindField wind, const std::string& suffix) const;
  Scene with_metric(MetricField metric, const std::string& suffix) const;
  Scene without_wind() const;
  /// Zermelo data (h, -W): the reverse metric Z(-v).
  Scene reversed() const;

 private:
  std::string name_;
  std::shared_ptr<const std::vector<Chart>> charts_;
  MetricField metric_;
  WindField wind_;
};

/// Tangent vector components of an ambient field, resolved in each chart.
WindField chart_field_from_ambient(std::shared_ptr<const std::vector<Chart>> charts,
                                   AmbientField field);

/// Metric induced by the Euclidean ambient space, J^T J.
MetricField induced_metric(std::shared_ptr<const std::vector<Chart>> charts);

// ─── Builtin model spaces ────────────────────────────────────────────────────

/// Open ball of R^dim (identity chart) with the Euclidean metric.  An empty wind is W = 0.
Scene euclidean_ball(int dim, double radius, AmbientField wind, std::string name);

/// Round sphere S^n of the given radius in R^(n+1) with two stereographic charts.
Scene round_sphere(int n, double radius, AmbientField wind, std::string name);

struct WindSpec {
  /// none | constant | rotational | rigid-rotation | radial | killing | hopf-vertical |
  /// hopf-horizontal
  std::string type = "none";
  double epsilon = 0.0;
  double c = 0.0;
  std::vector<double> vector;
};

struct SceneSpec {
  /// euclidean-ball | sphere2 | sphere3-hopf | cylinder-r3
  std::string template_name = "euclidean-ball";
  /// Only used by euclidean-ball.
  int dim = 2;
  /// Ball radius (default 3) or sphere radius (default 1).
  std::optional<double> radius;
  WindSpec wind;
  std::string name;
};

std::vector<std::string> scene_templates();
AmbientField make_ambient_wind(const WindSpec& spec, int ambient_dim);
Scene build_scene(const SceneSpec& spec);

// ─── Submanifold patches ─────────────────────────────────────────────────────

/// A k-parameter patch of a submanifold, parametrised in ambient coordinates.
struct SubmanifoldPatch {
  int dim = 0;
  std::function<Vec(const Vec&)> param;
  Vec lower;
  Vec upper;
  /// Periodic patches (closed leaves) accept any parameter value.
  bool periodic = false;
  /// Optional analytic ambient tangent frame (ambient_dim x dim).
  std::function<Mat(const Vec&)> ambient_frame;

  bool contains(const Vec& s) const;
  Mat frame_ambient(const Vec& s) const;
};

Point patch_point(const Scene& scene, const SubmanifoldPatch& patch, const Vec& s);
/// Tangent frame (n x k) in the chart of `at`.
Mat patch_frame(const Scene& scene, const SubmanifoldPatch& patch, const Vec& s, const Point& at);

/// A single point as a 0-dimensional patch.
SubmanifoldPatch point_patch(const Vec& ambient_point);

// ─── Integration across charts ───────────────────────────────────────────────

/// Right-hand side in chart coordinates; the state is [x; c_1; ...; c_m] where
/// each c_j transforms as a tangent vector.
using ChartRhs = std::function<Vec(int chart, double t, const Vec& state)>;

struct ChartState {
  Point p;
  Mat vectors;  // n x m
};

class ChartPath {
 public:
  ChartState at(double t) const;
  ChartState end() const;
  double t_begin() const { return segments_.front().traj.t_begin(); }
  double t_end() const { return segments_.back().traj.t_end(); }
  /// All accepted step states, in their own charts.
  std::vector<std::pair<double, ChartState>> steps() const;

 private:
  friend ChartPath integrate_on_charts(const Scene&, const ChartState&, const ChartRhs&, double,
                                       double, const numkit::OdeOptions&);
  struct Segment {
    int chart;
    numkit::Trajectory traj;
  };
  ChartState unpack(int chart, const Vec& y) const;
  std::vector<Segment> segments_;
  int n_ = 0;
  int m_ = 0;
};

/// Integrates across charts, switching when the chart badness exceeds its
/// threshold.  Throws DomainExitError when the working region is left.
ChartPath integrate_on_charts(const Scene& scene, const ChartState& start, const ChartRhs& rhs,
                              double t0, double t1, const numkit::OdeOptions& opts);

// ─── Wind flow and homotheties ───────────────────────────────────────────────

/// phi_t(p) for x' = W(x).
Point flow(const Scene& scene, const Point& p, double t, const numkit::Tolerances& tol = {});

/// phi_t(p) together with d(phi_t)_p applied to the columns of `vectors`.
ChartState flow_with_tangent(const Scene& scene, const Point& p, const Mat& vectors, double t,
                             const numkit::Tolerances& tol = {});

/// Finite-difference Lie derivative (L_W h) in chart coordinates.
Mat lie_derivative_metric(const Scene& scene, const Point& p, double step = 1e-5);

struct HomothetyFit {
  /// Least-squares sigma in L_W h = -sigma h.
  double sigma = 0.0;
  /// Max entrywise |L_W h + sigma h| over the points.
  double residual = 0.0;
};

HomothetyFit homothety_constant(const Scene& scene, const std::vector<Point>& points,
                                double step = 1e-5);

}  // namespace zermelo::manifold
