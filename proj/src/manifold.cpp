#include "zermelo/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace zermelo::manifold {

namespace {

std::string format_point(const Vec& x) {
  std::ostringstream os;
  os.precision(10);
  os << "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

/// Least-squares solution of J v = V (J has full column rank on the manifold).
Vec solve_tangent(const Mat& jac, const Vec& ambient_vector) {
  return (jac.transpose() * jac).ldlt().solve(jac.transpose() * ambient_vector);
}

Vec pack(const Vec& x, const Mat& vectors) {
  Vec y(x.size() + vectors.size());
  y.head(x.size()) = x;
  for (Eigen::Index j = 0; j < vectors.cols(); ++j)
    y.segment(x.size() * (j + 1), x.size()) = vectors.col(j);
  return y;
}

}  // namespace

// ─── Scene ───────────────────────────────────────────────────────────────────

Scene::Scene(std::string name, std::vector<Chart> charts, MetricField metric, WindField wind)
    : Scene(std::move(name), std::make_shared<const std::vector<Chart>>(std::move(charts)),
            std::move(metric), std::move(wind)) {}

Scene::Scene(std::string name, std::shared_ptr<const std::vector<Chart>> charts,
             MetricField metric, WindField wind)
    : name_(std::move(name)),
      charts_(std::move(charts)),
      metric_(std::move(metric)),
      wind_(std::move(wind)) {
  if (!charts_ || charts_->empty()) throw DomainError("scene needs at least one chart");
}

Vec Scene::ambient(const Point& p) const { return chart(p.chart).to_ambient(p.x); }

Point Scene::locate(const Vec& ambient) const {
  Point best;
  double best_bad = std::numeric_limits<double>::infinity();
  for (int c = 0; c < chart_count(); ++c) {
    const Vec x = chart(c).from_ambient(ambient);
    if (!x.allFinite()) continue;
    const double bad = chart(c).badness ? chart(c).badness(x) : 0.0;
    if (bad < best_bad) {
      best_bad = bad;
      best = Point{c, x};
    }
  }
  if (best.x.size() == 0) throw DomainError("point " + format_point(ambient) + " is in no chart");
  return best;
}

Point Scene::to_chart(const Point& p, int target) const {
  if (p.chart == target) return p;
  return Point{target, chart(target).from_ambient(ambient(p))};
}

Vec Scene::transfer(const Point& p, const Vec& v, int target) const {
  if (p.chart == target) return v;
  const Vec amb = to_ambient_vector(p, v);
  return from_ambient_vector(to_chart(p, target), amb);
}

Vec Scene::from_ambient_vector(const Point& p, const Vec& ambient_vector) const {
  return solve_tangent(chart(p.chart).jacobian(p.x), ambient_vector);
}

Vec Scene::to_ambient_vector(const Point& p, const Vec& v) const {
  return chart(p.chart).jacobian(p.x) * v;
}

bool Scene::in_region(const Point& p) const {
  const Chart& c = chart(p.chart);
  return !c.in_region || c.in_region(p.x);
}

Point Scene::rechart(const Point& p) const {
  const Chart& c = chart(p.chart);
  if (!c.badness || c.badness(p.x) <= c.switch_threshold) return p;
  return locate(ambient(p));
}

randers::ZermeloData Scene::zermelo_at(const Point& p) const {
  try {
    return randers::ZermeloData(metric(p), wind(p));
  } catch (const InvalidWindError& e) {
    throw InvalidWindError(std::string(e.what()) + " at point " + format_point(ambient(p)) +
                           " of scene " + name_);
  }
}

randers::RandersData Scene::randers_at(const Point& p) const {
  return randers::zermelo_to_randers(zermelo_at(p));
}

minkowski::MinkowskiNorm Scene::norm_at(const Point& p) const {
  return randers::as_norm(randers_at(p));
}

Scene Scene::with_wind(WindField wind, const std::string& suffix) const {
  return Scene(name_ + suffix, charts_, metric_, std::move(wind));
}

Scene Scene::with_metric(MetricField metric, const std::string& suffix) const {
  return Scene(name_ + suffix, charts_, std::move(metric), wind_);
}

Scene Scene::without_wind() const {
  return with_wind([](int, const Vec& x) { return Vec(Vec::Zero(x.size())); }, "/no-wind");
}

Scene Scene::reversed() const {
  return with_wind([w = wind_](int c, const Vec& x) { return Vec(-w(c, x)); }, "/reversed");
}

WindField chart_field_from_ambient(std::shared_ptr<const std::vector<Chart>> charts,
                                   AmbientField field) {
  return [charts = std::move(charts), field = std::move(field)](int c, const Vec& x) {
    const Chart& ch = charts->at(static_cast<std::size_t>(c));
    return solve_tangent(ch.jacobian(x), field(ch.to_ambient(x)));
  };
}

MetricField induced_metric(std::shared_ptr<const std::vector<Chart>> charts) {
  return [charts = std::move(charts)](int c, const Vec& x) {
    const Mat j = charts->at(static_cast<std::size_t>(c)).jacobian(x);
    return Mat(j.transpose() * j);
  };
}

// ─── Builtin model spaces ────────────────────────────────────────────────────

Scene euclidean_ball(int dim, double radius, AmbientField wind, std::string name) {
  if (dim < 1 || !(radius > 0.0)) throw DomainError("euclidean ball needs dim >= 1, radius > 0");
  Chart c;
  c.name = "identity";
  c.dim = dim;
  c.ambient_dim = dim;
  c.to_ambient = [](const Vec& x) { return x; };
  c.jacobian = [dim](const Vec&) { return Mat(Mat::Identity(dim, dim)); };
  c.from_ambient = [](const Vec& x) { return x; };
  c.badness = [](const Vec&) { return 0.0; };
  c.in_region = [radius](const Vec& x) { return x.norm() < radius; };
  MetricField metric = [dim](int, const Vec&) { return Mat(Mat::Identity(dim, dim)); };
  if (!wind) wind = [dim](const Vec&) { return Vec(Vec::Zero(dim)); };
  WindField w = [wind = std::move(wind)](int, const Vec& x) { return wind(x); };
  return Scene(std::move(name), std::vector<Chart>{c}, std::move(metric), std::move(w));
}

Scene round_sphere(int n, double radius, AmbientField wind, std::string name) {
  if (n < 1 || !(radius > 0.0)) throw DomainError("sphere needs n >= 1, radius > 0");
  if (!wind) wind = [n](const Vec&) { return Vec(Vec::Zero(n + 1)); };
  const double r = radius;
  // Stereographic projection from the pole -sign * R e_{n+1}.
  auto make_chart = [n, r](double sign, std::string label) {
    Chart c;
    c.name = std::move(label);
    c.dim = n;
    c.ambient_dim = n + 1;
    c.to_ambient = [n, r, sign](const Vec& x) {
      const double x2 = x.squaredNorm();
      const double d = r * r + x2;
      Vec out(n + 1);
      out.head(n) = 2.0 * r * r * x / d;
      out[n] = sign * r * (r * r - x2) / d;
      return out;
    };
    c.jacobian = [n, r, sign](const Vec& x) {
      const double d = r * r + x.squaredNorm();
      Mat j(n + 1, n);
      j.topRows(n) = 2.0 * r * r * (Mat::Identity(n, n) / d - 2.0 * x * x.transpose() / (d * d));
      j.row(n) = -sign * 4.0 * r * r * r * x.transpose() / (d * d);
      return j;
    };
    c.from_ambient = [n, r, sign](const Vec& amb) {
      // Project radially onto the sphere first so slightly-off points are accepted.
      const Vec p = amb * (r / amb.norm());
      return Vec(r * p.head(n) / (r + sign * p[n]));
    };
    c.badness = [r](const Vec& x) { return x.norm() / r; };
    c.switch_threshold = 1.5;
    return c;
  };
  auto charts = std::make_shared<const std::vector<Chart>>(
      std::vector<Chart>{make_chart(1.0, "stereo-south"), make_chart(-1.0, "stereo-north")});
  MetricField metric = [n, r](int, const Vec& x) {
    const double f = 2.0 * r * r / (r * r + x.squaredNorm());
    return Mat(f * f * Mat::Identity(n, n));
  };
  return Scene(std::move(name), charts, std::move(metric),
               chart_field_from_ambient(charts, std::move(wind)));
}

std::vector<std::string> scene_templates() {
  return {"euclidean-ball", "sphere2", "sphere3-hopf", "cylinder-r3"};
}

AmbientField make_ambient_wind(const WindSpec& spec, int ambient_dim) {
  const int d = ambient_dim;
  const double eps = spec.epsilon;
  auto need = [&](int min_dim) {
    if (d < min_dim)
      throw DomainError("wind '" + spec.type + "' needs ambient dimension >= " +
                        std::to_string(min_dim));
  };
  if (spec.type == "none") return [d](const Vec&) { return Vec(Vec::Zero(d)); };
  if (spec.type == "constant") {
    if (static_cast<int>(spec.vector.size()) != d)
      throw DomainError("constant wind needs a vector of length " + std::to_string(d));
    const Vec w = Eigen::Map<const Vec>(spec.vector.data(), d);
    return [w](const Vec&) { return w; };
  }
  if (spec.type == "rotational" || spec.type == "rigid-rotation" || spec.type == "killing") {
    need(2);
    const bool decaying = spec.type == "rotational";
    return [d, eps, decaying](const Vec& x) {
      Vec w = Vec::Zero(d);
      const double f = decaying ? eps / (1.0 + x[0] * x[0] + x[1] * x[1]) : eps;
      w[0] = -f * x[1];
      w[1] = f * x[0];
      return w;
    };
  }
  if (spec.type == "radial") return [c = spec.c](const Vec& x) { return Vec(c * x); };
  if (spec.type == "hopf-vertical" || spec.type == "hopf-horizontal") {
    if (d != 4) throw DomainError("Hopf winds live on S^3 in R^4");
    const bool vertical = spec.type == "hopf-vertical";
    return [eps, vertical](const Vec& x) {
      Vec v(4);
      v << -x[1], x[0], -x[3], x[2];
      if (vertical) return Vec(eps * v);
      Vec w(4);
      w << -x[1], x[0], x[3], -x[2];
      return Vec(eps * (w - (w.dot(v) / v.squaredNorm()) * v));
    };
  }
  throw DomainError("unknown wind type '" + spec.type + "'");
}

Scene build_scene(const SceneSpec& spec) {
  const std::string name = spec.name.empty() ? spec.template_name + "/" + spec.wind.type : spec.name;
  if (spec.template_name == "euclidean-ball") {
    const double r = spec.radius.value_or(3.0);
    return euclidean_ball(spec.dim, r, make_ambient_wind(spec.wind, spec.dim), name);
  }
  if (spec.template_name == "cylinder-r3") {
    const double r = spec.radius.value_or(3.0);
    return euclidean_ball(3, r, make_ambient_wind(spec.wind, 3), name);
  }
  if (spec.template_name == "sphere2") {
    const double r = spec.radius.value_or(1.0);
    return round_sphere(2, r, make_ambient_wind(spec.wind, 3), name);
  }
  if (spec.template_name == "sphere3-hopf") {
    const double r = spec.radius.value_or(1.0);
    return round_sphere(3, r, make_ambient_wind(spec.wind, 4), name);
  }
  throw DomainError("unknown scene template '" + spec.template_name + "'");
}

// ─── Submanifold patches ─────────────────────────────────────────────────────

bool SubmanifoldPatch::contains(const Vec& s) const {
  if (periodic || dim == 0) return true;
  for (int i = 0; i < dim; ++i)
    if (s[i] < lower[i] - 1e-12 || s[i] > upper[i] + 1e-12) return false;
  return true;
}

Mat SubmanifoldPatch::frame_ambient(const Vec& s) const {
  if (ambient_frame) return ambient_frame(s);
  const Vec p0 = param(s);
  if (dim == 0) return Mat(p0.size(), 0);
  return numkit::fd_jacobian(param, s, 1e-6);
}

Point patch_point(const Scene& scene, const SubmanifoldPatch& patch, const Vec& s) {
  return scene.locate(patch.param(s));
}

Mat patch_frame(const Scene& scene, const SubmanifoldPatch& patch, const Vec& s, const Point& at) {
  const Mat amb = patch.frame_ambient(s);
  Mat out(scene.dim(), amb.cols());
  for (Eigen::Index j = 0; j < amb.cols(); ++j) out.col(j) = scene.from_ambient_vector(at, amb.col(j));
  return out;
}

SubmanifoldPatch point_patch(const Vec& ambient_point) {
  SubmanifoldPatch p;
  p.dim = 0;
  p.param = [ambient_point](const Vec&) { return ambient_point; };
  p.lower = Vec(0);
  p.upper = Vec(0);
  p.ambient_frame = [n = ambient_point.size()](const Vec&) { return Mat(n, 0); };
  return p;
}

// ─── Integration across charts ───────────────────────────────────────────────

ChartState ChartPath::unpack(int chart, const Vec& y) const {
  ChartState s;
  s.p = Point{chart, y.head(n_)};
  s.vectors.resize(n_, m_);
  for (int j = 0; j < m_; ++j) s.vectors.col(j) = y.segment(n_ * (j + 1), n_);
  return s;
}

ChartState ChartPath::at(double t) const {
  for (const auto& seg : segments_) {
    const double lo = std::min(seg.traj.t_begin(), seg.traj.t_end());
    const double hi = std::max(seg.traj.t_begin(), seg.traj.t_end());
    if (t >= lo - 1e-14 && t <= hi + 1e-14)
      return unpack(seg.chart, seg.traj.at(std::clamp(t, lo, hi)));
  }
  throw DomainError("time " + std::to_string(t) + " outside the integrated interval");
}

ChartState ChartPath::end() const {
  return unpack(segments_.back().chart, segments_.back().traj.final_state());
}

std::vector<std::pair<double, ChartState>> ChartPath::steps() const {
  std::vector<std::pair<double, ChartState>> out;
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    const auto& seg = segments_[k];
    // Segment starts duplicate the previous segment's end in another chart.
    for (std::size_t i = (k == 0 ? 0 : 1); i < seg.traj.times().size(); ++i)
      out.emplace_back(seg.traj.times()[i], unpack(seg.chart, seg.traj.states()[i]));
  }
  return out;
}

ChartPath integrate_on_charts(const Scene& scene, const ChartState& start, const ChartRhs& rhs,
                              double t0, double t1, const numkit::OdeOptions& opts) {
  ChartPath path;
  path.n_ = scene.dim();
  path.m_ = static_cast<int>(start.vectors.cols());
  const int n = path.n_;

  auto rechart_state = [&](const ChartState& s) {
    const Point q = scene.rechart(s.p);
    if (q.chart == s.p.chart) return s;
    ChartState out;
    out.p = q;
    out.vectors.resize(n, s.vectors.cols());
    for (Eigen::Index j = 0; j < s.vectors.cols(); ++j)
      out.vectors.col(j) = scene.transfer(s.p, s.vectors.col(j), q.chart);
    return out;
  };

  ChartState cur = rechart_state(start);
  if (!scene.in_region(cur.p))
    throw DomainExitError("start point outside the working region of " + scene.name(), t0);
  double t = t0;
  for (int switches = 0;; ++switches) {
    if (switches > 1000) throw DomainExitError("too many chart switches", t);
    const int c = cur.p.chart;
    const Chart& ch = scene.chart(c);
    numkit::OdeOptions o = opts;
    o.stop = [&ch, n](double, const Vec& y) {
      const Vec x = y.head(n);
      if (ch.in_region && !ch.in_region(x)) return true;
      return ch.badness && ch.badness(x) > ch.switch_threshold;
    };
    auto field = [&rhs, c](double tt, const Vec& y) { return rhs(c, tt, y); };
    numkit::Trajectory traj = numkit::integrate_ivp(field, pack(cur.p.x, cur.vectors), t, t1, o);
    const Vec last = traj.final_state();
    const double t_last = traj.t_end();
    const bool stopped = traj.stopped_early();
    path.segments_.push_back({c, std::move(traj)});

    const Vec xl = last.head(n);
    if (ch.in_region && !ch.in_region(xl)) {
      // Locate the crossing on the continuous extension.
      const auto& tr = path.segments_.back().traj;
      double exit_time = t_last;
      if (tr.has_dense_output() && tr.times().size() >= 2) {
        double lo = tr.times()[tr.times().size() - 2], hi = t_last;
        for (int k = 0; k < 60; ++k) {
          const double mid = 0.5 * (lo + hi);
          (ch.in_region(tr.at(mid).head(n)) ? lo : hi) = mid;
        }
        exit_time = hi;
      }
      std::ostringstream os;
      os << "trajectory left the working region of " << scene.name() << " at t = " << exit_time;
      throw DomainExitError(os.str(), exit_time);
    }
    if (!stopped) break;
    const ChartState next = rechart_state(path.unpack(c, last));
    if (next.p.chart == c) throw DomainExitError("trajectory left the chart cover", t_last);
    cur = next;
    t = t_last;
  }
  return path;
}

// ─── Wind flow and homotheties ───────────────────────────────────────────────

ChartState flow_with_tangent(const Scene& scene, const Point& p, const Mat& vectors, double t,
                             const numkit::Tolerances& tol) {
  ChartState start{p, vectors};
  if (t == 0.0) return start;
  const int n = scene.dim();
  const int m = static_cast<int>(vectors.cols());
  ChartRhs rhs = [&scene, n, m](int c, double, const Vec& y) {
    const Vec x = y.head(n);
    Vec dy(y.size());
    dy.head(n) = scene.wind(c, x);
    if (m > 0) {
      const Mat dw = numkit::fd_jacobian([&](const Vec& z) { return scene.wind(c, z); }, x,
                                         1e-6 * std::max(1.0, x.norm()));
      for (int j = 0; j < m; ++j) dy.segment(n * (j + 1), n) = dw * y.segment(n * (j + 1), n);
    }
    return dy;
  };
  auto opts = numkit::OdeOptions::from(tol);
  opts.dense = false;
  return integrate_on_charts(scene, start, rhs, 0.0, t, opts).end();
}

Point flow(const Scene& scene, const Point& p, double t, const numkit::Tolerances& tol) {
  return flow_with_tangent(scene, p, Mat(scene.dim(), 0), t, tol).p;
}

Mat lie_derivative_metric(const Scene& scene, const Point& p, double step) {
  const int n = scene.dim();
  const Vec& x = p.x;
  const Mat h = scene.metric(p);
  const Vec w = scene.wind(p);
  Mat out = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    Vec e = Vec::Zero(n);
    e[k] = step;
    out += w[k] * (scene.metric(p.chart, x + e) - scene.metric(p.chart, x - e)) / (2.0 * step);
  }
  // dw(k, i) = d_i W^k.
  const Mat dw = numkit::fd_jacobian([&](const Vec& z) { return scene.wind(p.chart, z); }, x, step);
  out += dw.transpose() * h + h * dw;
  return 0.5 * (out + out.transpose());
}

HomothetyFit homothety_constant(const Scene& scene, const std::vector<Point>& points,
                                double step) {
  std::vector<Mat> lie, metric;
  double num = 0.0, den = 0.0;
  for (const Point& p : points) {
    lie.push_back(lie_derivative_metric(scene, p, step));
    metric.push_back(scene.metric(p));
    num -= (lie.back().array() * metric.back().array()).sum();
    den += metric.back().squaredNorm();
  }
  HomothetyFit fit;
  if (den == 0.0) return fit;
  fit.sigma = num / den;
  for (std::size_t i = 0; i < lie.size(); ++i)
    fit.residual = std::max(fit.residual, (lie[i] + fit.sigma * metric[i]).cwiseAbs().maxCoeff());
  return fit;
}

}  // namespace zermelo::manifold
