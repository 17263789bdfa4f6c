#include "zermelo/foliation.hpp"

#include "zermelo/minkowski.hpp"
#include "zermelo/randers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace zermelo::foliation {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string vec_text(const Vec& v) {
  std::ostringstream os;
  os.precision(6);
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
  return os.str();
}

std::string fixed(double x, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

std::mt19937_64 trial_rng(std::uint64_t seed, int trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial)};
  return std::mt19937_64(seq);
}

SubmanifoldPatch circle_patch(const Vec& center, const Vec& e1, const Vec& e2, double r) {
  SubmanifoldPatch p;
  p.dim = 1;
  p.periodic = true;
  p.lower = Vec::Zero(1);
  p.upper = Vec::Constant(1, kTwoPi);
  p.param = [=](const Vec& s) { return Vec(center + r * (std::cos(s[0]) * e1 + std::sin(s[0]) * e2)); };
  p.ambient_frame = [=](const Vec& s) {
    return Mat(r * (-std::sin(s[0]) * e1 + std::cos(s[0]) * e2));
  };
  return p;
}

/// Evenly spaced parameters on a patch (periodic patches exclude the endpoint).
std::vector<Vec> patch_samples(const SubmanifoldPatch& patch, int count) {
  std::vector<Vec> out;
  if (patch.dim == 0) return {Vec(0)};
  const int k = patch.dim;
  const int per = std::max(1, static_cast<int>(std::ceil(std::pow(count, 1.0 / k))));
  std::vector<int> idx(static_cast<std::size_t>(k), 0);
  for (;;) {
    Vec s(k);
    for (int i = 0; i < k; ++i) {
      const double frac = patch.periodic ? static_cast<double>(idx[i]) / per
                                         : (idx[i] + 0.5) / static_cast<double>(per);
      s[i] = patch.lower[i] + frac * (patch.upper[i] - patch.lower[i]);
    }
    out.push_back(s);
    int i = 0;
    while (i < k && ++idx[i] == per) idx[i++] = 0;
    if (i == k) break;
  }
  return out;
}

/// Path of a Z-geodesic that is cut short (to 90% of the exit time) if it leaves the region.
geodesic::GeodesicPath bounded_geodesic(const Scene& scene, const Point& p, const Vec& v,
                                        double length, const numkit::Tolerances& tol) {
  try {
    return geodesic::geodesic_ivp(scene, p, v, length, tol);
  } catch (const DomainExitError& e) {
    return geodesic::geodesic_ivp(scene, p, v, 0.9 * e.exit_time(), tol);
  }
}

double weighted_norm(const Mat& h, const Vec& v) { return std::sqrt(std::max(0.0, v.dot(h * v))); }

/// h-orthogonal projector onto the complement of span(t).
Mat complement_projector(const Mat& h, const Mat& t) {
  const int n = static_cast<int>(h.rows());
  if (t.cols() == 0) return Mat::Identity(n, n);
  return Mat::Identity(n, n) -
         t * (t.transpose() * h * t).completeOrthogonalDecomposition().solve(t.transpose() * h);
}

/// Leaf frame with numerically vanishing columns removed.
Mat nonzero_columns(const Mat& m, double cutoff = 1e-12) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    if (m.col(j).norm() > cutoff) keep.push_back(j);
  Mat out(m.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(keep[j]);
  return out;
}

void rename_checks(Report& r, const std::string& prefix) {
  Report out(r.title());
  for (const auto& row : r.rows()) {
    const bool by_threshold = std::isfinite(row.value) && row.value <= row.threshold;
    if (row.pass == by_threshold)
      out.add(prefix + row.check, row.scene, row.trial, row.item, row.value, row.threshold,
              row.detail);
    else
      out.add_flag(prefix + row.check, row.scene, row.trial, row.item, row.pass, row.value,
                   row.detail);
  }
  out.precondition_failed = r.precondition_failed;
  r = out;
}

}  // namespace

// ─── FoliationModel ──────────────────────────────────────────────────────────

int FoliationModel::stratum_label(const Vec& X) const {
  const Mat f = leaf_frame(X);
  if (f.size() == 0) return 0;
  const Vec sv = Eigen::JacobiSVD<Mat>(f).singularValues();
  return static_cast<int>((sv.array() > 1e-9).count());
}

Mat FoliationModel::frame_at(const Scene& scene, const Point& p) const {
  const Mat amb = leaf_frame(scene.ambient(p));
  Mat out(scene.dim(), amb.cols());
  for (Eigen::Index j = 0; j < amb.cols(); ++j) out.col(j) = scene.from_ambient_vector(p, amb.col(j));
  return out;
}

Mat FoliationModel::invariant_differential(const Scene& scene, const Point& p) const {
  const auto& chart = scene.chart(p.chart);
  auto rho = [&](const Vec& x) { return invariant(chart.to_ambient(x)); };
  return numkit::fd_jacobian(rho, p.x, 1e-6 * std::max(1.0, p.x.norm()));
}

double FoliationModel::spread(const std::vector<Vec>& ambient_points) const {
  if (ambient_points.empty()) return 0.0;
  Vec lo = invariant(ambient_points.front()), hi = lo;
  for (const Vec& x : ambient_points) {
    const Vec r = invariant(x);
    lo = lo.cwiseMin(r);
    hi = hi.cwiseMax(r);
  }
  return (hi - lo).maxCoeff();
}

std::vector<std::string> foliation_names() {
  return {"horizontal-lines", "concentric-circles", "latitudes", "axial-circles", "hopf-fibers"};
}

FoliationModel make_foliation(const std::string& name) {
  FoliationModel f;
  f.name = name;
  if (name == "horizontal-lines") {
    f.regular_leaf_dim = 1;
    f.invariant = [](const Vec& X) { return Vec(Vec::Constant(1, X[1])); };
    f.leaf_frame = [](const Vec&) { return Mat(Vec::Unit(2, 0)); };
    f.leaf_through = [](const Vec& X) {
      SubmanifoldPatch p;
      p.dim = 1;
      p.lower = Vec::Constant(1, -2.2);
      p.upper = Vec::Constant(1, 2.2);
      const double y = X[1];
      p.param = [y](const Vec& s) { return Vec((Vec(2) << s[0], y).finished()); };
      p.ambient_frame = [](const Vec&) { return Mat(Vec::Unit(2, 0)); };
      return p;
    };
    f.sample_regular = [](std::mt19937_64& rng) {
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      const double x = u(rng);
      return Vec((Vec(2) << x, u(rng)).finished());
    };
    return f;
  }
  if (name == "concentric-circles") {
    f.regular_leaf_dim = 1;
    f.invariant = [](const Vec& X) { return Vec(Vec::Constant(1, X.head(2).norm())); };
    f.leaf_frame = [](const Vec& X) { return Mat((Vec(2) << -X[1], X[0]).finished()); };
    f.leaf_through = [](const Vec& X) {
      const double r = X.head(2).norm();
      if (r == 0.0) return manifold::point_patch(Vec::Zero(2));
      return circle_patch(Vec::Zero(2), Vec::Unit(2, 0), Vec::Unit(2, 1), r);
    };
    f.minimal_strata.push_back(manifold::point_patch(Vec::Zero(2)));
    f.sample_regular = [](std::mt19937_64& rng) {
      std::uniform_real_distribution<double> ur(0.6, 1.6), ua(0.0, kTwoPi);
      const double r = ur(rng), a = ua(rng);
      return Vec((Vec(2) << r * std::cos(a), r * std::sin(a)).finished());
    };
    return f;
  }
  if (name == "latitudes") {
    f.regular_leaf_dim = 1;
    f.invariant = [](const Vec& X) { return Vec(Vec::Constant(1, X[2] / X.norm())); };
    f.leaf_frame = [](const Vec& X) { return Mat((Vec(3) << -X[1], X[0], 0.0).finished()); };
    f.leaf_through = [](const Vec& X) {
      const double rho = X.head(2).norm();
      if (rho == 0.0) return manifold::point_patch(X);
      return circle_patch(Vec::Unit(3, 2) * X[2], Vec::Unit(3, 0), Vec::Unit(3, 1), rho);
    };
    // Unit sphere poles; latitudes on other radii rescale them.
    f.minimal_strata.push_back(manifold::point_patch(Vec::Unit(3, 2)));
    f.minimal_strata.push_back(manifold::point_patch(-Vec::Unit(3, 2)));
    f.sample_regular = [](std::mt19937_64& rng) {
      std::uniform_real_distribution<double> uz(-0.7, 0.7), ua(0.0, kTwoPi);
      const double z = uz(rng), a = ua(rng), r = std::sqrt(1.0 - z * z);
      return Vec((Vec(3) << r * std::cos(a), r * std::sin(a), z).finished());
    };
    return f;
  }
  if (name == "axial-circles") {
    f.regular_leaf_dim = 1;
    f.invariant = [](const Vec& X) { return Vec((Vec(2) << X.head(2).norm(), X[2]).finished()); };
    f.leaf_frame = [](const Vec& X) { return Mat((Vec(3) << -X[1], X[0], 0.0).finished()); };
    f.leaf_through = [](const Vec& X) {
      const double r = X.head(2).norm();
      if (r == 0.0) return manifold::point_patch(X);
      return circle_patch(Vec::Unit(3, 2) * X[2], Vec::Unit(3, 0), Vec::Unit(3, 1), r);
    };
    SubmanifoldPatch axis;
    axis.dim = 1;
    axis.lower = Vec::Constant(1, -2.0);
    axis.upper = Vec::Constant(1, 2.0);
    axis.param = [](const Vec& s) { return Vec(Vec::Unit(3, 2) * s[0]); };
    axis.ambient_frame = [](const Vec&) { return Mat(Vec::Unit(3, 2)); };
    f.minimal_strata.push_back(axis);
    f.sample_regular = [](std::mt19937_64& rng) {
      std::uniform_real_distribution<double> ur(0.6, 1.6), ua(0.0, kTwoPi), uz(-1.0, 1.0);
      const double r = ur(rng), a = ua(rng);
      return Vec((Vec(3) << r * std::cos(a), r * std::sin(a), uz(rng)).finished());
    };
    return f;
  }
  if (name == "hopf-fibers") {
    f.regular_leaf_dim = 1;
    f.invariant = [](const Vec& X) {
      const Vec u = X / X.norm();
      Vec r(3);
      r << u[0] * u[2] + u[1] * u[3], u[1] * u[2] - u[0] * u[3],
          0.5 * (u[0] * u[0] + u[1] * u[1] - u[2] * u[2] - u[3] * u[3]);
      return r;
    };
    f.leaf_frame = [](const Vec& X) {
      return Mat((Vec(4) << -X[1], X[0], -X[3], X[2]).finished());
    };
    f.leaf_through = [](const Vec& X) {
      SubmanifoldPatch p;
      p.dim = 1;
      p.periodic = true;
      p.lower = Vec::Zero(1);
      p.upper = Vec::Constant(1, kTwoPi);
      p.param = [X](const Vec& s) {
        const double c = std::cos(s[0]), sn = std::sin(s[0]);
        return Vec((Vec(4) << c * X[0] - sn * X[1], sn * X[0] + c * X[1], c * X[2] - sn * X[3],
                    sn * X[2] + c * X[3])
                       .finished());
      };
      p.ambient_frame = [X](const Vec& s) {
        const double c = std::cos(s[0]), sn = std::sin(s[0]);
        return Mat((Vec(4) << -sn * X[0] - c * X[1], c * X[0] - sn * X[1], -sn * X[2] - c * X[3],
                    c * X[2] - sn * X[3])
                       .finished());
      };
      return p;
    };
    f.sample_regular = [](std::mt19937_64& rng) {
      std::normal_distribution<double> g(0.0, 1.0);
      Vec x(4);
      for (int i = 0; i < 4; ++i) x[i] = g(rng);
      return Vec(x.normalized());
    };
    return f;
  }
  throw DomainError("unknown foliation '" + name + "'");
}

// ─── Finsler condition ───────────────────────────────────────────────────────

Report check_finsler(const Scene& scene, const FoliationModel& fol,
                     const FinslerCheckOptions& opts) {
  auto per_trial = [&](std::size_t i) {
    Report r;
    const int trial = static_cast<int>(i);
    auto rng = trial_rng(opts.seed, trial);
    const Vec X = fol.sample_regular(rng);
    try {
      const Point p = scene.locate(X);
      const Mat frame = fol.frame_at(scene, p);
      minkowski::ConeOptions co;
      co.rng_seed = opts.seed * 1000003u + static_cast<std::uint64_t>(trial);
      const auto cone = minkowski::orthogonal_cone(scene.norm_at(p), frame, co, opts.tol);
      const Vec u = cone[rng() % cone.size()];
      for (Direction dir : {Direction::forward, Direction::backward}) {
        const Scene sc = dir == Direction::forward ? scene : scene.reversed();
        const Vec v0 = dir == Direction::forward ? u : Vec(-u);
        const auto path = bounded_geodesic(sc, p, v0, opts.length, opts.tol);
        double worst = 0.0;
        int skipped = 0;
        for (int k = 0; k <= opts.samples; ++k) {
          const double t = path.t_end() * k / opts.samples;
          const auto s = path.at(t);
          const Vec Xs = sc.ambient(s.point);
          const Mat amb = fol.leaf_frame(Xs);
          bool singular = amb.cols() == 0;
          for (Eigen::Index j = 0; j < amb.cols(); ++j)
            singular = singular || amb.col(j).norm() < opts.singular_margin;
          if (singular) {
            ++skipped;
            continue;
          }
          const Mat t_frame = fol.frame_at(sc, s.point);
          worst = std::max(worst, minkowski::orthogonality_residual(sc.norm_at(s.point), s.velocity,
                                                                    t_frame, opts.tol));
        }
        std::ostringstream detail;
        detail << "start " << vec_text(X) << "; u " << vec_text(u) << "; length "
               << fixed(path.t_end()) << "; " << skipped << " near-singular samples skipped";
        r.add("finsler", scene.name(), trial, geodesic::to_string(dir), worst, opts.threshold,
              detail.str());
      }
    } catch (const Error& e) {
      r.add("finsler", scene.name(), trial, "error", std::numeric_limits<double>::quiet_NaN(),
            opts.threshold, std::string("start ") + vec_text(X) + ": " + e.what());
    }
    return r;
  };
  const auto parts = numkit::parallel_map<Report>(static_cast<std::size_t>(opts.trials), per_trial);
  Report out("check_finsler " + scene.name() + " / " + fol.name);
  for (const auto& part : parts) out.append(part);
  return out;
}

// ─── Equidistance and homothetic transformations ─────────────────────────────

EquidistanceResult check_equidistance(const Scene& scene, const FoliationModel& fol,
                                      const Vec& source, const Vec& target, Direction direction,
                                      const EquidistanceOptions& opts) {
  const SubmanifoldPatch plaque = fol.leaf_through(source);
  const SubmanifoldPatch leaf = fol.leaf_through(target);
  EquidistanceResult res;
  res.direction = direction;
  for (const Vec& s : patch_samples(leaf, opts.samples)) res.targets.push_back(leaf.param(s));
  res.distances = numkit::parallel_map<double>(res.targets.size(), [&](std::size_t i) {
    return geodesic::distance_to_patch(scene, plaque, scene.locate(res.targets[i]), direction,
                                       opts.patch)
        .distance;
  });
  const auto [lo, hi] = std::minmax_element(res.distances.begin(), res.distances.end());
  res.spread = *hi - *lo;
  double sum = 0.0;
  for (double d : res.distances) sum += d;
  res.mean = sum / static_cast<double>(res.distances.size());
  res.pass = res.spread <= opts.relative_threshold * res.mean;
  return res;
}

Report equidistance_report(const Scene& scene, const FoliationModel& fol, const Vec& source,
                           const Vec& target, const EquidistanceOptions& opts,
                           std::vector<EquidistanceResult>* results) {
  Report r("check_equidistance " + scene.name() + " / " + fol.name);
  int trial = 0;
  for (Direction dir : {Direction::forward, Direction::backward}) {
    try {
      const auto res = check_equidistance(scene, fol, source, target, dir, opts);
      r.add("equidistance", scene.name(), trial, geodesic::to_string(dir),
            res.mean > 0.0 ? res.spread / res.mean : res.spread, opts.relative_threshold,
            "mean " + fixed(res.mean, 12) + "; spread " + fixed(res.spread, 6) + "; source " +
                vec_text(source) + "; target " + vec_text(target));
      if (results) results->push_back(res);
    } catch (const Error& e) {
      r.add("equidistance", scene.name(), trial, geodesic::to_string(dir),
            std::numeric_limits<double>::quiet_NaN(), opts.relative_threshold, e.what());
    }
    ++trial;
  }
  return r;
}

Point homothetic_transform(const Scene& scene, const SubmanifoldPatch& plaque, const Point& x,
                           double lambda, Direction direction,
                           const geodesic::PatchDistanceOptions& opts) {
  if (!(lambda > 0.0)) throw DomainError("homothetic transformation needs lambda > 0");
  const auto pd = geodesic::distance_to_patch(scene, plaque, x, direction, opts);
  if (pd.distance == 0.0) return x;
  if (direction == Direction::forward)
    return geodesic::exp_map(scene, pd.foot, lambda * pd.velocity, opts.tol);
  // The past connector is the reversed-metric geodesic leaving the foot with -velocity.
  return geodesic::exp_map(scene.reversed(), pd.foot, -lambda * pd.velocity, opts.tol);
}

// ─── Strata and the wind ─────────────────────────────────────────────────────

Report check_wind_tangency(const Scene& scene, const std::vector<SubmanifoldPatch>& strata,
                           int samples, double threshold) {
  Report r("check_wind_tangency " + scene.name());
  int trial = 0;
  for (std::size_t j = 0; j < strata.size(); ++j) {
    const auto& patch = strata[j];
    for (const Vec& s : patch_samples(patch, samples)) {
      const Point p = manifold::patch_point(scene, patch, s);
      const Mat t = manifold::patch_frame(scene, patch, s, p);
      const Mat h = scene.metric(p);
      const Vec w = scene.wind(p);
      const Vec normal = complement_projector(h, t) * w;
      r.add("wind-tangency", scene.name(), trial++, "stratum " + std::to_string(j),
            weighted_norm(h, normal), threshold, "point " + vec_text(scene.ambient(p)));
    }
  }
  return r;
}

Report check_minkowski_lemmas(const Scene& scene, const FoliationModel& fol,
                              const MinkowskiLemmaOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  const Point origin = scene.locate(fol.sample_regular(rng));
  const Mat h0 = scene.metric(origin);
  const Vec w0 = scene.wind(origin);
  for (int i = 0; i < 4; ++i) {
    const Point p = scene.locate(fol.sample_regular(rng));
    if (scene.chart_count() != 1 || (scene.metric(p) - h0).cwiseAbs().maxCoeff() > 1e-12 ||
        (scene.wind(p) - w0).cwiseAbs().maxCoeff() > 1e-12)
      throw PreconditionError("Randers-Minkowski lemmas need constant h and W in a single chart");
  }
  const auto rd = scene.randers_at(origin);
  const Mat& a = rd.a();
  const Vec bs = rd.beta_sharp();
  const double bs_norm = weighted_norm(a, bs);
  const auto norm = randers::as_norm(rd);

  Report r("check_minkowski_lemmas " + scene.name() + " / " + fol.name);
  for (int leaf = 0; leaf < opts.leaves; ++leaf) {
    const Vec X = fol.sample_regular(rng);
    const SubmanifoldPatch patch = fol.leaf_through(X);
    double perp = 0.0, fwd = 0.0, bwd = 0.0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const Vec& s : patch_samples(patch, opts.leaf_samples)) {
      const Point p = manifold::patch_point(scene, patch, s);
      const Mat t = nonzero_columns(fol.frame_at(scene, p));
      const double level = p.x.dot(a * bs);
      lo = std::min(lo, level);
      hi = std::max(hi, level);
      for (Eigen::Index j = 0; j < t.cols(); ++j)
        perp = std::max(perp, std::abs(t.col(j).dot(a * bs)) / weighted_norm(a, t.col(j)));
      // Orthogonality of t -> t v and t -> (1 - t) v to the leaf at v.
      if (p.x.norm() > 0.0 && t.cols() > 0) {
        fwd = std::max(fwd, minkowski::orthogonality_residual(norm, p.x, t));
        bwd = std::max(bwd, minkowski::orthogonality_residual(minkowski::reversed(norm), p.x, t));
      }
    }
    const std::string detail = "leaf through " + vec_text(X) + "; |beta_sharp|_a " + fixed(bs_norm);
    r.add("leaf-perpendicularity", scene.name(), leaf, "max |a(T L, beta_sharp)|", perp,
          opts.perpendicular_threshold, detail);
    r.add("leaf-plane", scene.name(), leaf, "range of a(y, beta_sharp)", hi - lo,
          opts.perpendicular_threshold, detail);
    r.add("radial-orthogonality-forward", scene.name(), leaf, "g_v(v, T L)", fwd,
          opts.perpendicular_threshold, detail);
    r.add("radial-orthogonality-backward", scene.name(), leaf, "g_-v(-v, T L)", bwd,
          opts.perpendicular_threshold, detail);
  }

  int trial = 0;
  for (const auto& stratum : fol.minimal_strata) {
    std::vector<Vec> pts;
    for (const Vec& s : patch_samples(stratum, opts.stratum_samples))
      pts.push_back(manifold::patch_point(scene, stratum, s).x);
    Mat y(scene.dim(), static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) y.col(static_cast<Eigen::Index>(i)) = pts[i];
    double residual = 0.0;
    if (bs_norm > 0.0) {
      const Vec c = (y.transpose() * a * y).completeOrthogonalDecomposition().solve(
          y.transpose() * a * bs);
      residual = weighted_norm(a, bs - y * c) / bs_norm;
    }
    r.add("stratum-containment", scene.name(), trial++, "beta_sharp in span(minimal stratum)",
          residual, opts.containment_threshold, "beta_sharp " + vec_text(bs));
  }

  // The foliation must also be Finsler for the Euclidean metric a.
  const Mat a_const = a;
  const Scene euclid =
      scene.with_metric([a_const](int, const Vec&) { return a_const; }, "/metric-a").without_wind();
  Report fin = check_finsler(euclid, fol, opts.finsler);
  rename_checks(fin, "euclidean-");
  r.append(fin);
  return r;
}

// ─── Riemannian reduction ────────────────────────────────────────────────────

Report check_theorem1(const Scene& scene, const FoliationModel& fol, const Theorem1Options& opts) {
  Report r("check_theorem1 " + scene.name() + " / " + fol.name);
  const Report pre = check_finsler(scene, fol, opts.finsler);
  if (!pre.pass()) {
    r.precondition_failed = true;
    r.add_flag("precondition", scene.name(), 0, "check_finsler on the Randers scene", false,
               pre.worst("finsler"), "foliation is not Finsler for Z; reduction not applicable");
    return r;
  }
  r.add_flag("precondition", scene.name(), 0, "check_finsler on the Randers scene", true,
             pre.worst("finsler"));

  const Scene h_scene = scene.without_wind();
  Report fin = check_finsler(h_scene, fol, opts.finsler);
  rename_checks(fin, "h-");
  r.append(fin);
  for (const auto& [src, dst] : opts.leaf_pairs) {
    Report eq = equidistance_report(h_scene, fol, src, dst, opts.equidistance);
    rename_checks(eq, "h-");
    r.append(eq);
  }

  // W is foliated: its flow keeps each sampled leaf inside one leaf.
  auto rng = trial_rng(opts.finsler.seed, 7919);
  for (int leaf = 0; leaf < opts.flow_leaves; ++leaf) {
    const Vec X = fol.sample_regular(rng);
    const SubmanifoldPatch patch = fol.leaf_through(X);
    const auto params = patch_samples(patch, opts.flow_leaf_samples);
    for (double t : opts.flow_times) {
      const auto images = numkit::parallel_map<Vec>(params.size(), [&](std::size_t i) {
        const Point p = manifold::patch_point(scene, patch, params[i]);
        return scene.ambient(manifold::flow(scene, p, t, opts.finsler.tol));
      });
      r.add("wind-foliated", scene.name(), leaf, "t=" + fixed(t), fol.spread(images),
            opts.flow_threshold, "leaf through " + vec_text(X));
    }
  }
  return r;
}

// ─── Equifocality ────────────────────────────────────────────────────────────

geodesic::NormalField basic_normal_field(const Scene& scene, const FoliationModel& fol,
                                         const SubmanifoldPatch&, const Vec& coefficients) {
  return [scene, fol, coefficients](const Vec&, const Point& at) {
    const Mat d = fol.invariant_differential(scene, at);
    if (d.rows() != coefficients.size())
      throw DomainError("normal field coefficients do not match the invariant map");
    const Vec covector = d.transpose() * coefficients;
    const auto norm = scene.norm_at(at);
    Vec v = minkowski::legendre_inverse(norm, covector);
    return Vec(v / norm(v));
  };
}

EquifocalResult check_equifocal(const Scene& scene, const FoliationModel& fol,
                                const Vec& leaf_point, const EquifocalOptions& opts) {
  EquifocalResult res;
  res.report = Report("check_equifocal " + scene.name() + " / " + fol.name);
  Report& r = res.report;
  const SubmanifoldPatch U = fol.leaf_through(leaf_point);
  const auto params = patch_samples(U, opts.samples);
  std::vector<Point> base;
  for (const Vec& s : params) base.push_back(manifold::patch_point(scene, U, s));

  const auto fit = manifold::homothety_constant(scene, base);
  res.sigma = fit.sigma;
  res.homothety_residual = fit.residual;
  if (fit.residual > opts.homothety_threshold) {
    r.precondition_failed = true;
    r.add("homothety", scene.name(), 0, "L_W h + sigma h", fit.residual, opts.homothety_threshold,
          "sigma " + fixed(fit.sigma));
    return res;
  }
  r.add("homothety", scene.name(), 0, "L_W h + sigma h", fit.residual, opts.homothety_threshold,
        "sigma " + fixed(fit.sigma, 10));

  const auto xi = basic_normal_field(scene, fol, U, opts.coefficients);
  const Scene h_scene = scene.without_wind();

  std::vector<std::pair<double, bool>> schedule;
  for (double t : opts.times) schedule.emplace_back(t, false);
  if (opts.focal_time) schedule.emplace_back(*opts.focal_time, true);

  int trial = 0;
  for (const auto& [t, focal] : schedule) {
    EquifocalTime et;
    et.t = t;
    et.focal = focal;
    et.s = geodesic::arc_reparam(-fit.sigma, t);
    const double s_literal = geodesic::arc_reparam(fit.sigma, t);
    const double tt = t;
    geodesic::NormalField field = [&xi, tt](const Vec& s, const Point& at) {
      return Vec(tt * xi(s, at));
    };
    et.images = geodesic::endpoint_map(scene, U, field, params, opts.endpoint);
    std::vector<Vec> amb;
    for (const auto& img : et.images) amb.push_back(img.image_ambient);
    et.leaf_spread = fol.spread(amb);
    for (const Vec& x : amb) et.point_spread = std::max(et.point_spread, (x - amb.front()).norm());
    et.min_rank = et.max_rank = et.images.front().rank;
    for (const auto& img : et.images) {
      et.min_rank = std::min(et.min_rank, img.rank);
      et.max_rank = std::max(et.max_rank, img.rank);
    }

    // eta_{t xi}(x) against phi_t(exp^h_x(s (xi - W))).
    const auto errors = numkit::parallel_map<std::pair<double, double>>(
        params.size(), [&](std::size_t i) {
          const Point& p = base[i];
          const Vec xt = xi(params[i], p) - scene.wind(p);
          auto rhs_point = [&](double s) {
            const Point q = geodesic::exp_map(h_scene, p, s * xt, opts.endpoint.tol);
            return scene.ambient(manifold::flow(scene, q, tt, opts.endpoint.tol));
          };
          return std::pair<double, double>((rhs_point(et.s) - amb[i]).norm(),
                                           (rhs_point(s_literal) - amb[i]).norm());
        });
    for (const auto& [e, el] : errors) {
      et.identity_error = std::max(et.identity_error, e);
      et.identity_error_literal = std::max(et.identity_error_literal, el);
    }

    const std::string item = "t=" + fixed(t);
    const std::string ranks =
        "rank " + std::to_string(et.min_rank) + ".." + std::to_string(et.max_rank);
    if (focal) {
      r.add("focal-collapse", scene.name(), trial, item, et.point_spread, opts.spread_threshold,
            ranks + "; image " + vec_text(amb.front()));
      r.add("focal-rank", scene.name(), trial, item, et.max_rank, 0.0, ranks);
    } else {
      r.add("leaf-spread", scene.name(), trial, item, et.leaf_spread, opts.spread_threshold, ranks);
      r.add("rank-constancy", scene.name(), trial, item, et.max_rank - et.min_rank, 0.0, ranks);
    }
    r.add("navigation-identity", scene.name(), trial, item, et.identity_error,
          opts.identity_threshold,
          "s " + fixed(et.s, 10) + "; with arc_reparam(sigma, t) = " + fixed(s_literal, 10) +
              " the error is " + fixed(et.identity_error_literal));
    res.times.push_back(std::move(et));
    ++trial;
  }
  return res;
}

// ─── Blow-up of the slice metric ─────────────────────────────────────────────

Scene slice_scene(const Scene& scene, const FoliationModel& fol, const Point& q, double radius) {
  const int n = scene.dim();
  const Mat hq = scene.metric(q);
  const Mat tq = nonzero_columns(fol.frame_at(scene, q));
  const Mat proj = complement_projector(hq, tq);
  Eigen::JacobiSVD<Mat> svd(proj, Eigen::ComputeFullU);
  const int m = n - numkit::numeric_rank(tq, 1e-9);
  Mat basis = svd.matrixU().leftCols(m);
  // h-orthonormalise.
  const Mat gram = basis.transpose() * hq * basis;
  Eigen::SelfAdjointEigenSolver<Mat> es(gram);
  basis = basis * es.operatorInverseSqrt();

  const int chart = q.chart;
  const Vec origin = q.x;
  auto slice_data = [scene, fol, chart, origin, basis](const Vec& y) {
    const Point p{chart, Vec(origin + basis * y)};
    const Mat h = scene.metric(p);
    const Mat proj = complement_projector(h, nonzero_columns(fol.frame_at(scene, p)));
    const Mat m = proj * basis;
    const Mat hs = m.transpose() * h * m;
    const Vec ws = hs.ldlt().solve(m.transpose() * h * (proj * scene.wind(p)));
    return std::pair<Mat, Vec>(0.5 * (hs + hs.transpose()), ws);
  };

  manifold::Chart c;
  c.name = "slice";
  c.dim = m;
  c.ambient_dim = m;
  c.to_ambient = [](const Vec& y) { return y; };
  c.jacobian = [m](const Vec&) { return Mat(Mat::Identity(m, m)); };
  c.from_ambient = [](const Vec& y) { return y; };
  c.badness = [](const Vec&) { return 0.0; };
  c.in_region = [radius](const Vec& y) { return y.norm() < radius; };
  return Scene(
      scene.name() + "/slice", std::vector<manifold::Chart>{c},
      [slice_data](int, const Vec& y) { return slice_data(y).first; },
      [slice_data](int, const Vec& y) { return slice_data(y).second; });
}

BlowupResult blowup_metric_check(const Scene& scene, const FoliationModel& fol, const Point& q,
                                 const BlowupOptions& opts) {
  BlowupResult res;
  res.lambdas = opts.lambdas;
  if (res.lambdas.empty())
    for (int k = 0; k <= 10; ++k) res.lambdas.push_back(std::ldexp(1.0, -k));
  const Scene slice = slice_scene(scene, fol, q, 4.0 * opts.y_scale + 1.0);
  const int m = slice.dim();
  const Point o{0, Vec::Zero(m)};
  const auto zq = slice.zermelo_at(o);

  // Fixed (y, u) pairs; y on the sphere of radius y_scale, u unit.
  std::vector<std::pair<Vec, Vec>> pairs;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int k = 0; k < opts.directions; ++k) {
    Vec y(m), u(m);
    if (m == 1) {
      y[0] = (k % 2 ? -1.0 : 1.0) * opts.y_scale;
      u[0] = (k / 2) % 2 ? -1.0 : 1.0;
    } else {
      for (int i = 0; i < m; ++i) y[i] = g(rng);
      for (int i = 0; i < m; ++i) u[i] = g(rng);
      y = opts.y_scale * y.normalized();
      u.normalize();
    }
    pairs.emplace_back(y, u);
  }

  auto exp_o = [&](const Vec& y) { return geodesic::exp_map(slice, o, y, opts.tol).x; };
  Report& r = res.report;
  r = Report("blowup_metric_check " + scene.name() + " / " + fol.name);
  double prev = std::numeric_limits<double>::infinity();
  res.monotone = true;
  for (std::size_t k = 0; k < res.lambdas.size(); ++k) {
    const double lam = res.lambdas[k];
    const auto diffs = numkit::parallel_map<double>(pairs.size(), [&](std::size_t i) {
      const auto& [y, u] = pairs[i];
      const Vec z = exp_o(lam * y);
      const Vec du = (exp_o(lam * y + opts.fd_step * u) - exp_o(lam * y - opts.fd_step * u)) /
                     (2.0 * opts.fd_step);
      const double f_lam = randers::randers_norm(slice.zermelo_at(Point{0, z}), du);
      return std::abs(f_lam - randers::randers_norm(zq, u));
    });
    const double diff = *std::max_element(diffs.begin(), diffs.end());
    res.differences.push_back(diff);
    const bool last = k + 1 == res.lambdas.size();
    const double bound = last ? std::min(prev + opts.noise, opts.threshold) : prev + opts.noise;
    if (diff > prev + opts.noise) res.monotone = false;
    r.add("blowup", scene.name(), static_cast<int>(k), "lambda=" + format_number(lam), diff, bound,
          k == 0 ? "baseline at lambda = 1" : "");
    prev = diff;
  }
  return res;
}

}  // namespace zermelo::foliation
