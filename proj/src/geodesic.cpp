#include "zermelo/geodesic.hpp"

#include "zermelo/minkowski.hpp"
#include "zermelo/randers.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

namespace zermelo::geodesic {

namespace {

/// (d/dt L_v along the curve, L_x) evaluated from the pointwise data.
Vec lagrangian_x(const Scene& scene, int chart, const Vec& x, const Vec& v, double h) {
  const int n = static_cast<int>(x.size());
  Vec out(n);
  for (int k = 0; k < n; ++k) {
    Vec e = Vec::Zero(n);
    e[k] = h;
    const double zp = randers::randers_norm(scene.zermelo_at(Point{chart, x + e}), v);
    const double zm = randers::randers_norm(scene.zermelo_at(Point{chart, x - e}), v);
    out[k] = 0.25 * (zp * zp - zm * zm) / h;
  }
  return out;
}

Vec momentum(const Scene& scene, int chart, const Vec& x, const Vec& v) {
  return randers::gvv_covector(scene.zermelo_at(Point{chart, x}), v);
}

std::vector<double> uniform_times(double t0, double t1, int count) {
  std::vector<double> ts;
  count = std::max(count, 2);
  for (int i = 0; i < count; ++i) ts.push_back(t0 + (t1 - t0) * i / (count - 1));
  return ts;
}

Point to_chart_of(const Scene& scene, const Point& p, int chart) { return scene.to_chart(p, chart); }

}  // namespace

// ─── GeodesicPath ────────────────────────────────────────────────────────────

GeodesicPath::GeodesicPath(Scene scene, double t0, double t1, Evaluator eval,
                           const std::vector<double>& sample_times, const numkit::Tolerances& tol)
    : scene_(std::move(scene)), t0_(t0), t1_(t1), eval_(std::move(eval)) {
  for (double t : sample_times) samples_.push_back(eval_(t));
  const double span = std::abs(t1_ - t0_);
  if (span == 0.0) return;
  const double delta = std::min(1e-3, 0.25 * span) * (t1_ > t0_ ? 1.0 : -1.0);
  for (const auto& s : samples_) {
    // Keep the difference stencil inside the interval.
    const double lo = std::min(t0_, t1_) + std::abs(delta);
    const double hi = std::max(t0_, t1_) - std::abs(delta);
    const double t = std::clamp(s.t, lo, hi);
    residual_ = std::max(residual_, equation_defect(scene_, eval_, t, std::abs(delta), tol.fd_step));
  }
}

double GeodesicPath::speed(double t) const {
  const PathSample s = eval_(t);
  return randers::randers_norm(scene_.zermelo_at(s.point), s.velocity);
}

Vec geodesic_acceleration(const Scene& scene, int chart, const Vec& x, const Vec& v,
                          double fd_step) {
  const double vn = v.norm();
  if (vn == 0.0) throw DomainError("geodesic equation undefined at zero velocity");
  const double h = fd_step * std::max(1.0, x.norm());
  const Vec lx = lagrangian_x(scene, chart, x, v, h);
  // (d_x L_v) v as a directional difference along v.
  const Vec dir = v / vn;
  const Vec dp = (momentum(scene, chart, x + h * dir, v) - momentum(scene, chart, x - h * dir, v)) *
                 (vn / (2.0 * h));
  const Mat g = randers::randers_fundamental_tensor(scene.randers_at(Point{chart, x}), v);
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) throw DegeneracyError("fundamental tensor is not invertible");
  return llt.solve(lx - dp);
}

double equation_defect(const Scene& scene, const GeodesicPath::Evaluator& eval, double t,
                       double delta, double fd_step) {
  const PathSample mid = eval(t);
  const int c = mid.point.chart;
  auto momentum_at = [&](double tt) {
    const PathSample s = eval(tt);
    const Point p = to_chart_of(scene, s.point, c);
    const Vec v = scene.transfer(s.point, s.velocity, c);
    return momentum(scene, c, p.x, v);
  };
  const Vec dpdt = (momentum_at(t + delta) - momentum_at(t - delta)) / (2.0 * delta);
  const Vec lx =
      lagrangian_x(scene, c, mid.point.x, mid.velocity, fd_step * std::max(1.0, mid.point.x.norm()));
  const double z = randers::randers_norm(scene.zermelo_at(mid.point), mid.velocity);
  return (dpdt - lx).norm() / std::max(1.0, z * z);
}

GeodesicPath geodesic_ivp(const Scene& scene, const Point& p, const Vec& v, double T,
                          const numkit::Tolerances& tol) {
  if (v.size() != scene.dim()) throw DomainError("initial velocity has the wrong dimension");
  if (v.norm() == 0.0) throw DomainError("geodesic_ivp needs a nonzero initial velocity");
  const int n = scene.dim();
  // The state carries the velocity as the single transported vector column.
  manifold::ChartRhs rhs = [&scene, n, fd = tol.fd_step](int c, double, const Vec& y) {
    Vec dy(2 * n);
    dy.head(n) = y.tail(n);
    dy.tail(n) = geodesic_acceleration(scene, c, y.head(n), y.tail(n), fd);
    return dy;
  };
  Mat vel(n, 1);
  vel.col(0) = v;
  auto opts = numkit::OdeOptions::from(tol);
  auto path = std::make_shared<manifold::ChartPath>(
      manifold::integrate_on_charts(scene, {p, vel}, rhs, 0.0, T, opts));

  GeodesicPath::Evaluator eval = [path](double t) {
    const manifold::ChartState s = path->at(t);
    return PathSample{t, s.p, s.vectors.col(0)};
  };
  std::vector<double> times;
  for (const auto& [t, s] : path->steps()) times.push_back(t);
  return GeodesicPath(scene, 0.0, T, eval, times, tol);
}

Point exp_map(const Scene& scene, const Point& p, const Vec& v, const numkit::Tolerances& tol) {
  if (v.norm() == 0.0) return p;
  const int n = scene.dim();
  manifold::ChartRhs rhs = [&scene, n, fd = tol.fd_step](int c, double, const Vec& y) {
    Vec dy(2 * n);
    dy.head(n) = y.tail(n);
    dy.tail(n) = geodesic_acceleration(scene, c, y.head(n), y.tail(n), fd);
    return dy;
  };
  Mat vel(n, 1);
  vel.col(0) = v;
  auto opts = numkit::OdeOptions::from(tol);
  opts.dense = false;
  return manifold::integrate_on_charts(scene, {p, vel}, rhs, 0.0, 1.0, opts).end().p;
}

// ─── Arc-length reparametrisation ────────────────────────────────────────────

double arc_reparam(double sigma, double t) {
  if (sigma == 0.0) return t;
  return -(2.0 / sigma) * std::expm1(-0.5 * sigma * t);
}

double ArcReparam::derivative(double t) const { return std::exp(-0.5 * sigma * t); }

// ─── Navigation construction ─────────────────────────────────────────────────

NavigationPath navigation_geodesic(const Scene& scene, const Point& p, const Vec& v, double T,
                                   const NavigationOptions& opts) {
  const double z = randers::randers_norm(scene.zermelo_at(p), v);
  if (std::abs(z - 1.0) > 1e-8)
    throw DomainError("navigation_geodesic needs a Z-unit initial velocity (Z(v) = " +
                      std::to_string(z) + ")");

  // Homothety test on a small stencil around p.
  std::vector<Point> probes{p};
  for (int i = 0; i < scene.dim(); ++i) {
    for (double s : {-0.05, 0.05}) {
      Point q = p;
      q.x[i] += s;
      if (scene.in_region(q)) probes.push_back(q);
    }
  }
  const auto fit = manifold::homothety_constant(scene, probes);
  if (fit.residual > opts.homothety_threshold) {
    std::ostringstream os;
    os << "wind of " << scene.name() << " is not an infinitesimal homothety near the start point"
       << " (fit residual " << fit.residual << ")";
    throw PreconditionError(os.str());
  }

  NavigationPath out{GeodesicPath(scene, 0.0, 0.0, [p](double) { return PathSample{0.0, p, Vec()}; },
                                  {}),
                     fit.sigma, fit.residual, v - scene.wind(p)};

  const ArcReparam s_of_t{opts.literal_reparam ? fit.sigma : -fit.sigma};
  const double s_max = std::max(s_of_t(T), s_of_t(0.0));
  const Scene h_scene = scene.without_wind();
  auto inner = std::make_shared<GeodesicPath>(
      geodesic_ivp(h_scene, p, out.h_velocity, std::max(s_max, 1e-12), opts.tol));

  const numkit::Tolerances tol = opts.tol;
  GeodesicPath::Evaluator eval = [scene, inner, s_of_t, tol](double t) {
    const PathSample hs = inner->at(s_of_t(t));
    Mat vel(scene.dim(), 1);
    vel.col(0) = s_of_t.derivative(t) * hs.velocity;
    const manifold::ChartState moved = manifold::flow_with_tangent(scene, hs.point, vel, t, tol);
    return PathSample{t, moved.p, Vec(moved.vectors.col(0) + scene.wind(moved.p))};
  };
  out.path = GeodesicPath(scene, 0.0, T, eval, uniform_times(0.0, T, opts.samples), tol);
  return out;
}

double sup_deviation(const Scene& scene, const GeodesicPath& a, const GeodesicPath& b,
                     int samples) {
  const double t0 = std::max(a.t_begin(), b.t_begin());
  const double t1 = std::min(a.t_end(), b.t_end());
  double worst = 0.0;
  for (double t : uniform_times(t0, t1, samples))
    worst = std::max(worst, (scene.ambient(a.at(t).point) - scene.ambient(b.at(t).point)).norm());
  return worst;
}

// ─── Boundary-value problems ─────────────────────────────────────────────────

namespace {

/// Unit directions used as shooting seeds: evenly spaced angles in 2-D,
/// Gaussian samples otherwise.
std::vector<Vec> seed_directions(int dim, int count, std::uint64_t seed) {
  std::vector<Vec> out;
  if (dim == 1) {
    out.push_back(Vec::Constant(1, 1.0));
    out.push_back(Vec::Constant(1, -1.0));
    return out;
  }
  if (dim == 2) {
    for (int k = 0; k < count; ++k) {
      const double a = 2.0 * std::numbers::pi * k / count;
      Vec u(2);
      u << std::cos(a), std::sin(a);
      out.push_back(u);
    }
    return out;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k < count; ++k) {
    Vec u(dim);
    for (int i = 0; i < dim; ++i) u[i] = normal(rng);
    out.push_back(u.normalized());
  }
  return out;
}

}  // namespace

ShootingResult shoot(const Scene& scene, const Point& p, const Point& q,
                     const ShootingOptions& opts) {
  const Vec target = scene.ambient(q);
  ShootingResult out;
  if ((scene.ambient(p) - target).norm() <= 1e-14 * std::max(1.0, target.norm())) {
    out.velocity = Vec::Zero(scene.dim());
    return out;
  }
  const auto zd = scene.zermelo_at(p);
  auto miss = [&](const Vec& v) { return Vec(scene.ambient(exp_map(scene, p, v, opts.tol)) - target); };
  numkit::LeastSquaresOptions lso;
  lso.residual_tol = 0.1 * opts.miss_tol;
  lso.fd_step = 1e-7;
  lso.max_iterations = 80;

  auto attempt = [&](const Vec& seed, ShootingResult& best) {
    ++out.seeds_tried;
    numkit::LeastSquaresResult r;
    try {
      r = numkit::solve_least_squares(miss, seed, lso);
    } catch (const Error&) {
      return false;
    }
    if (r.residual_norm > opts.miss_tol || r.x.norm() == 0.0) return false;
    const double d = randers::randers_norm(zd, r.x);
    if (best.velocity.size() == 0 || d < best.distance) {
      best.distance = d;
      best.velocity = r.x;
      best.miss = r.residual_norm;
    }
    return true;
  };

  // Straight-line guesses first (chart difference, then the tangential part of
  // the ambient chord at chord length); the first converged shot wins.
  ShootingResult best;
  const Vec guess = scene.to_chart(q, p.chart).x - p.x;
  const Vec chord = target - scene.ambient(p);
  Vec tangential = scene.from_ambient_vector(p, chord);
  const double tlen = std::sqrt(tangential.dot(scene.metric(p) * tangential));
  if (tlen > 0.0) tangential *= chord.norm() / tlen;
  for (const Vec& g : {guess, tangential}) {
    if (g.allFinite() && g.norm() > 0.0 && attempt(g, best)) {
      best.seeds_tried = out.seeds_tried;
      return best;
    }
  }
  lso.max_iterations = 25;
  const double reach = guess.allFinite() ? std::max(randers::randers_norm(zd, guess), 1e-3)
                                         : (scene.ambient(p) - target).norm();
  for (const Vec& u : seed_directions(scene.dim(), opts.seeds, opts.rng_seed)) {
    const Vec seed = u * (reach / randers::randers_norm(zd, u));
    attempt(seed, best);
  }
  if (best.velocity.size() == 0) {
    std::ostringstream os;
    os << "no shot from " << scene.name() << " start point reached the target ("
       << out.seeds_tried << " seeds tried)";
    throw UnreachableError(os.str());
  }
  best.seeds_tried = out.seeds_tried;
  return best;
}

double distance(const Scene& scene, const Point& p, const Point& q, const ShootingOptions& opts) {
  return shoot(scene, p, q, opts).distance;
}

const char* to_string(Direction d) { return d == Direction::forward ? "forward" : "backward"; }

namespace {

std::vector<Vec> patch_grid(const manifold::SubmanifoldPatch& patch, int per_dim) {
  std::vector<Vec> out;
  const int k = patch.dim;
  if (k == 0) {
    out.push_back(Vec(0));
    return out;
  }
  // Keep the total grid size bounded in higher dimensions.
  while (k > 1 && std::pow(per_dim, k) > 20000.0) per_dim /= 2;
  std::vector<int> idx(static_cast<std::size_t>(k), 0);
  for (;;) {
    Vec s(k);
    for (int i = 0; i < k; ++i) {
      const double frac = patch.periodic ? static_cast<double>(idx[i]) / per_dim
                                         : static_cast<double>(idx[i]) / (per_dim - 1);
      s[i] = patch.lower[i] + frac * (patch.upper[i] - patch.lower[i]);
    }
    out.push_back(s);
    int i = 0;
    while (i < k && ++idx[i] == per_dim) idx[i++] = 0;
    if (i == k) break;
  }
  return out;
}

}  // namespace

PatchDistance distance_to_patch(const Scene& scene, const manifold::SubmanifoldPatch& patch,
                                const Point& x, Direction direction,
                                const PatchDistanceOptions& opts) {
  const Scene sc = direction == Direction::forward ? scene : scene.reversed();
  const int n = scene.dim();
  const int k = patch.dim;
  if (k >= n) throw DomainError("distance_to_patch needs a patch of positive codimension");
  const Vec target = scene.ambient(x);

  // Foot-point seeds: nearest grid samples in the ambient space, kept apart.
  std::vector<std::pair<double, Vec>> cand;
  for (const Vec& s : patch_grid(patch, opts.grid))
    cand.emplace_back((patch.param(s) - target).norm(), s);
  std::stable_sort(cand.begin(), cand.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Vec> feet;
  for (const auto& [d, s] : cand) {
    if (static_cast<int>(feet.size()) >= opts.foot_seeds) break;
    const Vec ps = patch.param(s);
    const bool far = std::all_of(feet.begin(), feet.end(), [&](const Vec& f) {
      return (patch.param(f) - ps).norm() > 0.5 * std::max(d, 1e-9);
    });
    if (far) feet.push_back(s);
  }

  if (!cand.empty() && cand.front().first <= 1e-13) {
    PatchDistance pd;
    pd.foot_param = cand.front().second;
    pd.foot = patch_point(scene, patch, pd.foot_param);
    pd.velocity = Vec::Zero(n);
    return pd;
  }

  numkit::LeastSquaresOptions lso;
  lso.residual_tol = 0.1 * opts.miss_tol;
  lso.fd_step = 1e-7;
  lso.max_iterations = 80;

  bool found = false;
  PatchDistance best;
  int tried = 0;
  std::ostringstream seeds_log;
  for (const Vec& s0 : feet) {
    const int c0 = patch_point(scene, patch, s0).chart;
    auto foot_at = [&](const Vec& s) {
      return Point{c0, scene.chart(c0).from_ambient(patch.param(s))};
    };
    // h-orthogonal projector onto the complement of T_foot P.
    auto complement = [&](const Point& foot, const Vec& s) {
      const Mat h = scene.metric(foot);
      Mat proj = Mat::Identity(n, n);
      if (k > 0) {
        const Mat t = manifold::patch_frame(scene, patch, s, foot);
        proj -= t * (t.transpose() * h * t).ldlt().solve(t.transpose() * h);
      }
      return proj;
    };
    const Point foot0 = foot_at(s0);
    Eigen::ColPivHouseholderQR<Mat> qr(complement(foot0, s0));
    const Mat perm = qr.colsPermutation();
    const Mat select = perm.leftCols(n - k);  // unit vectors of the pivot columns

    auto velocity = [&](const Vec& z) {
      const Vec s = z.head(k);
      const Point foot = foot_at(s);
      const Mat e = complement(foot, s) * select;
      const Vec covector = scene.metric(foot) * e * z.tail(n - k);
      return std::pair<Point, Vec>(foot, minkowski::legendre_inverse(sc.norm_at(foot), covector,
                                                                   opts.tol));
    };
    auto miss = [&](const Vec& z) {
      const auto [foot, v] = velocity(z);
      return Vec(scene.ambient(exp_map(sc, foot, v, opts.tol)) - target);
    };

    // Covector seed from the h-orthogonal part of the chart difference.
    const Vec d = complement(foot0, s0) * (scene.to_chart(x, c0).x - foot0.x);
    const Mat e0 = complement(foot0, s0) * select;
    const Vec a0 = e0.completeOrthogonalDecomposition().solve(d);
    for (double sign : {1.0, -1.0}) {
      Vec z0(n);
      z0.head(k) = s0;
      z0.tail(n - k) = sign * a0;
      ++tried;
      seeds_log << (tried > 1 ? "; " : "") << "s0=" << s0.transpose() << " sign=" << sign;
      numkit::LeastSquaresResult r;
      try {
        r = numkit::solve_least_squares(miss, z0, lso);
      } catch (const Error&) {
        continue;
      }
      if (r.residual_norm > opts.miss_tol || !patch.contains(r.x.head(k))) continue;
      Point foot;
      Vec v;
      try {
        std::tie(foot, v) = velocity(r.x);
      } catch (const Error&) {
        continue;
      }
      const double dist = randers::randers_norm(sc.zermelo_at(foot), v);
      if (dist > opts.scale) continue;
      if (!found || dist < best.distance) {
        found = true;
        best.distance = dist;
        best.foot = foot;
        best.foot_param = r.x.head(k);
        best.velocity = direction == Direction::forward ? v : Vec(-v);
        best.miss = r.residual_norm;
      }
      break;  // the opposite sign is only a fallback
    }
  }
  if (!found)
    throw SearchFailureError("no orthogonal connector from the patch to the point (" +
                             std::string(to_string(direction)) + "); seeds tried: " +
                             seeds_log.str());
  if (k > 0) {
    const Mat t = manifold::patch_frame(scene, patch, best.foot_param, best.foot);
    best.cone_residual =
        minkowski::orthogonality_residual(scene.norm_at(best.foot), best.velocity, t, opts.tol);
  }
  return best;
}

// ─── Endpoint map ────────────────────────────────────────────────────────────

std::vector<EndpointSample> endpoint_map(const Scene& scene, const manifold::SubmanifoldPatch& U,
                                         const NormalField& xi, const std::vector<Vec>& params,
                                         const EndpointOptions& opts) {
  auto image = [&](const Vec& s) {
    const Point base = manifold::patch_point(scene, U, s);
    return exp_map(scene, base, xi(s, base), opts.tol);
  };
  auto image_ambient = [&](const Vec& s) { return scene.ambient(image(s)); };
  return numkit::parallel_map<EndpointSample>(params.size(), [&](std::size_t i) {
    EndpointSample out;
    out.param = params[i];
    out.image = image(params[i]);
    out.image_ambient = scene.ambient(out.image);
    if (U.dim > 0) {
      const Mat jac = numkit::fd_jacobian(image_ambient, params[i], opts.fd_step);
      const Mat dU = U.frame_ambient(params[i]);
      const double ref = Eigen::JacobiSVD<Mat>(dU).singularValues()[0];
      out.singular_values = Eigen::JacobiSVD<Mat>(jac).singularValues() / ref;
      out.rank = numkit::numeric_rank(jac, opts.tol.rank_sv_cutoff, ref);
    }
    return out;
  });
}

// ─── Export ──────────────────────────────────────────────────────────────────

void write_path_csv(std::ostream& os, const GeodesicPath& path, const std::string& label,
                    bool header) {
  const Scene& sc = path.scene();
  const int na = sc.ambient_dim();
  if (header) {
    os << "path,t";
    for (int i = 1; i <= na; ++i) os << ",X" << i;
    for (int i = 1; i <= na; ++i) os << ",V" << i;
    os << ",speed,residual\n";
  }
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::scientific << std::setprecision(10);
  for (const auto& s : path.samples()) {
    const Vec x = sc.ambient(s.point);
    const Vec v = sc.to_ambient_vector(s.point, s.velocity);
    os << label << "," << s.t;
    for (int i = 0; i < na; ++i) os << "," << x[i];
    for (int i = 0; i < na; ++i) os << "," << v[i];
    os << "," << randers::randers_norm(sc.zermelo_at(s.point), s.velocity) << ","
       << path.residual() << "\n";
  }
  os.flags(flags);
  os.precision(prec);
}

}  // namespace zermelo::geodesic
