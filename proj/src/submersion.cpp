#include "zermelo/submersion.hpp"

#include "zermelo/detail/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace zermelo::submersion {

namespace {

constexpr double kHopfBaseRadius = 0.5;

std::string vec_text(const Vec& v) {
  std::ostringstream os;
  os.precision(6);
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
  return os.str();
}

/// Unit directions: +-1 in one dimension, evenly spaced angles in two, Gaussian otherwise.
std::vector<Vec> unit_directions(int m, int count, std::mt19937_64& rng) {
  std::vector<Vec> out;
  if (m == 1) {
    for (int i = 0; i < count; ++i) out.push_back(Vec::Constant(1, i % 2 ? -1.0 : 1.0));
    return out;
  }
  if (m == 2) {
    for (int i = 0; i < count; ++i) {
      const double a = 2.0 * std::numbers::pi * (i + 0.25) / count;
      out.push_back((Vec(2) << std::cos(a), std::sin(a)).finished());
    }
    return out;
  }
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < count; ++i) {
    Vec v(m);
    for (int k = 0; k < m; ++k) v[k] = g(rng);
    out.push_back(v.normalized());
  }
  return out;
}

Point checked_point(const SubmersionSpec& spec, const Vec& ambient, Mat* dpi) {
  const Point p = spec.total.locate(ambient);
  *dpi = spec.dpi(p);
  if (numkit::numeric_rank(*dpi, numkit::Tolerances{}.rank_sv_cutoff) < spec.base_dim)
    throw NotSubmersionError("d(pi) has rank below " + std::to_string(spec.base_dim) + " at " +
                             vec_text(ambient));
  return p;
}

/// Stereographic coordinates of S^2(R) from (0, 0, -R) and back.
Vec stereo(const Vec& P, double R) { return Vec(R * P.head(2) / (R + P[2])); }
Vec inverse_stereo(const Vec& y, double R) {
  const double d = R * R + y.squaredNorm();
  Vec P(3);
  P.head(2) = 2.0 * R * R * y / d;
  P[2] = R * (R * R - y.squaredNorm()) / d;
  return P;
}

Vec hopf_map(const Vec& X) {
  const Vec u = X / X.norm();
  return (Vec(3) << u[0] * u[2] + u[1] * u[3], u[1] * u[2] - u[0] * u[3],
          0.5 * (u[0] * u[0] + u[1] * u[1] - u[2] * u[2] - u[3] * u[3]))
      .finished();
}

}  // namespace

Vec SubmersionSpec::project(const Point& p) const { return map(total.ambient(p)); }

Mat SubmersionSpec::dpi(const Point& p) const {
  if (differential) return differential(p);
  const auto& chart = total.chart(p.chart);
  auto f = [&](const Vec& x) { return map(chart.to_ambient(x)); };
  return numkit::fd_jacobian(f, p.x, 1e-6 * std::max(1.0, p.x.norm()));
}

BaseNormField norm_field(BaseZermeloField base) {
  return [base = std::move(base)](const Vec& y) { return randers::as_norm(base(y)); };
}

Report check_submersion(const SubmersionSpec& spec, const BaseNormField& base,
                        const SubmersionCheckOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  std::vector<Vec> points;
  for (int i = 0; i < opts.samples; ++i) points.push_back(spec.sample_total(rng));
  const auto dirs = unit_directions(spec.base_dim, opts.directions, rng);

  struct Sample {
    double gap = 0.0, horizontality = 0.0;
    Vec y;
  };
  const auto results = numkit::parallel_map<Sample>(points.size(), [&](std::size_t i) {
    Mat dpi;
    const Point p = checked_point(spec, points[i], &dpi);
    Sample s;
    s.y = spec.project(p);
    const auto total = spec.total.norm_at(p);
    const auto base_norm = base(s.y);
    for (const Vec& w : dirs) {
      const auto q = minkowski::quotient_norm(total, dpi, w, opts.tol);
      s.gap = std::max(s.gap, std::abs(q.value - base_norm(w)));
      s.horizontality = std::max(s.horizontality, q.horizontality);
    }
    return s;
  });

  Report r("check_submersion " + spec.name);
  for (std::size_t i = 0; i < results.size(); ++i) {
    const std::string detail = "point " + vec_text(points[i]) + "; base " + vec_text(results[i].y);
    r.add("submersion", spec.name, static_cast<int>(i), "quotient vs base norm", results[i].gap,
          opts.threshold, detail);
    r.add("horizontality", spec.name, static_cast<int>(i), "g_v*(v*, ker d(pi))",
          results[i].horizontality, opts.horizontality_threshold, detail);
  }
  return r;
}

double induced_base_metric(const SubmersionSpec& spec, const Vec& y, const Vec& w,
                           double tolerance, const numkit::Tolerances& tol) {
  const auto fiber = spec.fiber(y);
  if (fiber.empty()) throw DomainError("no fiber points over " + vec_text(y));
  std::vector<double> values;
  for (std::size_t i = 0; i < std::min<std::size_t>(2, fiber.size()); ++i) {
    Mat dpi;
    const Point p = checked_point(spec, fiber[i], &dpi);
    values.push_back(minkowski::quotient_norm(spec.total.norm_at(p), dpi, w, tol).value);
  }
  if (values.size() == 2 && std::abs(values[0] - values[1]) > tolerance) {
    std::ostringstream os;
    os << "induced norm depends on the fiber point over " << vec_text(y) << ": " << values[0]
       << " vs " << values[1];
    throw WellDefinednessError(os.str());
  }
  return values.front();
}

randers::RandersData fit_randers(const std::vector<Vec>& directions,
                                 const std::vector<double>& forward,
                                 const std::vector<double>& backward, double* residual) {
  const int m = static_cast<int>(directions.front().size());
  const int n_sym = m * (m + 1) / 2;
  const auto count = static_cast<Eigen::Index>(directions.size());
  // alpha(w)^2 = w^T a w is linear in the upper triangle of a; beta(w) in beta.
  Mat qa(count, n_sym), qb(count, m);
  Vec alpha2(count), beta(count);
  for (Eigen::Index k = 0; k < count; ++k) {
    const Vec& w = directions[static_cast<std::size_t>(k)];
    int col = 0;
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) qa(k, col++) = (i == j ? 1.0 : 2.0) * w[i] * w[j];
    qb.row(k) = w.transpose();
    const double a = 0.5 * (forward[static_cast<std::size_t>(k)] + backward[static_cast<std::size_t>(k)]);
    alpha2[k] = a * a;
    beta[k] = 0.5 * (forward[static_cast<std::size_t>(k)] - backward[static_cast<std::size_t>(k)]);
  }
  const Vec sym = qa.colPivHouseholderQr().solve(alpha2);
  const Vec b = qb.colPivHouseholderQr().solve(beta);
  Mat a(m, m);
  int col = 0;
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) a(i, j) = a(j, i) = sym[col++];
  randers::RandersData rd(a, b);
  if (residual) {
    double worst = 0.0;
    for (Eigen::Index k = 0; k < count; ++k) {
      const Vec& w = directions[static_cast<std::size_t>(k)];
      worst = std::max(worst, std::abs(randers::randers_norm(rd, w) - forward[static_cast<std::size_t>(k)]));
      worst = std::max(worst, std::abs(randers::randers_norm(rd, Vec(-w)) - backward[static_cast<std::size_t>(k)]));
    }
    *residual = worst;
  }
  return rd;
}

RandersStructure check_randers_submersion_structure(const SubmersionSpec& spec,
                                                    const RandersStructureOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  RandersStructure out;
  out.base_points = opts.base_points;
  std::vector<Vec> total_points;
  if (out.base_points.empty()) {
    for (int i = 0; i < opts.samples; ++i) {
      const Vec X = spec.sample_total(rng);
      total_points.push_back(X);
      out.base_points.push_back(spec.map(X));
    }
  } else {
    for (const Vec& y : out.base_points) total_points.push_back(spec.fiber(y).front());
  }
  const int m = spec.base_dim;
  const int count = 2 * (2 * m + m * (m + 1) / 2) + 2;
  std::vector<Vec> dirs;
  {
    std::normal_distribution<double> g(0.0, 1.0);
    for (int k = 0; k < count; ++k) {
      Vec w(m);
      for (int i = 0; i < m; ++i) w[i] = g(rng);
      dirs.push_back(m == 1 ? Vec::Constant(1, 0.5 + std::abs(w[0])) : Vec(w.normalized()));
    }
  }

  struct Fit {
    double fit_residual = 0.0, wind_gap = 0.0, riemannian_gap = 0.0;
    randers::ZermeloData data{Mat::Identity(1, 1), Vec::Zero(1)};
  };
  const auto fits = numkit::parallel_map<Fit>(total_points.size(), [&](std::size_t i) {
    Mat dpi;
    const Point p = checked_point(spec, total_points[i], &dpi);
    const auto total = spec.total.norm_at(p);
    std::vector<double> fwd, bwd;
    for (const Vec& w : dirs) {
      fwd.push_back(minkowski::quotient_norm(total, dpi, w, opts.tol).value);
      bwd.push_back(minkowski::quotient_norm(total, dpi, Vec(-w), opts.tol).value);
    }
    Fit f;
    const auto rd = fit_randers(dirs, fwd, bwd, &f.fit_residual);
    f.data = randers::randers_to_zermelo(rd);
    const Vec projected_wind = dpi * spec.total.wind(p);
    f.wind_gap = (f.data.wind() - projected_wind).norm();
    // Quotient of h through d(pi): (d(pi) h^-1 d(pi)^T)^-1.
    const Mat h = spec.total.metric(p);
    const Mat h_base = (dpi * h.ldlt().solve(dpi.transpose())).inverse();
    f.riemannian_gap = (f.data.h() - h_base).cwiseAbs().maxCoeff();
    return f;
  });

  Report& r = out.report;
  r = Report("check_randers_submersion_structure " + spec.name);
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const std::string detail = "base " + vec_text(out.base_points[i]) + "; fitted wind " +
                               vec_text(fits[i].data.wind());
    const int trial = static_cast<int>(i);
    r.add("randers-fit", spec.name, trial, "max |Z(w) - fit(w)|", fits[i].fit_residual,
          opts.fit_threshold, detail);
    r.add("base-wind", spec.name, trial, "|W_base - d(pi) W|", fits[i].wind_gap,
          opts.wind_threshold, detail);
    r.add("h-riemannian", spec.name, trial, "max |h_base - quotient of h|",
          fits[i].riemannian_gap, opts.riemannian_threshold, detail);
    out.fitted.push_back(fits[i].data);
  }
  return out;
}

SubmersionSpec translated(const SubmersionSpec& spec, const manifold::WindField& extra) {
  SubmersionSpec out = spec;
  const auto wind = spec.total.wind_field();
  out.total = spec.total.with_wind(
      [wind, extra](int c, const Vec& x) { return Vec(wind(c, x) + extra(c, x)); }, "/translated");
  out.name = spec.name + "/translated";
  return out;
}

BaseZermeloField translated_base(BaseZermeloField base, std::function<Vec(const Vec& y)> extra) {
  return [base = std::move(base), extra = std::move(extra)](const Vec& y) {
    const auto zd = base(y);
    return randers::ZermeloData(zd.h(), zd.wind() + extra(y));
  };
}

// ─── Builtin submersions ─────────────────────────────────────────────────────

SubmersionSpec identity_submersion(const Scene& scene,
                                   std::function<Vec(std::mt19937_64&)> sample) {
  SubmersionSpec s(scene.name() + "/identity", scene);
  s.base_dim = scene.dim();
  s.map = [](const Vec& X) { return X; };
  s.sample_total = std::move(sample);
  s.fiber = [](const Vec& y) { return std::vector<Vec>{y}; };
  return s;
}

SubmersionSpec plane_projection(const Vec& wind) {
  const Vec w = wind;
  SubmersionSpec s("plane-projection",
                   manifold::euclidean_ball(2, 3.0, [w](const Vec&) { return w; }, "plane-constwind"));
  s.base_dim = 1;
  s.map = [](const Vec& X) { return Vec(X.head(1)); };
  s.differential = [](const Point&) { return Mat((Mat(1, 2) << 1.0, 0.0).finished()); };
  s.sample_total = [](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double x = u(rng);
    return Vec((Vec(2) << x, u(rng)).finished());
  };
  s.fiber = [](const Vec& y) {
    return std::vector<Vec>{(Vec(2) << y[0], -0.5).finished(), (Vec(2) << y[0], 0.8).finished()};
  };
  return s;
}

BaseZermeloField plane_projection_base(const Vec& wind) {
  const double wx = wind[0];
  return [wx](const Vec&) { return randers::ZermeloData(Mat::Identity(1, 1), Vec::Constant(1, wx)); };
}

SubmersionSpec hopf_submersion(const manifold::WindSpec& wind) {
  manifold::SceneSpec scene_spec;
  scene_spec.template_name = "sphere3-hopf";
  scene_spec.wind = wind;
  scene_spec.name = "sphere3-hopf/" + wind.type;
  SubmersionSpec s("hopf/" + wind.type, manifold::build_scene(scene_spec));
  s.base_dim = 2;
  s.map = [](const Vec& X) { return stereo(hopf_map(X), kHopfBaseRadius); };
  s.sample_total = [](std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    for (;;) {
      Vec x(4);
      for (int i = 0; i < 4; ++i) x[i] = g(rng);
      x.normalize();
      // Keep the image away from the pole of the base chart.
      if (hopf_map(x)[2] > -0.3) return x;
    }
  };
  s.fiber = [](const Vec& y) {
    const Vec P = inverse_stereo(y, kHopfBaseRadius);
    const double r1 = std::sqrt(0.5 + P[2]);
    // z1 = r1, z2 = (P1 - i P2) / r1, then the fiber is e^{is}(z1, z2).
    const Vec z = (Vec(4) << r1, 0.0, P[0] / r1, -P[1] / r1).finished();
    std::vector<Vec> pts;
    for (double s : {0.0, 2.1}) {
      const double c = std::cos(s), sn = std::sin(s);
      pts.push_back((Vec(4) << c * z[0] - sn * z[1], sn * z[0] + c * z[1], c * z[2] - sn * z[3],
                     sn * z[2] + c * z[3])
                        .finished());
    }
    return pts;
  };
  return s;
}

BaseZermeloField hopf_base(const manifold::WindSpec& wind) {
  const double eps = wind.type == "hopf-horizontal" ? wind.epsilon : 0.0;
  if (wind.type != "hopf-horizontal" && wind.type != "hopf-vertical" && wind.type != "none")
    throw DomainError("no closed-form Hopf base for wind '" + wind.type + "'");
  return [eps](const Vec& y) {
    const double R = kHopfBaseRadius;
    const double conf = 2.0 * R * R / (R * R + y.squaredNorm());
    return randers::ZermeloData(conf * conf * Mat::Identity(2, 2),
                                (Vec(2) << -2.0 * eps * y[1], 2.0 * eps * y[0]).finished());
  };
}

std::vector<std::string> submersion_names() { return {"plane-projection", "hopf"}; }

SubmersionSpec make_submersion(const std::string& name, const manifold::WindSpec& wind) {
  if (name == "plane-projection") {
    Vec w = Vec::Zero(2);
    for (std::size_t i = 0; i < std::min<std::size_t>(2, wind.vector.size()); ++i)
      w[static_cast<Eigen::Index>(i)] = wind.vector[i];
    return plane_projection(w);
  }
  if (name == "hopf") return hopf_submersion(wind);
  throw DomainError("unknown submersion '" + name + "'");
}

BaseZermeloField make_base(const std::string& name, const manifold::WindSpec& wind) {
  if (name == "plane-projection") {
    Vec w = Vec::Zero(2);
    for (std::size_t i = 0; i < std::min<std::size_t>(2, wind.vector.size()); ++i)
      w[static_cast<Eigen::Index>(i)] = wind.vector[i];
    return plane_projection_base(w);
  }
  if (name == "hopf") return hopf_base(wind);
  throw DomainError("unknown submersion '" + name + "'");
}

}  // namespace zermelo::submersion
