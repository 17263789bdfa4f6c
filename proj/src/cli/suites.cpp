#include "zermelo/cli/suites.hpp"

#include "zermelo/foliation.hpp"
#include "zermelo/geodesic.hpp"
#include "zermelo/minkowski.hpp"
#include "zermelo/randers.hpp"
#include "zermelo/submersion.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace zermelo::cli {

namespace {

using manifold::Point;
using manifold::Scene;

struct Context {
  const ExperimentConfig& config;
  Scene scene;
  numkit::Tolerances tol;
  numkit::Tolerances tight;

  explicit Context(const ExperimentConfig& c)
      : config(c),
        scene(manifold::build_scene(c.scene.scene)),
        tol(with_overrides(numkit::Tolerances{}, c.tol_overrides)),
        tight(with_overrides(geodesic::ShootingOptions::tight_tolerances(), c.tol_overrides)) {}

  const std::string& name() const { return scene.name(); }

  foliation::FoliationModel foliation() const {
    if (config.scene.foliation.empty())
      throw ConfigError("suite '" + config.suite + "' needs a scene with a foliation");
    return foliation::make_foliation(config.scene.foliation);
  }

  /// Random ambient point of the scene away from singular leaves.
  Vec sample(std::mt19937_64& rng) const {
    if (!config.scene.foliation.empty()) {
      Vec X = foliation().sample_regular(rng);
      const auto& t = config.scene.scene.template_name;
      if (t == "sphere2" || t == "sphere3-hopf") X *= config.scene.scene.radius.value_or(1.0);
      return X;
    }
    std::normal_distribution<double> g(0.0, 1.0);
    Vec X(scene.ambient_dim());
    for (Eigen::Index i = 0; i < X.size(); ++i) X[i] = g(rng);
    const auto& t = config.scene.scene.template_name;
    if (t == "sphere2" || t == "sphere3-hopf")
      return Vec(X.normalized() * config.scene.scene.radius.value_or(1.0));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return Vec(X.normalized() * std::pow(u(rng), 1.0 / static_cast<double>(X.size())));
  }
};

std::string num(double x) { return format_number(x); }

Vec gaussian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

Mat random_spd(int n, std::mt19937_64& rng) {
  Mat m(n, n);
  for (int j = 0; j < n; ++j) m.col(j) = 0.5 * gaussian(n, rng);
  return m * m.transpose() + 0.5 * Mat::Identity(n, n);
}

/// Vector of q-norm r in a random direction.
Vec random_with_norm(const Mat& q, double r, std::mt19937_64& rng) {
  const Vec d = gaussian(static_cast<int>(q.rows()), rng);
  return r * d / std::sqrt(d.dot(q * d));
}

Vec random_tangent(const Scene& scene, std::mt19937_64& rng) {
  return gaussian(scene.dim(), rng);
}

// ─── norm-audit ──────────────────────────────────────────────────────────────

SuiteOutput norm_audit(const Context& ctx) {
  SuiteOutput out;
  Report& r = out.report;
  r = Report("norm-audit " + ctx.name());
  std::mt19937_64 rng(ctx.config.seed);
  const int trials = ctx.config.options.trials.value_or(100);

  auto audit = [&](const std::string& scene, int trial, minkowski::MinkowskiNorm norm, const Vec& v,
                   const std::string& detail) {
    const Mat closed = norm.closed_form_tensor(v);
    minkowski::MinkowskiNorm plain = norm;
    plain.closed_form_tensor = nullptr;
    const Mat fd = minkowski::fundamental_tensor(plain, v, ctx.tol);
    const double z = norm(v);
    r.add("tensor-consistency", scene, trial, "|g_v - Hess(Z^2/2)| / |g_v|",
          (closed - fd).cwiseAbs().maxCoeff() / closed.cwiseAbs().maxCoeff(), 1e-6, detail);
    r.add("gvv", scene, trial, "|g_v(v,v) - Z(v)^2| / max(1, Z^2)",
          std::abs(v.dot(closed * v) - z * z) / std::max(1.0, z * z), 1e-8, detail);
  };

  for (int k = 0; k < trials; ++k) {
    const int n = 2 + k % 3;
    const Mat a = random_spd(n, rng);
    std::uniform_real_distribution<double> u(0.0, 0.8);
    const Vec beta_sharp = random_with_norm(a, u(rng), rng);
    const randers::RandersData rd(a, a * beta_sharp);
    const Vec v = gaussian(n, rng);
    audit("random-randers", k, randers::as_norm(rd), v, "dim " + std::to_string(n));
  }

  const int samples = ctx.config.options.samples.value_or(8);
  for (int k = 0; k < samples; ++k) {
    const Vec X = ctx.sample(rng);
    const Point p = ctx.scene.locate(X);
    const auto norm = ctx.scene.norm_at(p);
    const Vec v = random_tangent(ctx.scene, rng);
    const std::string detail = "point " + num(X[0]) + " ...";
    audit(ctx.name(), k, norm, v, detail);
    const Vec back = minkowski::legendre_inverse(norm, minkowski::legendre(norm, v, ctx.tol), ctx.tol);
    r.add("legendre-roundtrip", ctx.name(), k, "|L^-1(L(v)) - v| / |v|", (back - v).norm() / v.norm(),
          1e-8, detail);
  }

  int k = 0;
  for (const auto& probe : ctx.config.options.probes) {
    const Point p = ctx.scene.locate(probe.point);
    const double z = ctx.scene.norm_at(p)(probe.vector);
    r.add("probe", ctx.name(), k++, "|Z(v) - expected|", std::abs(z - probe.expected), 1e-8,
          "Z = " + num(z) + ", expected " + num(probe.expected));
  }
  return out;
}

// ─── convert ─────────────────────────────────────────────────────────────────

SuiteOutput convert(const Context& ctx) {
  SuiteOutput out;
  Report& r = out.report;
  r = Report("convert " + ctx.name());
  std::mt19937_64 rng(ctx.config.seed);
  const int trials = ctx.config.options.trials.value_or(1000);
  std::uniform_real_distribution<double> u(0.0, 0.9);
  double worst = 0.0;
  for (int k = 0; k < trials; ++k) {
    const int n = 2 + k % 3;
    const Mat h = random_spd(n, rng);
    const randers::ZermeloData z0(h, random_with_norm(h, u(rng), rng));
    const auto z1 = randers::randers_to_zermelo(randers::zermelo_to_randers(z0));
    const double ez = std::max((z1.h() - z0.h()).cwiseAbs().maxCoeff(),
                               (z1.wind() - z0.wind()).cwiseAbs().maxCoeff());
    const Mat a = random_spd(n, rng);
    const randers::RandersData r0(a, a * random_with_norm(a, u(rng), rng));
    const auto r1 = randers::zermelo_to_randers(randers::randers_to_zermelo(r0));
    const double er = std::max((r1.a() - r0.a()).cwiseAbs().maxCoeff(),
                               (r1.beta() - r0.beta()).cwiseAbs().maxCoeff());
    worst = std::max({worst, ez, er});
    r.add("round-trip", "random-data", k, "max entry error of both round trips", std::max(ez, er),
          1e-12, "dim " + std::to_string(n));
  }

  const int samples = ctx.config.options.samples.value_or(100);
  double worst_ind = 0.0;
  for (int k = 0; k < samples; ++k) {
    const Point p = ctx.scene.locate(ctx.sample(rng));
    const auto zd = ctx.scene.zermelo_at(p);
    const Vec unit = random_with_norm(zd.h(), 1.0, rng);
    const double e = std::abs(randers::randers_norm(zd, Vec(unit + zd.wind())) - 1.0);
    worst_ind = std::max(worst_ind, e);
    r.add("indicatrix", ctx.name(), k, "|Z(u + W) - 1| for h(u,u) = 1", e, 1e-10);
    const auto z1 = randers::randers_to_zermelo(randers::zermelo_to_randers(zd));
    const double ez = std::max((z1.h() - zd.h()).cwiseAbs().maxCoeff(),
                               (z1.wind() - zd.wind()).cwiseAbs().maxCoeff());
    worst = std::max(worst, ez);
    r.add("round-trip", ctx.name(), k, "max entry error at a scene point", ez, 1e-12);
  }
  out.notes.push_back("round-trip max error: " + num(worst));
  out.notes.push_back("indicatrix max error: " + num(worst_ind));
  return out;
}

// ─── geodesic-compare ────────────────────────────────────────────────────────

SuiteOutput geodesic_compare(const Context& ctx) {
  SuiteOutput out;
  Report& r = out.report;
  r = Report("geodesic-compare " + ctx.name());
  std::mt19937_64 rng(ctx.config.seed);
  const int trials = ctx.config.options.trials.value_or(4);
  const double T = ctx.config.options.length.value_or(1.0);
  std::ostringstream paths;
  double worst = 0.0;
  double sigma = 0.0;
  bool header = true;
  for (int k = 0; k < trials; ++k) {
    const Vec X = ctx.sample(rng);
    const Point p = ctx.scene.locate(X);
    Vec v = random_tangent(ctx.scene, rng);
    v /= ctx.scene.norm_at(p)(v);
    const auto direct = geodesic::geodesic_ivp(ctx.scene, p, v, T, ctx.tight);
    r.add("geodesic-residual", ctx.name(), k, "max Euler-Lagrange defect", direct.residual(), 1e-5);
    geodesic::write_path_csv(paths, direct, "direct-" + std::to_string(k), header);
    header = false;
    geodesic::NavigationOptions no;
    no.tol = ctx.tight;
    try {
      const auto nav = geodesic::navigation_geodesic(ctx.scene, p, v, T, no);
      sigma = nav.sigma;
      const double dev = geodesic::sup_deviation(ctx.scene, direct, nav.path);
      worst = std::max(worst, dev);
      r.add("navigation", ctx.name(), k, "sup |direct - phi_t(h-geodesic)|", dev, 1e-4,
            "sigma " + num(nav.sigma) + "; homothety residual " + num(nav.homothety_residual));
      geodesic::write_path_csv(paths, nav.path, "navigation-" + std::to_string(k), false);
    } catch (const PreconditionError& e) {
      r.precondition_failed = true;
      r.add_flag("navigation", ctx.name(), k, "wind is an infinitesimal homothety", false,
                 std::numeric_limits<double>::quiet_NaN(), e.what());
    }
  }

  // s(t) against quadrature of exp(-sigma u / 2).
  double worst_arc = 0.0;
  int k = 0;
  for (double s : {sigma, -1.0, -0.4, 0.0, 0.4, 1.0}) {
    for (double t : {0.25, 0.5, 1.0, 2.0}) {
      const double q = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
          [s](double u) { return std::exp(-s * u / 2.0); }, 0.0, t);
      const double e = std::abs(geodesic::arc_reparam(s, t) - q);
      worst_arc = std::max(worst_arc, e);
      r.add("arc-reparam", "analytic", k++, "sigma=" + num(s) + " t=" + num(t), e, 1e-10);
    }
  }
  out.notes.push_back("sup deviation: " + num(worst));
  out.notes.push_back("arc_reparam max quadrature error: " + num(worst_arc));
  out.files.emplace_back("paths.csv", paths.str());
  return out;
}

// ─── foliation-check ─────────────────────────────────────────────────────────

SuiteOutput foliation_check(const Context& ctx) {
  SuiteOutput out;
  Report& r = out.report;
  r = Report("foliation-check " + ctx.name());
  const auto fol = ctx.foliation();
  const auto& opt = ctx.config.options;

  foliation::FinslerCheckOptions fo;
  fo.trials = opt.trials.value_or(fo.trials);
  fo.seed = ctx.config.seed;
  fo.length = opt.length.value_or(fo.length);
  fo.samples = opt.samples.value_or(fo.samples);
  fo.tol = ctx.tight;
  const Report finsler = foliation::check_finsler(ctx.scene, fol, fo);
  r.append(finsler);

  foliation::EquidistanceOptions eo;
  eo.patch.tol = ctx.tight;
  std::ostringstream spread;
  spread << "pair,direction,index";
  for (int i = 0; i < ctx.scene.ambient_dim(); ++i) spread << ",X" << i + 1;
  spread << ",distance,mean,spread\n";
  int pair = 0;
  for (const auto& [src, dst] : ctx.config.scene.leaf_pairs) {
    std::vector<foliation::EquidistanceResult> results;
    r.append(foliation::equidistance_report(ctx.scene, fol, src, dst, eo, &results));
    for (const auto& res : results) {
      for (std::size_t i = 0; i < res.targets.size(); ++i) {
        spread << pair << ',' << geodesic::to_string(res.direction) << ',' << i;
        for (Eigen::Index j = 0; j < res.targets[i].size(); ++j) spread << ',' << num(res.targets[i][j]);
        spread << ',' << num(res.distances[i]) << ',' << num(res.mean) << ',' << num(res.spread)
               << '\n';
      }
      out.notes.push_back("pair " + std::to_string(pair) + " " + geodesic::to_string(res.direction) +
                          ": mean distance " + num(res.mean) + ", spread " + num(res.spread));
    }
    ++pair;
  }
  out.files.emplace_back("spread.csv", spread.str());

  if (!fol.minimal_strata.empty())
    r.append(foliation::check_wind_tangency(ctx.scene, fol.minimal_strata));

  foliation::Theorem1Options to;
  to.finsler = fo;
  to.leaf_pairs = ctx.config.scene.leaf_pairs;
  to.equidistance = eo;
  to.finsler.tol = ctx.tight;
  Report thm = foliation::check_theorem1(ctx.scene, fol, to);
  if (thm.precondition_failed)
    out.notes.push_back("reduction to h skipped: the foliation is not Finsler for Z");
  r.append(thm);

  try {
    foliation::MinkowskiLemmaOptions mo;
    mo.finsler = fo;
    r.append(foliation::check_minkowski_lemmas(ctx.scene, fol, mo));
  } catch (const PreconditionError&) {
    out.notes.push_back("Randers-Minkowski lemmas not applicable: h or W is not constant");
  }
  return out;
}

// ─── equifocal ───────────────────────────────────────────────────────────────

SuiteOutput equifocal(const Context& ctx) {
  SuiteOutput out;
  const auto fol = ctx.foliation();
  const auto& preset = ctx.config.scene;
  if (!preset.leaf_point) throw ConfigError("equifocal needs scene.leaf_point");
  foliation::EquifocalOptions eo;
  eo.samples = ctx.config.options.samples.value_or(eo.samples);
  if (ctx.config.options.times) eo.times = *ctx.config.options.times;
  eo.focal_time = preset.focal_time;
  if (preset.coefficients) eo.coefficients = *preset.coefficients;
  eo.endpoint.tol = ctx.tight;
  auto res = foliation::check_equifocal(ctx.scene, fol, *preset.leaf_point, eo);
  out.report = res.report;
  out.notes.push_back("sigma: " + num(res.sigma) + " (homothety residual " +
                      num(res.homothety_residual) + ")");
  std::ostringstream csv;
  csv << "t,s,focal,leaf_spread,point_spread,min_rank,max_rank,identity_error,"
         "identity_error_literal\n";
  for (const auto& t : res.times) {
    csv << num(t.t) << ',' << num(t.s) << ',' << (t.focal ? 1 : 0) << ',' << num(t.leaf_spread)
        << ',' << num(t.point_spread) << ',' << t.min_rank << ',' << t.max_rank << ','
        << num(t.identity_error) << ',' << num(t.identity_error_literal) << '\n';
  }
  out.files.emplace_back("equifocal.csv", csv.str());
  return out;
}

// ─── submersion-check ────────────────────────────────────────────────────────

SuiteOutput submersion_check(const Context& ctx) {
  SuiteOutput out;
  const auto& preset = ctx.config.scene;
  if (preset.submersion.empty()) throw ConfigError("submersion-check needs scene.submersion");
  const auto spec = submersion::make_submersion(preset.submersion, preset.scene.wind);
  const auto base = submersion::make_base(preset.submersion, preset.scene.wind);
  submersion::SubmersionCheckOptions so;
  so.samples = ctx.config.options.samples.value_or(so.samples);
  so.directions = ctx.config.options.directions.value_or(so.directions);
  so.seed = ctx.config.seed;
  so.tol = ctx.tol;
  Report& r = out.report;
  r = submersion::check_submersion(spec, submersion::norm_field(base), so);

  submersion::RandersStructureOptions ro;
  ro.seed = ctx.config.seed + 1;
  ro.tol = ctx.tol;
  const auto structure = submersion::check_randers_submersion_structure(spec, ro);
  r.append(structure.report);

  // Well-definedness along fibers at the fitted base points.
  for (std::size_t i = 0; i < structure.base_points.size(); ++i) {
    const Vec& y = structure.base_points[i];
    Vec w = Vec::Zero(spec.base_dim);
    w[0] = 1.0;
    try {
      const double value = submersion::induced_base_metric(spec, y, w, 1e-5, ctx.tol);
      const double expected = submersion::norm_field(base)(y)(w);
      r.add("induced-base-metric", spec.name, static_cast<int>(i), "|F^(e1) - Z_base(e1)|",
            std::abs(value - expected), 1e-6);
    } catch (const WellDefinednessError& e) {
      r.add_flag("induced-base-metric", spec.name, static_cast<int>(i), "fiber independence", false,
                 std::numeric_limits<double>::quiet_NaN(), e.what());
    }
  }
  return out;
}

// ─── blowup ──────────────────────────────────────────────────────────────────

SuiteOutput blowup(const Context& ctx) {
  SuiteOutput out;
  const auto fol = ctx.foliation();
  const auto& preset = ctx.config.scene;
  if (!preset.blowup_point) throw ConfigError("blowup needs scene.blowup_point");
  foliation::BlowupOptions bo;
  if (ctx.config.options.lambdas) bo.lambdas = *ctx.config.options.lambdas;
  bo.directions = ctx.config.options.directions.value_or(bo.directions);
  bo.tol = ctx.tight;
  const auto res =
      foliation::blowup_metric_check(ctx.scene, fol, ctx.scene.locate(*preset.blowup_point), bo);
  out.report = res.report;
  std::ostringstream csv;
  csv << "lambda,difference\n";
  for (std::size_t i = 0; i < res.lambdas.size(); ++i)
    csv << num(res.lambdas[i]) << ',' << num(res.differences[i]) << '\n';
  out.files.emplace_back("blowup.csv", csv.str());
  out.notes.push_back(std::string("non-increasing: ") + (res.monotone ? "yes" : "no"));
  return out;
}

}  // namespace

SuiteOutput run_suite(const ExperimentConfig& config) {
  const Context ctx(config);
  const auto& s = config.suite;
  if (s == "norm-audit") return norm_audit(ctx);
  if (s == "convert") return convert(ctx);
  if (s == "geodesic-compare") return geodesic_compare(ctx);
  if (s == "foliation-check") return foliation_check(ctx);
  if (s == "equifocal") return equifocal(ctx);
  if (s == "submersion-check") return submersion_check(ctx);
  if (s == "blowup") return blowup(ctx);
  throw ConfigError("unknown suite '" + s + "'");
}

int run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                   std::ostream& log) {
  SuiteOutput out;
  std::string error;
  try {
    out = run_suite(config);
  } catch (const Error& e) {
    error = e.what();
    out.report = Report(config.suite + " " + config.scene.name);
    out.report.add("error", config.scene.name, 0, "suite aborted",
                   std::numeric_limits<double>::quiet_NaN(), 0.0, error);
  }
  const bool pass = out.report.pass();

  std::filesystem::create_directories(out_dir);
  {
    std::ofstream csv(out_dir / "report.csv");
    out.report.write_csv(csv);
  }
  std::ostringstream summary;
  summary << "suite: " << config.suite << "\nscene: " << config.scene.name
          << "\nseed: " << config.seed << "\n";
  for (const auto& [key, v] : config.tol_overrides) summary << "tolerance " << key << " = " << v << "\n";
  summary << out.report.summary();
  for (const auto& note : out.notes) summary << note << "\n";
  if (!error.empty()) summary << "error: " << error << "\n";
  summary << "result: " << (pass ? "PASS" : "FAIL") << "\n";
  if (!pass) {
    const auto first = out.report.first_failure();
    summary << "first failure: " << (first.empty() ? "precondition failed" : first) << "\n";
  }
  {
    std::ofstream f(out_dir / "summary.txt");
    f << summary.str();
  }
  for (const auto& [name, contents] : out.files) {
    std::ofstream f(out_dir / name);
    f << contents;
  }
  log << summary.str();
  return pass ? 0 : 1;
}

}  // namespace zermelo::cli
