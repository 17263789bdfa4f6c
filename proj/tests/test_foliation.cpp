#include "zermelo/foliation.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace zermelo;
using namespace zermelo::foliation;
using manifold::SceneSpec;
using testing::vec;

namespace {

Scene make(const std::string& tmpl, const std::string& wind, double eps = 0.0, double c = 0.0,
           std::vector<double> w = {}) {
  SceneSpec s;
  s.template_name = tmpl;
  s.wind = {wind, eps, c, std::move(w)};
  s.name = tmpl + "/" + wind;
  return manifold::build_scene(s);
}

Scene swirl() { return make("euclidean-ball", "rotational", 0.3); }

FinslerCheckOptions quick_finsler() {
  FinslerCheckOptions o;
  o.trials = 3;
  o.samples = 20;
  o.tol = geodesic::ShootingOptions::tight_tolerances();
  return o;
}

}  // namespace

TEST_CASE("invariants are constant along leaf frames") {
  std::mt19937_64 rng(1);
  for (const auto& name : foliation_names()) {
    const auto fol = make_foliation(name);
    for (int k = 0; k < 10; ++k) {
      const Vec X = fol.sample_regular(rng);
      const Mat t = fol.leaf_frame(X);
      CHECK(fol.stratum_label(X) == fol.regular_leaf_dim);
      for (Eigen::Index j = 0; j < t.cols(); ++j) {
        const double h = 1e-6;
        const Vec d = (fol.invariant(Vec(X + h * t.col(j))) - fol.invariant(Vec(X - h * t.col(j)))) / (2 * h);
        CHECK(d.norm() < 1e-7 * std::max(1.0, t.col(j).norm()));
      }
      const auto leaf = fol.leaf_through(X);
      std::vector<Vec> pts;
      for (double s : {0.1, 0.5, 0.9}) {
        Vec p = leaf.lower + s * (leaf.upper - leaf.lower);
        pts.push_back(leaf.param(p));
      }
      CHECK(fol.spread(pts) < 1e-8);
    }
  }
  CHECK(make_foliation("concentric-circles").stratum_label(Vec::Zero(2)) == 0);
  CHECK(make_foliation("latitudes").stratum_label(vec({0.0, 0.0, 1.0})) == 0);
  CHECK(make_foliation("axial-circles").stratum_label(vec({0.0, 0.0, 0.7})) == 0);
  CHECK_THROWS(make_foliation("spirals"));
}

TEST_CASE("Finsler condition") {
  CHECK(check_finsler(swirl(), make_foliation("concentric-circles"), quick_finsler()).pass());
  CHECK(check_finsler(make("euclidean-ball", "constant", 0, 0, {0.5, 0.0}), make_foliation("horizontal-lines"),
                      quick_finsler())
            .pass());
  const Report bad = check_finsler(make("euclidean-ball", "constant", 0, 0, {0.5, 0.0}),
                                   make_foliation("concentric-circles"), quick_finsler());
  CHECK_FALSE(bad.pass());
  CHECK(bad.worst("finsler") > 1e-2);
}

TEST_CASE("equidistant latitudes") {
  const auto fol = make_foliation("latitudes");
  const Vec src = vec({std::sqrt(0.75), 0.0, 0.5}), dst = vec({1.0, 0.0, 0.0});
  EquidistanceOptions o;
  o.samples = 8;

  const Scene round = make("sphere2", "none");
  const auto r0 = check_equidistance(round, fol, src, dst, Direction::forward, o);
  CHECK(r0.pass);
  CHECK(r0.mean == doctest::Approx(std::numbers::pi / 6.0).epsilon(1e-8));

  // The Killing wind runs along the leaves, so it changes neither distance.
  const Scene s = make("sphere2", "killing", 0.2);
  const auto fwd = check_equidistance(s, fol, src, dst, Direction::forward, o);
  const auto bwd = check_equidistance(s, fol, src, dst, Direction::backward, o);
  CHECK(fwd.pass);
  CHECK(bwd.pass);
  CHECK(fwd.spread <= 1e-3 * fwd.mean);
  CHECK(fwd.mean == doctest::Approx(std::numbers::pi / 6.0).epsilon(1e-7));
  CHECK(bwd.mean == doctest::Approx(std::numbers::pi / 6.0).epsilon(1e-7));
}

TEST_CASE("forward and backward distances differ across a constant wind") {
  const auto fol = make_foliation("horizontal-lines");
  const Scene s = make("euclidean-ball", "constant", 0, 0, {0.0, 0.5});
  EquidistanceOptions o;
  o.samples = 5;
  const auto fwd = check_equidistance(s, fol, vec({0.0, 0.0}), vec({0.0, 1.0}), Direction::forward, o);
  const auto bwd = check_equidistance(s, fol, vec({0.0, 0.0}), vec({0.0, 1.0}), Direction::backward, o);
  CHECK(fwd.pass);
  CHECK(bwd.pass);
  CHECK(fwd.mean == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
  CHECK(bwd.mean == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("homothetic transformations send plaques to plaques") {
  const Scene s = swirl();
  const auto fol = make_foliation("concentric-circles");
  const auto plaque = fol.leaf_through(vec({1.0, 0.0}));
  std::vector<Vec> images;
  for (int i = 0; i < 20; ++i) {
    const double a = 2.0 * std::numbers::pi * (i + 0.5) / 20.0;
    const Point x{0, vec({1.6 * std::cos(a), 1.6 * std::sin(a)})};
    images.push_back(homothetic_transform(s, plaque, x, 0.5).x);
  }
  CHECK(fol.spread(images) <= 1e-5);

  const Point x{0, vec({1.2, 0.9})};
  CHECK((homothetic_transform(s, plaque, x, 1.0).x - x.x).norm() < 1e-8);
  const Point once = homothetic_transform(s, plaque, homothetic_transform(s, plaque, x, 0.6), 0.5);
  const Point both = homothetic_transform(s, plaque, x, 0.3);
  CHECK((once.x - both.x).norm() <= 1e-5);
  const Point past = homothetic_transform(s, plaque, x, 0.5, Direction::backward);
  const Point future = homothetic_transform(s, plaque, x, 0.5);
  CHECK(std::abs(fol.invariant(past.x)[0] - fol.invariant(future.x)[0]) < 1e-5);
  CHECK(std::abs(fol.invariant(future.x)[0] - 1.25) < 1e-5);
  CHECK_THROWS_AS(homothetic_transform(s, plaque, x, 0.0), DomainError);
}

TEST_CASE("wind tangency to strata") {
  const auto lat = make_foliation("latitudes");
  CHECK(check_wind_tangency(make("sphere2", "killing", 0.3), lat.minimal_strata).pass());
  const auto axial = make_foliation("axial-circles");
  CHECK(check_wind_tangency(make("cylinder-r3", "constant", 0, 0, {0.0, 0.0, 0.4}), axial.minimal_strata).pass());
  const Report off = check_wind_tangency(make("cylinder-r3", "constant", 0, 0, {0.3, 0.0, 0.4}), axial.minimal_strata);
  CHECK_FALSE(off.pass());
  CHECK(off.worst("wind-tangency") == doctest::Approx(0.3).epsilon(1e-8));
}

TEST_CASE("Randers-Minkowski lemmas") {
  MinkowskiLemmaOptions o;
  o.leaves = 3;
  o.finsler = quick_finsler();
  const auto axial = make_foliation("axial-circles");
  const Report r = check_minkowski_lemmas(make("cylinder-r3", "constant", 0, 0, {0.0, 0.0, 0.4}), axial, o);
  CHECK(r.pass());
  CHECK(r.worst("stratum-containment") <= 1e-10);
  CHECK(r.worst("leaf-plane") <= 1e-6);
  CHECK(check_minkowski_lemmas(make("cylinder-r3", "none"), axial, o).pass());
  CHECK_THROWS_AS(check_minkowski_lemmas(make("sphere2", "killing", 0.3), make_foliation("latitudes"), o),
                  PreconditionError);
}

TEST_CASE("reduction to the Riemannian foliation") {
  Theorem1Options o;
  o.finsler = quick_finsler();
  o.equidistance.samples = 6;
  o.flow_leaves = 2;
  o.leaf_pairs = {{vec({0.8, 0.0}), vec({1.3, 0.0})}};
  CHECK(check_theorem1(swirl(), make_foliation("concentric-circles"), o).pass());

  const Report bad =
      check_theorem1(make("euclidean-ball", "constant", 0, 0, {0.3, 0.0}), make_foliation("concentric-circles"), o);
  CHECK(bad.precondition_failed);
  CHECK_FALSE(bad.pass());

  o.leaf_pairs = {{vec({std::sqrt(0.75), 0.0, 0.5}), vec({1.0, 0.0, 0.0})}};
  CHECK(check_theorem1(make("sphere2", "killing", 0.3), make_foliation("latitudes"), o).pass());
}

TEST_CASE("equifocal latitudes collapse at the pole") {
  EquifocalOptions o;
  o.samples = 8;
  o.times = {0.3, 0.7};
  o.focal_time = std::numbers::pi / 3.0;
  o.endpoint.tol = geodesic::ShootingOptions::tight_tolerances();
  const auto res = check_equifocal(make("sphere2", "killing", 0.3), make_foliation("latitudes"),
                                   vec({std::sqrt(0.75), 0.0, 0.5}), o);
  CHECK(res.report.pass());
  CHECK(std::abs(res.sigma) < 1e-8);
  bool saw_focal = false;
  for (const auto& t : res.times) {
    if (!t.focal) {
      CHECK(t.min_rank == t.max_rank);
      continue;
    }
    saw_focal = true;
    CHECK(t.point_spread < 1e-6);
    CHECK(t.max_rank == 0);
  }
  CHECK(saw_focal);
}

TEST_CASE("equifocal identity with a homothetic wind") {
  EquifocalOptions o;
  o.samples = 6;
  o.times = {0.5, 1.0};
  o.endpoint.tol = geodesic::ShootingOptions::tight_tolerances();
  const auto res = check_equifocal(make("euclidean-ball", "radial", 0.0, -0.2), make_foliation("concentric-circles"),
                                   vec({0.6, 0.0}), o);
  CHECK(res.report.pass());
  CHECK(res.sigma == doctest::Approx(0.4).epsilon(1e-6));
  for (const auto& t : res.times) {
    CHECK(t.identity_error < 1e-4);
    CHECK(t.s == doctest::Approx(-(2.0 / -0.4) * (std::exp(0.4 * t.t / 2.0) - 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("blow-up of the slice metric") {
  BlowupOptions o;
  o.lambdas = {1.0, 0.25, 1.0 / 16, 1.0 / 64};
  o.directions = 4;
  const auto circles = make_foliation("concentric-circles");
  const Scene s = swirl();
  const auto res = blowup_metric_check(s, circles, Point{0, vec({1.0, 0.0})}, o);
  CHECK(res.report.pass());
  CHECK(res.monotone);
  for (std::size_t i = 1; i < res.differences.size(); ++i)
    CHECK(res.differences[i] <= res.differences[i - 1] + o.noise);
  CHECK(res.differences.back() <= 1e-3);

  const auto flat = blowup_metric_check(make("euclidean-ball", "constant", 0, 0, {0.5, 0.0}),
                                        make_foliation("horizontal-lines"), Point{0, Vec::Zero(2)}, o);
  CHECK(flat.report.pass());
  for (double d : flat.differences) CHECK(d < 1e-8);

  const Scene slice = slice_scene(s, circles, Point{0, vec({1.0, 0.0})}, 0.5);
  CHECK(slice.dim() == 1);
}
