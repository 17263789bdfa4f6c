#include "zermelo/manifold.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace zermelo;
using namespace zermelo::manifold;
using testing::vec;

namespace {

Scene killing_sphere(double eps) {
  return round_sphere(2, 1.0, [eps](const Vec& X) { return Vec(eps * vec({-X[1], X[0], 0.0})); },
                      "killing");
}

Vec random_unit(int n, std::mt19937_64& rng) { return testing::gaussian(n, rng).normalized(); }

Mat rotation_z(double angle) {
  Mat r = Mat::Identity(3, 3);
  r(0, 0) = std::cos(angle);
  r(0, 1) = -std::sin(angle);
  r(1, 0) = std::sin(angle);
  r(1, 1) = std::cos(angle);
  return r;
}

}  // namespace

TEST_CASE("stereographic charts of the round sphere") {
  const Scene s = round_sphere(2, 1.0, nullptr, "round");
  CHECK(s.dim() == 2);
  CHECK(s.ambient_dim() == 3);
  CHECK(s.chart_count() == 2);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 50; ++k) {
    const Vec X = random_unit(3, rng);
    const Point p = s.locate(X);
    CHECK((s.ambient(p) - X).norm() < 1e-12);
    // Conformal factor 4 / (1 + |x|^2)^2 of stereographic coordinates.
    const double f = 4.0 / std::pow(1.0 + p.x.squaredNorm(), 2);
    CHECK((s.metric(p) - f * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("metric and wind transform tensorially between charts") {
  const Scene s = killing_sphere(0.3);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 50; ++k) {
    Vec X = random_unit(3, rng);
    X[2] *= 0.5;  // stay in the overlap
    X.normalize();
    const Point a = s.to_chart(s.locate(X), 0);
    const Point b = s.to_chart(a, 1);
    CHECK((s.ambient(a) - s.ambient(b)).norm() < 1e-12);
    const Vec v = testing::gaussian(2, rng);
    const Vec vb = s.transfer(a, v, 1);
    CHECK(std::abs(v.dot(s.metric(a) * v) - vb.dot(s.metric(b) * vb)) < 1e-8 * v.squaredNorm());
    CHECK((s.to_ambient_vector(a, s.wind(a)) - s.to_ambient_vector(b, s.wind(b))).norm() < 1e-8);
    CHECK((s.to_ambient_vector(a, s.wind(a)) - 0.3 * vec({-X[1], X[0], 0.0})).norm() < 1e-10);
  }
}

TEST_CASE("flows of simple winds") {
  const Scene still = euclidean_ball(2, 3.0, nullptr, "still");
  const Point p{0, vec({0.4, -0.7})};
  CHECK((flow(still, p, 1.3).x - p.x).norm() == 0.0);

  const Scene drift = euclidean_ball(2, 3.0, [](const Vec&) { return vec({0.5, 0.0}); }, "drift");
  CHECK((flow(drift, p, 1.3).x - (p.x + vec({0.65, 0.0}))).norm() < 1e-10);
  CHECK_THROWS_AS(flow(drift, Point{0, vec({2.5, 0.0})}, 4.0), DomainExitError);
  try {
    flow(drift, Point{0, vec({2.5, 0.0})}, 4.0);
  } catch (const DomainExitError& e) {
    CHECK(e.exit_time() == doctest::Approx(1.0).epsilon(0.05));
  }

  const double eps = 0.3;
  const Scene s = killing_sphere(eps);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) {
    const Vec X = random_unit(3, rng);
    const Point q = s.locate(X);
    for (double t : {0.5, 2.0, 7.0}) {
      numkit::Tolerances tol;
      tol.ode_rel_tol = 1e-11;
      tol.ode_abs_tol = 1e-13;
      CHECK((s.ambient(flow(s, q, t, tol)) - rotation_z(eps * t) * X).norm() < 1e-8);
    }
  }
}

TEST_CASE("flow group law and Killing invariance of |W|_h") {
  const Scene s = killing_sphere(0.4);
  const Point p = s.locate(vec({0.6, 0.0, 0.8}));
  const Point a = flow(s, flow(s, p, 0.7), 1.1);
  const Point b = flow(s, p, 1.8);
  CHECK((s.ambient(a) - s.ambient(b)).norm() < 1e-8);
  auto hlen = [&](const Point& q) { return std::sqrt(s.wind(q).dot(s.metric(q) * s.wind(q))); };
  CHECK(std::abs(hlen(b) - hlen(p)) < 1e-8);

  const auto tangent = flow_with_tangent(s, p, Mat::Identity(2, 2), 1.8);
  const Mat h0 = s.metric(p), h1 = s.metric(tangent.p);
  CHECK((tangent.vectors.transpose() * h1 * tangent.vectors - h0).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("homothety constants") {
  const Scene s = killing_sphere(0.3);
  std::vector<Point> pts;
  std::mt19937_64 rng(4);
  for (int k = 0; k < 8; ++k) pts.push_back(s.locate(random_unit(3, rng)));
  const auto k0 = homothety_constant(s, pts);
  CHECK(std::abs(k0.sigma) < 1e-6);
  CHECK(k0.residual < 1e-6);

  for (double c : {-0.2, 0.15}) {
    const Scene r = euclidean_ball(2, 3.0, [c](const Vec& X) { return Vec(c * X); }, "radial");
    std::vector<Point> q;
    for (int k = 0; k < 8; ++k) q.push_back(Point{0, testing::gaussian(2, rng)});
    const auto fit = homothety_constant(r, q);
    CHECK(fit.sigma == doctest::Approx(-2.0 * c).epsilon(1e-8));
    CHECK(fit.residual < 1e-6);
  }

  const Scene poly = euclidean_ball(
      2, 3.0, [](const Vec& X) { return vec({0.1 * X[0] * X[0], 0.05 * X[0] * X[1] - 0.1 * X[1]}); }, "poly");
  std::vector<Point> q;
  for (int k = 0; k < 8; ++k) q.push_back(Point{0, testing::gaussian(2, rng)});
  CHECK(homothety_constant(poly, q).residual > 1e-3);
}

TEST_CASE("per-point Randers data") {
  const Scene s = build_scene(SceneSpec{"euclidean-ball", 2, {}, {"constant", 0, 0, {0.5, 0.0}}, "plane"});
  const Point o{0, Vec::Zero(2)};
  const auto rd = s.randers_at(o);
  CHECK((rd.a() - Mat(vec({16.0 / 9.0, 4.0 / 3.0}).asDiagonal())).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(s.norm_at(o)(vec({1.0, 0.0})) == doctest::Approx(2.0 / 3.0));
  CHECK(s.reversed().norm_at(o)(vec({1.0, 0.0})) == doctest::Approx(2.0));
  CHECK(s.without_wind().norm_at(o)(vec({1.0, 0.0})) == doctest::Approx(1.0));

  const Scene strong = euclidean_ball(2, 3.0, [](const Vec&) { return vec({1.2, 0.0}); }, "strong");
  CHECK_THROWS_AS(strong.zermelo_at(o), InvalidWindError);
}

TEST_CASE("builtin scenes and winds") {
  for (const auto& t : scene_templates()) {
    SceneSpec spec;
    spec.template_name = t;
    const Scene s = build_scene(spec);
    CHECK(s.chart_count() >= 1);
  }
  SceneSpec hopf;
  hopf.template_name = "sphere3-hopf";
  hopf.wind = {"hopf-vertical", 0.2, 0.0, {}};
  const Scene s = build_scene(hopf);
  CHECK(s.dim() == 3);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 10; ++k) {
    const Vec X = random_unit(4, rng);
    const Point p = s.locate(X);
    const Vec w = s.to_ambient_vector(p, s.wind(p));
    CHECK(std::abs(w.dot(X)) < 1e-10);
    CHECK(w.norm() == doctest::Approx(0.2).epsilon(1e-10));
  }
  SceneSpec bad;
  bad.template_name = "torus";
  CHECK_THROWS(build_scene(bad));
}

TEST_CASE("patches") {
  const Scene s = round_sphere(2, 1.0, nullptr, "round");
  SubmanifoldPatch circle;
  circle.dim = 1;
  circle.param = [](const Vec& t) { return vec({0.6 * std::cos(t[0]), 0.6 * std::sin(t[0]), 0.8}); };
  circle.lower = vec({0.0});
  circle.upper = vec({2.0 * std::numbers::pi});
  circle.periodic = true;
  CHECK(circle.contains(vec({10.0})));
  const Point p = patch_point(s, circle, vec({0.3}));
  CHECK((s.ambient(p) - circle.param(vec({0.3}))).norm() < 1e-12);
  const Mat f = patch_frame(s, circle, vec({0.3}), p);
  const Vec amb = s.to_ambient_vector(p, f.col(0));
  CHECK((amb - vec({-0.6 * std::sin(0.3), 0.6 * std::cos(0.3), 0.0})).norm() < 1e-6);

  const auto pt = point_patch(vec({0.0, 0.0, 1.0}));
  CHECK(pt.dim == 0);
  CHECK((s.ambient(patch_point(s, pt, Vec(0))) - vec({0.0, 0.0, 1.0})).norm() < 1e-12);
}
