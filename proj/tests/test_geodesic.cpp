#include "zermelo/geodesic.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace zermelo;
using namespace zermelo::geodesic;
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

Scene plane() { return make("euclidean-ball", "constant", 0, 0, {0.5, 0.0}); }

numkit::Tolerances tight() { return ShootingOptions::tight_tolerances(); }

manifold::SubmanifoldPatch circle(double r) {
  manifold::SubmanifoldPatch p;
  p.dim = 1;
  p.param = [r](const Vec& t) { return vec({r * std::cos(t[0]), r * std::sin(t[0])}); };
  p.lower = vec({0.0});
  p.upper = vec({2.0 * std::numbers::pi});
  p.periodic = true;
  return p;
}

manifold::SubmanifoldPatch segment(const Vec& origin, const Vec& dir, double half) {
  manifold::SubmanifoldPatch p;
  p.dim = 1;
  p.param = [origin, dir](const Vec& t) { return Vec(origin + t[0] * dir); };
  p.lower = vec({-half});
  p.upper = vec({half});
  return p;
}

}  // namespace

TEST_CASE("geodesics of a Randers-Minkowski plane are straight lines") {
  const Scene s = plane();
  std::mt19937_64 rng(1);
  for (int k = 0; k < 5; ++k) {
    const Point p{0, 0.5 * testing::gaussian(2, rng)};
    const Vec v = 0.5 * testing::gaussian(2, rng);
    CHECK((exp_map(s, p, v, tight()).x - (p.x + v)).norm() < 1e-8);
    const auto path = geodesic_ivp(s, p, v, 1.0, tight());
    CHECK(path.residual() < 1e-5);
  }
  const Point p{0, vec({0.2, 0.1})};
  CHECK((exp_map(s, p, Vec::Zero(2)).x - p.x).norm() == 0.0);
}

TEST_CASE("great circles of the round sphere") {
  const Scene s = make("sphere2", "none");
  const Vec X = vec({1.0, 0.0, 0.0}), V = vec({0.0, 0.6, 0.8});
  const Point p = s.locate(X);
  const Vec v = s.from_ambient_vector(p, V);
  const double T = std::numbers::pi / 2.0;
  const auto path = geodesic_ivp(s, p, v, T, tight());
  for (double t : {0.3, 0.9, T}) {
    const Vec expected = std::cos(t) * X + std::sin(t) * V;
    CHECK((s.ambient(path.at(t).point) - expected).norm() < 1e-6);
  }
  for (double t : {0.0, 0.5, 1.0, T}) CHECK(std::abs(path.speed(t) - 1.0) < 1e-6);
  CHECK(path.residual() < 1e-5);
}

TEST_CASE("unit speed is conserved with wind") {
  const Scene s = make("sphere2", "killing", 0.3);
  const Point p = s.locate(vec({0.6, 0.0, 0.8}));
  Vec v = vec({0.3, -1.0});
  v /= s.norm_at(p)(v);
  const auto path = geodesic_ivp(s, p, v, 1.5, tight());
  for (const auto& sample : path.samples()) CHECK(std::abs(path.speed(sample.t) - 1.0) < 1e-6);
}

TEST_CASE("arc-length reparametrisation") {
  CHECK(arc_reparam(0.0, 1.0) == 1.0);
  for (double sigma : {-1.0, 0.0, 0.4, 2.0}) CHECK(arc_reparam(sigma, 0.0) == 0.0);
  CHECK(arc_reparam(2.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
  CHECK(arc_reparam(1e-12, 1.3) == doctest::Approx(1.3).epsilon(1e-11));
  CHECK(arc_reparam(-1e-12, 1.3) == doctest::Approx(1.3).epsilon(1e-11));
  const ArcReparam s{0.4};
  double prev = -1.0;
  for (int i = 0; i <= 20; ++i) {
    const double t = 0.2 * i;
    CHECK(s(t) > prev);
    prev = s(t);
    CHECK(s.derivative(t) == doctest::Approx(std::exp(-0.2 * t)).epsilon(1e-14));
  }
}

TEST_CASE("navigation construction") {
  // Without wind it is the h-geodesic itself.
  const Scene round = make("sphere2", "none");
  const Point p = round.locate(vec({0.6, 0.0, 0.8}));
  Vec v = vec({0.2, 0.9});
  v /= round.norm_at(p)(v);
  NavigationOptions o;
  o.tol = tight();
  const auto nav0 = navigation_geodesic(round, p, v, 1.0, o);
  const auto direct0 = geodesic_ivp(round, p, v, 1.0, tight());
  CHECK(nav0.sigma == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(sup_deviation(round, nav0.path, direct0) < 1e-8);

  const Scene s = make("sphere2", "killing", 0.3);
  Vec u = vec({0.2, 0.9});
  u /= s.norm_at(p)(u);
  const auto nav = navigation_geodesic(s, p, u, 1.0, o);
  CHECK((nav.h_velocity + s.wind(p) - u).norm() < 1e-12);
  CHECK((nav.path.start().velocity - u).norm() < 1e-8);
  const auto direct = geodesic_ivp(s, p, u, 1.0, tight());
  CHECK(sup_deviation(s, direct, nav.path) < 1e-4);

  const Scene radial = make("euclidean-ball", "radial", 0.0, -0.2);
  const Point q{0, vec({0.5, 0.3})};
  Vec w = vec({-0.4, 1.0});
  w /= radial.norm_at(q)(w);
  const auto navr = navigation_geodesic(radial, q, w, 1.0, o);
  CHECK(navr.sigma == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(sup_deviation(radial, geodesic_ivp(radial, q, w, 1.0, tight()), navr.path) < 1e-4);

  CHECK_THROWS_AS(navigation_geodesic(s, p, Vec(2.0 * u), 1.0, o), DomainError);
  const Scene swirl = make("euclidean-ball", "rotational", 0.3);
  Vec z = vec({1.0, 0.0});
  z /= swirl.norm_at(q)(z);
  CHECK_THROWS_AS(navigation_geodesic(swirl, q, z, 1.0, o), PreconditionError);
}

TEST_CASE("distances are not symmetric") {
  const Scene s = plane();
  const Point o{0, Vec::Zero(2)}, e{0, vec({1.0, 0.0})};
  CHECK(distance(s, o, e) == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
  CHECK(distance(s, e, o) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(distance(s, o, o) == 0.0);

  const Scene round = make("sphere2", "none");
  const Vec X = vec({1.0, 0.0, 0.0}), Y = vec({0.0, 0.6, 0.8});
  const double angle = std::acos(X.dot(Y));
  CHECK(std::abs(distance(round, round.locate(X), round.locate(Y)) - angle) < 1e-6);
}

TEST_CASE("sampled triangle inequality") {
  const Scene s = make("euclidean-ball", "rotational", 0.3);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  auto point = [&] { return Point{0, vec({u(rng), u(rng)})}; };
  for (int k = 0; k < 100; ++k) {
    const Point p = point(), q = point(), r = point();
    const double pq = distance(s, p, q), qr = distance(s, q, r), pr = distance(s, p, r);
    CHECK(pr <= pq + qr + 1e-6);
    if ((p.x - q.x).norm() > 1e-3) CHECK(pq > 0.0);
  }
}

TEST_CASE("distance to a patch") {
  const Scene flat = make("euclidean-ball", "none");
  const auto d = distance_to_patch(flat, circle(1.0), Point{0, vec({0.0, 2.0})}, Direction::forward);
  CHECK(d.distance == doctest::Approx(1.0).epsilon(1e-8));
  CHECK((d.foot.x - vec({0.0, 1.0})).norm() < 1e-6);
  CHECK(d.cone_residual < 1e-7);

  // A wall across the wind: leaving it with the wind and returning against it.
  const Scene s = plane();
  const auto wall = segment(Vec::Zero(2), vec({0.0, 1.0}), 1.0);
  const Point x{0, vec({1.0, 0.0})};
  const auto fwd = distance_to_patch(s, wall, x, Direction::forward);
  const auto bwd = distance_to_patch(s, wall, x, Direction::backward);
  CHECK(fwd.distance == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
  CHECK(bwd.distance == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(fwd.cone_residual < 1e-7);
  CHECK(bwd.cone_residual < 1e-7);
}

TEST_CASE("forward distance is the backward distance of the reverse problem") {
  const Scene s = make("euclidean-ball", "rotational", 0.3);
  const auto leaf = circle(1.0);
  std::vector<double> fwd, rev;
  for (int i = 0; i < 8; ++i) {
    const double a = 2.0 * std::numbers::pi * (i + 0.5) / 8.0;
    const Point x{0, vec({2.0 * std::cos(a), 2.0 * std::sin(a)})};
    fwd.push_back(distance_to_patch(s, leaf, x, Direction::forward).distance);
    rev.push_back(distance_to_patch(s.reversed(), leaf, x, Direction::backward).distance);
  }
  for (std::size_t i = 0; i < fwd.size(); ++i) {
    CHECK(std::abs(fwd[i] - rev[i]) < 1e-8);
    CHECK(std::abs(fwd[i] - fwd[0]) < 1e-4);
    CHECK(std::abs(rev[i] - rev[0]) < 1e-4);
  }
}

TEST_CASE("endpoint maps") {
  const Scene round = make("sphere2", "none");
  const double z = 0.5, r = std::sqrt(0.75);
  manifold::SubmanifoldPatch lat;
  lat.dim = 1;
  lat.param = [=](const Vec& t) { return vec({r * std::cos(t[0]), r * std::sin(t[0]), z}); };
  lat.lower = vec({0.0});
  lat.upper = vec({2.0 * std::numbers::pi});
  lat.periodic = true;
  std::vector<Vec> params;
  for (int i = 0; i < 6; ++i) params.push_back(vec({0.3 + i}));

  const auto id = endpoint_map(round, lat, [](const Vec&, const Point& p) { return Vec(Vec::Zero(2)); },
                               params);
  for (std::size_t i = 0; i < id.size(); ++i) {
    CHECK((id[i].image_ambient - lat.param(params[i])).norm() < 1e-12);
    CHECK(id[i].rank == 1);
  }

  // Unit normal pointing to the north pole, scaled by the polar distance pi/3 or by 0.4.
  auto toward_pole = [&](double length) {
    return [&round, length](const Vec&, const Point& p) {
      const Vec X = round.ambient(p);
      const Vec n = (vec({0.0, 0.0, 1.0}) - X[2] * X).normalized();
      return Vec(length * round.from_ambient_vector(p, n));
    };
  };
  const auto focal = endpoint_map(round, lat, toward_pole(std::numbers::pi / 3.0), params);
  for (const auto& e : focal) {
    CHECK((e.image_ambient - vec({0.0, 0.0, 1.0})).norm() < 1e-6);
    CHECK(e.rank == 0);
  }
  const auto regular = endpoint_map(round, lat, toward_pole(0.4), params);
  for (const auto& e : regular) {
    CHECK(e.image_ambient[2] == doctest::Approx(std::cos(std::numbers::pi / 3.0 - 0.4)).epsilon(1e-8));
    CHECK(e.rank == 1);
  }
}

TEST_CASE("path export") {
  const Scene s = plane();
  const auto path = geodesic_ivp(s, Point{0, Vec::Zero(2)}, vec({0.5, 0.2}), 1.0);
  std::ostringstream os;
  write_path_csv(os, path, "demo", true);
  const std::string text = os.str();
  CHECK(text.rfind("path,t,X1,X2,V1,V2,speed,residual\n", 0) == 0);
  CHECK(text.find("\ndemo,") != std::string::npos);
}
