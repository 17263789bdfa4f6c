#include "zermelo/numkit.hpp"
#include "zermelo/randers.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace zermelo;
using namespace zermelo::numkit;

using testing::plane_norm;
using testing::vec;

TEST_CASE("central differences are exact on low-degree polynomials") {
  auto sq = [](const Vec& x) { return x[0] * x[0]; };
  const Mat g = fd_derivative(sq, vec({3.0}), 1);
  CHECK(g(0, 0) == doctest::Approx(6.0).epsilon(1e-8));

  auto prod = [](const Vec& x) { return x[0] * x[1]; };
  const Mat h = fd_derivative(prod, vec({1.0, 2.0}), 2);
  CHECK(std::abs(h(0, 0)) < 1e-6);
  CHECK(std::abs(h(1, 1)) < 1e-6);
  CHECK(std::abs(h(0, 1) - 1.0) < 1e-6);
  CHECK(h(0, 1) == h(1, 0));

  auto quad = [](const Vec& x) { return 2.0 * x[0] * x[0] - 3.0 * x[0] * x[1] + 0.5 * x[1] * x[1] + x[0]; };
  const Mat hq = fd_hessian(quad, vec({0.3, -1.2}), 1e-4);
  CHECK(std::abs(hq(0, 0) - 4.0) < 1e-6);
  CHECK(std::abs(hq(0, 1) + 3.0) < 1e-6);
  CHECK(std::abs(hq(1, 1) - 1.0) < 1e-6);
}

TEST_CASE("fd Hessian of Z^2/2 reproduces the closed-form fundamental tensor") {
  const randers::RandersData rd =
      randers::zermelo_to_randers(randers::ZermeloData(Mat::Identity(2, 2), vec({0.5, 0.0})));
  auto energy = [](const Vec& v) { return 0.5 * plane_norm(v) * plane_norm(v); };
  const Vec v = vec({1.0, 0.0});
  const Mat fd = fd_derivative(energy, v, 2);
  const Mat closed = randers::randers_fundamental_tensor(rd, v);
  CHECK((fd - closed).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("non-finite values inside the stencil name the point") {
  auto f = [](const Vec& x) { return std::log(x[0]); };
  try {
    fd_gradient(f, vec({1e-6}), 1e-5);
    FAIL("expected EvaluationError");
  } catch (const EvaluationError& e) {
    CHECK(e.point()[0] < 0.0);
  }
}

TEST_CASE("tolerances are validated") {
  Tolerances t;
  CHECK_NOTHROW(t.validate());
  t.fd_step = 0.0;
  CHECK_THROWS_AS(t.validate(), DomainError);
  t.fd_step = 1e-200;
  CHECK_THROWS_AS(t.validate(), DomainError);
  t = Tolerances{};
  t.ode_rel_tol = -1.0;
  CHECK_THROWS_AS(t.validate(), DomainError);
}

TEST_CASE("Dormand-Prince on linear systems") {
  auto grow = [](double, const Vec& y) { return Vec(y); };
  const Trajectory tr = integrate_ivp(grow, vec({1.0}), 0.0, 1.0);
  CHECK(std::abs(tr.final_state()[0] - std::exp(1.0)) < 1e-8);
  for (double t : {0.1, 0.37, 0.5, 0.93})
    CHECK(std::abs(tr.at(t)[0] - std::exp(t)) < 1e-8);

  auto rot = [](double, const Vec& y) { return vec({-y[1], y[0]}); };
  const Trajectory r = integrate_ivp(rot, vec({1.0, 0.0}), 0.0, std::numbers::pi);
  CHECK((r.final_state() - vec({-1.0, 0.0})).norm() < 1e-7);
  CHECK(std::abs(r.at(std::numbers::pi / 2)[1] - 1.0) < 1e-7);

  // Backward in time.
  const Trajectory b = integrate_ivp(grow, vec({1.0}), 0.0, -1.0);
  CHECK(std::abs(b.final_state()[0] - std::exp(-1.0)) < 1e-8);
}

TEST_CASE("integration stops on request and reports blow-up") {
  OdeOptions o;
  o.stop = [](double, const Vec& y) { return y[0] > 2.0; };
  const Trajectory tr = integrate_ivp([](double, const Vec& y) { return Vec(y); }, vec({1.0}), 0.0, 5.0, o);
  CHECK(tr.stopped_early());
  CHECK(tr.t_end() < 5.0);
  CHECK(tr.final_state()[0] > 2.0);

  auto blowup = [](double, const Vec& y) { return Vec(y.cwiseProduct(y)); };
  CHECK_THROWS_AS(integrate_ivp(blowup, vec({1.0}), 0.0, 2.0), StiffnessError);
}

TEST_CASE("minimize_smooth") {
  const Vec target = vec({1.0, 2.0});
  auto f = [&](const Vec& x) { return (x - target).squaredNorm(); };
  const auto r = minimize_smooth(f, Vec::Zero(2));
  CHECK((r.argmin - target).norm() < 1e-7);
  CHECK(r.value < 1e-12);

  // Constrained: min |v|^2 on v1 = 1.
  AffineConstraint c{Mat(vec({1.0, 0.0}).transpose()), vec({1.0})};
  const auto rc = minimize_smooth([](const Vec& v) { return v.squaredNorm(); }, vec({1.0, 5.0}), c);
  CHECK((rc.argmin - vec({1.0, 0.0})).norm() < 1e-7);
  CHECK(rc.value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("minimize_smooth finds the fiber minimum of the wind plane norm") {
  auto f = [](const Vec& x) { return plane_norm(vec({1.0, x[0]})); };
  double best = std::numeric_limits<double>::infinity(), at = 0.0;
  for (int i = -20000; i <= 20000; ++i) {
    const double x = 2.0 * i / 20000.0;
    const double fx = f(vec({x}));
    if (fx < best) best = fx, at = x;
  }
  const auto r = minimize_smooth(f, vec({0.7}));
  CHECK(std::abs(r.value - best) < 1e-8);
  CHECK(std::abs(r.argmin[0] - at) < 1e-3);
  CHECK(r.value == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("minimize_smooth is deterministic and reports its best iterate") {
  auto f = [](const Vec& x) { return std::cosh(x[0] - 1.0) + std::pow(x[1] + 0.5, 4) + x[0] * x[1]; };
  const auto a = minimize_smooth(f, vec({3.0, 2.0}));
  const auto b = minimize_smooth(f, vec({3.0, 2.0}));
  CHECK(a.argmin == b.argmin);
  CHECK(a.iterations == b.iterations);

  MinimizeOptions o;
  o.max_iterations = 1;
  try {
    minimize_smooth(f, vec({3.0, 2.0}), {}, o);
    FAIL("expected NonConvergenceError");
  } catch (const NonConvergenceError& e) {
    CHECK(e.best_iterate().size() == 2);
    CHECK(f(e.best_iterate()) < f(vec({3.0, 2.0})));
  }
}

TEST_CASE("Levenberg-Marquardt intersects a circle and a line") {
  auto r = [](const Vec& x) { return vec({x.squaredNorm() - 1.0, x[1] - 0.5 * x[0]}); };
  const auto res = solve_least_squares(r, vec({2.0, 0.3}));
  CHECK(res.converged);
  const double x = 1.0 / std::sqrt(1.25);
  CHECK((res.x - vec({x, 0.5 * x})).norm() < 1e-8);
}

TEST_CASE("numeric rank") {
  CHECK(numeric_rank(Mat::Identity(3, 3), 1e-6) == 3);
  const Vec u = vec({1.0, -2.0, 0.5});
  CHECK(numeric_rank(u * u.transpose(), 1e-6) == 1);
  CHECK(numeric_rank(Mat::Zero(3, 2), 1e-6) == 0);
  Mat d = Mat::Zero(3, 3);
  d.diagonal() = vec({1.0, 1e-3, 1e-9});
  CHECK(numeric_rank(d, 1e-6) == 2);
  CHECK(numeric_rank(d, 1e-6, 1e4) == 1);
}

TEST_CASE("parallel_map keeps results in index order") {
  const auto out = parallel_map<int>(257, [](std::size_t i) { return static_cast<int>(i * i); });
  REQUIRE(out.size() == 257);
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i * i));
  CHECK(thread_count() >= 1);
}
