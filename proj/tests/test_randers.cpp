#include "zermelo/randers.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace zermelo;
using namespace zermelo::randers;
using testing::vec;

namespace {

ZermeloData plane() { return ZermeloData(Mat::Identity(2, 2), vec({0.5, 0.0})); }

ZermeloData random_zermelo(int n, std::mt19937_64& rng, double max_wind = 0.9) {
  const Mat h = testing::random_spd(n, rng);
  std::uniform_real_distribution<double> u(0.0, max_wind);
  return ZermeloData(h, testing::with_length(h, u(rng), rng));
}

RandersData random_randers(int n, std::mt19937_64& rng) {
  const Mat a = testing::random_spd(n, rng);
  std::uniform_real_distribution<double> u(0.0, 0.9);
  return RandersData(a, a * testing::with_length(a, u(rng), rng));
}

double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

// g_v of Z = alpha + beta written out from the second derivatives of (alpha + beta)^2 / 2.
Mat tensor_oracle(const Mat& a, const Vec& beta, const Vec& v) {
  const double alpha = std::sqrt(v.dot(a * v));
  const double z = alpha + beta.dot(v);
  const Vec l = a * v / alpha;
  return (z / alpha) * (a - l * l.transpose()) + (l + beta) * (l + beta).transpose();
}

}  // namespace

TEST_CASE("Zermelo to Randers on the wind plane") {
  const auto rd = zermelo_to_randers(plane());
  CHECK(plane().lambda() == doctest::Approx(0.75));
  CHECK(max_abs(rd.a() - Mat(vec({16.0 / 9.0, 4.0 / 3.0}).asDiagonal())) < 1e-14);
  CHECK((rd.beta() - vec({-2.0 / 3.0, 0.0})).norm() < 1e-14);
  const auto back = randers_to_zermelo(rd);
  CHECK(max_abs(back.h() - Mat::Identity(2, 2)) < 1e-12);
  CHECK((back.wind() - vec({0.5, 0.0})).norm() < 1e-12);
}

TEST_CASE("worked norm values of the wind plane") {
  const auto rd = zermelo_to_randers(plane());
  CHECK(randers_norm(rd, vec({1.0, 0.0})) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(randers_norm(rd, vec({-1.0, 0.0})) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(randers_norm(plane(), vec({1.0, 0.0})) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(randers_norm(plane(), vec({-1.0, 0.0})) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(randers_norm(rd, Vec::Zero(2)) == 0.0);

  // One-dimensional data (1, 1/2) gives the same values on +-1.
  const ZermeloData line(Mat::Identity(1, 1), vec({0.5}));
  CHECK(randers_norm(zermelo_to_randers(line), vec({1.0})) == doctest::Approx(2.0 / 3.0));
  CHECK(randers_norm(zermelo_to_randers(line), vec({-1.0})) == doctest::Approx(2.0));
}

TEST_CASE("trivial conversions") {
  std::mt19937_64 rng(1);
  const Mat h = testing::random_spd(3, rng);
  const auto rd = zermelo_to_randers(ZermeloData(h, Vec::Zero(3)));
  CHECK(max_abs(rd.a() - h) == 0.0);
  CHECK(rd.beta().norm() == 0.0);
  const auto zd = randers_to_zermelo(RandersData(h, Vec::Zero(3)));
  CHECK(max_abs(zd.h() - h) == 0.0);
  CHECK(zd.wind().norm() == 0.0);
  const Vec v = testing::gaussian(3, rng);
  CHECK(randers_norm(zd, v) == doctest::Approx(std::sqrt(v.dot(h * v))).epsilon(1e-14));
}

TEST_CASE("round trips on random data in dimensions 2 to 5") {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 1000; ++k) {
    const int n = 2 + k % 4;
    const auto z0 = random_zermelo(n, rng);
    const auto z1 = randers_to_zermelo(zermelo_to_randers(z0));
    CHECK(max_abs(z1.h() - z0.h()) < 1e-12);
    CHECK((z1.wind() - z0.wind()).cwiseAbs().maxCoeff() < 1e-12);
    const auto r0 = random_randers(n, rng);
    const auto r1 = zermelo_to_randers(randers_to_zermelo(r0));
    CHECK(max_abs(r1.a() - r0.a()) < 1e-12);
    CHECK((r1.beta() - r0.beta()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("indicatrix is the translated h-sphere") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 100; ++k) {
    const auto zd = random_zermelo(2 + k % 3, rng);
    const Vec u = testing::with_length(zd.h(), 1.0, rng);
    const auto rd = zermelo_to_randers(zd);
    CHECK(std::abs(randers_norm(rd, Vec(u + zd.wind())) - 1.0) < 1e-10);
    CHECK(std::abs(randers_norm(zd, Vec(u + zd.wind())) - 1.0) < 1e-10);
    const Vec v = testing::gaussian(zd.dim(), rng);
    const double z = randers_norm(rd, v);
    CHECK(z > 0.0);
    CHECK(std::abs(z - testing::zermelo_norm(zd.h(), zd.wind(), v)) < 1e-10 * z);
    const Vec d = v / z - zd.wind();
    CHECK(std::abs(d.dot(zd.h() * d) - 1.0) < 1e-10);
  }
}

TEST_CASE("invalid data is rejected") {
  CHECK_THROWS_AS(ZermeloData(Mat::Identity(2, 2), vec({1.0, 0.0})), InvalidWindError);
  CHECK_THROWS_AS(ZermeloData(Mat::Identity(2, 2), vec({0.8, 0.7})), InvalidWindError);
  CHECK_THROWS_AS(RandersData(Mat::Identity(2, 2), vec({0.0, -1.0})), InvalidFormError);
  CHECK_NOTHROW(ZermeloData(Mat::Identity(2, 2), vec({0.99999, 0.0})));
}

TEST_CASE("closed-form fundamental tensor") {
  std::mt19937_64 rng(4);
  const Mat a = testing::random_spd(3, rng);
  const Vec v = testing::gaussian(3, rng);
  CHECK(max_abs(randers_fundamental_tensor(RandersData(a, Vec::Zero(3)), v) - a) < 1e-14);
  CHECK_THROWS_AS(randers_fundamental_tensor(RandersData(a, Vec::Zero(3)), Vec::Zero(3)), DomainError);

  for (int k = 0; k < 100; ++k) {
    const auto rd = random_randers(2 + k % 3, rng);
    const Vec w = testing::gaussian(rd.dim(), rng);
    const Mat g = randers_fundamental_tensor(rd, w);
    CHECK(max_abs(g - tensor_oracle(rd.a(), rd.beta(), w)) < 1e-10 * max_abs(g));
    const double z = randers_norm(rd, w);
    CHECK(std::abs(w.dot(g * w) - z * z) < 1e-10 * std::max(1.0, z * z));
  }
}

TEST_CASE("the two forms of g_v(v, .) agree") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 200; ++k) {
    const auto zd = random_zermelo(2 + k % 3, rng);
    const auto rd = zermelo_to_randers(zd);
    const Vec v = testing::gaussian(zd.dim(), rng), u = testing::gaussian(zd.dim(), rng);
    const auto in = gvv_inner(rd, v, u);
    CHECK(std::abs(in.from_randers - in.from_zermelo) < 1e-10 * std::max(1.0, std::abs(in.from_randers)));
    CHECK(std::abs(in.from_randers - v.dot(randers_fundamental_tensor(rd, v) * u)) <
          1e-10 * std::max(1.0, std::abs(in.from_randers)));
    CHECK((gvv_covector(rd, v) - gvv_covector(zd, v)).norm() < 1e-10 * gvv_covector(rd, v).norm());
  }
}

TEST_CASE("isometry criterion") {
  const Mat rot = (Mat(2, 2) << 0.0, -1.0, 1.0, 0.0).finished();
  SampledDiffeomorphism identity{[](const Vec& x) { return x; },
                                 [](const Vec&) { return Mat(Mat::Identity(2, 2)); }};
  SampledDiffeomorphism quarter{[rot](const Vec& x) { return Vec(rot * x); },
                                [rot](const Vec&) { return rot; }};
  const std::vector<Vec> pts{vec({0.0, 0.0}), vec({0.5, -0.3}), vec({-1.0, 0.8})};

  ZermeloField constant = [](const Vec&) { return plane(); };
  CHECK(verify_isometry(identity, constant, constant, pts).pass);

  // Rotation-equivariant wind 0.3 (-y, x) / (1 + |x|^2) is carried to itself.
  ZermeloField swirl = [](const Vec& x) {
    return ZermeloData(Mat::Identity(2, 2), vec({-x[1], x[0]}) * 0.3 / (1.0 + x.squaredNorm()));
  };
  CHECK(verify_isometry(quarter, swirl, swirl, pts).pass);

  const auto bad = verify_isometry(quarter, constant, constant, pts);
  CHECK_FALSE(bad.pass);
  for (const auto& p : bad.points) {
    CHECK(p.wind_mismatch == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(p.metric_mismatch < 1e-12);
  }
}
