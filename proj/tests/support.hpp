#pragma once

#include "zermelo/common.hpp"

#include <cmath>
#include <initializer_list>
#include <random>

namespace testing {

using zermelo::Mat;
using zermelo::Vec;

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline Vec gaussian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

inline Mat random_spd(int n, std::mt19937_64& rng) {
  Mat m(n, n);
  for (int j = 0; j < n; ++j) m.col(j) = 0.5 * gaussian(n, rng);
  return m * m.transpose() + 0.5 * Mat::Identity(n, n);
}

/// Random vector of q-length r.
inline Vec with_length(const Mat& q, double r, std::mt19937_64& rng) {
  const Vec d = gaussian(static_cast<int>(q.rows()), rng);
  return r * d / std::sqrt(d.dot(q * d));
}

/// Z for h = I, W = (1/2, 0), from |v/Z - W| = 1 solved as a quadratic in 1/Z.
inline double plane_norm(const Vec& v) {
  const double a = v.squaredNorm(), b = -v[0], c = 0.25 - 1.0;
  return 2.0 * a / (-b + std::sqrt(b * b - 4.0 * a * c));
}

/// Z for Zermelo data (h, W), again as the positive root in 1/Z.
inline double zermelo_norm(const Mat& h, const Vec& w, const Vec& v) {
  const double a = v.dot(h * v), b = -2.0 * v.dot(h * w), c = w.dot(h * w) - 1.0;
  return 2.0 * a / (-b + std::sqrt(b * b - 4.0 * a * c));
}

}  // namespace testing
