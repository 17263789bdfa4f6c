#pragma once

#include "zermelo/common.hpp"
#include "zermelo/minkowski.hpp"

#include <functional>
#include <string>
#include <vector>

/// Exact Randers/Zermelo algebra on a single tangent space.
namespace zermelo::randers {

/// Constructors reject h(W,W) > 1 - margin (resp. |beta|_a^2 > 1 - margin).
inline constexpr double kStrictnessMargin = 1e-10;

/// Riemannian metric h plus wind W with h(W,W) < 1.
class ZermeloData {
 public:
  ZermeloData(Mat h, Vec wind);

  const Mat& h() const { return h_; }
  const Vec& wind() const { return wind_; }
  int dim() const { return static_cast<int>(h_.rows()); }
  /// 1 - h(W,W).
  double lambda() const { return lambda_; }

 private:
  Mat h_;
  Vec wind_;
  double lambda_;
};

/// Z = sqrt(a(v,v)) + beta(v) with |beta|_a < 1.
class RandersData {
 public:
  RandersData(Mat a, Vec beta);

  const Mat& a() const { return a_; }
  /// Coefficients of the one-form beta.
  const Vec& beta() const { return beta_; }
  /// a-dual vector of beta.
  const Vec& beta_sharp() const { return beta_sharp_; }
  int dim() const { return static_cast<int>(a_.rows()); }
  /// 1 - a(beta_sharp, beta_sharp).
  double mu() const { return mu_; }
  double alpha(const Vec& v) const;

 private:
  Mat a_;
  Vec beta_;
  Vec beta_sharp_;
  double mu_;
};

RandersData zermelo_to_randers(const ZermeloData& zd);
ZermeloData randers_to_zermelo(const RandersData& rd);

/// Z(v) = alpha(v) + beta(v).
double randers_norm(const RandersData& rd, const Vec& v);

/// Z(v) as the positive root of h(v/Z - W, v/Z - W) = 1 (independent route).
double randers_norm(const ZermeloData& zd, const Vec& v);

/// Closed-form fundamental tensor; throws DomainError at v = 0.
Mat randers_fundamental_tensor(const RandersData& rd, const Vec& v);

/// The two closed forms of g_v(v,u).
struct GvvInner {
  /// Z(v) (a(u,v)/alpha(v) + beta(u)).
  double from_randers = 0.0;
  /// Z(v)/(mu alpha(v)) h(v - Z(v) W, u).
  double from_zermelo = 0.0;
};

GvvInner gvv_inner(const RandersData& rd, const Vec& v, const Vec& u);

/// g_v(v,.) as a coefficient vector, Z(v) (a v / alpha(v) + beta).
Vec gvv_covector(const RandersData& rd, const Vec& v);

/// The same covector from Zermelo data, Z (h v - Z h W) / (lambda Z + h(v,W)).
Vec gvv_covector(const ZermeloData& zd, const Vec& v);

minkowski::MinkowskiNorm as_norm(const RandersData& rd);
minkowski::MinkowskiNorm as_norm(const ZermeloData& zd);

// ─── Isometry criterion ──────────────────────────────────────────────────────

struct SampledDiffeomorphism {
  std::function<Vec(const Vec&)> map;
  std::function<Mat(const Vec&)> jacobian;
};

using ZermeloField = std::function<ZermeloData(const Vec&)>;

struct IsometryPointReport {
  Vec point;
  double metric_mismatch = 0.0;  // max |psi^* h2 - h1|
  double wind_mismatch = 0.0;    // |dpsi W1 - W2|
  double norm_mismatch = 0.0;    // max |Z2(dpsi v) - Z1(v)| over sampled v
  bool pass = false;
};

struct IsometryReport {
  std::vector<IsometryPointReport> points;
  bool pass = false;
  std::string summary() const;
};

/// Checks psi^* h2 = h1 and dpsi(W1) = W2 (and Z2(dpsi v) = Z1(v) on sampled v)
/// at each sample point.
IsometryReport verify_isometry(const SampledDiffeomorphism& psi, const ZermeloField& zd1,
                               const ZermeloField& zd2, const std::vector<Vec>& points,
                               double tol = 1e-8);

}  // namespace zermelo::randers
