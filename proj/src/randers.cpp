#include "zermelo/randers.hpp"

#include <cmath>
#include <sstream>

namespace zermelo::randers {

namespace {

void check_spd(const Mat& m, const char* name) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw DomainError(std::string(name) + " must be a non-empty square matrix");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
    throw DomainError(std::string(name) + " must be symmetric");
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success)
    throw DomainError(std::string(name) + " must be positive definite");
}

}  // namespace

ZermeloData::ZermeloData(Mat h, Vec wind) : h_(std::move(h)), wind_(std::move(wind)) {
  check_spd(h_, "h");
  if (wind_.size() != h_.rows()) throw DomainError("wind dimension does not match h");
  const double hww = wind_.dot(h_ * wind_);
  if (!(hww <= 1.0 - kStrictnessMargin))
    throw InvalidWindError("wind violates h(W,W) < 1 (h(W,W) = " + std::to_string(hww) + ")");
  lambda_ = 1.0 - hww;
}

RandersData::RandersData(Mat a, Vec beta) : a_(std::move(a)), beta_(std::move(beta)) {
  check_spd(a_, "a");
  if (beta_.size() != a_.rows()) throw DomainError("beta dimension does not match a");
  beta_sharp_ = a_.ldlt().solve(beta_);
  const double b2 = beta_.dot(beta_sharp_);
  if (!(b2 <= 1.0 - kStrictnessMargin))
    throw InvalidFormError("one-form violates |beta|_a < 1 (|beta|^2 = " + std::to_string(b2) +
                           ")");
  mu_ = 1.0 - b2;
}

double RandersData::alpha(const Vec& v) const { return std::sqrt(std::max(0.0, v.dot(a_ * v))); }

RandersData zermelo_to_randers(const ZermeloData& zd) {
  const double lam = zd.lambda();
  const Vec hw = zd.h() * zd.wind();  // h(., W)
  Mat a = (lam * zd.h() + hw * hw.transpose()) / (lam * lam);
  a = 0.5 * (a + a.transpose());
  return RandersData(std::move(a), -hw / lam);
}

ZermeloData randers_to_zermelo(const RandersData& rd) {
  const double mu = rd.mu();
  const Vec ab = rd.a() * rd.beta_sharp();  // a(beta_sharp, .) = beta
  Mat h = mu * (rd.a() - ab * ab.transpose());
  h = 0.5 * (h + h.transpose());
  return ZermeloData(std::move(h), -rd.beta_sharp() / mu);
}

double randers_norm(const RandersData& rd, const Vec& v) {
  return rd.alpha(v) + rd.beta().dot(v);
}

double randers_norm(const ZermeloData& zd, const Vec& v) {
  // lambda Z^2 + 2 h(v,W) Z - h(v,v) = 0, positive root.
  const double hvw = v.dot(zd.h() * zd.wind());
  const double hvv = v.dot(zd.h() * v);
  if (hvv == 0.0) return 0.0;
  const double disc = std::sqrt(hvw * hvw + zd.lambda() * hvv);
  // Rationalised to avoid cancellation when h(v,W) > 0.
  return hvw <= 0.0 ? (disc - hvw) / zd.lambda() : hvv / (disc + hvw);
}

Mat randers_fundamental_tensor(const RandersData& rd, const Vec& v) {
  if (v.size() == 0 || v.norm() == 0.0)
    throw DomainError("fundamental tensor undefined at the zero section");
  const double al = rd.alpha(v);
  const double z = al + rd.beta().dot(v);
  const Vec av = rd.a() * v;
  const Vec l = av / al + rd.beta();
  Mat g = (z / al) * (rd.a() - av * av.transpose() / (al * al)) + l * l.transpose();
  return 0.5 * (g + g.transpose());
}

Vec gvv_covector(const RandersData& rd, const Vec& v) {
  const double al = rd.alpha(v);
  const double z = al + rd.beta().dot(v);
  return z * ((rd.a() * v) / al + rd.beta());
}

Vec gvv_covector(const ZermeloData& zd, const Vec& v) {
  // Implicit differentiation of lambda Z^2 + 2 h(v,W) Z - h(v,v) = 0.
  const double z = randers_norm(zd, v);
  const Vec hv = zd.h() * v;
  const Vec hw = zd.h() * zd.wind();
  return z * (hv - z * hw) / (zd.lambda() * z + v.dot(hw));
}

GvvInner gvv_inner(const RandersData& rd, const Vec& v, const Vec& u) {
  if (v.size() == 0 || v.norm() == 0.0) throw DomainError("g_v(v,.) undefined at v = 0");
  const ZermeloData zd = randers_to_zermelo(rd);
  const double al = rd.alpha(v);
  const double z = al + rd.beta().dot(v);
  GvvInner out;
  out.from_randers = z * (u.dot(rd.a() * v) / al + rd.beta().dot(u));
  out.from_zermelo = z / (rd.mu() * al) * (v - z * zd.wind()).dot(zd.h() * u);
  return out;
}

minkowski::MinkowskiNorm as_norm(const RandersData& rd) {
  minkowski::MinkowskiNorm n;
  n.dim = rd.dim();
  n.eval = [rd](const Vec& v) { return randers_norm(rd, v); };
  n.closed_form_tensor = [rd](const Vec& v) { return randers_fundamental_tensor(rd, v); };
  return n;
}

minkowski::MinkowskiNorm as_norm(const ZermeloData& zd) { return as_norm(zermelo_to_randers(zd)); }

std::string IsometryReport::summary() const {
  std::ostringstream os;
  std::size_t failures = 0;
  double worst_metric = 0.0, worst_wind = 0.0, worst_norm = 0.0;
  for (const auto& p : points) {
    failures += p.pass ? 0 : 1;
    worst_metric = std::max(worst_metric, p.metric_mismatch);
    worst_wind = std::max(worst_wind, p.wind_mismatch);
    worst_norm = std::max(worst_norm, p.norm_mismatch);
  }
  os << (pass ? "PASS" : "FAIL") << ": " << failures << "/" << points.size()
     << " points failing; max metric mismatch " << worst_metric << ", max wind mismatch "
     << worst_wind << ", max norm mismatch " << worst_norm;
  return os.str();
}

IsometryReport verify_isometry(const SampledDiffeomorphism& psi, const ZermeloField& zd1,
                               const ZermeloField& zd2, const std::vector<Vec>& points,
                               double tol) {
  IsometryReport report;
  report.pass = true;
  for (const Vec& p : points) {
    IsometryPointReport pr;
    pr.point = p;
    const Mat jac = psi.jacobian(p);
    const Vec q = psi.map(p);
    const ZermeloData z1 = zd1(p);
    const ZermeloData z2 = zd2(q);
    pr.metric_mismatch = (jac.transpose() * z2.h() * jac - z1.h()).cwiseAbs().maxCoeff();
    pr.wind_mismatch = (jac * z1.wind() - z2.wind()).norm();
    const int n = z1.dim();
    for (int k = 0; k < 2 * n; ++k) {
      Vec v = Vec::Zero(n);
      v[k % n] = k < n ? 1.0 : -1.0;
      if (n > 1) v[(k + 1) % n] += 0.5;
      pr.norm_mismatch =
          std::max(pr.norm_mismatch, std::abs(randers_norm(z2, jac * v) - randers_norm(z1, v)));
    }
    pr.pass = pr.metric_mismatch <= tol && pr.wind_mismatch <= tol && pr.norm_mismatch <= tol;
    report.pass = report.pass && pr.pass;
    report.points.push_back(std::move(pr));
  }
  return report;
}

}  // namespace zermelo::randers
