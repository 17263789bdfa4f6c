#include "zermelo/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace zermelo {

void Report::add(const std::string& check, const std::string& scene, int trial,
                 const std::string& item, double value, double threshold,
                 const std::string& detail) {
  rows_.push_back({check, scene, trial, item, value, threshold,
                   std::isfinite(value) && value <= threshold, detail});
}

void Report::add_flag(const std::string& check, const std::string& scene, int trial,
                      const std::string& item, bool pass, double value,
                      const std::string& detail) {
  rows_.push_back({check, scene, trial, item, value, 0.0, pass, detail});
}

void Report::append(const Report& other) {
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
  precondition_failed = precondition_failed || other.precondition_failed;
}

bool Report::pass() const {
  return !rows_.empty() && !precondition_failed &&
         std::all_of(rows_.begin(), rows_.end(), [](const ReportRow& r) { return r.pass; });
}

double Report::worst(const std::string& check) const {
  double w = 0.0;
  for (const auto& r : rows_)
    if (r.check == check) w = std::isnan(r.value) ? r.value : std::max(w, r.value);
  return w;
}

bool Report::check_passes(const std::string& check) const {
  bool any = false;
  for (const auto& r : rows_) {
    if (r.check != check) continue;
    any = true;
    if (!r.pass) return false;
  }
  return any;
}

std::string Report::first_failure() const {
  for (const auto& r : rows_) {
    if (r.pass) continue;
    std::ostringstream os;
    os << r.check << " [" << r.scene << "] trial " << r.trial << " " << r.item << ": value "
       << format_number(r.value) << " threshold " << format_number(r.threshold);
    if (!r.detail.empty()) os << " (" << r.detail << ")";
    return os.str();
  }
  return {};
}

std::string Report::summary() const {
  struct Agg {
    int rows = 0, failures = 0;
    double worst = 0.0, threshold = 0.0;
  };
  std::vector<std::string> order;
  std::map<std::string, Agg> agg;
  for (const auto& r : rows_) {
    if (!agg.count(r.check)) order.push_back(r.check);
    Agg& a = agg[r.check];
    ++a.rows;
    a.failures += r.pass ? 0 : 1;
    if (std::isnan(r.value) || r.value > a.worst) a.worst = r.value;
    a.threshold = std::max(a.threshold, r.threshold);
  }
  std::ostringstream os;
  if (!title_.empty()) os << title_ << ": " << (pass() ? "PASS" : "FAIL") << "\n";
  if (precondition_failed) os << "  precondition failed; main check not applicable\n";
  for (const auto& name : order) {
    const Agg& a = agg[name];
    os << "  " << name << ": " << (a.failures ? "FAIL" : "PASS") << " (" << a.rows << " rows, "
       << a.failures << " failing, worst " << format_number(a.worst) << ", threshold "
       << format_number(a.threshold) << ")\n";
  }
  return os.str();
}

void Report::write_csv(std::ostream& os, bool header) const {
  if (header) os << "check,scene,trial,item,value,threshold,pass,detail\n";
  for (const auto& r : rows_) {
    os << csv_field(r.check) << ',' << csv_field(r.scene) << ',' << r.trial << ','
       << csv_field(r.item) << ',' << format_number(r.value) << ',' << format_number(r.threshold)
       << ',' << (r.pass ? "PASS" : "FAIL") << ',' << csv_field(r.detail) << '\n';
  }
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10e", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace zermelo
