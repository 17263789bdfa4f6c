#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace zermelo {

/// One measured quantity of a verification trial.
struct ReportRow {
  std::string check;
  std::string scene;
  int trial = 0;
  std::string item;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string detail;
};

/// Rows of a verification run; passes iff it has rows and all of them pass.
class Report {
 public:
  Report() = default;
  explicit Report(std::string title) : title_(std::move(title)) {}

  /// Adds a row that passes iff value <= threshold (NaN fails).
  void add(const std::string& check, const std::string& scene, int trial, const std::string& item,
           double value, double threshold, const std::string& detail = {});
  /// Adds a row with an explicit verdict.
  void add_flag(const std::string& check, const std::string& scene, int trial,
                const std::string& item, bool pass, double value, const std::string& detail = {});
  void append(const Report& other);

  bool pass() const;
  bool empty() const { return rows_.empty(); }
  const std::vector<ReportRow>& rows() const { return rows_; }
  const std::string& title() const { return title_; }
  /// Largest value among rows of the given check (0 if none).
  double worst(const std::string& check) const;
  bool check_passes(const std::string& check) const;
  /// The first failing row, formatted; empty if none.
  std::string first_failure() const;

  /// One line per check: rows, failures, worst value and threshold.
  std::string summary() const;
  void write_csv(std::ostream& os, bool header = true) const;

  /// Set when a gating precondition failed and the main check was skipped.
  bool precondition_failed = false;

 private:
  std::string title_;
  std::vector<ReportRow> rows_;
};

/// Fixed-format scientific rendering used in every CSV output.
std::string format_number(double x);

/// Quotes a CSV field if needed.
std::string csv_field(const std::string& s);

}  // namespace zermelo
