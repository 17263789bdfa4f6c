#pragma once

#include "zermelo/cli/config.hpp"
#include "zermelo/report.hpp"

#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace zermelo::cli {

struct SuiteOutput {
  Report report;
  /// Extra lines for summary.txt.
  std::vector<std::string> notes;
  /// (file name, contents) of plot-ready data files.
  std::vector<std::pair<std::string, std::string>> files;
};

/// Runs the configured suite.  Library errors propagate.
SuiteOutput run_suite(const ExperimentConfig& config);

/// Runs the suite and writes report.csv, summary.txt and the data files into
/// `out_dir`.  Returns 0 iff every row passes, 1 otherwise.
int run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                   std::ostream& log);

}  // namespace zermelo::cli
