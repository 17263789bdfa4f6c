#pragma once

#include "zermelo/cli/catalog.hpp"
#include "zermelo/numkit.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace zermelo::cli {

/// Malformed config or command line; the message carries file and line where known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Probe {
  Vec point;
  Vec vector;
  double expected = 0.0;
};

/// Suite parameters; unset fields take the suite default.
struct SuiteOptions {
  std::optional<int> trials;
  std::optional<int> samples;
  std::optional<int> directions;
  std::optional<double> length;
  std::optional<std::vector<double>> times;
  std::optional<std::vector<double>> lambdas;
  std::vector<Probe> probes;
};

struct ExperimentConfig {
  std::filesystem::path source;
  std::string suite;
  std::uint64_t seed = 1;
  Preset scene;
  /// Applied on top of the default and the tight boundary-value tolerances.
  std::vector<std::pair<std::string, double>> tol_overrides;
  std::filesystem::path output;
  SuiteOptions options;
};

const std::vector<std::string>& suite_names();
bool known_suite(const std::string& name);

/// Parses a YAML experiment file.  Unknown keys and unknown suite names are errors.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& source = {});

/// Applies "KEY=VAL" (fd_step, ode_rel, ode_abs, opt_grad, rank_sv_cutoff).
void apply_tolerance_override(ExperimentConfig& config, const std::string& assignment);
/// `tol` with every recorded override applied.
numkit::Tolerances with_overrides(numkit::Tolerances tol,
                                  const std::vector<std::pair<std::string, double>>& overrides);

}  // namespace zermelo::cli
