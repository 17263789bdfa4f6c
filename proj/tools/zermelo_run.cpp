#include "zermelo/cli/catalog.hpp"
#include "zermelo/cli/config.hpp"
#include "zermelo/cli/suites.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == '/' || c == ' ') c = '_';
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Runs Randers/Zermelo verification suites on builtin scenes."};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::vector<std::string> tolerances;

  auto* run = app.add_subcommand("run", "run the suite described by an experiment file");
  run->add_option("config", config_path, "experiment file (YAML)")->required();
  run->add_option("--seed", seed, "override the experiment seed");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--tol", tolerances,
                  "tolerance override KEY=VAL (fd_step, ode_rel, ode_abs, opt_grad, rank_sv_cutoff)");

  auto* list = app.add_subcommand("list-scenes", "print the scene catalog");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*list) {
    std::cout << zermelo::cli::catalog_text();
    return 0;
  }

  try {
    auto config = zermelo::cli::load_config(config_path);
    if (seed) config.seed = *seed;
    for (const auto& t : tolerances) zermelo::cli::apply_tolerance_override(config, t);
    std::filesystem::path out = out_dir;
    if (out.empty()) out = config.output;
    if (out.empty()) out = std::filesystem::path("out") / (config.suite + "-" + sanitize(config.scene.name));
    return zermelo::cli::run_experiment(config, out, std::cout);
  } catch (const zermelo::cli::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const zermelo::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
