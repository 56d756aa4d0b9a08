// fluxlattice: run flux-qubit network experiments from JSON configs.
//
//   fluxlattice run <config> [--output-dir D] [--seed S] [--threads T]
//   fluxlattice validate <config>
//   fluxlattice list-experiments
//
// Exit codes: 0 success, 1 other failure, 2 config error, 3 numerical failure.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fluxlattice/error.hpp"
#include "fluxlattice/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace fluxlattice;
  CLI::App app{"Flux-qubit network simulator"};
  app.set_version_flag("--version", FLUXLATTICE_VERSION);
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  std::uint64_t seed = 0;
  unsigned threads = 0;

  auto* run = app.add_subcommand("run", "Run an experiment and write CSV outputs and a manifest");
  run->add_option("config", config_path, "Config or manifest JSON file")->required();
  auto* out_opt = run->add_option("--output-dir", output_dir, "Output directory");
  auto* seed_opt = run->add_option("--seed", seed, "Override the config seed");
  auto* threads_opt = run->add_option("--threads", threads, "Worker threads (0 = all cores)");

  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("config", config_path, "Config or manifest JSON file")->required();

  auto* list = app.add_subcommand("list-experiments", "List experiment names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*list) {
      for (const auto& info : experiment_catalog()) {
        std::cout << info.name << "  " << info.description << "\n";
      }
      return 0;
    }
    ExperimentConfig cfg = load_config(config_path);
    if (*validate) {
      validate_experiment(cfg);
      std::cout << "ok: " << cfg.experiment << "\n";
      return 0;
    }
    RunOverrides overrides;
    if (*out_opt) overrides.output_dir = output_dir;
    if (*seed_opt) overrides.seed = seed;
    if (*threads_opt) overrides.threads = threads;
    apply_overrides(cfg, overrides);
    const Json manifest = run_experiment(cfg);
    for (const auto& file : manifest.at("outputs")) {
      std::cout << (cfg.output_dir / file.at("file").get<std::string>()).string() << "  "
                << file.at("rows").get<std::size_t>() << " rows\n";
    }
    std::cout << (cfg.output_dir / "manifest.json").string() << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
