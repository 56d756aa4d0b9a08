#pragma once

// Config-driven experiment runner behind the `fluxlattice` CLI.
//
// A config is one JSON object:
//
//   { "experiment": "response-sweep", "seed": 1, "output_dir": "out",
//     "network": {...}, "probe": {...}, "sweep": {...} }
//
// Every experiment declares the blocks it reads. Unknown keys and blocks an
// experiment does not use are rejected; missing keys take their defaults.
// The fully resolved config is written to manifest.json next to the CSVs,
// and a manifest is itself accepted as a config.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluxlattice/mackey_glass.hpp"
#include "fluxlattice/network.hpp"
#include "fluxlattice/qrc.hpp"

namespace fluxlattice {

using Json = nlohmann::ordered_json;

struct ExperimentInfo {
  std::string name;
  std::string description;
  std::vector<std::string> blocks;
};

const std::vector<ExperimentInfo>& experiment_catalog();

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  unsigned threads = 0;
  /// Every block the experiment reads, with defaults filled in.
  Json resolved;
};

/// Validates keys and types and fills defaults. Throws ConfigError.
ExperimentConfig parse_config(const Json& config);

/// Reads a config (or manifest) file. JSON syntax errors become ConfigError
/// with the line and column.
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunOverrides {
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

void apply_overrides(ExperimentConfig& cfg, const RunOverrides& overrides);

/// Builds every typed object the experiment needs without running it.
void validate_experiment(const ExperimentConfig& cfg);

/// Runs the experiment, writes its CSVs and manifest.json, returns the manifest.
Json run_experiment(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Typed views of config blocks, shared with the test suites.

struct NetworkParams {
  TopologyKind topology = TopologyKind::linear;
  int n_qubits = 5;
  double coupling_energy = -0.2;
  QubitParams base{1.0, 0.2, 0.52};
  /// Spread of the linearly spaced tunneling energies.
  double delta_dispersion = 0.0;
  /// Explicit tunneling energies; overrides delta and delta_dispersion.
  std::vector<double> delta_profile;
  /// 1-based rank of each qubit's tunneling energy in ascending order.
  std::vector<int> delta_order;
  double disorder_amplitude = 0.0;
  /// "auto" (cross: site 5, otherwise uniform), "uniform", "site" or "custom".
  std::string drive = "auto";
  int drive_site = 5;
  std::vector<double> drive_weights;
};

NetworkParams network_params_from_json(const Json& block);
/// Disorder, if any, is drawn with `disorder_seed`.
NetworkSpec build_network(const NetworkParams& params, std::uint64_t disorder_seed);

ReservoirConfig reservoir_from_json(const Json& block);
MGConfig mackey_glass_from_json(const Json& block);

struct QrcSweepPlan {
  NetworkParams network;
  ReservoirConfig reservoir;
  MGConfig mackey_glass;
  PredictionTask task;
  std::size_t max_offset = 500;
  std::vector<double> dispersions;
  std::vector<int> reservoir_sizes;
  std::vector<TopologyKind> topologies;
  std::vector<std::uint64_t> seeds;
};

struct QrcSweepRow {
  double dispersion = 0.0;
  int l_r = 0;
  TopologyKind topology = TopologyKind::linear;
  std::uint64_t seed = 0;
  std::size_t start = 0;
  int vpt = 0;
};

/// Normalized Mackey-Glass series long enough for every seeded window.
std::vector<double> qrc_series(const QrcSweepPlan& plan);

/// One row per (dispersion, l_r, topology, seed) in that nesting order.
/// Features of the shared training inputs are measured once per network.
std::vector<QrcSweepRow> run_qrc_sweep(const QrcSweepPlan& plan, unsigned threads);

/// Median of integer values (mean of the middle pair for even counts).
double median(std::vector<int> values);

}  // namespace fluxlattice
