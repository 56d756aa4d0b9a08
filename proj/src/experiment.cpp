#include "fluxlattice/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <set>

#include "fluxlattice/csv.hpp"
#include "fluxlattice/dynamics.hpp"
#include "fluxlattice/error.hpp"
#include "fluxlattice/parallel.hpp"
#include "fluxlattice/response.hpp"
#include "fluxlattice/spectra.hpp"

#ifndef FLUXLATTICE_VERSION
#define FLUXLATTICE_VERSION "unknown"
#endif

namespace fluxlattice {

// ---------------------------------------------------------------------------
// Catalog and block defaults

const std::vector<ExperimentInfo>& experiment_catalog() {
  static const std::vector<ExperimentInfo> catalog = {
      {"spectrum", "eigenvalues of H0 with near-degeneracy groups", {"network", "spectrum"}},
      {"currents", "loop currents of selected eigenstates", {"network", "currents"}},
      {"correlations", "connected current correlations C(ref, i)", {"network", "correlations"}},
      {"static-flux", "ground-state flux versus external bias for several topologies",
       {"network", "flux"}},
      {"response-sweep", "susceptibility versus drive frequency with a peak table",
       {"network", "probe", "sweep"}},
      {"response-map", "susceptibility on a flux-frequency grid", {"network", "probe", "map"}},
      {"disorder-response", "frequency sweeps over seeded disorder realizations",
       {"network", "probe", "sweep", "disorder"}},
      {"driven-scan", "<sz_i> after driven evolution versus drive frequency",
       {"network", "drive"}},
      {"qrc-run", "one reservoir-computing forecast of the Mackey-Glass series",
       {"network", "reservoir", "mackey_glass", "task"}},
      {"qrc-sweep", "valid prediction times over dispersion, l_r, topology and seed",
       {"network", "reservoir", "mackey_glass", "task", "qrc_sweep"}},
      {"mackey-glass", "normalized Mackey-Glass series", {"mackey_glass"}},
  };
  return catalog;
}

namespace {

const ExperimentInfo& find_experiment(const std::string& name) {
  for (const auto& info : experiment_catalog()) {
    if (info.name == name) return info;
  }
  std::string known;
  for (const auto& info : experiment_catalog()) known += (known.empty() ? "" : ", ") + info.name;
  throw ConfigError("experiment", "unknown experiment '" + name + "' (known: " + known + ")");
}

bool is_qrc(const std::string& experiment) {
  return experiment == "qrc-run" || experiment == "qrc-sweep";
}

Json block_defaults(const std::string& block, const std::string& experiment) {
  if (block == "network") {
    Json j = {{"topology", "linear"},
              {"n_qubits", 5},
              {"coupling_energy", -0.2},
              {"i_s", 1.0},
              {"delta", 0.2},
              {"f", 0.52},
              {"delta_dispersion", 0.0},
              {"delta_profile", Json::array()},
              {"delta_order", Json::array()},
              {"disorder_amplitude", 0.0},
              {"drive", "auto"},
              {"drive_site", 5},
              {"drive_weights", Json::array()}};
    if (experiment == "disorder-response") {
      j["coupling_energy"] = -1e-6;
      j["disorder_amplitude"] = 0.1;
    }
    if (experiment == "driven-scan" || is_qrc(experiment)) {
      j["f"] = 0.45;
      j["delta_dispersion"] = 0.1;
    }
    if (experiment == "qrc-sweep") j.erase("delta_dispersion");
    if (experiment == "static-flux") j.erase("f");
    return j;
  }
  if (block == "spectrum") return {{"degeneracy_tol", kDefaultDegeneracyTolerance}};
  if (block == "currents") return {{"levels", Json::array({0, 1})}};
  if (block == "correlations") return {{"level", 0}, {"reference", 1}};
  if (block == "flux") {
    return {{"f_min", 0.4},
            {"f_max", 0.6},
            {"points", 201},
            {"topologies", Json::array({"isolated", "linear", "cross"})}};
  }
  if (block == "probe") {
    return {{"eta", kDefaultEta}, {"a_weights", Json::array()}, {"b_weights", Json::array()}};
  }
  if (block == "sweep") {
    return {{"omega_min", 0.0},
            {"omega_max", 0.8},
            {"points", 3201},
            {"prominence", kDefaultPeakProminence}};
  }
  if (block == "map") {
    return {{"f_min", 0.4},   {"f_max", 0.6},      {"f_points", 101},
            {"omega_min", 0.0}, {"omega_max", 0.8}, {"omega_points", 801}};
  }
  if (block == "disorder") return {{"n_seeds", 10}};
  if (block == "drive") {
    return {{"amplitude", 1e-3}, {"omega_min", 0.2}, {"omega_max", 0.6},
            {"points", 81},      {"measure_time", 0.0}, {"step", 0.0}};
  }
  if (block == "reservoir") {
    const ReservoirConfig d;
    Json j = {{"gamma", d.gamma},
              {"n_shift", d.n_shift},
              {"l_r", d.l_r},
              {"n_t", d.n_t},
              {"omega_min", d.omega_min},
              {"omega_max", d.omega_max},
              {"t_max", 0.0},
              {"drive_amplitude", d.drive_amplitude},
              {"washout", d.washout},
              {"bias_slot", "constant"},
              {"include_sigma_x", d.include_sigma_x},
              {"step", d.step}};
    if (experiment == "qrc-sweep") j.erase("l_r");
    return j;
  }
  if (block == "mackey_glass") {
    const MGConfig d;
    Json j = {{"beta", d.beta},
              {"gamma_loss", d.gamma_loss},
              {"tau", d.tau},
              {"n_exp", d.n_exp},
              {"dt_sample", d.dt_sample},
              {"oversample", d.oversample},
              {"history_value", d.history_value},
              {"transient", d.transient},
              {"interpolation", "cubic_hermite"}};
    if (experiment == "mackey-glass") j["n_samples"] = 2000;
    return j;
  }
  if (block == "task") {
    const PredictionTask d;
    return {{"n_train", d.n_train},
            {"horizon", d.horizon},
            {"epsilon", d.epsilon},
            {"max_offset", 500},
            {"stop_at_failure", experiment == "qrc-sweep"}};
  }
  if (block == "qrc_sweep") {
    return {{"dispersions", Json::array({0.0, 0.05, 0.1, 0.15, 0.2})},
            {"l_r", Json::array({200, 400})},
            {"topologies", Json::array({"linear", "cross"})},
            {"n_seeds", 10}};
  }
  throw ConfigError(block, "unknown block");
}

std::string kind_name(const Json& v) {
  if (v.is_boolean()) return "a boolean";
  if (v.is_number_integer()) return "an integer";
  if (v.is_number()) return "a number";
  if (v.is_string()) return "a string";
  if (v.is_array()) return "an array";
  if (v.is_object()) return "an object";
  return "null";
}

bool same_kind(const Json& def, const Json& v) {
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_number_integer()) return v.is_number_integer();
  if (def.is_number()) return v.is_number();
  if (def.is_string()) return v.is_string();
  if (def.is_array()) return v.is_array();
  return false;
}

Json merge_block(const Json& user, const Json& defaults, const std::string& path) {
  if (!user.is_object()) throw ConfigError(path, "must be an object");
  Json out = defaults;
  for (const auto& [key, value] : user.items()) {
    const std::string field = path + "." + key;
    if (!defaults.contains(key)) throw ConfigError(field, "unknown key");
    const Json& def = defaults.at(key);
    if (!same_kind(def, value)) {
      throw ConfigError(field, "expected " + kind_name(def) + ", got " + kind_name(value));
    }
    out[key] = value;
  }
  return out;
}

// Typed accessors; `path` is the block name used in diagnostics.
double num(const Json& b, const std::string& path, const char* key) {
  const double v = b.at(key).get<double>();
  if (!std::isfinite(v)) throw ConfigError(path + "." + key, "must be finite");
  return v;
}

long long integer(const Json& b, const char* key) { return b.at(key).get<long long>(); }

int positive_int(const Json& b, const std::string& path, const char* key, int min = 1) {
  const long long v = integer(b, key);
  if (v < min || v > 100000000) {
    throw ConfigError(path + "." + key, "must be an integer >= " + std::to_string(min));
  }
  return static_cast<int>(v);
}

std::string str(const Json& b, const char* key) { return b.at(key).get<std::string>(); }

template <class T>
std::vector<T> array_of(const Json& b, const std::string& path, const char* key) {
  std::vector<T> out;
  for (const auto& v : b.at(key)) {
    if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(path + "." + key, "entries must be strings");
      out.push_back(v.get<std::string>());
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(path + "." + key, "entries must be integers");
      out.push_back(v.get<T>());
    } else {
      if (!v.is_number() || !std::isfinite(v.get<double>())) {
        throw ConfigError(path + "." + key, "entries must be finite numbers");
      }
      out.push_back(v.get<T>());
    }
  }
  return out;
}

TopologyKind topology_from_name(const std::string& name, const std::string& field) {
  if (name == "linear") return TopologyKind::linear;
  if (name == "cross") return TopologyKind::cross;
  if (name == "isolated") return TopologyKind::isolated;
  throw ConfigError(field, "unknown topology '" + name + "' (linear, cross, isolated)");
}

std::vector<double> checked_grid(double lo, double hi, int points, const std::string& path) {
  if (!(hi > lo)) throw ConfigError(path, "upper bound must exceed lower bound");
  if (points < 2) throw ConfigError(path, "needs at least 2 points");
  return linear_grid(lo, hi, static_cast<std::size_t>(points));
}

std::vector<std::uint64_t> seed_list(std::uint64_t base, int count) {
  std::vector<std::uint64_t> out;
  for (int k = 0; k < count; ++k) out.push_back(base + static_cast<std::uint64_t>(k));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Parsing

ExperimentConfig parse_config(const Json& config) {
  if (!config.is_object()) throw ConfigError("", "config must be a JSON object");
  if (!config.contains("experiment") || !config.at("experiment").is_string()) {
    throw ConfigError("experiment", "required string key is missing");
  }
  ExperimentConfig cfg;
  cfg.experiment = config.at("experiment").get<std::string>();
  const ExperimentInfo& info = find_experiment(cfg.experiment);

  std::set<std::string> all_blocks;
  for (const auto& e : experiment_catalog()) all_blocks.insert(e.blocks.begin(), e.blocks.end());
  for (const auto& [key, value] : config.items()) {
    if (key == "experiment") continue;
    if (key == "seed") {
      if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<long long>() >= 0)) {
        throw ConfigError("seed", "must be a non-negative integer");
      }
      cfg.seed = value.get<std::uint64_t>();
    } else if (key == "output_dir") {
      if (!value.is_string()) throw ConfigError("output_dir", "must be a string");
      cfg.output_dir = value.get<std::string>();
    } else if (key == "threads") {
      if (!value.is_number_integer() || value.get<long long>() < 0) {
        throw ConfigError("threads", "must be a non-negative integer");
      }
      cfg.threads = value.get<unsigned>();
    } else if (all_blocks.count(key)) {
      if (std::find(info.blocks.begin(), info.blocks.end(), key) == info.blocks.end()) {
        throw ConfigError(key, "block is not used by experiment '" + cfg.experiment + "'");
      }
    } else {
      throw ConfigError(key, "unknown key");
    }
  }
  if (cfg.output_dir.empty()) cfg.output_dir = "fluxlattice-out";

  cfg.resolved = Json::object();
  cfg.resolved["experiment"] = cfg.experiment;
  cfg.resolved["seed"] = cfg.seed;
  cfg.resolved["output_dir"] = cfg.output_dir.string();
  for (const auto& block : info.blocks) {
    const Json defaults = block_defaults(block, cfg.experiment);
    cfg.resolved[block] = config.contains(block) ? merge_block(config.at(block), defaults, block)
                                                 : defaults;
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("", path.string() + ": " + e.what());
  }
  if (j.is_object() && j.contains("resolved_config")) {
    return parse_config(j.at("resolved_config"));
  }
  return parse_config(j);
}

void apply_overrides(ExperimentConfig& cfg, const RunOverrides& overrides) {
  if (overrides.output_dir) {
    cfg.output_dir = *overrides.output_dir;
    cfg.resolved["output_dir"] = cfg.output_dir.string();
  }
  if (overrides.seed) {
    cfg.seed = *overrides.seed;
    cfg.resolved["seed"] = cfg.seed;
  }
  if (overrides.threads) cfg.threads = *overrides.threads;
}

// ---------------------------------------------------------------------------
// Typed blocks

NetworkParams network_params_from_json(const Json& b) {
  const std::string p = "network";
  NetworkParams n;
  n.topology = topology_from_name(str(b, "topology"), p + ".topology");
  n.n_qubits = positive_int(b, p, "n_qubits");
  if (n.n_qubits > kMaxQubits) {
    throw ConfigError(p + ".n_qubits", "at most " + std::to_string(kMaxQubits) + " qubits");
  }
  if (n.topology == TopologyKind::cross && n.n_qubits != 5) {
    throw ConfigError(p + ".n_qubits", "the cross topology has exactly 5 qubits");
  }
  if (n.topology == TopologyKind::linear && n.n_qubits < 2) {
    throw ConfigError(p + ".n_qubits", "a linear chain needs at least 2 qubits");
  }
  n.coupling_energy = num(b, p, "coupling_energy");
  if (n.topology != TopologyKind::isolated && !(n.coupling_energy < 0.0)) {
    throw ConfigError(p + ".coupling_energy", "must be negative (M_ij < 0)");
  }
  n.base.i_s = num(b, p, "i_s");
  if (!(n.base.i_s > 0.0)) throw ConfigError(p + ".i_s", "must be positive");
  n.base.delta = num(b, p, "delta");
  if (b.contains("f")) n.base.f = num(b, p, "f");
  if (b.contains("delta_dispersion")) {
    n.delta_dispersion = num(b, p, "delta_dispersion");
    if (!(n.delta_dispersion >= 0.0 && n.delta_dispersion < 1.0)) {
      throw ConfigError(p + ".delta_dispersion", "must lie in [0, 1)");
    }
  }
  n.delta_profile = array_of<double>(b, p, "delta_profile");
  if (!n.delta_profile.empty() && static_cast<int>(n.delta_profile.size()) != n.n_qubits) {
    throw ConfigError(p + ".delta_profile", "needs one entry per qubit");
  }
  n.delta_order = array_of<int>(b, p, "delta_order");
  if (!n.delta_order.empty()) {
    std::vector<int> sorted = n.delta_order;
    std::sort(sorted.begin(), sorted.end());
    for (int k = 0; k < static_cast<int>(sorted.size()); ++k) {
      if (sorted[static_cast<std::size_t>(k)] != k + 1 ||
          static_cast<int>(sorted.size()) != n.n_qubits) {
        throw ConfigError(p + ".delta_order", "must be a permutation of 1..n_qubits");
      }
    }
  }
  n.disorder_amplitude = num(b, p, "disorder_amplitude");
  if (!(n.disorder_amplitude >= 0.0 && n.disorder_amplitude < 1.0)) {
    throw ConfigError(p + ".disorder_amplitude", "must lie in [0, 1)");
  }
  n.drive = str(b, "drive");
  if (n.drive != "auto" && n.drive != "uniform" && n.drive != "site" && n.drive != "custom") {
    throw ConfigError(p + ".drive", "must be auto, uniform, site or custom");
  }
  n.drive_site = positive_int(b, p, "drive_site");
  // Only checked where used; a cross network always has five sites.
  const bool site_drive =
      n.drive == "site" || (n.drive == "auto" && n.topology == TopologyKind::cross);
  if (site_drive && n.drive_site > n.n_qubits) {
    throw ConfigError(p + ".drive_site", "exceeds n_qubits");
  }
  n.drive_weights = array_of<double>(b, p, "drive_weights");
  if (n.drive == "custom" && static_cast<int>(n.drive_weights.size()) != n.n_qubits) {
    throw ConfigError(p + ".drive_weights", "custom drive needs one weight per qubit");
  }
  if (n.drive != "custom" && !n.drive_weights.empty()) {
    throw ConfigError(p + ".drive_weights", "only used with drive = custom");
  }
  return n;
}

NetworkSpec build_network(const NetworkParams& params, std::uint64_t disorder_seed) {
  const int n = params.n_qubits;
  Topology topo = Topology::isolated(n);
  if (params.topology == TopologyKind::linear) {
    topo = Topology::linear(n, params.coupling_energy);
  } else if (params.topology == TopologyKind::cross) {
    topo = Topology::cross(params.coupling_energy);
  }
  NetworkSpec spec = NetworkSpec::uniform(params.base, std::move(topo));
  if (!params.delta_profile.empty()) {
    spec.delta_profile = params.delta_profile;
  } else {
    const auto ascending = inhomogeneous_deltas(params.base.delta, params.delta_dispersion, n);
    if (params.delta_order.empty()) {
      spec.delta_profile = ascending;
    } else {
      for (int i = 0; i < n; ++i) {
        spec.delta_profile[static_cast<std::size_t>(i)] =
            ascending[static_cast<std::size_t>(params.delta_order[static_cast<std::size_t>(i)] - 1)];
      }
    }
  }
  std::string drive = params.drive;
  if (drive == "auto") drive = params.topology == TopologyKind::cross ? "site" : "uniform";
  if (drive == "site") {
    spec.drive_weights = single_site_drive_weights(n, params.drive_site);
  } else if (drive == "custom") {
    spec.drive_weights = params.drive_weights;
  } else {
    spec.drive_weights = uniform_drive_weights(n);
  }
  if (params.disorder_amplitude > 0.0) {
    spec.disorder = sample_disorder(disorder_seed, params.disorder_amplitude, n);
  }
  spec.validate();
  return spec;
}

ReservoirConfig reservoir_from_json(const Json& b) {
  const std::string p = "reservoir";
  ReservoirConfig r;
  r.gamma = num(b, p, "gamma");
  r.n_shift = positive_int(b, p, "n_shift", 0);
  if (b.contains("l_r")) r.l_r = positive_int(b, p, "l_r");
  r.n_t = positive_int(b, p, "n_t", 2);
  r.omega_min = num(b, p, "omega_min");
  r.omega_max = num(b, p, "omega_max");
  const double t_max = num(b, p, "t_max");
  if (t_max < 0.0) throw ConfigError(p + ".t_max", "must be >= 0 (0 selects 2 pi / omega_min)");
  if (t_max > 0.0) {
    r.t_max = t_max;
  } else if (r.omega_min > 0.0) {
    r.t_max = 2.0 * std::numbers::pi / r.omega_min;
  }
  r.drive_amplitude = num(b, p, "drive_amplitude");
  r.washout = positive_int(b, p, "washout", 0);
  const std::string bias = str(b, "bias_slot");
  if (bias == "constant") {
    r.bias_slot = BiasSlot::constant;
  } else if (bias == "input") {
    r.bias_slot = BiasSlot::input;
  } else {
    throw ConfigError(p + ".bias_slot", "must be constant or input");
  }
  r.include_sigma_x = b.at("include_sigma_x").get<bool>();
  r.step = num(b, p, "step");
  if (r.step < 0.0) throw ConfigError(p + ".step", "must be >= 0 (0 selects the default)");
  // Field checks that do not depend on the network size.
  ReservoirConfig probe = r;
  probe.l_r = std::max(r.l_r, probe.feature_length(1));
  probe.validate(1);
  return r;
}

MGConfig mackey_glass_from_json(const Json& b) {
  const std::string p = "mackey_glass";
  MGConfig m;
  m.beta = num(b, p, "beta");
  m.gamma_loss = num(b, p, "gamma_loss");
  m.tau = num(b, p, "tau");
  m.n_exp = num(b, p, "n_exp");
  m.dt_sample = num(b, p, "dt_sample");
  m.oversample = positive_int(b, p, "oversample");
  m.history_value = num(b, p, "history_value");
  m.transient = static_cast<std::size_t>(positive_int(b, p, "transient", 0));
  const std::string interp = str(b, "interpolation");
  if (interp == "cubic_hermite") {
    m.interpolation = DelayInterpolation::cubic_hermite;
  } else if (interp == "linear") {
    m.interpolation = DelayInterpolation::linear;
  } else {
    throw ConfigError(p + ".interpolation", "must be cubic_hermite or linear");
  }
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// QRC sweep

double median(std::vector<int> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  if (values.size() % 2) return values[m];
  return 0.5 * (values[m - 1] + values[m]);
}

std::vector<double> qrc_series(const QrcSweepPlan& plan) {
  const std::size_t n_inputs = static_cast<std::size_t>(plan.reservoir.washout) + plan.task.n_train;
  const std::size_t length = plan.max_offset + n_inputs + 1 + plan.task.horizon;
  const auto raw = integrate_mackey_glass(plan.mackey_glass, length);
  return MinMaxNormalizer::fit(raw).apply(raw);
}

std::vector<QrcSweepRow> run_qrc_sweep(const QrcSweepPlan& plan, unsigned threads) {
  if (plan.dispersions.empty() || plan.reservoir_sizes.empty() || plan.topologies.empty() ||
      plan.seeds.empty()) {
    throw ConfigError("qrc_sweep", "every sweep list must be non-empty");
  }
  const std::vector<double> series = qrc_series(plan);
  const std::size_t n_inputs =
      static_cast<std::size_t>(plan.reservoir.washout) + plan.task.n_train;
  std::vector<std::size_t> starts;
  for (auto seed : plan.seeds) starts.push_back(window_offset(seed, plan.max_offset));
  const std::size_t first = *std::min_element(starts.begin(), starts.end());
  const std::size_t last = *std::max_element(starts.begin(), starts.end()) + n_inputs;

  const std::size_t n_lr = plan.reservoir_sizes.size();
  const std::size_t n_topo = plan.topologies.size();
  const std::size_t n_seed = plan.seeds.size();
  std::vector<QrcSweepRow> rows(plan.dispersions.size() * n_lr * n_topo * n_seed);

  for (std::size_t di = 0; di < plan.dispersions.size(); ++di) {
    for (std::size_t ti = 0; ti < n_topo; ++ti) {
      NetworkParams params = plan.network;
      params.topology = plan.topologies[ti];
      params.delta_dispersion = plan.dispersions[di];
      const NetworkSpec spec = build_network(params, plan.seeds.front());
      std::vector<std::unique_ptr<FeatureMap>> maps;
      for (int l_r : plan.reservoir_sizes) {
        ReservoirConfig rc = plan.reservoir;
        rc.l_r = l_r;
        maps.push_back(std::make_unique<FeatureMap>(spec, rc));
      }
      const auto cache = measure_series(*maps.front(), series, first, last - first + 1, threads);
      const IndexedFeatures indexed = [&](std::size_t idx) { return cache[idx - first]; };
      parallel_for(n_lr * n_seed, threads, [&](std::size_t job) {
        const std::size_t li = job / n_seed;
        const std::size_t si = job % n_seed;
        const PredictionResult res =
            run_prediction(*maps[li], series, starts[si], plan.task, indexed);
        QrcSweepRow& row = rows[((di * n_lr + li) * n_topo + ti) * n_seed + si];
        row = {plan.dispersions[di], plan.reservoir_sizes[li], plan.topologies[ti],
               plan.seeds[si],       starts[si],                res.vpt};
      });
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

class Outputs {
 public:
  Outputs(std::filesystem::path dir) : dir_(std::move(dir)) {}

  CsvWriter& open(const std::string& name, std::vector<std::string> header) {
    names_.push_back(name);
    writers_.push_back(std::make_unique<CsvWriter>(dir_ / name, std::move(header)));
    return *writers_.back();
  }

  Json finish() {
    Json list = Json::array();
    for (std::size_t k = 0; k < writers_.size(); ++k) {
      writers_[k]->close();
      list.push_back({{"file", names_[k]}, {"rows", writers_[k]->rows_written()}});
    }
    return list;
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
  std::vector<std::unique_ptr<CsvWriter>> writers_;
};

using I64 = std::int64_t;

I64 i64(std::size_t v) { return static_cast<I64>(v); }

ResponseProbe probe_from_json(const Json& b, const NetworkSpec& spec) {
  ResponseProbe probe;
  probe.eta = num(b, "probe", "eta");
  if (!(probe.eta > 0.0)) throw ConfigError("probe.eta", "must be positive");
  probe.a_weights = array_of<double>(b, "probe", "a_weights");
  probe.b_weights = array_of<double>(b, "probe", "b_weights");
  const auto n = static_cast<std::size_t>(spec.n_qubits());
  if (probe.a_weights.empty()) probe.a_weights = spec.drive_weights;
  if (probe.b_weights.empty()) probe.b_weights = spec.drive_weights;
  if (probe.a_weights.size() != n) throw ConfigError("probe.a_weights", "needs one weight per qubit");
  if (probe.b_weights.size() != n) throw ConfigError("probe.b_weights", "needs one weight per qubit");
  return probe;
}

struct SweepParams {
  std::vector<double> grid;
  double prominence;
};

SweepParams sweep_from_json(const Json& b) {
  SweepParams s;
  s.grid = checked_grid(num(b, "sweep", "omega_min"), num(b, "sweep", "omega_max"),
                        positive_int(b, "sweep", "points"), "sweep");
  s.prominence = num(b, "sweep", "prominence");
  if (!(s.prominence >= 0.0 && s.prominence < 1.0)) {
    throw ConfigError("sweep.prominence", "must lie in [0, 1)");
  }
  return s;
}

const std::vector<std::string> kResponseHeader = {"f",         "omega",         "re_chi",
                                                  "im_chi",    "amplitude",     "phase_over_pi",
                                                  "phase_unwrapped_over_pi"};

std::vector<CsvCell> response_cells(const SusceptibilitySample& s) {
  return {s.f,           s.omega,           s.chi.real(), s.chi.imag(),
          s.amplitude(), s.phase_over_pi(), s.phase_unwrapped_over_pi};
}

struct Context {
  const ExperimentConfig& cfg;
  const Json& r;
  bool dry;
  Outputs* out;
};

NetworkSpec context_network(const Context& c) {
  return build_network(network_params_from_json(c.r.at("network")), c.cfg.seed);
}

void run_spectrum(Context& c) {
  const NetworkSpec spec = context_network(c);
  const double tol = num(c.r.at("spectrum"), "spectrum", "degeneracy_tol");
  if (!(tol > 0.0)) throw ConfigError("spectrum.degeneracy_tol", "must be positive");
  if (c.dry) return;
  const Spectrum s = diagonalize(build_hamiltonian(spec));
  const auto groups = degeneracy_groups(s, tol);
  std::vector<I64> group_of(static_cast<std::size_t>(s.dim()));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (int level : groups[g]) group_of[static_cast<std::size_t>(level)] = i64(g);
  }
  auto& csv = c.out->open("eigenvalues.csv", {"index", "eigenvalue", "degeneracy_group"});
  for (int k = 0; k < s.dim(); ++k) {
    csv.row({I64{k}, s.eigenvalues()(k), group_of[static_cast<std::size_t>(k)]});
  }
}

void run_currents(Context& c) {
  const NetworkSpec spec = context_network(c);
  const auto levels = array_of<int>(c.r.at("currents"), "currents", "levels");
  const int dim = 1 << spec.n_qubits();
  for (int l : levels) {
    if (l < 0 || l >= dim) throw ConfigError("currents.levels", "level out of range");
  }
  if (c.dry) return;
  const Spectrum s = diagonalize(build_hamiltonian(spec));
  const I64 degenerate = s.ground_is_degenerate() ? 1 : 0;
  auto& csv = c.out->open("currents.csv", {"level", "qubit", "current", "degenerate_gs"});
  for (int l : levels) {
    const auto currents = loop_currents(s, l, spec);
    for (std::size_t i = 0; i < currents.size(); ++i) {
      csv.row({I64{l}, i64(i + 1), currents[i], degenerate});
    }
  }
}

void run_correlations(Context& c) {
  const NetworkSpec spec = context_network(c);
  const Json& b = c.r.at("correlations");
  const int level = positive_int(b, "correlations", "level", 0);
  const int ref = positive_int(b, "correlations", "reference");
  if (level >= (1 << spec.n_qubits())) throw ConfigError("correlations.level", "out of range");
  if (ref > spec.n_qubits()) throw ConfigError("correlations.reference", "exceeds n_qubits");
  if (c.dry) return;
  const Spectrum s = diagonalize(build_hamiltonian(spec));
  auto& csv = c.out->open("correlations.csv", {"reference", "qubit", "correlation"});
  for (int j = 1; j <= spec.n_qubits(); ++j) {
    csv.row({I64{ref}, I64{j}, current_correlation(s, level, ref, j)});
  }
}

void run_static_flux(Context& c) {
  const Json& b = c.r.at("flux");
  const auto grid = checked_grid(num(b, "flux", "f_min"), num(b, "flux", "f_max"),
                                 positive_int(b, "flux", "points"), "flux");
  NetworkParams params = network_params_from_json(c.r.at("network"));
  std::vector<TopologyKind> topologies;
  for (const auto& name : array_of<std::string>(b, "flux", "topologies")) {
    topologies.push_back(topology_from_name(name, "flux.topologies"));
  }
  if (topologies.empty()) topologies.push_back(params.topology);
  for (auto t : topologies) {
    NetworkParams p = params;
    p.topology = t;
    if (t == TopologyKind::cross && p.n_qubits != 5) {
      throw ConfigError("flux.topologies", "cross needs network.n_qubits = 5");
    }
    build_network(p, c.cfg.seed);
  }
  if (c.dry) return;
  auto& csv = c.out->open("static_flux.csv", {"topology", "f", "flux", "degenerate_gs"});
  for (auto t : topologies) {
    NetworkParams p = params;
    p.topology = t;
    for (double f : grid) {
      p.base.f = f;
      const Spectrum s = diagonalize(build_hamiltonian(build_network(p, c.cfg.seed)));
      csv.row({to_string(t), f, static_flux(s), I64{s.ground_is_degenerate() ? 1 : 0}});
    }
  }
}

void write_peaks(CsvWriter& csv, const std::vector<Peak>& peaks, std::optional<I64> seed) {
  for (std::size_t k = 0; k < peaks.size(); ++k) {
    std::vector<CsvCell> cells;
    if (seed) cells.push_back(*seed);
    cells.insert(cells.end(),
                 {i64(k + 1), peaks[k].omega, peaks[k].amplitude, peaks[k].prominence});
    csv.row(cells);
  }
}

void run_response_sweep(Context& c) {
  const NetworkSpec spec = context_network(c);
  const ResponseProbe probe = probe_from_json(c.r.at("probe"), spec);
  const SweepParams sweep = sweep_from_json(c.r.at("sweep"));
  if (c.dry) return;
  const Spectrum s = diagonalize(build_hamiltonian(spec));
  const FrequencySweep result = sweep_frequency(s, probe, spec, sweep.grid, sweep.prominence);
  auto& csv = c.out->open("response.csv", kResponseHeader);
  for (const auto& sample : result.samples) csv.row(response_cells(sample));
  auto& peaks = c.out->open("peaks.csv", {"rank", "omega", "amplitude", "prominence"});
  write_peaks(peaks, result.peaks, std::nullopt);
}

void run_response_map(Context& c) {
  const NetworkSpec spec = context_network(c);
  const ResponseProbe probe = probe_from_json(c.r.at("probe"), spec);
  const Json& b = c.r.at("map");
  const auto f_grid = checked_grid(num(b, "map", "f_min"), num(b, "map", "f_max"),
                                   positive_int(b, "map", "f_points"), "map.f");
  const auto w_grid = checked_grid(num(b, "map", "omega_min"), num(b, "map", "omega_max"),
                                   positive_int(b, "map", "omega_points"), "map.omega");
  if (c.dry) return;
  const ResponseMap map = sweep_flux_frequency(spec, probe, f_grid, w_grid, c.cfg.threads);
  auto& csv = c.out->open("response_map.csv", kResponseHeader);
  for (const auto& row : map.rows) {
    for (const auto& sample : row) csv.row(response_cells(sample));
  }
}

void run_disorder_response(Context& c) {
  const NetworkParams params = network_params_from_json(c.r.at("network"));
  if (!(params.disorder_amplitude > 0.0)) {
    throw ConfigError("network.disorder_amplitude", "must be positive for disorder-response");
  }
  const int n_seeds = positive_int(c.r.at("disorder"), "disorder", "n_seeds");
  const auto seeds = seed_list(c.cfg.seed, n_seeds);
  const SweepParams sweep = sweep_from_json(c.r.at("sweep"));
  probe_from_json(c.r.at("probe"), build_network(params, seeds.front()));
  if (c.dry) return;
  std::vector<FrequencySweep> results(seeds.size());
  std::vector<NetworkSpec> specs;
  for (auto seed : seeds) specs.push_back(build_network(params, seed));
  parallel_for(seeds.size(), c.cfg.threads, [&](std::size_t k) {
    const ResponseProbe probe = probe_from_json(c.r.at("probe"), specs[k]);
    const Spectrum s = diagonalize(build_hamiltonian(specs[k]));
    results[k] = sweep_frequency(s, probe, specs[k], sweep.grid, sweep.prominence);
  });
  std::vector<std::string> header = {"seed"};
  header.insert(header.end(), kResponseHeader.begin(), kResponseHeader.end());
  auto& csv = c.out->open("disorder_response.csv", header);
  auto& peaks = c.out->open("disorder_peaks.csv",
                            {"seed", "rank", "omega", "amplitude", "prominence"});
  auto& summary = c.out->open("disorder_summary.csv", {"seed", "n_peaks"});
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    const auto seed = static_cast<I64>(seeds[k]);
    for (const auto& sample : results[k].samples) {
      auto cells = response_cells(sample);
      cells.insert(cells.begin(), seed);
      csv.row(cells);
    }
    write_peaks(peaks, results[k].peaks, seed);
    summary.row({seed, i64(results[k].peaks.size())});
  }
}

void run_driven_scan(Context& c) {
  const NetworkSpec spec = context_network(c);
  const Json& b = c.r.at("drive");
  const double amplitude = num(b, "drive", "amplitude");
  if (amplitude < 0.0) throw ConfigError("drive.amplitude", "must be >= 0");
  const double w_min = num(b, "drive", "omega_min");
  if (!(w_min > 0.0)) throw ConfigError("drive.omega_min", "must be positive");
  const auto grid = checked_grid(w_min, num(b, "drive", "omega_max"),
                                 positive_int(b, "drive", "points"), "drive.omega");
  double t = num(b, "drive", "measure_time");
  if (t < 0.0) throw ConfigError("drive.measure_time", "must be >= 0 (0 selects 2 pi / omega_min)");
  if (t == 0.0) t = 2.0 * std::numbers::pi / w_min;
  const double step = num(b, "drive", "step");
  if (step < 0.0) throw ConfigError("drive.step", "must be >= 0 (0 selects the default)");
  if (c.dry) return;
  const auto scan = driven_observable_scan(spec, grid, t, amplitude, step, c.cfg.threads);
  auto& csv = c.out->open("driven_scan.csv", {"omega", "qubit", "sigma_z_expectation"});
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (std::size_t i = 0; i < scan[k].size(); ++i) {
      csv.row({grid[k], i64(i + 1), scan[k][i]});
    }
  }
}

void run_mackey_glass(Context& c) {
  const Json& b = c.r.at("mackey_glass");
  const MGConfig mg = mackey_glass_from_json(b);
  const int n = positive_int(b, "mackey_glass", "n_samples", 2);
  if (c.dry) return;
  const auto raw = integrate_mackey_glass(mg, static_cast<std::size_t>(n));
  const auto norm = MinMaxNormalizer::fit(raw).apply(raw);
  auto& csv = c.out->open("mackey_glass.csv", {"index", "t", "s_raw", "s_normalized"});
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const double t = static_cast<double>(mg.transient + k) * mg.dt_sample;
    csv.row({i64(k), t, raw[k], norm[k]});
  }
}

QrcSweepPlan qrc_plan(const Context& c) {
  QrcSweepPlan plan;
  plan.network = network_params_from_json(c.r.at("network"));
  plan.reservoir = reservoir_from_json(c.r.at("reservoir"));
  plan.mackey_glass = mackey_glass_from_json(c.r.at("mackey_glass"));
  const Json& t = c.r.at("task");
  plan.task.n_train = static_cast<std::size_t>(positive_int(t, "task", "n_train"));
  plan.task.horizon = static_cast<std::size_t>(positive_int(t, "task", "horizon", 0));
  plan.task.epsilon = num(t, "task", "epsilon");
  if (!(plan.task.epsilon > 0.0)) throw ConfigError("task.epsilon", "must be positive");
  plan.task.stop_at_failure = t.at("stop_at_failure").get<bool>();
  plan.max_offset = static_cast<std::size_t>(positive_int(t, "task", "max_offset", 0));
  return plan;
}

void check_reservoir_fits(const ReservoirConfig& rc, const NetworkParams& net, int l_r,
                          const std::string& field) {
  ReservoirConfig probe = rc;
  probe.l_r = l_r;
  try {
    probe.validate(net.n_qubits);
  } catch (const ConfigError& e) {
    throw ConfigError(field, e.what());
  }
}

void run_qrc_run(Context& c) {
  QrcSweepPlan plan = qrc_plan(c);
  const NetworkSpec spec = build_network(plan.network, c.cfg.seed);
  check_reservoir_fits(plan.reservoir, plan.network, plan.reservoir.l_r, "reservoir.l_r");
  if (c.dry) return;
  const auto series = qrc_series(plan);
  const FeatureMap features(spec, plan.reservoir);
  const std::size_t start = window_offset(c.cfg.seed, plan.max_offset);
  const std::size_t n_inputs =
      static_cast<std::size_t>(plan.reservoir.washout) + plan.task.n_train;
  const auto cache = measure_series(features, series, start, n_inputs + 1, c.cfg.threads);
  const PredictionResult res = run_prediction(
      features, series, start, plan.task, [&](std::size_t idx) { return cache[idx - start]; });

  auto& csv = c.out->open("qrc_series.csv", {"k", "phase", "s_k", "y_k", "y_pred"});
  const auto washout = static_cast<std::size_t>(plan.reservoir.washout);
  for (std::size_t k = 0; k < res.train_inputs.size(); ++k) {
    csv.row({i64(start + k), std::string(k < washout ? "washout" : "train"),
             res.train_inputs[k], res.train_targets[k], res.train_fit[k]});
  }
  const std::size_t f0 = start + n_inputs + 1;
  for (std::size_t k = 0; k < res.forecast.size(); ++k) {
    const double input = k == 0 ? series[f0 - 1] : std::clamp(res.forecast[k - 1], 0.0, 1.0);
    csv.row({i64(f0 + k - 1), std::string("forecast"), input, res.truth[k], res.forecast[k]});
  }
  auto& summary = c.out->open(
      "qrc_summary.csv", {"topology", "dispersion", "l_r", "seed", "start", "sigma", "vpt"});
  summary.row({to_string(plan.network.topology), plan.network.delta_dispersion,
               I64{plan.reservoir.l_r}, static_cast<I64>(c.cfg.seed), i64(start), res.sigma,
               I64{res.vpt}});
}

void run_qrc_sweep_experiment(Context& c) {
  QrcSweepPlan plan = qrc_plan(c);
  const Json& b = c.r.at("qrc_sweep");
  plan.dispersions = array_of<double>(b, "qrc_sweep", "dispersions");
  plan.reservoir_sizes = array_of<int>(b, "qrc_sweep", "l_r");
  for (const auto& name : array_of<std::string>(b, "qrc_sweep", "topologies")) {
    plan.topologies.push_back(topology_from_name(name, "qrc_sweep.topologies"));
  }
  plan.seeds = seed_list(c.cfg.seed, positive_int(b, "qrc_sweep", "n_seeds"));
  if (plan.dispersions.empty() || plan.reservoir_sizes.empty() || plan.topologies.empty()) {
    throw ConfigError("qrc_sweep", "dispersions, l_r and topologies must be non-empty");
  }
  for (double d : plan.dispersions) {
    if (!(d >= 0.0 && d < 1.0)) throw ConfigError("qrc_sweep.dispersions", "must lie in [0, 1)");
  }
  for (auto t : plan.topologies) {
    NetworkParams p = plan.network;
    p.topology = t;
    if (t == TopologyKind::cross && p.n_qubits != 5) {
      throw ConfigError("qrc_sweep.topologies", "cross needs network.n_qubits = 5");
    }
    build_network(p, c.cfg.seed);
  }
  for (int l_r : plan.reservoir_sizes) {
    check_reservoir_fits(plan.reservoir, plan.network, l_r, "qrc_sweep.l_r");
  }
  if (c.dry) return;
  const auto rows = run_qrc_sweep(plan, c.cfg.threads);
  auto& csv = c.out->open("qrc_sweep.csv",
                          {"dispersion", "l_r", "topology", "seed", "start", "vpt"});
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::vector<int>> cells;
  std::size_t k = 0;
  for (const auto& row : rows) {
    csv.row({row.dispersion, I64{row.l_r}, to_string(row.topology),
             static_cast<I64>(row.seed), i64(row.start), I64{row.vpt}});
    const std::size_t n_seed = plan.seeds.size();
    const std::size_t n_topo = plan.topologies.size();
    const std::size_t ti = (k / n_seed) % n_topo;
    const std::size_t li = (k / (n_seed * n_topo)) % plan.reservoir_sizes.size();
    const std::size_t di = k / (n_seed * n_topo * plan.reservoir_sizes.size());
    cells[{di, li, ti}].push_back(row.vpt);
    ++k;
  }
  auto& medians = c.out->open("qrc_medians.csv", {"dispersion", "l_r", "topology", "median_vpt"});
  for (const auto& [key, vpts] : cells) {
    const auto [di, li, ti] = key;
    medians.row({plan.dispersions[di], I64{plan.reservoir_sizes[li]},
                 to_string(plan.topologies[ti]), median(vpts)});
  }
}

void dispatch(Context& c) {
  const std::string& e = c.cfg.experiment;
  if (e == "spectrum") return run_spectrum(c);
  if (e == "currents") return run_currents(c);
  if (e == "correlations") return run_correlations(c);
  if (e == "static-flux") return run_static_flux(c);
  if (e == "response-sweep") return run_response_sweep(c);
  if (e == "response-map") return run_response_map(c);
  if (e == "disorder-response") return run_disorder_response(c);
  if (e == "driven-scan") return run_driven_scan(c);
  if (e == "qrc-run") return run_qrc_run(c);
  if (e == "qrc-sweep") return run_qrc_sweep_experiment(c);
  if (e == "mackey-glass") return run_mackey_glass(c);
  throw ConfigError("experiment", "unknown experiment '" + e + "'");
}

// Library exceptions raised while turning config values into objects are
// config errors from the user's point of view.
template <class F>
void as_config_errors(F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Json::exception& e) {
    throw ConfigError("", e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", e.what());
  }
}

}  // namespace

void validate_experiment(const ExperimentConfig& cfg) {
  Context c{cfg, cfg.resolved, true, nullptr};
  as_config_errors([&] { dispatch(c); });
}

Json run_experiment(const ExperimentConfig& cfg) {
  validate_experiment(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  std::filesystem::create_directories(cfg.output_dir);
  Outputs outputs(cfg.output_dir);
  Context c{cfg, cfg.resolved, false, &outputs};
  dispatch(c);
  const Json files = outputs.finish();
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  Json manifest = {{"software", "fluxlattice"},
                   {"version", FLUXLATTICE_VERSION},
                   {"experiment", cfg.experiment},
                   {"seed", cfg.seed},
                   {"threads", resolve_threads(cfg.threads)},
                   {"wall_time_seconds", wall},
                   {"outputs", files},
                   {"resolved_config", cfg.resolved}};
  const auto path = cfg.output_dir / "manifest.json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << manifest.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return manifest;
}

}  // namespace fluxlattice
