#include "fluxlattice/qrc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fluxlattice/error.hpp"
#include "fluxlattice/parallel.hpp"
#include "fluxlattice/rng.hpp"
#include "fluxlattice/simd/kernels.hpp"
#include "fluxlattice/spectra.hpp"

namespace fluxlattice {

double ReservoirConfig::resolved_step() const {
  return step > 0.0 ? step : default_step(omega_max);
}

void ReservoirConfig::validate(int n_qubits) const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("reservoir.gamma", "must lie in (0, 1)");
  if (n_shift < 0) throw ConfigError("reservoir.n_shift", "must be >= 0");
  if (n_t < 2) throw ConfigError("reservoir.n_t", "must be >= 2");
  if (!(omega_min > 0.0)) throw ConfigError("reservoir.omega_min", "must be positive");
  if (!(omega_min < omega_max)) {
    throw ConfigError("reservoir.omega_max", "must exceed omega_min");
  }
  if (!(t_max > 0.0)) throw ConfigError("reservoir.t_max", "must be positive");
  if (!(drive_amplitude >= 0.0)) {
    throw ConfigError("reservoir.drive_amplitude", "must be >= 0");
  }
  if (washout < 0) throw ConfigError("reservoir.washout", "must be >= 0");
  if (l_r < feature_length(n_qubits)) {
    throw ConfigError("reservoir.l_r", "must be at least the feature length " +
                                           std::to_string(feature_length(n_qubits)));
  }
}

double Readout::predict(const ReservoirState& r) const {
  if (r.entries.size() != weights.size()) {
    throw std::invalid_argument("readout and reservoir dimensions differ");
  }
  return simd::kernels().dot(weights.data(), r.entries.data(), weights.size());
}

double encode_frequency(double s, const ReservoirConfig& cfg) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw std::invalid_argument("input " + std::to_string(s) + " outside [0, 1]");
  }
  return cfg.omega_min + s * (cfg.omega_max - cfg.omega_min);
}

FeatureMap::FeatureMap(const NetworkSpec& spec, const ReservoirConfig& cfg)
    : spec_(spec),
      cfg_(cfg),
      n_qubits_(spec.n_qubits()),
      h0_(build_hamiltonian(spec)),
      coupling_(build_drive_operator(spec)),
      propagator_(h0_, coupling_) {
  cfg_.validate(n_qubits_);
  ground_ = SplitState::from(diagonalize(h0_).state(0));
  schedule_.step = cfg_.resolved_step();
  schedule_.t_max = cfg_.t_max;
  for (int j = 0; j < cfg_.n_t; ++j) {
    schedule_.sample_times.push_back(cfg_.t_max * j / (cfg_.n_t - 1));
  }
  schedule_.sample_times.back() = cfg_.t_max;
  const int dim = 1 << n_qubits_;
  sign_table_.resize(dim, n_qubits_);
  for (int k = 0; k < dim; ++k) {
    for (int i = 1; i <= n_qubits_; ++i) {
      sign_table_(k, i - 1) = sigma_z_sign(static_cast<std::size_t>(k), i, n_qubits_);
    }
  }
}

FeatureVector FeatureMap::measure_omega(double omega, double bias) const {
  const auto& kern = simd::kernels();
  const auto dim = static_cast<std::size_t>(1) << n_qubits_;
  const auto n = static_cast<std::size_t>(n_qubits_);
  const auto d = static_cast<std::size_t>(cfg_.observables_per_instant(n_qubits_));
  FeatureVector m;
  m.entries.assign(static_cast<std::size_t>(feature_length()), 0.0);
  std::vector<double> pop(dim);
  SplitState psi = ground_;
  propagator_.run(cfg_.drive_amplitude, omega, schedule_, psi,
                  [&](std::size_t j, const SplitState& s) {
                    double* block = m.entries.data() + j * d;
                    kern.abs2(s.re.data(), s.im.data(), pop.data(), dim);
                    kern.rmatvec_t(sign_table_.data(), dim, n, pop.data(), block);
                    if (!cfg_.include_sigma_x) return;
                    for (std::size_t i = 1; i <= n; ++i) {
                      const std::size_t bit = std::size_t{1} << (n - i);
                      double acc = 0.0;
                      for (std::size_t k = 0; k < dim; ++k) {
                        if (k & bit) continue;
                        acc += s.re[k] * s.re[k | bit] + s.im[k] * s.im[k | bit];
                      }
                      block[n + i - 1] = 2.0 * acc;
                    }
                  });
  m.entries.back() = bias;
  return m;
}

FeatureVector FeatureMap::measure_input(double s) const {
  const double bias = cfg_.bias_slot == BiasSlot::input ? s : 1.0;
  return measure_omega(encode_frequency(s, cfg_), bias);
}

FeatureVector measure_features(const NetworkSpec& spec, double omega,
                               const ReservoirConfig& cfg) {
  return FeatureMap(spec, cfg).measure_omega(omega, 1.0);
}

ReservoirState shift(const ReservoirState& r, int n_shift) {
  const std::size_t l = r.entries.size();
  ReservoirState out;
  out.entries.resize(l);
  if (l == 0) return out;
  const std::size_t s = static_cast<std::size_t>(n_shift) % l;
  for (std::size_t i = 0; i < l; ++i) out.entries[i] = r.entries[(i + s) % l];
  return out;
}

ReservoirState lengthen(const FeatureVector& m, int l_r) {
  const std::size_t len = m.entries.size();
  if (len == 0) throw std::invalid_argument("cannot lengthen an empty feature vector");
  if (l_r < 0 || static_cast<std::size_t>(l_r) < len) {
    throw std::invalid_argument("reservoir dimension " + std::to_string(l_r) +
                                " smaller than feature length " + std::to_string(len));
  }
  const std::size_t stride = static_cast<std::size_t>(l_r) / len;
  ReservoirState r;
  r.entries.assign(static_cast<std::size_t>(l_r), 0.0);
  for (std::size_t q = 0; q < len; ++q) r.entries[q * stride] = m.entries[q];
  return r;
}

FeatureVector unlengthen(const ReservoirState& r, std::size_t feature_length) {
  if (feature_length == 0 || feature_length > r.entries.size()) {
    throw std::invalid_argument("invalid feature length for unlengthen");
  }
  const std::size_t stride = r.entries.size() / feature_length;
  FeatureVector m;
  m.entries.resize(feature_length);
  for (std::size_t q = 0; q < feature_length; ++q) m.entries[q] = r.entries[q * stride];
  return m;
}

ReservoirState reservoir_step(const ReservoirState& r_prev, const FeatureVector& m,
                              const ReservoirConfig& cfg) {
  ReservoirState out = lengthen(m, cfg.l_r);
  if (r_prev.entries.empty()) return out;
  const std::size_t l = out.entries.size();
  if (r_prev.entries.size() != l) {
    throw std::invalid_argument("reservoir state has wrong dimension");
  }
  const std::size_t s = static_cast<std::size_t>(cfg.n_shift) % l;
  const auto& kern = simd::kernels();
  double* o = out.entries.data();
  const double* r = r_prev.entries.data();
  // out_i = gamma r_{(i+s) mod l} + B m, split at the wrap-around point.
  kern.axpy(cfg.gamma, r + s, o, o, l - s);
  kern.axpy(cfg.gamma, r, o + (l - s), o + (l - s), s);
  return out;
}

Readout train_readout(const Eigen::MatrixXd& states, const Eigen::VectorXd& targets) {
  if (states.rows() == 0 || states.cols() == 0) {
    throw std::invalid_argument("training matrix is empty");
  }
  if (states.rows() != targets.size()) {
    throw std::invalid_argument("training matrix and target lengths differ");
  }
  if (states.cwiseAbs().maxCoeff() == 0.0) {
    throw std::invalid_argument("training matrix is identically zero");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(states, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = 1e-10 * sv(0);
  Eigen::VectorXd uty = svd.matrixU().transpose() * targets;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    uty(k) = sv(k) > cutoff ? uty(k) / sv(k) : 0.0;
  }
  const Eigen::VectorXd w = svd.matrixV() * uty;
  Readout out;
  out.weights.assign(w.data(), w.data() + w.size());
  for (double x : out.weights) {
    if (!std::isfinite(x)) throw NumericalError("readout weights are not finite");
  }
  return out;
}

namespace {

// Closed loop starting from a state that already contains the last observed input.
std::vector<double> closed_loop_from(const FeatureMap& features, const Readout& readout,
                                     ReservoirState r, std::size_t horizon,
                                     const ForecastMonitor& monitor) {
  std::vector<double> out;
  out.reserve(horizon);
  for (std::size_t k = 0; k < horizon; ++k) {
    const double y = readout.predict(r);
    if (!std::isfinite(y)) {
      throw NumericalError("closed-loop prediction became non-finite at step " +
                           std::to_string(k));
    }
    out.push_back(y);
    if (monitor && !monitor(k, y)) break;
    if (k + 1 < horizon) {
      r = reservoir_step(r, features.measure_input(std::clamp(y, 0.0, 1.0)),
                         features.config());
    }
  }
  return out;
}

}  // namespace

std::vector<double> forecast_closed_loop(const FeatureMap& features,
                                         const Readout& readout,
                                         const ReservoirState& warm_state,
                                         double last_input, std::size_t horizon,
                                         const ForecastMonitor& monitor) {
  if (horizon == 0) return {};
  ReservoirState r =
      reservoir_step(warm_state, features.measure_input(last_input), features.config());
  return closed_loop_from(features, readout, std::move(r), horizon, monitor);
}

int valid_prediction_time(std::span<const double> predicted,
                          std::span<const double> truth, double epsilon,
                          double sigma) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("predicted and true series lengths differ");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  const double limit = epsilon * epsilon;
  for (std::size_t t = 0; t < predicted.size(); ++t) {
    const double e = (predicted[t] - truth[t]) / sigma;
    if (!(e * e < limit)) return static_cast<int>(t);
  }
  return static_cast<int>(predicted.size());
}

double standard_deviation(std::span<const double> series) {
  if (series.empty()) throw std::invalid_argument("empty series");
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(series.size());
  double var = 0.0;
  for (double x : series) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(series.size()));
}

std::size_t window_offset(std::uint64_t seed, std::size_t max_offset) {
  if (max_offset == 0) return 0;
  Xoshiro256pp rng(seed);
  return static_cast<std::size_t>(rng.below_or_equal(max_offset));
}

std::vector<FeatureVector> measure_series(const FeatureMap& features,
                                          std::span<const double> series,
                                          std::size_t first, std::size_t count,
                                          unsigned threads) {
  if (first + count > series.size()) throw std::out_of_range("series window out of range");
  std::vector<FeatureVector> out(count);
  parallel_for(count, threads, [&](std::size_t k) {
    out[k] = features.measure_input(series[first + k]);
  });
  return out;
}

PredictionResult run_prediction(const FeatureMap& features,
                                std::span<const double> series, std::size_t start,
                                const PredictionTask& task,
                                const IndexedFeatures& indexed) {
  const ReservoirConfig& cfg = features.config();
  const auto washout = static_cast<std::size_t>(cfg.washout);
  const std::size_t n_inputs = washout + task.n_train;
  if (task.n_train == 0) throw std::invalid_argument("n_train must be positive");
  // The last training target is fed as the first closed-loop input.
  if (start + n_inputs + 1 + task.horizon > series.size()) {
    throw std::out_of_range("series too short for the requested window");
  }
  auto feature_at = [&](std::size_t idx) {
    return indexed ? indexed(idx) : features.measure_input(series[idx]);
  };

  PredictionResult result;
  result.start = start;
  result.sigma = standard_deviation(series);
  const auto l_r = static_cast<Eigen::Index>(cfg.l_r);
  Eigen::MatrixXd states(static_cast<Eigen::Index>(task.n_train), l_r);
  Eigen::VectorXd targets(static_cast<Eigen::Index>(task.n_train));
  ReservoirState r;
  for (std::size_t k = 0; k < n_inputs; ++k) {
    const std::size_t idx = start + k;
    r = reservoir_step(r, feature_at(idx), cfg);
    result.train_inputs.push_back(series[idx]);
    result.train_targets.push_back(series[idx + 1]);
    if (k >= washout) {
      const auto row = static_cast<Eigen::Index>(k - washout);
      states.row(row) = Eigen::Map<const Eigen::RowVectorXd>(r.entries.data(), l_r);
      targets(row) = series[idx + 1];
    }
  }
  const Readout readout = train_readout(states, targets);
  const Eigen::VectorXd fit = states * Eigen::Map<const Eigen::VectorXd>(
                                           readout.weights.data(), l_r);
  result.train_fit.assign(washout, std::numeric_limits<double>::quiet_NaN());
  result.train_fit.insert(result.train_fit.end(), fit.data(), fit.data() + fit.size());

  const std::size_t warm_idx = start + n_inputs;
  const auto truth = series.subspan(warm_idx + 1, task.horizon);
  const double limit = task.epsilon * task.epsilon;
  ForecastMonitor monitor;
  if (task.stop_at_failure) {
    monitor = [&](std::size_t k, double y) {
      const double e = (y - truth[k]) / result.sigma;
      return e * e < limit;
    };
  }
  const FeatureVector last = feature_at(warm_idx);
  ReservoirState fed = reservoir_step(r, last, cfg);
  // Same as forecast_closed_loop(features, readout, r, series[warm_idx], ...)
  // but reuses the cached features of the last observed value.
  result.forecast = closed_loop_from(features, readout, std::move(fed), task.horizon, monitor);
  result.truth.assign(truth.begin(), truth.begin() + static_cast<std::ptrdiff_t>(result.forecast.size()));
  result.vpt = valid_prediction_time(result.forecast, result.truth, task.epsilon, result.sigma);
  return result;
}

}  // namespace fluxlattice
