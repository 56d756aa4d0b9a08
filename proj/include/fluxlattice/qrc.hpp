#pragma once

// Frequency-encoded quantum reservoir computing on a flux-qubit network.
//
// Input s in [0, 1] sets the drive frequency omega = omega_min + s (omega_max
// - omega_min). Starting from the ground state of H0 every time, the network
// is driven for t_max and sz (optionally sx) expectations are recorded at n_t
// equally spaced instants. The flattened measurements m_k feed the linear
// reservoir recursion
//
//   r_k = gamma S^{n_shift} r_{k-1} + B m_k,   r_0 = 0,
//
// where S is the cyclic shift and B interleaves zeros up to length l_r. A
// least-squares readout y = w . r is trained on one-step-ahead targets and
// iterated in closed loop for forecasting.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fluxlattice/dynamics.hpp"
#include "fluxlattice/network.hpp"

namespace fluxlattice {

/// Content of the trailing "+1" slot of a feature vector.
enum class BiasSlot { constant, input };

struct ReservoirConfig {
  double gamma = 0.6;
  int n_shift = 1;
  int l_r = 400;
  int n_t = 6;
  double omega_min = 0.2;
  double omega_max = 0.6;
  double t_max = 2.0 * std::numbers::pi / 0.2;
  double drive_amplitude = 1e-3;
  int washout = 50;
  BiasSlot bias_slot = BiasSlot::constant;
  bool include_sigma_x = false;
  /// Propagation step; <= 0 selects default_step(omega_max).
  double step = 0.0;

  int observables_per_instant(int n_qubits) const {
    return include_sigma_x ? 2 * n_qubits : n_qubits;
  }
  int feature_length(int n_qubits) const {
    return observables_per_instant(n_qubits) * n_t + 1;
  }
  double resolved_step() const;
  /// Throws ConfigError naming the offending field.
  void validate(int n_qubits) const;
};

struct FeatureVector {
  std::vector<double> entries;
};

struct ReservoirState {
  std::vector<double> entries;
};

struct Readout {
  std::vector<double> weights;

  double predict(const ReservoirState& r) const;
};

/// omega_min + s (omega_max - omega_min). Throws for s outside [0, 1].
double encode_frequency(double s, const ReservoirConfig& cfg);

/// Driven measurement map of one network, caching H0, the drive operator
/// and the ground state. Thread-safe for concurrent measure calls.
class FeatureMap {
 public:
  FeatureMap(const NetworkSpec& spec, const ReservoirConfig& cfg);

  const ReservoirConfig& config() const noexcept { return cfg_; }
  int n_qubits() const noexcept { return n_qubits_; }
  int feature_length() const noexcept { return cfg_.feature_length(n_qubits_); }

  /// Measurements at drive frequency omega; the trailing slot holds `bias`.
  FeatureVector measure_omega(double omega, double bias = 1.0) const;
  /// Encodes s, measures, and fills the trailing slot per cfg.bias_slot.
  FeatureVector measure_input(double s) const;

 private:
  NetworkSpec spec_;
  ReservoirConfig cfg_;
  int n_qubits_;
  Operator h0_;
  Operator coupling_;
  Propagator propagator_;
  SplitState ground_;
  PropagationConfig schedule_;
  Eigen::MatrixXd sign_table_;
};

/// Features at drive frequency omega: <sz_i> (then <sx_i> if enabled) at
/// t_j = j t_max / (n_t - 1), time-major, followed by a constant 1.
FeatureVector measure_features(const NetworkSpec& spec, double omega,
                               const ReservoirConfig& cfg);

/// (S r)_i = r_{(i + n_shift) mod l_r}.
ReservoirState shift(const ReservoirState& r, int n_shift);

/// Places m_q at index q * floor(l_r / len(m)), zeros elsewhere.
ReservoirState lengthen(const FeatureVector& m, int l_r);

/// Reads the stride positions back out of a lengthened vector.
FeatureVector unlengthen(const ReservoirState& r, std::size_t feature_length);

/// gamma S^{n_shift} r_prev + lengthen(m). An empty r_prev means r_0 = 0.
ReservoirState reservoir_step(const ReservoirState& r_prev, const FeatureVector& m,
                              const ReservoirConfig& cfg);

/// Minimum-norm least squares via SVD, discarding singular values below
/// 1e-10 sigma_max. Throws for an empty or all-zero R.
Readout train_readout(const Eigen::MatrixXd& states, const Eigen::VectorXd& targets);

/// Called after each forecast step with (step index, prediction); return
/// false to stop early.
using ForecastMonitor = std::function<bool(std::size_t, double)>;

/// `warm_state` is the reservoir state after the last training input and
/// `last_input` the most recent observed value (the last training target).
/// It is fed first; then the loop predicts w . r, clamps to [0, 1] and feeds
/// the prediction back as the next input. Throws NumericalError on a
/// non-finite prediction.
std::vector<double> forecast_closed_loop(const FeatureMap& features,
                                         const Readout& readout,
                                         const ReservoirState& warm_state,
                                         double last_input, std::size_t horizon,
                                         const ForecastMonitor& monitor = {});

/// Number of leading steps with ((predicted - truth) / sigma)^2 < epsilon^2.
int valid_prediction_time(std::span<const double> predicted,
                          std::span<const double> truth, double epsilon,
                          double sigma);

/// Population standard deviation.
double standard_deviation(std::span<const double> series);

// ---------------------------------------------------------------------------
// Prediction task: one-step training followed by a closed-loop forecast.

struct PredictionTask {
  std::size_t n_train = 1000;
  std::size_t horizon = 600;
  double epsilon = 0.3;
  /// Stop the forecast once the VPT is settled (first threshold violation).
  bool stop_at_failure = false;
};

struct PredictionResult {
  std::size_t start = 0;                ///< series index of the first input
  std::vector<double> train_inputs;     ///< s_k fed during washout + training
  std::vector<double> train_targets;    ///< s_{k+1}
  std::vector<double> train_fit;        ///< in-sample w . r_k (NaN in washout)
  std::vector<double> forecast;         ///< closed-loop predictions
  std::vector<double> truth;            ///< matching true values
  double sigma = 0.0;
  int vpt = 0;
};

/// Supplies features for the series value at a given index (lets callers
/// cache measurements shared between runs over the same series).
using IndexedFeatures = std::function<FeatureVector(std::size_t)>;

/// Trains on inputs series[start .. start + washout + n_train - 1] with
/// targets shifted by one, then forecasts `horizon` steps against
/// series[start + washout + n_train + 1 ...]. sigma is the standard
/// deviation of the whole series.
PredictionResult run_prediction(const FeatureMap& features,
                                 std::span<const double> series, std::size_t start,
                                 const PredictionTask& task,
                                 const IndexedFeatures& indexed = {});

/// Series index where a seeded run starts its training window:
/// uniform in [0, max_offset] from xoshiro256++(seed).
std::size_t window_offset(std::uint64_t seed, std::size_t max_offset);

/// Measures features for series[first .. first + count) on `threads` workers.
std::vector<FeatureVector> measure_series(const FeatureMap& features,
                                          std::span<const double> series,
                                          std::size_t first, std::size_t count,
                                          unsigned threads);

}  // namespace fluxlattice
