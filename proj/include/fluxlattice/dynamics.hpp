#pragma once

// Driven Schroedinger propagation under H(t) = H0 + f(t) C with
// f(t) = amplitude * sin(omega t), switched on at t = 0.
//
// The default step is the commutator-free fourth-order Magnus rule
//   psi(t + h) = exp(-i h (b H1 + a H2)) exp(-i h (a H1 + b H2)) psi(t),
// H1, H2 = H at the two Gauss nodes of [t, t + h], a = (3 + 2 sqrt3)/12,
// b = (3 - 2 sqrt3)/12. The second-order midpoint rule
//   psi(t + h) = exp(-i H(t + h/2) h) psi(t)
// is kept as an option. Every exponential is formed exactly from a Hermitian
// eigendecomposition, so both rules are unitary to rounding error for any h.

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "fluxlattice/network.hpp"
#include "fluxlattice/pauli.hpp"

namespace fluxlattice {

struct DriveSpec {
  double amplitude = 0.0;
  double omega = 1.0;
  Operator coupling;
};

enum class Integrator { magnus4, midpoint };

struct PropagationConfig {
  double step = 0.0;
  double t_max = 0.0;
  /// Non-decreasing, inside [0, t_max].
  std::vector<double> sample_times;
  Integrator scheme = Integrator::magnus4;
};

/// Allowed deviation of |psi| from 1 before propagation aborts.
inline constexpr double kNormDriftLimit = 1e-6;

/// 2 pi / (256 omega_max): 256 steps per period of the fastest drive used.
double default_step(double omega_max);

/// Time-dependent state stored as split real / imaginary arrays.
struct SplitState {
  std::vector<double> re;
  std::vector<double> im;

  static SplitState from(const StateVector& psi);
  StateVector to_state() const;
  double norm() const;
};

/// Propagator for one (H0, C) pair, reusable across drives. Real-symmetric
/// operators take the SIMD kernel path; anything else falls back to complex
/// Eigen arithmetic.
class Propagator {
 public:
  Propagator(const Operator& h0, const Operator& coupling);

  int dim() const noexcept { return dim_; }

  /// Evolves `psi` in place from t = 0, invoking on_sample(k, psi) at each
  /// config.sample_times[k]. Throws NumericalError when the norm drifts by
  /// more than kNormDriftLimit.
  void run(double amplitude, double omega, const PropagationConfig& config,
           SplitState& psi,
           const std::function<void(std::size_t, const SplitState&)>& on_sample) const;

 private:
  int dim_ = 0;
  bool real_ = false;
  bool coupling_diagonal_ = false;
  Eigen::MatrixXd h0_;
  Eigen::MatrixXd coupling_;
  ComplexMatrix h0_c_;
  ComplexMatrix coupling_c_;
};

/// States at config.sample_times. Throws std::invalid_argument on bad config
/// or dimension mismatch and NumericalError on norm drift.
std::vector<StateVector> propagate(const Operator& h0, const DriveSpec& drive,
                                   const PropagationConfig& config,
                                   const StateVector& initial);

/// <sz_i> for all qubits at time `measure_time`, one row per drive
/// frequency, starting from the ground state of H0 and driving through the
/// line-coupling operator. step <= 0 selects default_step(max omega).
std::vector<std::vector<double>> driven_observable_scan(
    const NetworkSpec& spec, const std::vector<double>& omega_grid,
    double measure_time, double drive_amplitude, double step = 0.0,
    unsigned threads = 0);

/// Steady-state component of delta<A(t)> at the drive frequency, written as
/// amplitude * sin(omega t - phase).
struct HarmonicEstimate {
  double amplitude = 0.0;
  double phase = 0.0;
};

struct HarmonicProtocol {
  int total_periods = 40;
  int window_periods = 30;
  int samples_per_period = 64;
  double step = 0.0;  ///< <= 0: default_step(omega)
};

/// Brute-force linear-response oracle: start in the ground state, drive with
/// the line coupling, and Hann-window project delta<A(t)> onto
/// e^{-i omega t} over the last window_periods drive periods.
HarmonicEstimate driven_harmonic_response(const NetworkSpec& spec,
                                          const Operator& observable,
                                          double amplitude, double omega,
                                          const HarmonicProtocol& protocol = {});

}  // namespace fluxlattice
