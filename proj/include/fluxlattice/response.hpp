#pragma once

// Linear-response susceptibility of the network in the spectral (Lehmann)
// representation with a finite broadening eta:
//
//   chi(w) = sum_{n>0}  <0|A|n><n|B|0> / (w - (E_n - E_0) + i eta)
//                     - <0|B|n><n|A|0> / (w + (E_n - E_0) + i eta)
//
// with A = sum_i a_i (1 + lambda_i) sz_i and B likewise.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "fluxlattice/network.hpp"
#include "fluxlattice/spectra.hpp"

namespace fluxlattice {

inline constexpr double kDefaultEta = 2.5e-3;
inline constexpr double kDefaultPeakProminence = 0.01;

struct ResponseProbe {
  std::vector<double> a_weights;
  std::vector<double> b_weights;
  double eta = kDefaultEta;

  /// A = B = uniform sum over all qubits.
  static ResponseProbe uniform(int n, double eta = kDefaultEta);
};

struct SusceptibilitySample {
  double f = 0.0;
  double omega = 0.0;
  Complex chi{};
  /// Continuous phase along the sweep, in units of pi.
  double phase_unwrapped_over_pi = 0.0;

  double amplitude() const { return std::abs(chi); }
  /// Principal value of arg(chi) / pi, in (-1, 1].
  double phase_over_pi() const;
};

/// Residues and pole positions for one (spectrum, probe) pair; evaluating
/// chi at many frequencies reuses them.
class SpectralResponse {
 public:
  SpectralResponse(const Spectrum& s, const ResponseProbe& probe,
                   const NetworkSpec& spec);

  Complex operator()(double omega) const;

  double eta() const noexcept { return eta_; }
  /// E_n - E_0 for n = 1..dim-1.
  const std::vector<double>& gaps() const noexcept { return gaps_; }
  /// <0|A|n><n|B|0> for n = 1..dim-1.
  std::vector<Complex> forward_residues() const;

 private:
  double eta_;
  std::vector<double> gaps_;
  std::vector<double> pr_, pi_, qr_, qi_;
};

/// chi(omega) for one frequency. Throws for eta <= 0 or mismatched weights.
Complex susceptibility(const Spectrum& s, const ResponseProbe& probe,
                       const NetworkSpec& spec, double omega);

struct Peak {
  std::size_t index = 0;
  double omega = 0.0;
  double amplitude = 0.0;
  double prominence = 0.0;
};

/// Interior local maxima with topographic prominence >= min_prominence.
std::vector<Peak> find_peaks(std::span<const double> values,
                             std::span<const double> abscissa,
                             double min_prominence);

/// Rewrites phase_unwrapped_over_pi by removing 2*pi jumps between
/// consecutive samples.
void unwrap_phase(std::span<SusceptibilitySample> samples);

struct FrequencySweep {
  std::vector<SusceptibilitySample> samples;
  /// Peaks of |chi| with prominence >= prominence_fraction * max |chi|.
  std::vector<Peak> peaks;
};

/// Throws for an empty or non-increasing grid.
FrequencySweep sweep_frequency(const Spectrum& s, const ResponseProbe& probe,
                               const NetworkSpec& spec,
                               std::span<const double> omega_grid,
                               double prominence_fraction = kDefaultPeakProminence);

struct ResponseMap {
  std::vector<double> f_grid;
  std::vector<double> omega_grid;
  /// rows[i][j] at f_grid[i], omega_grid[j]; phases unwrapped along omega.
  std::vector<std::vector<SusceptibilitySample>> rows;

  /// |chi| versus f at fixed omega_grid[j].
  std::vector<double> amplitude_cut(std::size_t j) const;
};

/// Rebuilds and rediagonalizes H0 at each flux value. Rows are evaluated in
/// parallel on `threads` workers (0 = hardware concurrency) and assembled in
/// grid order.
ResponseMap sweep_flux_frequency(const NetworkSpec& spec_template,
                                 const ResponseProbe& probe,
                                 std::span<const double> f_grid,
                                 std::span<const double> omega_grid,
                                 unsigned threads = 0);

/// delta<A(t)> = amplitude |chi| sin(omega t - arg chi).
double time_domain_response(Complex chi, double amplitude, double omega, double t);

/// `points` values evenly spaced over [lo, hi] inclusive.
std::vector<double> linear_grid(double lo, double hi, std::size_t points);

}  // namespace fluxlattice
