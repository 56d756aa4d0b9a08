#pragma once

// Mackey-Glass delay differential equation
//   ds/dt = beta s(t - tau) / (1 + s(t - tau)^n) - gamma s(t)
// integrated with fixed-step classical RK4 and a constant history.

#include <cstddef>
#include <span>
#include <vector>

namespace fluxlattice {

enum class DelayInterpolation { linear, cubic_hermite };

struct MGConfig {
  double beta = 0.2;
  double gamma_loss = 0.1;
  double tau = 17.0;
  double n_exp = 10.0;
  double dt_sample = 3.0;
  int oversample = 30;
  double history_value = 1.2;
  std::size_t transient = 1000;
  /// Delayed values between stored grid points. Cubic Hermite (from stored
  /// slopes) keeps the scheme fourth order; linear drops it to second order.
  DelayInterpolation interpolation = DelayInterpolation::cubic_hermite;

  /// Throws ConfigError on invalid values.
  void validate() const;
};

/// Samples at multiples of dt_sample after discarding `transient` samples.
/// tau must be 0 or at least one internal step. Throws NumericalError if
/// |s| exceeds 1e6.
std::vector<double> integrate_mackey_glass(const MGConfig& cfg, std::size_t n_samples);

/// Affine min-max map onto [0, 1] remembering the original range.
class MinMaxNormalizer {
 public:
  /// Throws std::invalid_argument for an empty or constant series.
  static MinMaxNormalizer fit(std::span<const double> series);

  double min() const noexcept { return min_; }
  double max() const noexcept { return max_; }

  std::vector<double> apply(std::span<const double> series) const;
  std::vector<double> invert(std::span<const double> normalized) const;

 private:
  MinMaxNormalizer(double lo, double hi) : min_(lo), max_(hi) {}
  double min_;
  double max_;
};

}  // namespace fluxlattice
