#include "fluxlattice/mackey_glass.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fluxlattice/error.hpp"

namespace fluxlattice {

void MGConfig::validate() const {
  if (!(tau >= 0.0)) throw ConfigError("mackey_glass.tau", "must be >= 0");
  if (!(dt_sample > 0.0)) throw ConfigError("mackey_glass.dt_sample", "must be positive");
  if (oversample < 1) throw ConfigError("mackey_glass.oversample", "must be >= 1");
  const double h = dt_sample / oversample;
  if (tau > 0.0 && tau < h * (1.0 - 1e-12)) {
    throw ConfigError("mackey_glass.tau",
                      "a nonzero delay must span at least one internal step");
  }
  if (!std::isfinite(beta) || !std::isfinite(gamma_loss) || !std::isfinite(n_exp) ||
      !std::isfinite(history_value)) {
    throw ConfigError("mackey_glass", "parameters must be finite");
  }
}

namespace {

// Stored grid values and slopes for the last `capacity` internal steps.
class DelayLine {
 public:
  explicit DelayLine(std::size_t capacity) : s_(capacity), d_(capacity) {}
  void store(long i, double value) { s_[slot(i)] = value; }
  void store_slope(long i, double slope) { d_[slot(i)] = slope; }
  double value(long i) const { return s_[slot(i)]; }
  double slope(long i) const { return d_[slot(i)]; }

 private:
  std::size_t slot(long i) const { return static_cast<std::size_t>(i) % s_.size(); }
  std::vector<double> s_;
  std::vector<double> d_;
};

}  // namespace

std::vector<double> integrate_mackey_glass(const MGConfig& cfg, std::size_t n_samples) {
  cfg.validate();
  if (n_samples == 0) throw std::invalid_argument("n_samples must be positive");
  const double h = cfg.dt_sample / cfg.oversample;
  double lag = cfg.tau / h;
  if (std::abs(lag - std::round(lag)) < 1e-9) lag = std::round(lag);
  const bool delayed = cfg.tau > 0.0;

  auto rhs = [&](double s, double s_delay) {
    return cfg.beta * s_delay / (1.0 + std::pow(s_delay, cfg.n_exp)) - cfg.gamma_loss * s;
  };

  DelayLine line(static_cast<std::size_t>(std::ceil(lag)) + 4);
  // Value at grid position x = i + c - lag (in internal steps).
  auto delayed_value = [&](double x) {
    if (x <= 0.0) return cfg.history_value;
    const double k = std::floor(x);
    const double theta = x - k;
    const long kk = static_cast<long>(k);
    if (theta == 0.0) return line.value(kk);
    const double a = line.value(kk);
    const double b = line.value(kk + 1);
    if (cfg.interpolation == DelayInterpolation::linear) {
      return (1.0 - theta) * a + theta * b;
    }
    const double t2 = theta * theta;
    const double t3 = t2 * theta;
    return (2 * t3 - 3 * t2 + 1) * a + (t3 - 2 * t2 + theta) * h * line.slope(kk) +
           (-2 * t3 + 3 * t2) * b + (t3 - t2) * h * line.slope(kk + 1);
  };

  const long total_steps =
      static_cast<long>(cfg.transient + n_samples - 1) * cfg.oversample;
  std::vector<double> out;
  out.reserve(n_samples);
  double s = cfg.history_value;
  for (long i = 0;; ++i) {
    line.store(i, s);
    if (i % cfg.oversample == 0 &&
        static_cast<std::size_t>(i / cfg.oversample) >= cfg.transient) {
      out.push_back(s);
    }
    if (i == total_steps) break;
    const double di = static_cast<double>(i);
    const double k1 = rhs(s, delayed ? delayed_value(di - lag) : s);
    line.store_slope(i, k1);
    const double y2 = s + 0.5 * h * k1;
    const double k2 = rhs(y2, delayed ? delayed_value(di + 0.5 - lag) : y2);
    const double y3 = s + 0.5 * h * k2;
    const double k3 = rhs(y3, delayed ? delayed_value(di + 0.5 - lag) : y3);
    const double y4 = s + h * k3;
    const double k4 = rhs(y4, delayed ? delayed_value(di + 1.0 - lag) : y4);
    s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!(std::abs(s) <= 1e6)) {
      throw NumericalError("Mackey-Glass integration diverged at t = " +
                           std::to_string((di + 1.0) * h));
    }
  }
  return out;
}

MinMaxNormalizer MinMaxNormalizer::fit(std::span<const double> series) {
  if (series.empty()) throw std::invalid_argument("cannot normalize an empty series");
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  if (!(*hi > *lo)) throw std::invalid_argument("cannot normalize a constant series");
  return MinMaxNormalizer(*lo, *hi);
}

std::vector<double> MinMaxNormalizer::apply(std::span<const double> series) const {
  std::vector<double> out(series.size());
  const double range = max_ - min_;
  for (std::size_t k = 0; k < series.size(); ++k) out[k] = (series[k] - min_) / range;
  return out;
}

std::vector<double> MinMaxNormalizer::invert(std::span<const double> normalized) const {
  std::vector<double> out(normalized.size());
  const double range = max_ - min_;
  for (std::size_t k = 0; k < normalized.size(); ++k) out[k] = min_ + normalized[k] * range;
  return out;
}

}  // namespace fluxlattice
