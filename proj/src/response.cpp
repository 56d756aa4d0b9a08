#include "fluxlattice/response.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fluxlattice/parallel.hpp"
#include "fluxlattice/simd/kernels.hpp"

namespace fluxlattice {

ResponseProbe ResponseProbe::uniform(int n, double eta) {
  return {uniform_drive_weights(n), uniform_drive_weights(n), eta};
}

double SusceptibilitySample::phase_over_pi() const {
  double p = std::arg(chi) / std::numbers::pi;
  if (p <= -1.0) p = 1.0;
  return p;
}

namespace {

// Diagonal of sum_i w_i (1 + lambda_i) sz_i in the computational basis.
Eigen::VectorXd probe_diagonal(std::span<const double> weights,
                               const NetworkSpec& spec) {
  const int n = spec.n_qubits();
  if (static_cast<int>(weights.size()) != n) {
    throw std::invalid_argument("probe weights length " +
                                std::to_string(weights.size()) +
                                " does not match " + std::to_string(n) + " qubits");
  }
  const std::size_t dim = std::size_t{1} << n;
  Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  for (std::size_t k = 0; k < dim; ++k) {
    double v = 0.0;
    for (int i = 1; i <= n; ++i) {
      v += weights[static_cast<std::size_t>(i - 1)] * spec.current_scale(i) *
           sigma_z_sign(k, i, n);
    }
    d(static_cast<Eigen::Index>(k)) = v;
  }
  return d;
}

}  // namespace

SpectralResponse::SpectralResponse(const Spectrum& s, const ResponseProbe& probe,
                                   const NetworkSpec& spec)
    : eta_(probe.eta) {
  if (!(probe.eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (spec.n_qubits() != s.n_qubits()) {
    throw std::invalid_argument("network and spectrum sizes differ");
  }
  const Eigen::VectorXd a = probe_diagonal(probe.a_weights, spec);
  const Eigen::VectorXd b = probe_diagonal(probe.b_weights, spec);
  const ComplexMatrix& v = s.eigenvectors();
  const ComplexVector v0 = v.col(0);
  // <n|A|0> and <n|B|0> for all n.
  const ComplexVector an = v.adjoint() * (a.cast<Complex>().cwiseProduct(v0));
  const ComplexVector bn = v.adjoint() * (b.cast<Complex>().cwiseProduct(v0));
  const auto count = static_cast<std::size_t>(s.dim() - 1);
  gaps_.resize(count);
  pr_.resize(count);
  pi_.resize(count);
  qr_.resize(count);
  qi_.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto n = static_cast<Eigen::Index>(k + 1);
    gaps_[k] = s.eigenvalues()(n) - s.eigenvalues()(0);
    const Complex p = std::conj(an(n)) * bn(n);  // <0|A|n><n|B|0>
    const Complex q = std::conj(bn(n)) * an(n);  // <0|B|n><n|A|0>
    pr_[k] = p.real();
    pi_[k] = p.imag();
    qr_[k] = q.real();
    qi_[k] = q.imag();
  }
}

Complex SpectralResponse::operator()(double omega) const {
  double re = 0.0;
  double im = 0.0;
  simd::kernels().pole_sum(pr_.data(), pi_.data(), qr_.data(), qi_.data(),
                           gaps_.data(), gaps_.size(), omega, eta_, &re, &im);
  return {re, im};
}

std::vector<Complex> SpectralResponse::forward_residues() const {
  std::vector<Complex> out(pr_.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = {pr_[k], pi_[k]};
  return out;
}

Complex susceptibility(const Spectrum& s, const ResponseProbe& probe,
                       const NetworkSpec& spec, double omega) {
  return SpectralResponse(s, probe, spec)(omega);
}

std::vector<Peak> find_peaks(std::span<const double> values,
                             std::span<const double> abscissa,
                             double min_prominence) {
  if (values.size() != abscissa.size()) {
    throw std::invalid_argument("find_peaks: value and abscissa lengths differ");
  }
  std::vector<Peak> peaks;
  const std::size_t n = values.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(values[i] > values[i - 1] && values[i] >= values[i + 1])) continue;
    // Walk outwards until a strictly higher sample or the boundary; the
    // higher of the two valley floors sets the prominence.
    double left_min = values[i];
    for (std::size_t k = i; k-- > 0;) {
      if (values[k] > values[i]) break;
      left_min = std::min(left_min, values[k]);
    }
    double right_min = values[i];
    for (std::size_t k = i + 1; k < n; ++k) {
      if (values[k] > values[i]) break;
      right_min = std::min(right_min, values[k]);
    }
    const double prominence = values[i] - std::max(left_min, right_min);
    if (prominence >= min_prominence) {
      peaks.push_back({i, abscissa[i], values[i], prominence});
    }
  }
  return peaks;
}

void unwrap_phase(std::span<SusceptibilitySample> samples) {
  double previous = 0.0;
  double unwrapped = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double p = samples[k].phase_over_pi();
    if (k == 0) {
      unwrapped = p;
    } else {
      double d = p - previous;
      d -= 2.0 * std::round(d / 2.0);
      unwrapped += d;
    }
    previous = p;
    samples[k].phase_unwrapped_over_pi = unwrapped;
  }
}

namespace {

void require_increasing(std::span<const double> grid, const char* name) {
  if (grid.empty()) throw std::invalid_argument(std::string(name) + " grid is empty");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) {
      throw std::invalid_argument(std::string(name) + " grid must be strictly increasing");
    }
  }
}

std::vector<SusceptibilitySample> evaluate_row(const SpectralResponse& response,
                                               double f,
                                               std::span<const double> omega_grid) {
  std::vector<SusceptibilitySample> row(omega_grid.size());
  for (std::size_t j = 0; j < omega_grid.size(); ++j) {
    row[j].f = f;
    row[j].omega = omega_grid[j];
    row[j].chi = response(omega_grid[j]);
  }
  unwrap_phase(row);
  return row;
}

}  // namespace

FrequencySweep sweep_frequency(const Spectrum& s, const ResponseProbe& probe,
                               const NetworkSpec& spec,
                               std::span<const double> omega_grid,
                               double prominence_fraction) {
  require_increasing(omega_grid, "omega");
  const SpectralResponse response(s, probe, spec);
  FrequencySweep out;
  out.samples = evaluate_row(response, spec.base.f, omega_grid);
  std::vector<double> amp(out.samples.size());
  for (std::size_t j = 0; j < amp.size(); ++j) amp[j] = out.samples[j].amplitude();
  const double max_amp = *std::max_element(amp.begin(), amp.end());
  if (max_amp > 0.0) {
    out.peaks = find_peaks(amp, omega_grid, prominence_fraction * max_amp);
  }
  return out;
}

std::vector<double> ResponseMap::amplitude_cut(std::size_t j) const {
  std::vector<double> cut(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) cut[i] = rows[i].at(j).amplitude();
  return cut;
}

ResponseMap sweep_flux_frequency(const NetworkSpec& spec_template,
                                 const ResponseProbe& probe,
                                 std::span<const double> f_grid,
                                 std::span<const double> omega_grid,
                                 unsigned threads) {
  require_increasing(f_grid, "flux");
  require_increasing(omega_grid, "omega");
  ResponseMap map;
  map.f_grid.assign(f_grid.begin(), f_grid.end());
  map.omega_grid.assign(omega_grid.begin(), omega_grid.end());
  map.rows.resize(f_grid.size());
  parallel_for(f_grid.size(), threads, [&](std::size_t i) {
    NetworkSpec spec = spec_template;
    spec.base.f = f_grid[i];
    const Spectrum s = diagonalize(build_hamiltonian(spec));
    map.rows[i] = evaluate_row(SpectralResponse(s, probe, spec), f_grid[i], omega_grid);
  });
  return map;
}

double time_domain_response(Complex chi, double amplitude, double omega, double t) {
  return amplitude * std::abs(chi) * std::sin(omega * t - std::arg(chi));
}

std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
  if (points == 0) throw std::invalid_argument("grid needs at least one point");
  std::vector<double> g(points, lo);
  if (points == 1) return g;
  for (std::size_t k = 0; k < points; ++k) {
    g[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
  }
  g.back() = hi;
  return g;
}

}  // namespace fluxlattice
