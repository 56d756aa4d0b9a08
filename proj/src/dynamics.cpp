#include "fluxlattice/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fluxlattice/error.hpp"
#include "fluxlattice/parallel.hpp"
#include "fluxlattice/simd/kernels.hpp"
#include "fluxlattice/spectra.hpp"

namespace fluxlattice {

double default_step(double omega_max) {
  if (!(omega_max > 0.0)) throw std::invalid_argument("omega_max must be positive");
  return 2.0 * std::numbers::pi / (256.0 * omega_max);
}

SplitState SplitState::from(const StateVector& psi) {
  SplitState s;
  const auto& a = psi.amplitudes();
  s.re.resize(static_cast<std::size_t>(a.size()));
  s.im.resize(static_cast<std::size_t>(a.size()));
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    s.re[static_cast<std::size_t>(k)] = a(k).real();
    s.im[static_cast<std::size_t>(k)] = a(k).imag();
  }
  return s;
}

StateVector SplitState::to_state() const {
  ComplexVector a(static_cast<Eigen::Index>(re.size()));
  for (std::size_t k = 0; k < re.size(); ++k) {
    a(static_cast<Eigen::Index>(k)) = Complex(re[k], im[k]);
  }
  return StateVector(std::move(a));
}

double SplitState::norm() const {
  const auto& k = simd::kernels();
  return std::sqrt(k.dot(re.data(), re.data(), re.size()) +
                   k.dot(im.data(), im.data(), im.size()));
}

Propagator::Propagator(const Operator& h0, const Operator& coupling)
    : dim_(h0.dim()) {
  if (coupling.dim() != h0.dim()) {
    throw std::invalid_argument("drive coupling and H0 dimensions differ");
  }
  if (!h0.is_hermitian() || !coupling.is_hermitian()) {
    throw std::invalid_argument("propagation requires Hermitian H0 and coupling");
  }
  real_ = h0.is_real() && coupling.is_real();
  if (real_) {
    h0_ = h0.real_part();
    coupling_ = coupling.real_part();
    coupling_diagonal_ = coupling_.isDiagonal(0.0);
  } else {
    h0_c_ = h0.matrix();
    coupling_c_ = coupling.matrix();
  }
}

namespace {

const double kSqrt3 = std::sqrt(3.0);
const double kGaussLow = 0.5 - kSqrt3 / 6.0;
const double kGaussHigh = 0.5 + kSqrt3 / 6.0;
const double kMagnusHeavy = (3.0 + 2.0 * kSqrt3) / 12.0;
const double kMagnusLight = (3.0 - 2.0 * kSqrt3) / 12.0;

void check_config(const PropagationConfig& config) {
  if (!(config.step > 0.0)) throw std::invalid_argument("propagation step must be positive");
  if (!(config.t_max >= 0.0)) throw std::invalid_argument("t_max must be non-negative");
  double previous = 0.0;
  for (double t : config.sample_times) {
    if (t < previous || t > config.t_max) {
      throw std::invalid_argument(
          "sample times must be non-decreasing and lie in [0, t_max]");
    }
    previous = t;
  }
}

void check_norm(double norm, double t, double step) {
  if (std::abs(norm - 1.0) > kNormDriftLimit) {
    std::ostringstream msg;
    msg << "state norm drifted to " << norm << " at t = " << t
        << " with step h = " << step << "; reduce the step size";
    throw NumericalError(msg.str());
  }
}

}  // namespace

void Propagator::run(
    double amplitude, double omega, const PropagationConfig& config,
    SplitState& psi,
    const std::function<void(std::size_t, const SplitState&)>& on_sample) const {
  check_config(config);
  if (static_cast<int>(psi.re.size()) != dim_ || psi.im.size() != psi.re.size()) {
    throw std::invalid_argument("initial state dimension does not match H0");
  }
  const auto n = static_cast<std::size_t>(dim_);
  const auto& kern = simd::kernels();
  std::vector<double> cr(n), ci(n), cosv(n), sinv(n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> real_solver(dim_);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> complex_solver(dim_);
  Eigen::MatrixXd hm = h0_;
  const bool static_drive = amplitude == 0.0;
  bool decomposed = false;

  // psi <- exp(-i (H0 + drive C) h) psi, exactly via eigendecomposition.
  auto apply_exponential = [&](double drive, double h) {
    if (real_) {
      if (!(static_drive && decomposed)) {
        if (coupling_diagonal_) {
          hm.diagonal() = h0_.diagonal() + drive * coupling_.diagonal();
        } else {
          hm = h0_ + drive * coupling_;
        }
        real_solver.compute(hm);
        if (real_solver.info() != Eigen::Success) {
          throw NumericalError("eigensolver failed during propagation");
        }
        decomposed = true;
      }
      const Eigen::MatrixXd& v = real_solver.eigenvectors();
      const Eigen::VectorXd& e = real_solver.eigenvalues();
      for (std::size_t k = 0; k < n; ++k) {
        const double phi = e(static_cast<Eigen::Index>(k)) * h;
        cosv[k] = std::cos(phi);
        sinv[k] = std::sin(phi);
      }
      kern.cmatvec_t(v.data(), n, n, psi.re.data(), psi.im.data(), cr.data(), ci.data());
      kern.phase_rotate(cr.data(), ci.data(), cosv.data(), sinv.data(), n);
      kern.cmatvec(v.data(), n, n, cr.data(), ci.data(), psi.re.data(), psi.im.data());
    } else {
      if (!(static_drive && decomposed)) {
        complex_solver.compute(h0_c_ + drive * coupling_c_);
        decomposed = true;
      }
      const ComplexMatrix& v = complex_solver.eigenvectors();
      const Eigen::VectorXd& e = complex_solver.eigenvalues();
      ComplexVector x(dim_);
      for (std::size_t k = 0; k < n; ++k) x(static_cast<Eigen::Index>(k)) = Complex(psi.re[k], psi.im[k]);
      ComplexVector c = v.adjoint() * x;
      for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::polar(1.0, -e(k) * h);
      x = v * c;
      for (std::size_t k = 0; k < n; ++k) {
        psi.re[k] = x(static_cast<Eigen::Index>(k)).real();
        psi.im[k] = x(static_cast<Eigen::Index>(k)).imag();
      }
    }
  };

  auto drive_at = [&](double time) { return amplitude * std::sin(omega * time); };
  auto step_once = [&](double t0, double h) {
    if (config.scheme == Integrator::midpoint) {
      apply_exponential(drive_at(t0 + 0.5 * h), h);
      return;
    }
    // Two-exponential fourth-order Magnus rule at the Gauss nodes. Both
    // halves share H0 with weight 1/2, so each is H0 plus a blended drive.
    const double d1 = drive_at(t0 + kGaussLow * h);
    const double d2 = drive_at(t0 + kGaussHigh * h);
    apply_exponential(2.0 * (kMagnusHeavy * d1 + kMagnusLight * d2), 0.5 * h);
    apply_exponential(2.0 * (kMagnusLight * d1 + kMagnusHeavy * d2), 0.5 * h);
  };

  double t = 0.0;
  for (std::size_t s = 0; s < config.sample_times.size(); ++s) {
    const double target = config.sample_times[s];
    const double span = target - t;
    if (span > 0.0) {
      const auto steps = static_cast<long>(std::max(1.0, std::ceil(span / config.step - 1e-9)));
      const double h = span / static_cast<double>(steps);
      for (long k = 0; k < steps; ++k) {
        step_once(t + static_cast<double>(k) * h, h);
      }
      t = target;
      check_norm(psi.norm(), t, h);
    }
    on_sample(s, psi);
  }
}

std::vector<StateVector> propagate(const Operator& h0, const DriveSpec& drive,
                                   const PropagationConfig& config,
                                   const StateVector& initial) {
  if (initial.dim() != h0.dim()) {
    throw std::invalid_argument("initial state dimension does not match H0");
  }
  if (!(drive.amplitude >= 0.0)) throw std::invalid_argument("drive amplitude must be >= 0");
  if (!(drive.omega > 0.0)) throw std::invalid_argument("drive frequency must be positive");
  const Propagator prop(h0, drive.coupling);
  SplitState psi = SplitState::from(initial);
  std::vector<StateVector> out;
  out.reserve(config.sample_times.size());
  prop.run(drive.amplitude, drive.omega, config, psi,
           [&](std::size_t, const SplitState& s) { out.push_back(s.to_state()); });
  return out;
}

std::vector<std::vector<double>> driven_observable_scan(
    const NetworkSpec& spec, const std::vector<double>& omega_grid,
    double measure_time, double drive_amplitude, double step, unsigned threads) {
  if (omega_grid.empty()) throw std::invalid_argument("omega grid is empty");
  const Operator h0 = build_hamiltonian(spec);
  const Operator c = build_drive_operator(spec);
  const Spectrum spectrum = diagonalize(h0);
  const StateVector ground = spectrum.state(0);
  double omega_max = 0.0;
  for (double w : omega_grid) {
    if (!(w > 0.0)) throw std::invalid_argument("drive frequencies must be positive");
    omega_max = std::max(omega_max, w);
  }
  PropagationConfig config{step > 0.0 ? step : default_step(omega_max), measure_time,
                           {measure_time}};
  const Propagator prop(h0, c);
  std::vector<std::vector<double>> out(omega_grid.size());
  parallel_for(omega_grid.size(), threads, [&](std::size_t k) {
    SplitState psi = SplitState::from(ground);
    prop.run(drive_amplitude, omega_grid[k], config, psi,
             [&](std::size_t, const SplitState& s) {
               out[k] = sigma_z_profile(s.to_state().amplitudes(), spec.n_qubits());
             });
  });
  return out;
}

HarmonicEstimate driven_harmonic_response(const NetworkSpec& spec,
                                          const Operator& observable,
                                          double amplitude, double omega,
                                          const HarmonicProtocol& protocol) {
  if (protocol.window_periods > protocol.total_periods || protocol.window_periods < 1 ||
      protocol.samples_per_period < 4) {
    throw std::invalid_argument("invalid harmonic extraction protocol");
  }
  const Operator h0 = build_hamiltonian(spec);
  const Spectrum spectrum = diagonalize(h0);
  const StateVector ground = spectrum.state(0);
  const double baseline = expectation(observable, ground);

  const double period = 2.0 * std::numbers::pi / omega;
  const int total = protocol.total_periods * protocol.samples_per_period;
  const int first = (protocol.total_periods - protocol.window_periods) *
                    protocol.samples_per_period;
  PropagationConfig config;
  config.step = protocol.step > 0.0 ? protocol.step : default_step(omega);
  config.t_max = protocol.total_periods * period;
  for (int k = 0; k <= total; ++k) {
    config.sample_times.push_back(config.t_max * k / total);
  }
  config.sample_times.back() = config.t_max;

  const Propagator prop(h0, build_drive_operator(spec));
  SplitState psi = SplitState::from(ground);
  const double window = protocol.window_periods * period;
  const double t0 = config.sample_times[static_cast<std::size_t>(first)];
  Complex projection{};
  double weight_sum = 0.0;
  prop.run(amplitude, omega, config, psi, [&](std::size_t k, const SplitState& s) {
    if (static_cast<int>(k) < first) return;
    const double t = config.sample_times[k];
    const double w = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * (t - t0) / window));
    const double delta = expectation(observable, s.to_state()) - baseline;
    projection += w * delta * std::polar(1.0, -omega * t);
    weight_sum += w;
  });
  // delta<A> = a sin(wt - phi) projects onto e^{-iwt} as a e^{-i phi} / (2i).
  const Complex z = Complex(0.0, 2.0) * projection / weight_sum;
  return {std::abs(z), -std::arg(z)};
}

}  // namespace fluxlattice
