#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>

#include "fluxlattice/dynamics.hpp"
#include "fluxlattice/error.hpp"
#include "fluxlattice/network.hpp"
#include "fluxlattice/response.hpp"
#include "fluxlattice/spectra.hpp"

using namespace fluxlattice;

namespace {

NetworkSpec qrc_network(Topology t) {
  NetworkSpec spec = NetworkSpec::uniform({1.0, 0.2, 0.45}, std::move(t));
  spec.delta_profile = inhomogeneous_deltas(0.2, 0.1, 5);
  if (spec.topology.kind() == TopologyKind::cross) spec.drive_weights = single_site_drive_weights(5, 5);
  return spec;
}

PropagationConfig schedule(double step, double t_max, int samples) {
  PropagationConfig c{step, t_max, {}};
  for (int k = 0; k < samples; ++k) c.sample_times.push_back(t_max * k / (samples - 1));
  return c;
}

}  // namespace

TEST_CASE("stationary states without drive") {
  const NetworkSpec spec = qrc_network(Topology::linear(5, -0.2));
  const Operator h0 = build_hamiltonian(spec);
  const Spectrum s = diagonalize(h0);
  const DriveSpec drive{0.0, 0.4, build_drive_operator(spec)};
  const auto config = schedule(0.05, 20.0, 5);

  const auto ground = propagate(h0, drive, config, s.state(0));
  const auto z0 = sigma_z_profile(s.state(0).amplitudes(), 5);
  for (const auto& psi : ground) {
    const auto z = sigma_z_profile(psi.amplitudes(), 5);
    for (int i = 0; i < 5; ++i) CHECK(std::abs(z[i] - z0[i]) < 1e-10);
  }

  const int level = 7;
  const auto excited = propagate(h0, drive, config, s.state(level));
  for (std::size_t k = 0; k < excited.size(); ++k) {
    const double t = config.sample_times[k];
    const ComplexVector expect =
        s.state(level).amplitudes() * std::polar(1.0, -s.eigenvalues()(level) * t);
    CHECK((excited[k].amplitudes() - expect).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("complex Hamiltonians take the general path") {
  ComplexMatrix h(2, 2);
  h << 0.3, Complex(0.1, -0.2), Complex(0.1, 0.2), -0.1;
  const Operator h0(h);
  const Operator c = embed_single_site(PauliKind::sigma_z, 1, 1);
  // Static: compare with the exact exponential.
  const auto out = propagate(h0, {0.0, 1.0, c}, schedule(0.1, 3.0, 2), StateVector::basis(2, 0));
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  const ComplexMatrix u = es.eigenvectors() *
                          (es.eigenvalues() * Complex(0.0, -3.0)).array().exp().matrix().asDiagonal() *
                          es.eigenvectors().adjoint();
  CHECK((out.back().amplitudes() - u.col(0)).cwiseAbs().maxCoeff() < 1e-12);
  // Driven: stays normalized.
  const auto driven = propagate(h0, {0.3, 0.7, c}, schedule(0.05, 30.0, 7), StateVector::basis(2, 1));
  for (const auto& psi : driven) CHECK(std::abs(psi.amplitudes().norm() - 1.0) < 1e-10);
}

TEST_CASE("propagator integrity at reservoir parameters") {
  const double t_max = 2.0 * std::numbers::pi / 0.2;
  for (auto topo : {Topology::linear(5, -0.2), Topology::cross(-0.2)}) {
    const NetworkSpec spec = qrc_network(topo);
    const Operator h0 = build_hamiltonian(spec);
    const Spectrum s = diagonalize(h0);
    for (double w : {0.2, 0.4, 0.6}) {
      CAPTURE(w);
      const DriveSpec drive{1e-3, w, build_drive_operator(spec)};
      const double h = default_step(0.6);
      const auto coarse = propagate(h0, drive, schedule(h, t_max, 6), s.state(0));
      const auto fine = propagate(h0, drive, schedule(h / 2, t_max, 6), s.state(0));
      for (std::size_t k = 0; k < coarse.size(); ++k) {
        CHECK(std::abs(coarse[k].amplitudes().norm() - 1.0) < 1e-8);
        const auto a = sigma_z_profile(coarse[k].amplitudes(), 5);
        const auto b = sigma_z_profile(fine[k].amplitudes(), 5);
        for (int i = 0; i < 5; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-8);
        const double overlap = std::abs(s.state(0).amplitudes().dot(coarse[k].amplitudes()));
        CHECK(overlap > 0.99);
      }
    }
  }
}

TEST_CASE("linear response agreement for one and two qubits") {
  const std::vector<NetworkSpec> specs = {
      NetworkSpec::uniform({1.0, 0.2, 0.52}, Topology::isolated(1)),
      NetworkSpec::uniform({1.0, 0.2, 0.52}, Topology::linear(2, -0.2))};
  for (const auto& spec : specs) {
    const int n = spec.n_qubits();
    const Spectrum s = diagonalize(build_hamiltonian(spec));
    const Complex chi = susceptibility(s, ResponseProbe::uniform(n), spec, 0.1);
    const Operator observable = build_drive_operator(spec);
    const auto lin = driven_harmonic_response(spec, observable, 1e-4, 0.1, {});
    const double expect = 1e-4 * std::abs(chi);
    CHECK(std::abs(lin.amplitude - expect) / expect < 0.05);
    const double dphi = std::remainder(lin.phase - std::arg(chi), 2.0 * std::numbers::pi);
    CHECK(std::abs(dphi) < 0.05);

    const auto strong = driven_harmonic_response(spec, observable, 1e-2, 0.1, {});
    const double mismatch_weak = std::abs(lin.amplitude / 1e-4 - std::abs(chi));
    const double mismatch_strong = std::abs(strong.amplitude / 1e-2 - std::abs(chi));
    CHECK(mismatch_strong > mismatch_weak);
  }
}

TEST_CASE("driven scan") {
  const NetworkSpec spec = qrc_network(Topology::linear(5, -0.2));
  const std::vector<double> grid = {0.2, 0.35, 0.5};
  const auto flat = driven_observable_scan(spec, grid, 10.0, 0.0, 0.0, 1);
  const auto z0 = sigma_z_profile(diagonalize(build_hamiltonian(spec)).state(0).amplitudes(), 5);
  for (const auto& row : flat)
    for (int i = 0; i < 5; ++i) CHECK(std::abs(row[i] - z0[i]) < 1e-10);

  const auto a = driven_observable_scan(spec, grid, 10.0, 1e-3, 0.0, 1);
  const auto b = driven_observable_scan(spec, grid, 10.0, 1e-3, 0.0, 3);
  CHECK(a == b);
  CHECK_THROWS(driven_observable_scan(spec, std::vector<double>{}, 10.0, 1e-3));
  CHECK_THROWS(driven_observable_scan(spec, std::vector<double>{-0.1}, 10.0, 1e-3));
}

TEST_CASE("configuration checks") {
  const Operator h0 = build_hamiltonian(NetworkSpec::uniform({}, Topology::isolated(1)));
  const Operator c = embed_single_site(PauliKind::sigma_z, 1, 1);
  const StateVector psi = StateVector::basis(2, 0);
  CHECK_THROWS(propagate(h0, {1e-3, 0.1, c}, {0.0, 1.0, {1.0}}, psi));
  CHECK_THROWS(propagate(h0, {1e-3, 0.1, c}, {0.1, 1.0, {0.5, 0.2}}, psi));
  CHECK_THROWS(propagate(h0, {1e-3, 0.1, c}, {0.1, 1.0, {2.0}}, psi));
  CHECK_THROWS(propagate(h0, {-1.0, 0.1, c}, {0.1, 1.0, {1.0}}, psi));
  CHECK_THROWS(propagate(h0, {1e-3, 0.1, c}, {0.1, 1.0, {1.0}}, StateVector::basis(4, 0)));
  CHECK(default_step(0.6) == doctest::Approx(2.0 * std::numbers::pi / (256.0 * 0.6)));
}

TEST_CASE("midpoint option is unitary and second order") {
  const NetworkSpec spec = qrc_network(Topology::linear(5, -0.2));
  const Operator h0 = build_hamiltonian(spec);
  const Spectrum s = diagonalize(h0);
  const DriveSpec drive{0.05, 0.4, build_drive_operator(spec)};
  const double t_max = 20.0;
  auto final_z = [&](double h, Integrator scheme) {
    PropagationConfig c{h, t_max, {t_max}, scheme};
    const auto out = propagate(h0, drive, c, s.state(0));
    CHECK(std::abs(out.back().amplitudes().norm() - 1.0) < 1e-10);
    return sigma_z_profile(out.back().amplitudes(), 5);
  };
  const auto ref = final_z(0.005, Integrator::magnus4);
  const auto coarse = final_z(0.1, Integrator::midpoint);
  const auto fine = final_z(0.05, Integrator::midpoint);
  double e_coarse = 0.0, e_fine = 0.0;
  for (int i = 0; i < 5; ++i) {
    e_coarse = std::max(e_coarse, std::abs(coarse[i] - ref[i]));
    e_fine = std::max(e_fine, std::abs(fine[i] - ref[i]));
  }
  // Halving h cuts a second-order error by about four.
  CHECK(e_coarse / e_fine > 3.0);
  CHECK(e_coarse / e_fine < 5.0);
}
