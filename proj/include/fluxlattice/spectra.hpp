#pragma once

// Exact diagonalization and eigenstate observables.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "fluxlattice/network.hpp"
#include "fluxlattice/pauli.hpp"

namespace fluxlattice {

/// Bottom gap below which the ground state is reported as degenerate.
inline constexpr double kDegenerateGroundGap = 1e-12;

/// Default tolerance for grouping nearly degenerate levels (hbar*omega_0).
inline constexpr double kDefaultDegeneracyTolerance = 0.02;

class Spectrum {
 public:
  Spectrum(Eigen::VectorXd eigenvalues, ComplexMatrix eigenvectors);

  int dim() const noexcept { return static_cast<int>(eigenvalues_.size()); }
  int n_qubits() const noexcept { return n_qubits_; }
  /// Ascending.
  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
  /// Column k belongs to eigenvalue k; its largest-magnitude component is
  /// real and positive.
  const ComplexMatrix& eigenvectors() const noexcept { return eigenvectors_; }
  /// True when every eigenvector is real (real-symmetric input).
  bool is_real() const noexcept { return real_; }

  StateVector state(int level) const;
  /// E_1 - E_0 < kDegenerateGroundGap.
  bool ground_is_degenerate() const;

 private:
  Eigen::VectorXd eigenvalues_;
  ComplexMatrix eigenvectors_;
  int n_qubits_ = 0;
  bool real_ = false;
};

/// Full eigensystem of a Hermitian operator. Real-symmetric input is solved
/// in real arithmetic. Throws std::invalid_argument for non-Hermitian input.
Spectrum diagonalize(const Operator& h);

/// <level| (1 + lambda_i) sz_i |level> for each qubit, in units of I_S.
std::vector<double> loop_currents(const Spectrum& s, int level,
                                  const NetworkSpec& spec);

/// <sz_i sz_j> - <sz_i><sz_j> on eigenstate `level`; qubits 1-based.
double current_correlation(const Spectrum& s, int level, int i, int j);

/// Sum of ground-state <sz_i> (sensing-loop flux up to a constant).
double static_flux(const Spectrum& s);

/// Maximal runs of consecutive levels whose neighbouring gaps are < tol.
/// Level indices are 0-based.
std::vector<std::vector<int>> degeneracy_groups(const Spectrum& s, double tol);

/// <sz_i> for every qubit of a state, computed from basis populations.
std::vector<double> sigma_z_profile(const ComplexVector& amplitudes, int n_qubits);

}  // namespace fluxlattice
