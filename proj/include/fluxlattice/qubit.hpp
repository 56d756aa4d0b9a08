#pragma once

// Closed-form two-level flux-qubit quantities. Reduced units throughout:
// hbar = I_S = Phi_0 = 1, so energies are in hbar*omega_0 = I_S*Phi_0 and
// currents in I_S. The single-qubit Hamiltonian is -[eps sigma_z + delta sigma_x].

#include <Eigen/Dense>

namespace fluxlattice {

struct QubitParams {
  double i_s = 1.0;    ///< maximum loop current (> 0)
  double delta = 0.2;  ///< tunneling energy, sign allowed
  double f = 0.52;     ///< external flux in units of the flux quantum
};

/// Flux bias energy eps = i_s (f - 1/2).
double epsilon(const QubitParams& p);

struct QubitEigensystem {
  double e_minus = 0.0;
  double e_plus = 0.0;
  double cos_theta = 0.0;
  /// Amplitudes on (|up>, |down>).
  Eigen::Vector2d ground;
  Eigen::Vector2d excited;

  double gap() const { return e_plus - e_minus; }
};

/// Throws std::invalid_argument when eps = delta = 0 (mixing angle undefined).
QubitEigensystem single_qubit_eigensystem(const QubitParams& p);

/// Ground-state loop current i_s cos(theta); the excited state carries the
/// opposite value.
double ground_current(const QubitParams& p);

}  // namespace fluxlattice
