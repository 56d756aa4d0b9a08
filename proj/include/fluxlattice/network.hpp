#pragma once

// Inductively coupled flux-qubit networks: coupling graphs, fabrication
// disorder, tunneling-energy profiles and the Hamiltonian / line-coupling
// operators built from them.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fluxlattice/pauli.hpp"
#include "fluxlattice/qubit.hpp"

namespace fluxlattice {

enum class TopologyKind { linear, cross, isolated, custom };

std::string to_string(TopologyKind kind);

/// Symmetric matrix of mutual-inductance energies m_ij = M_ij I_S^2 (units
/// hbar*omega_0) with zero diagonal and non-positive entries.
class Topology {
 public:
  /// Validates symmetry, zero diagonal and sign; throws std::invalid_argument.
  Topology(TopologyKind kind, Eigen::MatrixXd coupling);

  /// Nearest-neighbour chain 1-2-...-n.
  static Topology linear(int n, double coupling_energy);
  /// Five-qubit star with qubit 2 at the centre.
  static Topology cross(double coupling_energy);
  /// n qubits, no coupling at all.
  static Topology isolated(int n);

  TopologyKind kind() const noexcept { return kind_; }
  int n_qubits() const noexcept { return static_cast<int>(coupling_.rows()); }
  const Eigen::MatrixXd& coupling() const noexcept { return coupling_; }
  /// Coupling energy between 1-based qubits i and j.
  double energy(int i, int j) const { return coupling_(i - 1, j - 1); }

  std::vector<int> degrees() const;
  int edge_count() const;

 private:
  TopologyKind kind_;
  Eigen::MatrixXd coupling_;
};

/// Fractional shifts of loop current (lambda) and tunneling energy (mu).
struct DisorderRealization {
  std::vector<double> lambda;
  std::vector<double> mu;
  std::uint64_t seed = 0;
  double amplitude = 0.0;
};

/// 2n uniform draws in [-amplitude, amplitude] from xoshiro256++(seed):
/// lambda_1..lambda_n first, then mu_1..mu_n. Throws for amplitude outside [0, 1).
DisorderRealization sample_disorder(std::uint64_t seed, double amplitude, int n);

/// n values linearly spaced from delta(1 - dispersion) to delta(1 + dispersion),
/// qubit 1 first.
std::vector<double> inhomogeneous_deltas(double delta, double dispersion, int n);

struct NetworkSpec {
  QubitParams base;
  Topology topology = Topology::isolated(1);
  std::optional<DisorderRealization> disorder;
  /// Per-qubit tunneling energies before disorder.
  std::vector<double> delta_profile;
  /// Dimensionless coupling profile to the transmission line.
  std::vector<double> drive_weights;

  /// Uniform Delta = base.delta and uniform line coupling.
  static NetworkSpec uniform(const QubitParams& base, Topology topology);

  int n_qubits() const noexcept { return topology.n_qubits(); }
  /// 1 + lambda_i for 1-based qubit i (1 without disorder).
  double current_scale(int i) const;
  /// Delta_i (1 + mu_i).
  double tunneling(int i) const;
  /// i_s (1 + lambda_i) (f - 1/2).
  double bias(int i) const;

  /// Throws ConfigError on inconsistent lengths or non-positive loop currents.
  void validate() const;
};

/// Line-coupling profiles used by the figures: every qubit, or one site.
std::vector<double> uniform_drive_weights(int n);
std::vector<double> single_site_drive_weights(int n, int site);

/// H0 = sum_i -[eps_i sz_i + Delta_i sx_i]
///      + 1/2 sum_{i != j} m_ij (1+lambda_i)(1+lambda_j) sz_i sz_j.
/// Assembled directly in the computational basis; real-symmetric.
Operator build_hamiltonian(const NetworkSpec& spec);

/// C = sum_i w_i (1 + lambda_i) sz_i so that H_I(t) = f(t) C.
Operator build_drive_operator(const NetworkSpec& spec);

/// Permutes tensor factors: qubit i of the input becomes qubit perm[i-1].
/// `perm` is 1-based. Used to check spatial symmetries of H0.
Operator permute_qubits(const Operator& op, std::span<const int> perm);

}  // namespace fluxlattice
