#pragma once

// Dense many-qubit operators built from Pauli matrices by tensor-product
// embedding. Qubit 1 is the leftmost tensor factor, i.e. the most significant
// bit of a computational-basis index; bit value 0 is |up> (sigma_z = +1).

#include <complex>
#include <cstddef>
#include <span>

#include <Eigen/Dense>

namespace fluxlattice {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Largest register the dense representation accepts (2^14 = 16384 states).
inline constexpr int kMaxQubits = 14;

enum class PauliKind { identity, sigma_x, sigma_z };

/// sigma_z eigenvalue (+1 or -1) of `site` (1-based) in basis state `index`.
inline int sigma_z_sign(std::size_t index, int site, int n_qubits) {
  return ((index >> (n_qubits - site)) & 1U) ? -1 : 1;
}

class Operator {
 public:
  /// Takes ownership of a square matrix whose dimension is a power of two.
  explicit Operator(ComplexMatrix matrix);

  static Operator zero(int n_qubits);
  static Operator identity(int n_qubits);

  int dim() const noexcept { return static_cast<int>(matrix_.rows()); }
  int n_qubits() const noexcept { return n_qubits_; }
  const ComplexMatrix& matrix() const noexcept { return matrix_; }

  bool is_hermitian(double tol = 1e-12) const;
  /// True when every imaginary part is exactly zero.
  bool is_real() const;
  /// Real part as a dense real matrix (callers check is_real first).
  Eigen::MatrixXd real_part() const { return matrix_.real(); }

  Operator operator+(const Operator& other) const;
  Operator operator-(const Operator& other) const;
  Operator operator*(const Operator& other) const;
  Operator operator*(double scale) const;

 private:
  ComplexMatrix matrix_;
  int n_qubits_ = 0;
};

inline Operator operator*(double scale, const Operator& op) { return op * scale; }

class StateVector {
 public:
  /// Rejects vectors whose Euclidean norm differs from 1 by more than 1e-10.
  explicit StateVector(ComplexVector amplitudes);

  static StateVector basis(int dim, std::size_t index);

  int dim() const noexcept { return static_cast<int>(amplitudes_.size()); }
  const ComplexVector& amplitudes() const noexcept { return amplitudes_; }

 private:
  ComplexVector amplitudes_;
};

/// I x ... x P x ... x I with P on `site` (1-based).
Operator embed_single_site(PauliKind kind, int site, int n_qubits);

/// sum_i w_i sigma_z^(i); real diagonal.
Operator weighted_sigma_z_sum(std::span<const double> weights);

/// <psi|op|psi>. Throws if dimensions differ or the imaginary part exceeds
/// 1e-10 (op not Hermitian).
double expectation(const Operator& op, const StateVector& state);

Operator commutator(const Operator& a, const Operator& b);

/// Number of qubits for a power-of-two dimension; throws otherwise.
int qubits_for_dim(std::ptrdiff_t dim);

}  // namespace fluxlattice
