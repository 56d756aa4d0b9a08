#include "fluxlattice/pauli.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fluxlattice {

int qubits_for_dim(std::ptrdiff_t dim) {
  if (dim < 1 || (dim & (dim - 1)) != 0) {
    throw std::invalid_argument("operator dimension " + std::to_string(dim) +
                                " is not a power of two");
  }
  int n = 0;
  while ((std::ptrdiff_t{1} << n) < dim) ++n;
  if (n > kMaxQubits) {
    throw std::invalid_argument("operator on " + std::to_string(n) +
                                " qubits exceeds the dense limit of " +
                                std::to_string(kMaxQubits));
  }
  return n;
}

Operator::Operator(ComplexMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) {
    throw std::invalid_argument("operator matrix must be square");
  }
  n_qubits_ = qubits_for_dim(matrix_.rows());
}

Operator Operator::zero(int n_qubits) {
  const auto dim = std::ptrdiff_t{1} << n_qubits;
  return Operator(ComplexMatrix::Zero(dim, dim));
}

Operator Operator::identity(int n_qubits) {
  const auto dim = std::ptrdiff_t{1} << n_qubits;
  return Operator(ComplexMatrix::Identity(dim, dim));
}

bool Operator::is_hermitian(double tol) const {
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool Operator::is_real() const {
  return (matrix_.imag().array() == 0.0).all();
}

namespace {
void require_same_dim(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("operator dimensions differ: " +
                                std::to_string(a.dim()) + " vs " +
                                std::to_string(b.dim()));
  }
}
}  // namespace

Operator Operator::operator+(const Operator& other) const {
  require_same_dim(*this, other);
  return Operator(matrix_ + other.matrix_);
}

Operator Operator::operator-(const Operator& other) const {
  require_same_dim(*this, other);
  return Operator(matrix_ - other.matrix_);
}

Operator Operator::operator*(const Operator& other) const {
  require_same_dim(*this, other);
  return Operator(matrix_ * other.matrix_);
}

Operator Operator::operator*(double scale) const {
  return Operator(matrix_ * scale);
}

StateVector::StateVector(ComplexVector amplitudes)
    : amplitudes_(std::move(amplitudes)) {
  qubits_for_dim(amplitudes_.size());
  const double norm = amplitudes_.norm();
  if (std::abs(norm - 1.0) > 1e-10) {
    throw std::invalid_argument("state vector norm " + std::to_string(norm) +
                                " differs from 1");
  }
}

StateVector StateVector::basis(int dim, std::size_t index) {
  if (index >= static_cast<std::size_t>(dim)) {
    throw std::out_of_range("basis index out of range");
  }
  ComplexVector v = ComplexVector::Zero(dim);
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return StateVector(std::move(v));
}

Operator embed_single_site(PauliKind kind, int site, int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw std::invalid_argument("n_qubits must lie in [1, " +
                                std::to_string(kMaxQubits) + "]");
  }
  if (site < 1 || site > n_qubits) {
    throw std::out_of_range("site " + std::to_string(site) +
                            " outside [1, " + std::to_string(n_qubits) + "]");
  }
  const std::size_t dim = std::size_t{1} << n_qubits;
  const std::size_t flip = std::size_t{1} << (n_qubits - site);
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (std::size_t k = 0; k < dim; ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    switch (kind) {
      case PauliKind::identity:
        m(r, r) = 1.0;
        break;
      case PauliKind::sigma_z:
        m(r, r) = sigma_z_sign(k, site, n_qubits);
        break;
      case PauliKind::sigma_x:
        m(static_cast<Eigen::Index>(k ^ flip), r) = 1.0;
        break;
    }
  }
  return Operator(std::move(m));
}

Operator weighted_sigma_z_sum(std::span<const double> weights) {
  if (weights.empty()) {
    throw std::invalid_argument("weighted_sigma_z_sum needs at least one weight");
  }
  const int n = static_cast<int>(weights.size());
  if (n > kMaxQubits) {
    throw std::invalid_argument("too many qubits for a dense operator");
  }
  const std::size_t dim = std::size_t{1} << n;
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (std::size_t k = 0; k < dim; ++k) {
    double d = 0.0;
    for (int i = 1; i <= n; ++i) d += weights[i - 1] * sigma_z_sign(k, i, n);
    m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = d;
  }
  return Operator(std::move(m));
}

double expectation(const Operator& op, const StateVector& state) {
  if (op.dim() != state.dim()) {
    throw std::invalid_argument("expectation: operator dim " +
                                std::to_string(op.dim()) + " vs state dim " +
                                std::to_string(state.dim()));
  }
  const Complex value = state.amplitudes().dot(op.matrix() * state.amplitudes());
  if (std::abs(value.imag()) > 1e-10) {
    throw std::invalid_argument(
        "expectation has imaginary part " + std::to_string(value.imag()) +
        "; operator is not Hermitian");
  }
  return value.real();
}

Operator commutator(const Operator& a, const Operator& b) {
  return a * b - b * a;
}

}  // namespace fluxlattice
