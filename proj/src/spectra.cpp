#include "fluxlattice/spectra.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fluxlattice {

namespace {

// Largest-magnitude component made real-positive; first index wins ties.
void fix_phases(ComplexMatrix& v) {
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      const double mag = std::abs(v(i, k));
      if (mag > best * (1.0 + 1e-12)) {
        best = mag;
        arg = i;
      }
    }
    const Complex phase = std::conj(v(arg, k)) / std::abs(v(arg, k));
    v.col(k) *= phase;
    v(arg, k) = std::abs(v(arg, k));
  }
}

void require_level(const Spectrum& s, int level) {
  if (level < 0 || level >= s.dim()) {
    throw std::out_of_range("level " + std::to_string(level) + " outside [0, " +
                            std::to_string(s.dim()) + ")");
  }
}

void require_qubit(const Spectrum& s, int q) {
  if (q < 1 || q > s.n_qubits()) {
    throw std::out_of_range("qubit " + std::to_string(q) + " outside [1, " +
                            std::to_string(s.n_qubits()) + "]");
  }
}

}  // namespace

Spectrum::Spectrum(Eigen::VectorXd eigenvalues, ComplexMatrix eigenvectors)
    : eigenvalues_(std::move(eigenvalues)), eigenvectors_(std::move(eigenvectors)) {
  if (eigenvectors_.rows() != eigenvalues_.size() ||
      eigenvectors_.cols() != eigenvalues_.size()) {
    throw std::invalid_argument("eigenvector matrix shape mismatch");
  }
  n_qubits_ = qubits_for_dim(eigenvalues_.size());
  real_ = (eigenvectors_.imag().array() == 0.0).all();
}

StateVector Spectrum::state(int level) const {
  require_level(*this, level);
  return StateVector(eigenvectors_.col(level));
}

bool Spectrum::ground_is_degenerate() const {
  return dim() > 1 && eigenvalues_(1) - eigenvalues_(0) < kDegenerateGroundGap;
}

Spectrum diagonalize(const Operator& h) {
  const double scale = std::max(1.0, h.matrix().cwiseAbs().maxCoeff());
  if (!h.is_hermitian(1e-12 * scale)) {
    throw std::invalid_argument("diagonalize: operator is not Hermitian");
  }
  ComplexMatrix vectors;
  Eigen::VectorXd values;
  if (h.is_real()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.real_part());
    if (es.info() != Eigen::Success) {
      throw std::runtime_error("eigensolver failed to converge");
    }
    values = es.eigenvalues();
    vectors = es.eigenvectors().cast<Complex>();
  } else {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h.matrix());
    if (es.info() != Eigen::Success) {
      throw std::runtime_error("eigensolver failed to converge");
    }
    values = es.eigenvalues();
    vectors = es.eigenvectors();
  }
  fix_phases(vectors);
  return Spectrum(std::move(values), std::move(vectors));
}

std::vector<double> sigma_z_profile(const ComplexVector& amplitudes, int n_qubits) {
  std::vector<double> z(static_cast<std::size_t>(n_qubits), 0.0);
  for (Eigen::Index k = 0; k < amplitudes.size(); ++k) {
    const double p = std::norm(amplitudes(k));
    for (int i = 1; i <= n_qubits; ++i) {
      z[static_cast<std::size_t>(i - 1)] +=
          p * sigma_z_sign(static_cast<std::size_t>(k), i, n_qubits);
    }
  }
  return z;
}

std::vector<double> loop_currents(const Spectrum& s, int level,
                                  const NetworkSpec& spec) {
  require_level(s, level);
  if (spec.n_qubits() != s.n_qubits()) {
    throw std::invalid_argument("network and spectrum sizes differ");
  }
  auto z = sigma_z_profile(s.eigenvectors().col(level), s.n_qubits());
  for (int i = 1; i <= s.n_qubits(); ++i) {
    z[static_cast<std::size_t>(i - 1)] *= spec.current_scale(i);
  }
  return z;
}

double current_correlation(const Spectrum& s, int level, int i, int j) {
  require_level(s, level);
  require_qubit(s, i);
  require_qubit(s, j);
  const int n = s.n_qubits();
  double zi = 0.0;
  double zj = 0.0;
  double zij = 0.0;
  const auto v = s.eigenvectors().col(level);
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double p = std::norm(v(k));
    const int a = sigma_z_sign(static_cast<std::size_t>(k), i, n);
    const int b = sigma_z_sign(static_cast<std::size_t>(k), j, n);
    zi += p * a;
    zj += p * b;
    zij += p * a * b;
  }
  return zij - zi * zj;
}

double static_flux(const Spectrum& s) {
  double total = 0.0;
  for (double z : sigma_z_profile(s.eigenvectors().col(0), s.n_qubits())) total += z;
  return total;
}

std::vector<std::vector<int>> degeneracy_groups(const Spectrum& s, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("degeneracy tolerance must be positive");
  std::vector<std::vector<int>> groups;
  const auto& e = s.eigenvalues();
  for (int k = 0; k < s.dim(); ++k) {
    if (k == 0 || e(k) - e(k - 1) >= tol) groups.emplace_back();
    groups.back().push_back(k);
  }
  return groups;
}

}  // namespace fluxlattice
