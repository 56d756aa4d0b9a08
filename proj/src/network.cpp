#include "fluxlattice/network.hpp"

#include <cmath>
#include <stdexcept>

#include "fluxlattice/error.hpp"
#include "fluxlattice/rng.hpp"

namespace fluxlattice {

std::string to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::linear: return "linear";
    case TopologyKind::cross: return "cross";
    case TopologyKind::isolated: return "isolated";
    case TopologyKind::custom: return "custom";
  }
  return "custom";
}

Topology::Topology(TopologyKind kind, Eigen::MatrixXd coupling)
    : kind_(kind), coupling_(std::move(coupling)) {
  const auto n = coupling_.rows();
  if (n < 1 || coupling_.cols() != n) {
    throw std::invalid_argument("coupling matrix must be square and non-empty");
  }
  if (n > kMaxQubits) {
    throw std::invalid_argument("too many qubits for dense simulation");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (coupling_(i, i) != 0.0) {
      throw std::invalid_argument("coupling matrix diagonal must be zero");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (coupling_(i, j) != coupling_(j, i)) {
        throw std::invalid_argument("coupling matrix must be symmetric");
      }
      if (coupling_(i, j) > 0.0) {
        throw std::invalid_argument(
            "mutual-inductance energies must be negative");
      }
    }
  }
}

namespace {
void require_negative(double coupling_energy) {
  if (!(coupling_energy < 0.0)) {
    throw std::invalid_argument("coupling energy must be negative, got " +
                                std::to_string(coupling_energy));
  }
}
}  // namespace

Topology Topology::linear(int n, double coupling_energy) {
  if (n < 2) throw std::invalid_argument("linear topology needs n >= 2");
  require_negative(coupling_energy);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    m(i, i + 1) = coupling_energy;
    m(i + 1, i) = coupling_energy;
  }
  return Topology(TopologyKind::linear, std::move(m));
}

Topology Topology::cross(double coupling_energy) {
  require_negative(coupling_energy);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(5, 5);
  constexpr int centre = 1;  // qubit 2
  for (int j : {0, 2, 3, 4}) {
    m(centre, j) = coupling_energy;
    m(j, centre) = coupling_energy;
  }
  return Topology(TopologyKind::cross, std::move(m));
}

Topology Topology::isolated(int n) {
  if (n < 1) throw std::invalid_argument("isolated topology needs n >= 1");
  return Topology(TopologyKind::isolated, Eigen::MatrixXd::Zero(n, n));
}

std::vector<int> Topology::degrees() const {
  std::vector<int> d(static_cast<std::size_t>(n_qubits()), 0);
  for (int i = 0; i < n_qubits(); ++i) {
    for (int j = 0; j < n_qubits(); ++j) {
      if (coupling_(i, j) != 0.0) ++d[static_cast<std::size_t>(i)];
    }
  }
  return d;
}

int Topology::edge_count() const {
  int nonzero = 0;
  for (int d : degrees()) nonzero += d;
  return nonzero / 2;
}

DisorderRealization sample_disorder(std::uint64_t seed, double amplitude, int n) {
  if (!(amplitude >= 0.0 && amplitude < 1.0)) {
    throw std::invalid_argument("disorder amplitude must lie in [0, 1)");
  }
  if (n < 1) throw std::invalid_argument("disorder needs n >= 1");
  Xoshiro256pp rng(seed);
  DisorderRealization d;
  d.seed = seed;
  d.amplitude = amplitude;
  d.lambda.resize(static_cast<std::size_t>(n));
  d.mu.resize(static_cast<std::size_t>(n));
  for (auto& x : d.lambda) x = rng.symmetric(amplitude);
  for (auto& x : d.mu) x = rng.symmetric(amplitude);
  return d;
}

std::vector<double> inhomogeneous_deltas(double delta, double dispersion, int n) {
  if (!(dispersion >= 0.0 && dispersion < 1.0)) {
    throw std::invalid_argument("tunneling dispersion must lie in [0, 1)");
  }
  if (n < 1) throw std::invalid_argument("need at least one qubit");
  std::vector<double> out(static_cast<std::size_t>(n), delta);
  if (n == 1) return out;
  const double lo = delta * (1.0 - dispersion);
  const double hi = delta * (1.0 + dispersion);
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    out[static_cast<std::size_t>(i)] = lo + t * (hi - lo);
  }
  out.back() = hi;
  return out;
}

NetworkSpec NetworkSpec::uniform(const QubitParams& base, Topology topology) {
  NetworkSpec spec;
  spec.base = base;
  const int n = topology.n_qubits();
  spec.topology = std::move(topology);
  spec.delta_profile.assign(static_cast<std::size_t>(n), base.delta);
  spec.drive_weights = uniform_drive_weights(n);
  return spec;
}

double NetworkSpec::current_scale(int i) const {
  return disorder ? 1.0 + disorder->lambda[static_cast<std::size_t>(i - 1)] : 1.0;
}

double NetworkSpec::tunneling(int i) const {
  const double mu = disorder ? disorder->mu[static_cast<std::size_t>(i - 1)] : 0.0;
  return delta_profile[static_cast<std::size_t>(i - 1)] * (1.0 + mu);
}

double NetworkSpec::bias(int i) const {
  return base.i_s * current_scale(i) * (base.f - 0.5);
}

void NetworkSpec::validate() const {
  const auto n = static_cast<std::size_t>(n_qubits());
  if (delta_profile.size() != n) {
    throw ConfigError("network.delta_profile",
                      "length " + std::to_string(delta_profile.size()) +
                          " does not match " + std::to_string(n) + " qubits");
  }
  if (drive_weights.size() != n) {
    throw ConfigError("network.drive_weights",
                      "length " + std::to_string(drive_weights.size()) +
                          " does not match " + std::to_string(n) + " qubits");
  }
  if (!(base.i_s > 0.0)) {
    throw ConfigError("network.i_s", "loop current must be positive");
  }
  if (!std::isfinite(base.f)) throw ConfigError("network.f", "must be finite");
  if (disorder) {
    if (disorder->lambda.size() != n || disorder->mu.size() != n) {
      throw ConfigError("network.disorder", "vector lengths do not match qubits");
    }
    for (int i = 1; i <= n_qubits(); ++i) {
      if (!(base.i_s * current_scale(i) > 0.0)) {
        throw ConfigError("network.disorder",
                          "loop current of qubit " + std::to_string(i) +
                              " is not positive");
      }
    }
  }
}

std::vector<double> uniform_drive_weights(int n) {
  return std::vector<double>(static_cast<std::size_t>(n), 1.0);
}

std::vector<double> single_site_drive_weights(int n, int site) {
  if (site < 1 || site > n) throw std::out_of_range("drive site out of range");
  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  w[static_cast<std::size_t>(site - 1)] = 1.0;
  return w;
}

Operator build_hamiltonian(const NetworkSpec& spec) {
  spec.validate();
  const int n = spec.n_qubits();
  const std::size_t dim = std::size_t{1} << n;
  std::vector<double> eps(static_cast<std::size_t>(n));
  std::vector<double> scale(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    eps[static_cast<std::size_t>(i - 1)] = spec.bias(i);
    scale[static_cast<std::size_t>(i - 1)] = spec.current_scale(i);
  }
  const Eigen::MatrixXd& m = spec.topology.coupling();

  ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
  for (std::size_t k = 0; k < dim; ++k) {
    double diag = 0.0;
    for (int i = 1; i <= n; ++i) {
      const int zi = sigma_z_sign(k, i, n);
      diag -= eps[static_cast<std::size_t>(i - 1)] * zi;
      // Each unordered pair once; the 1/2 of the i != j double sum cancels.
      for (int j = i + 1; j <= n; ++j) {
        const double mij = m(i - 1, j - 1);
        if (mij == 0.0) continue;
        diag += mij * scale[static_cast<std::size_t>(i - 1)] *
                scale[static_cast<std::size_t>(j - 1)] * zi * sigma_z_sign(k, j, n);
      }
    }
    const auto r = static_cast<Eigen::Index>(k);
    h(r, r) = diag;
    for (int i = 1; i <= n; ++i) {
      const std::size_t partner = k ^ (std::size_t{1} << (n - i));
      h(static_cast<Eigen::Index>(partner), r) = -spec.tunneling(i);
    }
  }
  return Operator(std::move(h));
}

Operator build_drive_operator(const NetworkSpec& spec) {
  spec.validate();
  std::vector<double> w(spec.drive_weights);
  for (int i = 1; i <= spec.n_qubits(); ++i) {
    w[static_cast<std::size_t>(i - 1)] *= spec.current_scale(i);
  }
  return weighted_sigma_z_sum(w);
}

Operator permute_qubits(const Operator& op, std::span<const int> perm) {
  const int n = op.n_qubits();
  if (static_cast<int>(perm.size()) != n) {
    throw std::invalid_argument("permutation length must equal qubit count");
  }
  const std::size_t dim = std::size_t{1} << n;
  std::vector<std::size_t> map(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    std::size_t out = 0;
    for (int i = 1; i <= n; ++i) {
      if ((k >> (n - i)) & 1U) out |= std::size_t{1} << (n - perm[static_cast<std::size_t>(i - 1)]);
    }
    map[k] = out;
  }
  ComplexMatrix m(dim, dim);
  for (std::size_t a = 0; a < dim; ++a) {
    for (std::size_t b = 0; b < dim; ++b) {
      m(static_cast<Eigen::Index>(map[a]), static_cast<Eigen::Index>(map[b])) =
          op.matrix()(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
  }
  return Operator(std::move(m));
}

}  // namespace fluxlattice
