#include "fluxlattice/qubit.hpp"

#include <cmath>
#include <stdexcept>

namespace fluxlattice {

double epsilon(const QubitParams& p) { return p.i_s * (p.f - 0.5); }

QubitEigensystem single_qubit_eigensystem(const QubitParams& p) {
  const double eps = epsilon(p);
  const double e = std::hypot(eps, p.delta);
  if (e == 0.0) {
    throw std::invalid_argument(
        "single-qubit eigensystem undefined for eps = delta = 0");
  }
  QubitEigensystem out;
  out.e_minus = -e;
  out.e_plus = e;
  out.cos_theta = eps / e;
  const double a = std::sqrt((1.0 + out.cos_theta) / 2.0);
  const double b = std::sqrt((1.0 - out.cos_theta) / 2.0);
  // A negative delta is the same problem conjugated by sigma_z.
  const double s = p.delta < 0.0 ? -1.0 : 1.0;
  out.ground = {a, s * b};
  out.excited = {b, -s * a};
  return out;
}

double ground_current(const QubitParams& p) {
  return p.i_s * single_qubit_eigensystem(p).cos_theta;
}

}  // namespace fluxlattice
