#pragma once

// Inner-loop kernels shared by the propagator, the observable readout, the
// spectral response sums and the reservoir recursion.
//
// Every kernel exists as a scalar reference implementation and, on x86-64
// builds, as an AVX2/FMA variant. The variant is chosen once at runtime from
// CPUID; FLUXLATTICE_SIMD=scalar in the environment forces the reference path.
// Matrices are dense, column-major (Eigen's default layout) and real: all
// Hamiltonians handled by the hot loops are real-symmetric, so complex vectors
// are carried as split real/imaginary arrays.

#include <cstddef>
#include <string_view>

namespace fluxlattice::simd {

struct KernelTable {
  std::string_view name;

  /// y = M x for complex x = xr + i xi, M real rows x cols.
  void (*cmatvec)(const double* m, std::size_t rows, std::size_t cols,
                  const double* xr, const double* xi, double* yr, double* yi);

  /// y = M^T x for complex x, M real rows x cols (y has cols entries).
  void (*cmatvec_t)(const double* m, std::size_t rows, std::size_t cols,
                    const double* xr, const double* xi, double* yr, double* yi);

  /// y = M^T x, all real.
  void (*rmatvec_t)(const double* m, std::size_t rows, std::size_t cols,
                    const double* x, double* y);

  /// (re + i im) <- (re + i im) * (c - i s), elementwise. Applies e^{-i phi}
  /// given c = cos(phi), s = sin(phi).
  void (*phase_rotate)(double* re, double* im, const double* c,
                       const double* s, std::size_t n);

  /// out = re^2 + im^2.
  void (*abs2)(const double* re, const double* im, double* out,
               std::size_t n);

  /// out = alpha * x + y. out may alias y.
  void (*axpy)(double alpha, const double* x, const double* y, double* out,
               std::size_t n);

  double (*dot)(const double* a, const double* b, std::size_t n);

  /// Sum over poles of  P_k / (w - g_k + i eta)  -  Q_k / (w + g_k + i eta)
  /// with complex residues P = pr + i pi, Q = qr + i qi.
  void (*pole_sum)(const double* pr, const double* pi, const double* qr,
                   const double* qi, const double* gaps, std::size_t n,
                   double omega, double eta, double* out_re, double* out_im);
};

const KernelTable& scalar_kernels();

/// AVX2 table, or nullptr when the build or the CPU lacks AVX2+FMA.
const KernelTable* avx2_kernels();

/// Table selected for this process.
const KernelTable& kernels();

}  // namespace fluxlattice::simd
