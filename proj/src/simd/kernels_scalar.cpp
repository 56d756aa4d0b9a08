#include "fluxlattice/simd/kernels.hpp"

namespace fluxlattice::simd {
namespace {

void cmatvec(const double* m, std::size_t rows, std::size_t cols,
             const double* xr, const double* xi, double* yr, double* yi) {
  for (std::size_t i = 0; i < rows; ++i) {
    yr[i] = 0.0;
    yi[i] = 0.0;
  }
  for (std::size_t j = 0; j < cols; ++j) {
    const double* col = m + j * rows;
    const double br = xr[j];
    const double bi = xi[j];
    for (std::size_t i = 0; i < rows; ++i) {
      yr[i] += col[i] * br;
      yi[i] += col[i] * bi;
    }
  }
}

void cmatvec_t(const double* m, std::size_t rows, std::size_t cols,
               const double* xr, const double* xi, double* yr, double* yi) {
  for (std::size_t j = 0; j < cols; ++j) {
    const double* col = m + j * rows;
    double ar = 0.0;
    double ai = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      ar += col[i] * xr[i];
      ai += col[i] * xi[i];
    }
    yr[j] = ar;
    yi[j] = ai;
  }
}

void rmatvec_t(const double* m, std::size_t rows, std::size_t cols,
               const double* x, double* y) {
  for (std::size_t j = 0; j < cols; ++j) {
    const double* col = m + j * rows;
    double acc = 0.0;
    for (std::size_t i = 0; i < rows; ++i) acc += col[i] * x[i];
    y[j] = acc;
  }
}

void phase_rotate(double* re, double* im, const double* c, const double* s,
                  std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double r = re[k];
    const double q = im[k];
    re[k] = r * c[k] + q * s[k];
    im[k] = q * c[k] - r * s[k];
  }
}

void abs2(const double* re, const double* im, double* out, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) out[k] = re[k] * re[k] + im[k] * im[k];
}

void axpy(double alpha, const double* x, const double* y, double* out,
          std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) out[k] = alpha * x[k] + y[k];
}

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) acc += a[k] * b[k];
  return acc;
}

void pole_sum(const double* pr, const double* pi, const double* qr,
              const double* qi, const double* gaps, std::size_t n,
              double omega, double eta, double* out_re, double* out_im) {
  double sr = 0.0;
  double si = 0.0;
  const double eta2 = eta * eta;
  for (std::size_t k = 0; k < n; ++k) {
    const double dm = omega - gaps[k];
    const double dp = omega + gaps[k];
    const double inv_m = 1.0 / (dm * dm + eta2);
    const double inv_p = 1.0 / (dp * dp + eta2);
    // P (dm - i eta) / |.|^2  -  Q (dp - i eta) / |.|^2
    sr += (pr[k] * dm + pi[k] * eta) * inv_m - (qr[k] * dp + qi[k] * eta) * inv_p;
    si += (pi[k] * dm - pr[k] * eta) * inv_m - (qi[k] * dp - qr[k] * eta) * inv_p;
  }
  *out_re = sr;
  *out_im = si;
}

constexpr KernelTable kScalar{
    "scalar", cmatvec, cmatvec_t, rmatvec_t, phase_rotate,
    abs2,     axpy,    dot,       pole_sum,
};

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

}  // namespace fluxlattice::simd
