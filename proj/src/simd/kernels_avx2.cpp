// AVX2 + FMA variants of the kernels in kernels.hpp. This translation unit is
// the only one compiled with -mavx2 -mfma; nothing here may run before the
// dispatcher has confirmed CPU support.

#include <immintrin.h>

#include "fluxlattice/simd/kernels.hpp"

namespace fluxlattice::simd {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

void cmatvec(const double* m, std::size_t rows, std::size_t cols,
             const double* xr, const double* xi, double* yr, double* yi) {
  const std::size_t vec_rows = rows & ~std::size_t{3};
  for (std::size_t i = 0; i < rows; ++i) {
    yr[i] = 0.0;
    yi[i] = 0.0;
  }
  for (std::size_t j = 0; j < cols; ++j) {
    const double* col = m + j * rows;
    const __m256d br = _mm256_set1_pd(xr[j]);
    const __m256d bi = _mm256_set1_pd(xi[j]);
    std::size_t i = 0;
    for (; i < vec_rows; i += 4) {
      const __m256d c = _mm256_loadu_pd(col + i);
      _mm256_storeu_pd(yr + i, _mm256_fmadd_pd(c, br, _mm256_loadu_pd(yr + i)));
      _mm256_storeu_pd(yi + i, _mm256_fmadd_pd(c, bi, _mm256_loadu_pd(yi + i)));
    }
    for (; i < rows; ++i) {
      yr[i] += col[i] * xr[j];
      yi[i] += col[i] * xi[j];
    }
  }
}

void cmatvec_t(const double* m, std::size_t rows, std::size_t cols,
               const double* xr, const double* xi, double* yr, double* yi) {
  const std::size_t vec_rows = rows & ~std::size_t{3};
  for (std::size_t j = 0; j < cols; ++j) {
    const double* col = m + j * rows;
    __m256d ar = _mm256_setzero_pd();
    __m256d ai = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i < vec_rows; i += 4) {
      const __m256d c = _mm256_loadu_pd(col + i);
      ar = _mm256_fmadd_pd(c, _mm256_loadu_pd(xr + i), ar);
      ai = _mm256_fmadd_pd(c, _mm256_loadu_pd(xi + i), ai);
    }
    double sr = hsum(ar);
    double si = hsum(ai);
    for (; i < rows; ++i) {
      sr += col[i] * xr[i];
      si += col[i] * xi[i];
    }
    yr[j] = sr;
    yi[j] = si;
  }
}

void rmatvec_t(const double* m, std::size_t rows, std::size_t cols,
               const double* x, double* y) {
  const std::size_t vec_rows = rows & ~std::size_t{3};
  for (std::size_t j = 0; j < cols; ++j) {
    const double* col = m + j * rows;
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i < vec_rows; i += 4) {
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(col + i), _mm256_loadu_pd(x + i), acc);
    }
    double s = hsum(acc);
    for (; i < rows; ++i) s += col[i] * x[i];
    y[j] = s;
  }
}

void phase_rotate(double* re, double* im, const double* c, const double* s,
                  std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d r = _mm256_loadu_pd(re + k);
    const __m256d q = _mm256_loadu_pd(im + k);
    const __m256d cc = _mm256_loadu_pd(c + k);
    const __m256d ss = _mm256_loadu_pd(s + k);
    _mm256_storeu_pd(re + k, _mm256_fmadd_pd(r, cc, _mm256_mul_pd(q, ss)));
    _mm256_storeu_pd(im + k, _mm256_fmsub_pd(q, cc, _mm256_mul_pd(r, ss)));
  }
  for (; k < n; ++k) {
    const double r = re[k];
    const double q = im[k];
    re[k] = r * c[k] + q * s[k];
    im[k] = q * c[k] - r * s[k];
  }
}

void abs2(const double* re, const double* im, double* out, std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d r = _mm256_loadu_pd(re + k);
    const __m256d q = _mm256_loadu_pd(im + k);
    _mm256_storeu_pd(out + k, _mm256_fmadd_pd(r, r, _mm256_mul_pd(q, q)));
  }
  for (; k < n; ++k) out[k] = re[k] * re[k] + im[k] * im[k];
}

void axpy(double alpha, const double* x, const double* y, double* out,
          std::size_t n) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    _mm256_storeu_pd(out + k, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + k),
                                              _mm256_loadu_pd(y + k)));
  }
  for (; k < n; ++k) out[k] = alpha * x[k] + y[k];
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4), acc1);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) s += a[k] * b[k];
  return s;
}

void pole_sum(const double* pr, const double* pi, const double* qr,
              const double* qi, const double* gaps, std::size_t n,
              double omega, double eta, double* out_re, double* out_im) {
  const __m256d w = _mm256_set1_pd(omega);
  const __m256d e = _mm256_set1_pd(eta);
  const __m256d e2 = _mm256_set1_pd(eta * eta);
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d sr = _mm256_setzero_pd();
  __m256d si = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d g = _mm256_loadu_pd(gaps + k);
    const __m256d dm = _mm256_sub_pd(w, g);
    const __m256d dp = _mm256_add_pd(w, g);
    const __m256d inv_m = _mm256_div_pd(one, _mm256_fmadd_pd(dm, dm, e2));
    const __m256d inv_p = _mm256_div_pd(one, _mm256_fmadd_pd(dp, dp, e2));
    const __m256d vpr = _mm256_loadu_pd(pr + k);
    const __m256d vpi = _mm256_loadu_pd(pi + k);
    const __m256d vqr = _mm256_loadu_pd(qr + k);
    const __m256d vqi = _mm256_loadu_pd(qi + k);
    const __m256d re_m = _mm256_fmadd_pd(vpr, dm, _mm256_mul_pd(vpi, e));
    const __m256d re_p = _mm256_fmadd_pd(vqr, dp, _mm256_mul_pd(vqi, e));
    const __m256d im_m = _mm256_fmsub_pd(vpi, dm, _mm256_mul_pd(vpr, e));
    const __m256d im_p = _mm256_fmsub_pd(vqi, dp, _mm256_mul_pd(vqr, e));
    sr = _mm256_add_pd(sr, _mm256_sub_pd(_mm256_mul_pd(re_m, inv_m), _mm256_mul_pd(re_p, inv_p)));
    si = _mm256_add_pd(si, _mm256_sub_pd(_mm256_mul_pd(im_m, inv_m), _mm256_mul_pd(im_p, inv_p)));
  }
  double tr = hsum(sr);
  double ti = hsum(si);
  const double eta2 = eta * eta;
  for (; k < n; ++k) {
    const double dm = omega - gaps[k];
    const double dp = omega + gaps[k];
    const double inv_m = 1.0 / (dm * dm + eta2);
    const double inv_p = 1.0 / (dp * dp + eta2);
    tr += (pr[k] * dm + pi[k] * eta) * inv_m - (qr[k] * dp + qi[k] * eta) * inv_p;
    ti += (pi[k] * dm - pr[k] * eta) * inv_m - (qi[k] * dp - qr[k] * eta) * inv_p;
  }
  *out_re = tr;
  *out_im = ti;
}

constexpr KernelTable kAvx2{
    "avx2", cmatvec, cmatvec_t, rmatvec_t, phase_rotate,
    abs2,   axpy,    dot,       pole_sum,
};

}  // namespace

const KernelTable& avx2_kernel_table() { return kAvx2; }

}  // namespace fluxlattice::simd
