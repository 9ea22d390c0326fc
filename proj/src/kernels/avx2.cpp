// Compiled with -mavx2 -mfma; only entered after the runtime CPU check.

#include <immintrin.h>

#include "siir/kernels.hpp"

namespace siir::kernels::avx2 {
namespace {

// Two complex doubles per register: [re0, im0, re1, im1].
inline __m256d load2(const cdouble* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }
inline void store2(cdouble* p, __m256d v) { _mm256_storeu_pd(reinterpret_cast<double*>(p), v); }
inline __m256d swap_ri(__m256d v) { return _mm256_permute_pd(v, 0b0101); }

// a * b for a broadcast scalar b = (br, bi)
inline __m256d mul_scalar(__m256d a, __m256d br, __m256d bi) {
  return _mm256_fmaddsub_pd(a, br, _mm256_mul_pd(swap_ri(a), bi));
}

// a * conj(b) for a broadcast scalar b = (br, bi)
inline __m256d mul_conj_scalar(__m256d a, __m256d br, __m256d bi) {
  return _mm256_fmsubadd_pd(a, br, _mm256_mul_pd(swap_ri(a), bi));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(s) + _mm_cvtsd_f64(_mm_unpackhi_pd(s, s));
}

void covariance(const cdouble* x, std::size_t n, std::size_t t, cdouble* out) {
  for (std::size_t i = 0; i < n * n; ++i) out[i] = 0.0;
  for (std::size_t s = 0; s < t; ++s) {
    const cdouble* col = x + s * n;
    for (std::size_t j = 0; j < n; ++j) {
      const __m256d br = _mm256_set1_pd(col[j].real());
      const __m256d bi = _mm256_set1_pd(col[j].imag());
      cdouble* o = out + j * n;
      std::size_t i = j;
      for (; i + 2 <= n; i += 2) store2(o + i, _mm256_add_pd(load2(o + i), mul_conj_scalar(load2(col + i), br, bi)));
      for (; i < n; ++i) o[i] += col[i] * std::conj(col[j]);
    }
  }
  const double inv_t = 1.0 / static_cast<double>(t);
  for (std::size_t j = 0; j < n; ++j) {
    out[j * n + j] = out[j * n + j].real() * inv_t;
    for (std::size_t i = j + 1; i < n; ++i) {
      out[j * n + i] *= inv_t;
      out[i * n + j] = std::conj(out[j * n + i]);
    }
  }
}

cdouble dot_conj(const cdouble* a, const cdouble* b, std::size_t n) {
  __m256d acc_re = _mm256_setzero_pd();
  __m256d acc_im = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = load2(a + i);
    const __m256d vb = load2(b + i);
    acc_re = _mm256_fmadd_pd(va, vb, acc_re);
    acc_im = _mm256_fmadd_pd(va, swap_ri(vb), acc_im);
  }
  // acc_im lanes hold [ar*bi, ai*br, ...]; Im = even - odd.
  const __m256d sign = _mm256_set_pd(-1.0, 1.0, -1.0, 1.0);
  double re = hsum(acc_re);
  double im = hsum(_mm256_mul_pd(acc_im, sign));
  for (; i < n; ++i) {
    re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {re, im};
}

void project(const cdouble* beta, const cdouble* x, std::size_t n, std::size_t t, cdouble* y) {
  for (std::size_t s = 0; s < t; ++s) y[s] = dot_conj(beta, x + s * n, n);
}

void quad_forms(const cdouble* q, const cdouble* c, std::size_t n, std::size_t count, double* out) {
  CVector w(n);
  for (std::size_t g = 0; g < count; ++g) {
    const cdouble* cg = c + g * n;
    for (std::size_t i = 0; i < n; ++i) w[i] = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const __m256d br = _mm256_set1_pd(cg[j].real());
      const __m256d bi = _mm256_set1_pd(cg[j].imag());
      const cdouble* qj = q + j * n;
      std::size_t i = 0;
      for (; i + 2 <= n; i += 2) store2(w.data() + i, _mm256_add_pd(load2(w.data() + i), mul_scalar(load2(qj + i), br, bi)));
      for (; i < n; ++i) w[i] += qj[i] * cg[j];
    }
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = _mm256_fmadd_pd(load2(cg + i), load2(w.data() + i), acc);
    double re = hsum(acc);
    for (; i < n; ++i) re += cg[i].real() * w[i].real() + cg[i].imag() * w[i].imag();
    out[g] = re;
  }
}

void add_outer(cdouble* x, const cdouble* u, const cdouble* y, std::size_t n, std::size_t t) {
  for (std::size_t s = 0; s < t; ++s) {
    const __m256d br = _mm256_set1_pd(y[s].real());
    const __m256d bi = _mm256_set1_pd(y[s].imag());
    cdouble* col = x + s * n;
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) store2(col + i, _mm256_add_pd(load2(col + i), mul_scalar(load2(u + i), br, bi)));
    for (; i < n; ++i) col[i] += u[i] * y[s];
  }
}

}  // namespace

const KernelTable table{covariance, dot_conj, project, quad_forms, add_outer};

}  // namespace siir::kernels::avx2
