// AArch64 Advanced SIMD variant: one complex double per float64x2_t.

#include <arm_neon.h>

#include "siir/kernels.hpp"

namespace siir::kernels::neon {
namespace {

inline float64x2_t load1(const cdouble* p) { return vld1q_f64(reinterpret_cast<const double*>(p)); }
inline void store1(cdouble* p, float64x2_t v) { vst1q_f64(reinterpret_cast<double*>(p), v); }
inline float64x2_t swap_ri(float64x2_t v) { return vextq_f64(v, v, 1); }

const float64x2_t kNegRe = {-1.0, 1.0};
const float64x2_t kNegIm = {1.0, -1.0};

// a * b for scalar b
inline float64x2_t mul_scalar(float64x2_t a, double br, double bi) {
  return vfmaq_f64(vmulq_n_f64(a, br), vmulq_f64(swap_ri(a), kNegRe), vdupq_n_f64(bi));
}

// a * conj(b) for scalar b
inline float64x2_t mul_conj_scalar(float64x2_t a, double br, double bi) {
  return vfmaq_f64(vmulq_n_f64(a, br), vmulq_f64(swap_ri(a), kNegIm), vdupq_n_f64(bi));
}

void covariance(const cdouble* x, std::size_t n, std::size_t t, cdouble* out) {
  for (std::size_t i = 0; i < n * n; ++i) out[i] = 0.0;
  for (std::size_t s = 0; s < t; ++s) {
    const cdouble* col = x + s * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double br = col[j].real(), bi = col[j].imag();
      cdouble* o = out + j * n;
      for (std::size_t i = j; i < n; ++i) store1(o + i, vaddq_f64(load1(o + i), mul_conj_scalar(load1(col + i), br, bi)));
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
  float64x2_t acc_re = vdupq_n_f64(0.0);
  float64x2_t acc_im = vdupq_n_f64(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const float64x2_t va = load1(a + i);
    const float64x2_t vb = load1(b + i);
    acc_re = vfmaq_f64(acc_re, va, vb);
    acc_im = vfmaq_f64(acc_im, va, swap_ri(vb));
  }
  return {vaddvq_f64(acc_re), vgetq_lane_f64(acc_im, 0) - vgetq_lane_f64(acc_im, 1)};
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
      const double br = cg[j].real(), bi = cg[j].imag();
      const cdouble* qj = q + j * n;
      for (std::size_t i = 0; i < n; ++i) store1(w.data() + i, vaddq_f64(load1(w.data() + i), mul_scalar(load1(qj + i), br, bi)));
    }
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t i = 0; i < n; ++i) acc = vfmaq_f64(acc, load1(cg + i), load1(w.data() + i));
    out[g] = vaddvq_f64(acc);
  }
}

void add_outer(cdouble* x, const cdouble* u, const cdouble* y, std::size_t n, std::size_t t) {
  for (std::size_t s = 0; s < t; ++s) {
    const double br = y[s].real(), bi = y[s].imag();
    cdouble* col = x + s * n;
    for (std::size_t i = 0; i < n; ++i) store1(col + i, vaddq_f64(load1(col + i), mul_scalar(load1(u + i), br, bi)));
  }
}

}  // namespace

const KernelTable table{covariance, dot_conj, project, quad_forms, add_outer};

}  // namespace siir::kernels::neon
