#include "siir/kernels.hpp"

namespace siir::kernels::scalar {
namespace {

void covariance(const cdouble* x, std::size_t n, std::size_t t, cdouble* out) {
  for (std::size_t i = 0; i < n * n; ++i) out[i] = 0.0;
  for (std::size_t s = 0; s < t; ++s) {
    const cdouble* col = x + s * n;
    for (std::size_t j = 0; j < n; ++j) {
      const cdouble cj = std::conj(col[j]);
      for (std::size_t i = j; i < n; ++i) out[j * n + i] += col[i] * cj;
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
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
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
      const cdouble cj = cg[j];
      for (std::size_t i = 0; i < n; ++i) w[i] += q[j * n + i] * cj;
    }
    out[g] = dot_conj(cg, w.data(), n).real();
  }
}

void add_outer(cdouble* x, const cdouble* u, const cdouble* y, std::size_t n, std::size_t t) {
  for (std::size_t s = 0; s < t; ++s) {
    const cdouble ys = y[s];
    cdouble* col = x + s * n;
    for (std::size_t i = 0; i < n; ++i) col[i] += u[i] * ys;
  }
}

}  // namespace

const KernelTable table{covariance, dot_conj, project, quad_forms, add_outer};

}  // namespace siir::kernels::scalar
