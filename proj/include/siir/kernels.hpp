#pragma once

// Inner loops shared by every estimator: covariance accumulation, conjugate
// dot products, beamformer output, batched quadratic forms and rank-1 updates.
// Each has a scalar reference and optional AVX2 / NEON variants picked once at
// runtime. All matrices are column-major.
//
// Setting SPATIAL_IIR_SIMD=scalar in the environment forces the scalar path.

#include <cstddef>
#include <string_view>

#include "siir/linalg.hpp"

namespace siir::kernels {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
  // out (n x n) = (1/t) X X^H for X (n x t). Output is exactly Hermitian.
  void (*covariance)(const cdouble* x, std::size_t n, std::size_t t, cdouble* out);
  // a^H b
  cdouble (*dot_conj)(const cdouble* a, const cdouble* b, std::size_t n);
  // y[s] = beta^H X[:, s] for X (n x t)
  void (*project)(const cdouble* beta, const cdouble* x, std::size_t n, std::size_t t, cdouble* y);
  // out[g] = Re(c_g^H Q c_g), c_g = column g of C (n x count), Q (n x n)
  void (*quad_forms)(const cdouble* q, const cdouble* c, std::size_t n, std::size_t count, double* out);
  // X[:, s] += u * y[s] for X (n x t)
  void (*add_outer)(cdouble* x, const cdouble* u, const cdouble* y, std::size_t n, std::size_t t);
};

bool available(Isa isa) noexcept;
const KernelTable& table(Isa isa);  // throws invalid_argument if unavailable
const KernelTable& active() noexcept;
Isa active_isa() noexcept;
std::string_view isa_name(Isa isa) noexcept;

namespace scalar {
extern const KernelTable table;
}
#if defined(SIIR_HAVE_AVX2)
namespace avx2 {
extern const KernelTable table;
}
#endif
#if defined(SIIR_HAVE_NEON)
namespace neon {
extern const KernelTable table;
}
#endif

}  // namespace siir::kernels
