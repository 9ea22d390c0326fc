#include <cstdlib>
#include <string>

#include "siir/kernels.hpp"

namespace siir::kernels {

namespace {

bool cpu_has(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(SIIR_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(SIIR_HAVE_NEON)
      return true;  // mandatory on AArch64
#else
      return false;
#endif
  }
  return false;
}

Isa select() noexcept {
  if (const char* env = std::getenv("SPATIAL_IIR_SIMD"); env && std::string(env) == "scalar") return Isa::scalar;
  if (cpu_has(Isa::avx2)) return Isa::avx2;
  if (cpu_has(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

}  // namespace

bool available(Isa isa) noexcept { return cpu_has(isa); }

const KernelTable& table(Isa isa) {
  if (!cpu_has(isa)) throw Error(Errc::invalid_argument, "kernel variant not available: " + std::string(isa_name(isa)));
  switch (isa) {
#if defined(SIIR_HAVE_AVX2)
    case Isa::avx2:
      return avx2::table;
#endif
#if defined(SIIR_HAVE_NEON)
    case Isa::neon:
      return neon::table;
#endif
    default:
      return scalar::table;
  }
}

Isa active_isa() noexcept {
  static const Isa isa = select();
  return isa;
}

const KernelTable& active() noexcept {
  static const KernelTable& t = table(active_isa());
  return t;
}

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

}  // namespace siir::kernels
