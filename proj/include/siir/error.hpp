#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace siir {

enum class Errc {
  not_hermitian,
  no_convergence,
  singular_matrix,
  invalid_scene,
  invalid_geometry,
  pole_at_angle,
  unstable_loop,
  zero_tuning_scalar,
  no_half_power_crossing,
  no_sidelobe,
  singular_covariance,
  unstable_expansion,
  subspace_split_ambiguous,
  rank_deficient_subarray,
  coarray_hole,
  subarray_too_small,
  length_mismatch,
  invalid_argument,
};

std::string_view errc_name(Errc code);

// Numerical or precondition failure raised by the library. The CLI maps
// these to exit code 3.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace siir
