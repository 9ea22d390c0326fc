#include "siir/error.hpp"

namespace siir {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::not_hermitian: return "NotHermitian";
    case Errc::no_convergence: return "NoConvergence";
    case Errc::singular_matrix: return "SingularMatrix";
    case Errc::invalid_scene: return "InvalidScene";
    case Errc::invalid_geometry: return "InvalidGeometry";
    case Errc::pole_at_angle: return "PoleAtAngle";
    case Errc::unstable_loop: return "UnstableLoop";
    case Errc::zero_tuning_scalar: return "ZeroTuningScalar";
    case Errc::no_half_power_crossing: return "NoHalfPowerCrossing";
    case Errc::no_sidelobe: return "NoSidelobe";
    case Errc::singular_covariance: return "SingularCovariance";
    case Errc::unstable_expansion: return "UnstableExpansion";
    case Errc::subspace_split_ambiguous: return "SubspaceSplitAmbiguous";
    case Errc::rank_deficient_subarray: return "RankDeficientSubarray";
    case Errc::coarray_hole: return "CoarrayHole";
    case Errc::subarray_too_small: return "SubarrayTooSmall";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace siir
