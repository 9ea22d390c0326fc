#pragma once

// Uniform linear arrays, steering vectors and synthetic narrowband snapshots.
// Angles are measured from the array axis, theta in [0, pi).

#include <cstdint>
#include <span>
#include <vector>

#include "siir/linalg.hpp"

namespace siir {

struct ArrayGeometry {
  std::size_t elements = 0;
  double spacing = 0.5;  // d / lambda

  // Throws invalid_geometry unless elements >= 2 and 0 < spacing <= 0.5.
  void validate() const;
};

struct Target {
  double theta = 0.0;  // radians
  double power = 1.0;  // linear
};

struct TargetScene {
  std::vector<Target> targets;
  double snr_db = 0.0;  // first-target power over per-element noise variance
  std::size_t snapshots = 1;
  std::uint64_t seed = 0;

  // sigma^2 = P_1 / 10^(snr/10); P_1 = 1 when there are no targets.
  double noise_variance() const;

  // Throws invalid_scene. Angles must lie in (0, pi), be pairwise separated
  // by at least min_separation, and number fewer than the element count.
  void validate(std::size_t elements, double min_separation = 0.0) const;
};

double spatial_frequency(double theta, const ArrayGeometry& geometry);

// v_n = exp(-j n psi), n = 0..n-1
CVector steering_vector(double psi, std::size_t n);

// v_n = exp(-j p_n psi) for element positions p_n in units of the spacing.
CVector steering_vector(double psi, std::span<const double> positions);

// Steering vectors for a theta grid, one per column (n x grid.size()).
ComplexMatrix steering_matrix(std::span<const double> thetas, const ArrayGeometry& geometry);

std::vector<double> ula_positions(std::size_t n);

// One Monte-Carlo realization of a scene: source amplitudes are fixed, and
// receiver noise is drawn independently for every pass index. Everything is a
// pure function of (scene.seed, pass, element, snapshot).
class SceneRealization {
 public:
  // `passes` noise draws are cached up front; later passes are drawn on demand.
  SceneRealization(const TargetScene& scene, const ArrayGeometry& geometry, std::size_t passes = 1);
  SceneRealization(const TargetScene& scene, double spacing, std::span<const double> positions,
                   std::size_t passes = 1);

  std::size_t elements() const noexcept { return steering_.rows(); }
  std::size_t snapshot_count() const noexcept { return source_.cols(); }
  std::size_t targets() const noexcept { return steering_.cols(); }
  double noise_variance() const noexcept { return sigma2_; }

  const ComplexMatrix& steering() const noexcept { return steering_; }  // n x L
  const ComplexMatrix& source() const noexcept { return source_; }      // sum_k a_k[t] v_k, n x T

  ComplexMatrix noise(std::size_t pass) const;
  // source + noise(pass)
  ComplexMatrix snapshots(std::size_t pass = 0) const;

 private:
  void build(const TargetScene& scene, double spacing, std::span<const double> positions, std::size_t passes);

  ComplexMatrix steering_;
  ComplexMatrix source_;
  std::vector<ComplexMatrix> noise_;
  double sigma2_ = 0.0;
  std::uint64_t seed_ = 0;
};

ComplexMatrix synthesize_snapshots(const TargetScene& scene, const ArrayGeometry& geometry);

// (1/T) sum_t r[t] r[t]^H
ComplexMatrix sample_autocorrelation(const ComplexMatrix& snapshots);

}  // namespace siir
