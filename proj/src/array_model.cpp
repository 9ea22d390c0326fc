#include "siir/array_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "siir/kernels.hpp"
#include "siir/random.hpp"

namespace siir {

namespace {

constexpr std::uint64_t kSourceStream = 0;
constexpr std::uint64_t kNoiseStreamBase = 1;

}  // namespace

void ArrayGeometry::validate() const {
  if (elements < 2) throw Error(Errc::invalid_geometry, "need at least 2 elements");
  if (!(spacing > 0.0 && spacing <= 0.5))
    throw Error(Errc::invalid_geometry, "spacing must be in (0, 0.5] wavelengths, got " + std::to_string(spacing));
}

double TargetScene::noise_variance() const {
  const double p1 = targets.empty() ? 1.0 : targets.front().power;
  return p1 / std::pow(10.0, snr_db / 10.0);
}

void TargetScene::validate(std::size_t elements, double min_separation) const {
  if (snapshots < 1) throw Error(Errc::invalid_scene, "snapshot count must be >= 1");
  if (!std::isfinite(snr_db)) throw Error(Errc::invalid_scene, "snr_db must be finite");
  if (targets.size() >= elements)
    throw Error(Errc::invalid_scene, "target count must be below the element count");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& t = targets[i];
    if (!(t.theta > 0.0 && t.theta < std::numbers::pi))
      throw Error(Errc::invalid_scene, "target angle outside (0, pi)");
    if (!(t.power >= 0.0) || !std::isfinite(t.power)) throw Error(Errc::invalid_scene, "target power must be >= 0");
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(targets[j].theta - t.theta) < std::max(min_separation, 1e-12))
        throw Error(Errc::invalid_scene, "target angles closer than the grid resolution");
  }
}

double spatial_frequency(double theta, const ArrayGeometry& geometry) {
  return 2.0 * std::numbers::pi * geometry.spacing * std::cos(theta);
}

CVector steering_vector(double psi, std::size_t n) {
  CVector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::polar(1.0, -static_cast<double>(i) * psi);
  return v;
}

CVector steering_vector(double psi, std::span<const double> positions) {
  CVector v(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) v[i] = std::polar(1.0, -positions[i] * psi);
  return v;
}

ComplexMatrix steering_matrix(std::span<const double> thetas, const ArrayGeometry& geometry) {
  ComplexMatrix c(geometry.elements, thetas.size());
  for (std::size_t g = 0; g < thetas.size(); ++g) {
    const CVector v = steering_vector(spatial_frequency(thetas[g], geometry), geometry.elements);
    std::copy(v.begin(), v.end(), c.col(g).begin());
  }
  return c;
}

std::vector<double> ula_positions(std::size_t n) {
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<double>(i);
  return p;
}

SceneRealization::SceneRealization(const TargetScene& scene, const ArrayGeometry& geometry, std::size_t passes) {
  geometry.validate();
  const auto pos = ula_positions(geometry.elements);
  build(scene, geometry.spacing, pos, passes);
}

SceneRealization::SceneRealization(const TargetScene& scene, double spacing, std::span<const double> positions,
                                   std::size_t passes) {
  build(scene, spacing, positions, passes);
}

void SceneRealization::build(const TargetScene& scene, double spacing, std::span<const double> positions,
                             std::size_t passes) {
  const std::size_t n = positions.size();
  scene.validate(n);
  const std::size_t t = scene.snapshots;
  const std::size_t l = scene.targets.size();
  seed_ = scene.seed;
  sigma2_ = scene.noise_variance();

  steering_ = ComplexMatrix(n, l);
  for (std::size_t k = 0; k < l; ++k) {
    const double psi = 2.0 * std::numbers::pi * spacing * std::cos(scene.targets[k].theta);
    const CVector v = steering_vector(psi, positions);
    std::copy(v.begin(), v.end(), steering_.col(k).begin());
  }

  // Amplitudes a_k[t], independent across targets and snapshots.
  const GaussianStream amp(seed_, kSourceStream);
  source_ = ComplexMatrix(n, t);
  for (std::size_t k = 0; k < l; ++k) {
    const double scale = std::sqrt(scene.targets[k].power);
    const auto vk = steering_.col(k);
    for (std::size_t s = 0; s < t; ++s) {
      const cdouble a = scale * amp[k * t + s];
      auto col = source_.col(s);
      for (std::size_t i = 0; i < n; ++i) col[i] += a * vk[i];
    }
  }

  noise_.clear();
  noise_.reserve(passes);
  for (std::size_t p = 0; p < passes; ++p) noise_.push_back(noise(p));
}

ComplexMatrix SceneRealization::noise(std::size_t pass) const {
  if (pass < noise_.size()) return noise_[pass];
  const std::size_t n = elements(), t = snapshot_count();
  ComplexMatrix w(n, t);
  if (sigma2_ > 0.0) {
    const GaussianStream g(seed_, kNoiseStreamBase + pass);
    g.fill(std::span<cdouble>(w.data(), n * t), 0, std::sqrt(sigma2_));
  }
  return w;
}

ComplexMatrix SceneRealization::snapshots(std::size_t pass) const {
  ComplexMatrix r = noise(pass);
  r += source_;
  return r;
}

ComplexMatrix synthesize_snapshots(const TargetScene& scene, const ArrayGeometry& geometry) {
  return SceneRealization(scene, geometry).snapshots(0);
}

ComplexMatrix sample_autocorrelation(const ComplexMatrix& snapshots) {
  if (snapshots.cols() < 1) throw Error(Errc::invalid_argument, "need at least one snapshot");
  ComplexMatrix r(snapshots.rows(), snapshots.rows());
  kernels::active().covariance(snapshots.data(), snapshots.rows(), snapshots.cols(), r.data());
  return r;
}

}  // namespace siir
