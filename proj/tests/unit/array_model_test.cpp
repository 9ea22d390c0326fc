#include <doctest.h>

#include "siir/array_model.hpp"
#include "siir/random.hpp"
#include "support.hpp"

using namespace siir;
using namespace testing;

namespace {

TargetScene two_targets(double snr_db = 10.0) {
  TargetScene s;
  s.targets = {Target{50.0 / kDeg, 1.0}, Target{120.0 / kDeg, 0.5}};
  s.snr_db = snr_db;
  s.snapshots = 16;
  s.seed = 42;
  return s;
}

template <class F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no siir::Error thrown");
  return Errc::invalid_argument;
}

}  // namespace

TEST_CASE("steering vectors") {
  const CVector v = steering_vector(0.7, 5);
  for (std::size_t n = 0; n < 5; ++n) CHECK(std::abs(v[n] - std::polar(1.0, -0.7 * double(n))) < 1e-15);
  const std::vector<double> pos{0.0, 1.0, 3.0};
  const CVector w = steering_vector(0.7, pos);
  CHECK(std::abs(w[2] - std::polar(1.0, -2.1)) < 1e-15);
  const ArrayGeometry geo{4, 0.5};
  CHECK(spatial_frequency(kPi / 3, geo) == doctest::Approx(kPi * 0.5));
  const std::vector<double> thetas{0.3, 1.9};
  const ComplexMatrix a = steering_matrix(thetas, geo);
  CHECK(a.rows() == 4);
  CHECK(a.cols() == 2);
  CHECK(max_diff(a.col(1), steering_vector(spatial_frequency(1.9, geo), 4)) < 1e-15);
  CHECK(ula_positions(3) == std::vector<double>{0.0, 1.0, 2.0});
}

TEST_CASE("geometry and scene validation") {
  CHECK(code_of([] { ArrayGeometry{1, 0.5}.validate(); }) == Errc::invalid_geometry);
  CHECK(code_of([] { ArrayGeometry{4, 0.6}.validate(); }) == Errc::invalid_geometry);
  CHECK(code_of([] { ArrayGeometry{4, 0.0}.validate(); }) == Errc::invalid_geometry);
  CHECK_NOTHROW(ArrayGeometry{4, 0.5}.validate());

  TargetScene s = two_targets();
  CHECK_NOTHROW(s.validate(3));
  CHECK(code_of([&] { s.validate(2); }) == Errc::invalid_scene);
  s.targets[1].theta = kPi;
  CHECK(code_of([&] { s.validate(8); }) == Errc::invalid_scene);
  s.targets[1].theta = s.targets[0].theta;
  CHECK(code_of([&] { s.validate(8); }) == Errc::invalid_scene);
  s = two_targets();
  CHECK(code_of([&] { s.validate(8, 2.0); }) == Errc::invalid_scene);
  s.snapshots = 0;
  CHECK(code_of([&] { s.validate(8); }) == Errc::invalid_scene);
}

TEST_CASE("noise variance follows the first target power") {
  TargetScene s = two_targets(20.0);
  CHECK(s.noise_variance() == doctest::Approx(0.01));
  s.targets[0].power = 4.0;
  CHECK(s.noise_variance() == doctest::Approx(0.04));
  s.targets.clear();
  s.snr_db = -10.0;
  CHECK(s.noise_variance() == doctest::Approx(10.0));
}

TEST_CASE("SceneRealization reproduces the counter-based draw") {
  const ArrayGeometry geo{6, 0.5};
  const TargetScene scene = two_targets();
  const SceneRealization real(scene, geo, 2);
  REQUIRE(real.elements() == 6);
  REQUIRE(real.snapshot_count() == 16);
  REQUIRE(real.targets() == 2);

  // Independent rebuild from the stream definition.
  const GaussianStream amp(scene.seed, 0);
  const double sigma = std::sqrt(scene.noise_variance());
  for (std::size_t pass = 0; pass < 4; ++pass) {
    const GaussianStream noise(scene.seed, 1 + pass);
    const ComplexMatrix x = real.snapshots(pass);
    double worst = 0.0;
    for (std::size_t t = 0; t < 16; ++t) {
      for (std::size_t i = 0; i < 6; ++i) {
        cdouble expect = sigma * noise[t * 6 + i];
        for (std::size_t k = 0; k < 2; ++k) {
          const double psi = spatial_frequency(scene.targets[k].theta, geo);
          expect += std::sqrt(scene.targets[k].power) * amp[k * 16 + t] * std::polar(1.0, -psi * double(i));
        }
        worst = std::max(worst, std::abs(x(i, t) - expect));
      }
    }
    CHECK(worst < 1e-13);
  }
  CHECK(max_diff(real.snapshots(0), synthesize_snapshots(scene, geo)) == 0.0);
  CHECK(max_diff(real.noise(0), real.noise(1)) > 0.1);
}

TEST_CASE("sample autocorrelation") {
  const ComplexMatrix x = random_matrix(4, 9);
  const ComplexMatrix r = sample_autocorrelation(x);
  ComplexMatrix expect = x * x.adjoint();
  expect *= 1.0 / 9.0;
  CHECK(max_diff(r, expect) < 1e-13);
  CHECK(r.is_hermitian(0.0));
  CHECK_THROWS_AS(sample_autocorrelation(ComplexMatrix(4, 0)), Error);
}
