#include <doctest.h>

#include "siir/pattern.hpp"
#include "support.hpp"

using namespace siir;
using namespace testing;

namespace {

// |sin(N x / 2) / (N sin(x / 2))|^2
double fir_power(double x, std::size_t n) {
  if (std::abs(x) < 1e-14) return 1.0;
  const double r = std::sin(double(n) * x / 2) / (double(n) * std::sin(x / 2));
  return r * r;
}

double bisect(auto f, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(lo) * f(mid) <= 0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

double golden_max(auto f, double lo, double hi) {
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int i = 0; i < 200; ++i) {
    const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
    (f(a) > f(b) ? hi : lo) = f(a) > f(b) ? b : a;
  }
  return f(0.5 * (lo + hi));
}

PatternSpec spec(BeamformerKind kind, std::size_t n, double psi0 = 0.0) {
  PatternSpec s;
  s.kind = kind;
  s.psi0 = psi0;
  s.geometry = ArrayGeometry{n, 0.5};
  return s;
}

}  // namespace

TEST_CASE("FIR pattern: peak, beamwidth and sidelobe against the Dirichlet kernel") {
  for (std::size_t n : {8u, 16u, 32u}) {
    const auto s = spec(BeamformerKind::fir, n, 0.9);
    CHECK(std::abs(pattern_response(s, 0.9)) == doctest::Approx(1.0));
    const auto bp = beam_pattern(s);
    CHECK(bp.psi.size() == 8192);
    CHECK(bp.psi.front() == doctest::Approx(-kPi));
    CHECK(!bp.any_clamped());

    const double half = bisect([&](double x) { return fir_power(x, n) - 0.5; }, 1e-9, 2 * kPi / n);
    CHECK(half_power_beamwidth(bp) == doctest::Approx(2 * half).epsilon(2e-3));

    const double sl = golden_max([&](double x) { return fir_power(x, n); }, 2 * kPi / n, 4 * kPi / n);
    const auto info = first_sidelobe(bp);
    CHECK(!info.absolute);
    CHECK(info.level_db == doctest::Approx(10 * std::log10(sl)).epsilon(1e-3));

    const auto d = directivity(bp);
    CHECK(!d.lower_bound);
    CHECK(d.value > 1.0);
  }
}

TEST_CASE("array feedback: closed-loop response from the loop primitives") {
  const std::size_t n = 5;
  auto s = spec(BeamformerKind::array_feedback, n, 0.4);
  s.r = 0.8;
  s.k = cdouble(1.0, 0.2);
  for (double psi : {-2.0, -0.3, 0.4, 1.7}) {
    // Independent: D = v(psi)^H v(psi0); b = r k^* D / N; a = D / (k^* N).
    cdouble dsum{};
    for (std::size_t i = 0; i < n; ++i) dsum += std::polar(1.0, double(i) * (psi - s.psi0));
    const cdouble b = s.r * std::conj(s.k) * dsum / double(n);
    const cdouble a = dsum / (std::conj(s.k) * double(n));
    CHECK(std::abs(pattern_response(s, psi) - b / (1.0 - b * a)) < 1e-12);
    CHECK(std::abs(pattern_numerator(s, psi) - s.r * dsum / double(n)) < 1e-12);

    auto f = s;
    f.kind = BeamformerKind::array_feedback_finite;
    for (std::size_t m : {0u, 1u, 7u}) {
      f.retransmissions = m;
      cdouble sum{}, q = 1.0;
      for (std::size_t j = 0; j <= m; ++j, q *= b * a) sum += q;
      CHECK(std::abs(pattern_response(f, psi) - b * sum) < 1e-12);
    }
  }
}

TEST_CASE("array feedback at matched gain is clamped at the target") {
  auto s = spec(BeamformerKind::array_feedback, 8, 0.0);
  s.grid_points = 4096;
  CHECK_THROWS_AS(pattern_response(s, 0.0), Error);
  const auto bp = beam_pattern(s);
  CHECK(bp.any_clamped());
  const auto info = first_sidelobe(bp);
  CHECK(info.absolute);
  CHECK(directivity(bp).lower_bound);
}

TEST_CASE("single feedback response at the steer") {
  auto s = spec(BeamformerKind::single_feedback, 3, 0.5);
  s.r = 0.5;
  CHECK(std::abs(pattern_response(s, 0.5) - 1.0) < 1e-12);  // 0.5 / (1 - 0.5)
}

TEST_CASE("Dirichlet-ratio form") {
  auto s = spec(BeamformerKind::array_feedback, 16, 0.0);
  s.normalization = PatternNormalization::dirichlet_ratio;
  s.r = 1.2;
  s.k = 1.2;
  const double delta = 0.3;
  const double x = std::sin(16 * delta / 2) / std::sin(delta / 2);
  CHECK(std::abs(pattern_response(s, -delta) - 1.2 * x / (1.0 - x * x)) < 1e-9);
  // FSLL is |H|^2/|k|^2 and tracks the closed form.
  const auto bp = beam_pattern(s);
  const auto info = first_sidelobe(bp);
  CHECK(info.absolute);
  CHECK(info.level_db == doctest::Approx(10 * std::log10(closed_form_fsll(16, 1.0))).epsilon(0.05));
}

TEST_CASE("closed-form FSLL") {
  for (std::size_t n : {16u, 64u}) {
    const double nn = double(n);
    const double expect = 9 * kPi * kPi * 4.0 / (4 * nn * nn) * (1 + 9 * kPi * kPi / (2 * nn * nn));
    CHECK(closed_form_fsll(n, cdouble(0.0, 2.0)) == doctest::Approx(expect));
  }
}

TEST_CASE("pattern argument checks") {
  auto s = spec(BeamformerKind::fir, 8);
  s.grid_points = 4095;
  CHECK_THROWS_AS(beam_pattern(s), Error);
  auto z = spec(BeamformerKind::array_feedback, 8, 0.2);
  z.k = 0.0;
  CHECK_THROWS_AS(pattern_response(z, 0.0), Error);
}
