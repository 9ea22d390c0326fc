#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "siir/linalg.hpp"

namespace testing {

using siir::cdouble;
using siir::ComplexMatrix;
using siir::CVector;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kDeg = 180.0 / kPi;

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(12345);
  return g;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline cdouble cgauss() {
  std::normal_distribution<double> n;
  return {n(rng()), n(rng())};
}

inline ComplexMatrix random_matrix(std::size_t r, std::size_t c) {
  ComplexMatrix m(r, c);
  for (std::size_t j = 0; j < c; ++j)
    for (std::size_t i = 0; i < r; ++i) m(i, j) = cgauss();
  return m;
}

inline CVector random_vector(std::size_t n) {
  CVector v(n);
  for (auto& x : v) x = cgauss();
  return v;
}

// Hermitian positive definite with eigenvalues bounded below by `floor`.
inline ComplexMatrix random_hpd(std::size_t n, double floor = 0.1) {
  const ComplexMatrix a = random_matrix(n, n);
  ComplexMatrix r = a * a.adjoint();
  for (std::size_t i = 0; i < n; ++i) r(i, i) += floor;
  return r;
}

inline cdouble dot(std::span<const cdouble> a, std::span<const cdouble> b) {
  cdouble s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline double max_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

inline double max_diff(std::span<const cdouble> a, std::span<const cdouble> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testing
