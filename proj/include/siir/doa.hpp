#pragma once

// MVDR, the two feedback-MVDR estimators and the baseline DoA methods (MUSIC,
// ESPRIT, diagonally loaded MVDR, nested-array MVDR, reduced-dimension MVDR).
// Spectra live on the theta grid theta_i = i pi / G, i = 0..G-1.

#include <span>
#include <vector>

#include "siir/array_model.hpp"
#include "siir/linalg.hpp"

namespace siir {

struct PseudoSpectrum {
  std::vector<double> theta;
  std::vector<double> power;  // normalized to max 1 when nonzero
};

std::vector<double> theta_grid(std::size_t points);

// beta = R^-1 c / (c^H R^-1 c). Throws singular_covariance.
CVector mvdr_weights(const ComplexMatrix& r, std::span<const cdouble> c);

// 1 / (c^H R^-1 c) over the grid. Throws singular_covariance.
PseudoSpectrum mvdr_spectrum(const ComplexMatrix& r, const ArrayGeometry& geometry, std::size_t grid_points);

struct FeedbackOptions {
  std::size_t grid_points = 720;
  // Transmit weights alpha = (loop_gain / N) c. Zero selects N, i.e. alpha = c.
  double loop_gain = 0.0;
};

// Algorithm 1: per sweep angle, MVDR with c = v(psi), transmit alpha ∝ c, and
// M retransmissions with R and beta re-estimated each pass. One spectrum per
// entry of `retransmissions`; passes are shared, so asking for several counts
// costs the same as the largest. Throws unstable_loop, singular_covariance.
std::vector<PseudoSpectrum> feedback_mvdr_alg1(const SceneRealization& scene, const ArrayGeometry& geometry,
                                               std::span<const std::size_t> retransmissions,
                                               const FeedbackOptions& opt = {});
PseudoSpectrum feedback_mvdr_alg1(const SceneRealization& scene, const ArrayGeometry& geometry,
                                  std::size_t retransmissions, const FeedbackOptions& opt = {});

// First N coefficients of 1 / B(z), B(z) = sum_n conj(beta_n) z^-n, returned
// conjugated so that alpha^H v(psi) approximates 1 / (beta^H v(psi)).
// Throws unstable_expansion when a coefficient exceeds 1e6 in magnitude.
CVector inverse_series(std::span<const cdouble> beta);

// Algorithm 2: one global loop with c = e0 and alpha from inverse_series;
// spectrum |alpha^H v(psi)|^2 from the last pass.
std::vector<PseudoSpectrum> feedback_mvdr_alg2(const SceneRealization& scene, const ArrayGeometry& geometry,
                                               std::span<const std::size_t> retransmissions,
                                               const FeedbackOptions& opt = {});
PseudoSpectrum feedback_mvdr_alg2(const SceneRealization& scene, const ArrayGeometry& geometry,
                                  std::size_t retransmissions, const FeedbackOptions& opt = {});

// Throws subspace_split_ambiguous when eigenvalues L-1 and L are within 1e-12
// of the largest, unless R is a multiple of the identity (flat spectrum).
PseudoSpectrum music(const ComplexMatrix& r, std::size_t targets, const ArrayGeometry& geometry,
                     std::size_t grid_points);

// Ascending theta estimates. Throws rank_deficient_subarray.
std::vector<double> esprit(const ComplexMatrix& r, std::size_t targets, const ArrayGeometry& geometry);

// MVDR on R + lambda_r (tr R / N) I.
PseudoSpectrum robust_mvdr(const ComplexMatrix& r, const ArrayGeometry& geometry, std::size_t grid_points,
                           double lambda_r);

struct NestedSplit {
  std::size_t n1 = 4;
  std::size_t n2 = 4;
};

// {0, ..., n1-1} ∪ {(n1+1) m - 1 : m = 1..n2}, in units of the spacing.
std::vector<double> nested_positions(const NestedSplit& split);

// Lag-averaged coarray samples z[l], l = -Lmax..Lmax (index l + Lmax), where
// Lmax is the aperture. Throws coarray_hole.
CVector coarray_samples(const ComplexMatrix& r, std::span<const double> positions);

// Spatially smoothed covariance of the virtual ULA with Lmax + 1 elements.
ComplexMatrix nested_smoothed_covariance(const ComplexMatrix& r, std::span<const double> positions);

// Synthesizes the scene on the nested geometry and runs MVDR on the smoothed
// coarray covariance. Throws invalid_geometry.
PseudoSpectrum nested_mvdr(const TargetScene& scene, double spacing, const NestedSplit& split,
                           std::size_t grid_points);

// Product of the MVDR spectra of contiguous subarrays. Throws subarray_too_small.
PseudoSpectrum reduced_dim_mvdr(const ComplexMatrix& r, const ArrayGeometry& geometry, std::size_t subarray,
                                std::size_t grid_points);

struct PeakPick {
  std::vector<double> thetas;  // ascending, length L
  bool fewer_peaks = false;    // padded with the strongest peak
};

// The L strongest interior local maxima, refined by 3-point parabolic fit.
PeakPick peaks_to_angles(const PseudoSpectrum& spectrum, std::size_t targets);

// Root mean square error in degrees, pairing both lists in ascending order.
// Throws length_mismatch.
double rmse_deg(std::span<const double> truth, std::span<const double> estimate);

}  // namespace siir
