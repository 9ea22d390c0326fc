#include "siir/doa.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "siir/beamformers.hpp"
#include "siir/kernels.hpp"

namespace siir {

namespace {

constexpr double kTiny = 1e-300;

PseudoSpectrum make_spectrum(std::vector<double> theta, std::vector<double> power) {
  double peak = 0.0;
  for (double p : power) peak = std::max(peak, p);
  if (peak > 0.0)
    for (double& p : power) p /= peak;
  return {std::move(theta), std::move(power)};
}

Cholesky factor_covariance(const ComplexMatrix& r) {
  try {
    return Cholesky(r);
  } catch (const Error& e) {
    if (e.code() != Errc::singular_matrix) throw;
    throw Error(Errc::singular_covariance, e.what());
  }
}

// 1 / (c^H Q c) over the steering matrix columns.
std::vector<double> inverse_quad_forms(const ComplexMatrix& q, const ComplexMatrix& c) {
  std::vector<double> out(c.cols());
  kernels::active().quad_forms(q.data(), c.data(), q.rows(), c.cols(), out.data());
  for (double& v : out) v = 1.0 / std::max(v, kTiny);
  return out;
}

double mean_power(std::span<const cdouble> y) {
  double s = 0.0;
  for (const auto& v : y) s += std::norm(v);
  return s / static_cast<double>(y.size());
}

double rms(std::span<const cdouble> y) { return std::sqrt(mean_power(y)); }

// Pass p of the loop sees source + fresh noise, before the feedback term.
std::vector<ComplexMatrix> base_passes(const SceneRealization& scene, std::size_t max_pass) {
  std::vector<ComplexMatrix> base;
  base.reserve(max_pass + 1);
  for (std::size_t m = 0; m <= max_pass; ++m) base.push_back(scene.snapshots(m));
  return base;
}

// Maps each requested count to the slots that want it.
std::multimap<std::size_t, std::size_t> request_slots(std::span<const std::size_t> counts) {
  std::multimap<std::size_t, std::size_t> slots;
  for (std::size_t i = 0; i < counts.size(); ++i) slots.emplace(counts[i], i);
  return slots;
}

ComplexMatrix covariance(const ComplexMatrix& x) {
  ComplexMatrix r(x.rows(), x.rows());
  kernels::active().covariance(x.data(), x.rows(), x.cols(), r.data());
  return r;
}

}  // namespace

std::vector<double> theta_grid(std::size_t points) {
  std::vector<double> t(points);
  for (std::size_t i = 0; i < points; ++i) t[i] = std::numbers::pi * static_cast<double>(i) / static_cast<double>(points);
  return t;
}

CVector mvdr_weights(const ComplexMatrix& r, std::span<const cdouble> c) {
  if (c.size() != r.rows()) throw Error(Errc::length_mismatch, "constraint length does not match R");
  if (norm2(c) == 0.0) throw Error(Errc::invalid_argument, "constraint vector is zero");
  const Cholesky chol = factor_covariance(r);
  CVector x = chol.solve(c);
  const cdouble denom = kernels::active().dot_conj(c.data(), x.data(), c.size());
  for (auto& v : x) v /= denom;
  return x;
}

PseudoSpectrum mvdr_spectrum(const ComplexMatrix& r, const ArrayGeometry& geometry, std::size_t grid_points) {
  const auto theta = theta_grid(grid_points);
  const ComplexMatrix c = steering_matrix(theta, geometry);
  const ComplexMatrix inv = factor_covariance(r).inverse();
  return make_spectrum(theta, inverse_quad_forms(inv, c));
}

// ---------------------------------------------------------------------------
// Algorithm 1

std::vector<PseudoSpectrum> feedback_mvdr_alg1(const SceneRealization& scene, const ArrayGeometry& geometry,
                                               std::span<const std::size_t> retransmissions,
                                               const FeedbackOptions& opt) {
  if (retransmissions.empty()) return {};
  const std::size_t n = scene.elements(), t = scene.snapshot_count();
  if (n != geometry.elements) throw Error(Errc::length_mismatch, "scene and geometry element counts differ");
  const auto& kt = kernels::active();
  const std::size_t max_pass = *std::max_element(retransmissions.begin(), retransmissions.end());
  const auto slots = request_slots(retransmissions);

  const auto theta = theta_grid(opt.grid_points);
  const ComplexMatrix steer = steering_matrix(theta, geometry);
  const double loop_gain = opt.loop_gain > 0.0 ? opt.loop_gain : static_cast<double>(n);
  const double alpha_scale = loop_gain / static_cast<double>(n);

  const auto base = base_passes(scene, max_pass);
  const Cholesky chol0 = factor_covariance(covariance(base[0]));

  std::vector<std::vector<double>> power(retransmissions.size(), std::vector<double>(theta.size()));
  ComplexMatrix r(n, t), rr(n, n);
  CVector y(t), alpha(n);

  for (std::size_t gi = 0; gi < theta.size(); ++gi) {
    const auto c = steer.col(gi);
    for (std::size_t i = 0; i < n; ++i) alpha[i] = alpha_scale * c[i];
    const CVector u = feedback_signature(scene, alpha);

    auto beamform = [&](const Cholesky& chol, const ComplexMatrix& x) {
      CVector w = chol.solve(c);
      const cdouble denom = kt.dot_conj(c.data(), w.data(), n);
      for (auto& v : w) v /= denom;
      kt.project(w.data(), x.data(), n, t, y.data());
    };
    auto record = [&](std::size_t m) {
      const auto [lo, hi] = slots.equal_range(m);
      if (lo == hi) return;
      const double p = mean_power(y);
      for (auto it = lo; it != hi; ++it) power[it->second][gi] = p;
    };

    beamform(chol0, base[0]);
    record(0);
    const double rms0 = rms(y);
    for (std::size_t m = 1; m <= max_pass; ++m) {
      std::copy(base[m].data(), base[m].data() + n * t, r.data());
      kt.add_outer(r.data(), u.data(), y.data(), n, t);
      kt.covariance(r.data(), n, t, rr.data());
      beamform(factor_covariance(rr), r);
      const double rm = rms(y);
      if (!std::isfinite(rm) || (rms0 > 0.0 && rm > 1e6 * rms0))
        throw Error(Errc::unstable_loop, "sweep angle " + std::to_string(theta[gi] * 180.0 / std::numbers::pi) +
                                             " deg, pass " + std::to_string(m));
      record(m);
    }
  }

  std::vector<PseudoSpectrum> out;
  out.reserve(power.size());
  for (auto& p : power) out.push_back(make_spectrum(theta, std::move(p)));
  return out;
}

PseudoSpectrum feedback_mvdr_alg1(const SceneRealization& scene, const ArrayGeometry& geometry,
                                  std::size_t retransmissions, const FeedbackOptions& opt) {
  const std::size_t m[1] = {retransmissions};
  return std::move(feedback_mvdr_alg1(scene, geometry, m, opt).front());
}

// ---------------------------------------------------------------------------
// Algorithm 2

CVector inverse_series(std::span<const cdouble> beta) {
  const std::size_t n = beta.size();
  if (n == 0) return {};
  CVector b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = std::conj(beta[i]);
  if (std::abs(b[0]) == 0.0) throw Error(Errc::unstable_expansion, "leading coefficient is zero");
  CVector h(n);
  h[0] = 1.0 / b[0];
  for (std::size_t k = 1; k < n; ++k) {
    cdouble s = 0.0;
    for (std::size_t j = 1; j <= k; ++j) s += b[j] * h[k - j];
    h[k] = -s / b[0];
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!(std::abs(h[k]) <= 1e6)) throw Error(Errc::unstable_expansion, "coefficient " + std::to_string(k) + " exceeds 1e6");
    h[k] = std::conj(h[k]);
  }
  return h;
}

std::vector<PseudoSpectrum> feedback_mvdr_alg2(const SceneRealization& scene, const ArrayGeometry& geometry,
                                               std::span<const std::size_t> retransmissions,
                                               const FeedbackOptions& opt) {
  if (retransmissions.empty()) return {};
  const std::size_t n = scene.elements(), t = scene.snapshot_count();
  if (n != geometry.elements) throw Error(Errc::length_mismatch, "scene and geometry element counts differ");
  const auto& kt = kernels::active();
  const std::size_t max_pass = *std::max_element(retransmissions.begin(), retransmissions.end());
  const auto slots = request_slots(retransmissions);

  const auto theta = theta_grid(opt.grid_points);
  const ComplexMatrix steer = steering_matrix(theta, geometry);
  CVector e0(n);
  e0[0] = 1.0;

  std::vector<PseudoSpectrum> out(retransmissions.size());
  ComplexMatrix r = scene.snapshots(0);
  CVector y(t), u;
  double rms0 = 0.0;
  for (std::size_t m = 0; m <= max_pass; ++m) {
    if (m > 0) {
      r = scene.snapshots(m);
      kt.add_outer(r.data(), u.data(), y.data(), n, t);
    }
    const CVector beta = mvdr_weights(covariance(r), e0);
    const CVector alpha = inverse_series(beta);
    kt.project(beta.data(), r.data(), n, t, y.data());
    const double rm = rms(y);
    if (m == 0) rms0 = rm;
    if (!std::isfinite(rm) || (rms0 > 0.0 && rm > 1e6 * rms0))
      throw Error(Errc::unstable_loop, "pass " + std::to_string(m));
    u = feedback_signature(scene, alpha);

    const auto [lo, hi] = slots.equal_range(m);
    if (lo == hi) continue;
    std::vector<double> p(theta.size());
    for (std::size_t gi = 0; gi < theta.size(); ++gi)
      p[gi] = std::norm(kt.dot_conj(alpha.data(), steer.col(gi).data(), n));
    const PseudoSpectrum s = make_spectrum(theta, std::move(p));
    for (auto it = lo; it != hi; ++it) out[it->second] = s;
  }
  return out;
}

PseudoSpectrum feedback_mvdr_alg2(const SceneRealization& scene, const ArrayGeometry& geometry,
                                  std::size_t retransmissions, const FeedbackOptions& opt) {
  const std::size_t m[1] = {retransmissions};
  return std::move(feedback_mvdr_alg2(scene, geometry, m, opt).front());
}

// ---------------------------------------------------------------------------
// Subspace baselines

PseudoSpectrum music(const ComplexMatrix& r, std::size_t targets, const ArrayGeometry& geometry,
                     std::size_t grid_points) {
  const std::size_t n = r.rows();
  if (targets >= n) throw Error(Errc::invalid_argument, "MUSIC needs fewer targets than elements");
  if (n != geometry.elements) throw Error(Errc::length_mismatch, "covariance size does not match the array");
  const auto eig = hermitian_eig(r);
  const auto theta = theta_grid(grid_points);
  const double top = std::max(std::abs(eig.values.front()), kTiny);
  if (eig.values.front() - eig.values.back() <= 1e-12 * top)
    return make_spectrum(theta, std::vector<double>(theta.size(), 1.0));
  if (targets > 0 && eig.values[targets - 1] - eig.values[targets] < 1e-12 * top)
    throw Error(Errc::subspace_split_ambiguous, "no gap between signal and noise eigenvalues");

  ComplexMatrix q(n, n);
  for (std::size_t k = targets; k < n; ++k) {
    const auto e = eig.vectors.col(k);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) q(i, j) += e[i] * std::conj(e[j]);
  }
  const ComplexMatrix c = steering_matrix(theta, geometry);
  return make_spectrum(theta, inverse_quad_forms(q, c));
}

std::vector<double> esprit(const ComplexMatrix& r, std::size_t targets, const ArrayGeometry& geometry) {
  const std::size_t n = r.rows();
  if (targets == 0 || targets >= n) throw Error(Errc::invalid_argument, "ESPRIT needs 1 <= L < N");
  if (targets > 8) throw Error(Errc::invalid_argument, "ESPRIT supports at most 8 targets");
  const auto eig = hermitian_eig(r);
  ComplexMatrix e1(n - 1, targets), e2(n - 1, targets);
  for (std::size_t k = 0; k < targets; ++k)
    for (std::size_t i = 0; i + 1 < n; ++i) {
      e1(i, k) = eig.vectors(i, k);
      e2(i, k) = eig.vectors(i + 1, k);
    }
  ComplexMatrix psi_op;
  try {
    psi_op = least_squares(e1, e2);
  } catch (const Error& e) {
    if (e.code() != Errc::singular_matrix) throw;
    throw Error(Errc::rank_deficient_subarray, e.what());
  }
  const CVector lambda = small_general_eigenvalues(psi_op);
  std::vector<double> thetas;
  thetas.reserve(lambda.size());
  const double span = 2.0 * std::numbers::pi * geometry.spacing;
  for (const auto& l : lambda) {
    const double psi = -std::arg(l);
    thetas.push_back(std::acos(std::clamp(psi / span, -1.0, 1.0)));
  }
  std::sort(thetas.begin(), thetas.end());
  return thetas;
}

PseudoSpectrum robust_mvdr(const ComplexMatrix& r, const ArrayGeometry& geometry, std::size_t grid_points,
                           double lambda_r) {
  if (!(lambda_r >= 0.0)) throw Error(Errc::invalid_argument, "lambda_r must be >= 0");
  ComplexMatrix loaded = r;
  const double load = lambda_r * r.trace().real() / static_cast<double>(r.rows());
  for (std::size_t i = 0; i < r.rows(); ++i) loaded(i, i) += load;
  return mvdr_spectrum(loaded, geometry, grid_points);
}

// ---------------------------------------------------------------------------
// Nested array

std::vector<double> nested_positions(const NestedSplit& split) {
  if (split.n1 < 1 || split.n2 < 1) throw Error(Errc::invalid_geometry, "nested split needs n1 >= 1 and n2 >= 1");
  std::vector<double> p;
  for (std::size_t i = 0; i < split.n1; ++i) p.push_back(static_cast<double>(i));
  for (std::size_t m = 1; m <= split.n2; ++m) p.push_back(static_cast<double>((split.n1 + 1) * m - 1));
  return p;
}

CVector coarray_samples(const ComplexMatrix& r, std::span<const double> positions) {
  const std::size_t n = positions.size();
  if (r.rows() != n || r.cols() != n) throw Error(Errc::length_mismatch, "covariance size does not match positions");
  std::vector<long> pos(n);
  long aperture = 0;
  for (std::size_t i = 0; i < n; ++i) {
    pos[i] = std::lround(positions[i]);
    aperture = std::max(aperture, pos[i]);
  }
  const std::size_t lags = static_cast<std::size_t>(2 * aperture + 1);
  CVector sum(lags);
  std::vector<std::size_t> count(lags, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t idx = static_cast<std::size_t>(pos[i] - pos[j] + aperture);
      sum[idx] += r(i, j);
      ++count[idx];
    }
  for (std::size_t l = 0; l < lags; ++l) {
    if (count[l] == 0)
      throw Error(Errc::coarray_hole, "lag " + std::to_string(static_cast<long>(l) - aperture) + " missing");
    sum[l] /= static_cast<double>(count[l]);
  }
  return sum;
}

ComplexMatrix nested_smoothed_covariance(const ComplexMatrix& r, std::span<const double> positions) {
  const CVector z = coarray_samples(r, positions);
  const std::size_t k = (z.size() + 1) / 2;  // virtual elements: lags 0..aperture
  const long aperture = static_cast<long>(k) - 1;
  ComplexMatrix toeplitz(k, k);
  for (std::size_t b = 0; b < k; ++b)
    for (std::size_t a = 0; a < k; ++a)
      toeplitz(a, b) = z[static_cast<std::size_t>(static_cast<long>(a) - static_cast<long>(b) + aperture)];
  ComplexMatrix rss = toeplitz * toeplitz.adjoint();
  rss *= 1.0 / static_cast<double>(k);
  return rss;
}

PseudoSpectrum nested_mvdr(const TargetScene& scene, double spacing, const NestedSplit& split,
                           std::size_t grid_points) {
  const auto pos = nested_positions(split);
  const SceneRealization real(scene, spacing, pos);
  const ComplexMatrix r = covariance(real.snapshots(0));
  ComplexMatrix rss = nested_smoothed_covariance(r, pos);
  const std::size_t k = rss.rows();
  const double load = 1e-9 * rss.trace().real() / static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i) rss(i, i) += load;
  return mvdr_spectrum(rss, ArrayGeometry{k, spacing}, grid_points);
}

// ---------------------------------------------------------------------------
// Reduced dimension

PseudoSpectrum reduced_dim_mvdr(const ComplexMatrix& r, const ArrayGeometry& geometry, std::size_t subarray,
                                std::size_t grid_points) {
  const std::size_t n = r.rows();
  if (subarray < 2) throw Error(Errc::subarray_too_small, "subarrays need at least 2 elements");
  if (n % subarray != 0) throw Error(Errc::invalid_argument, "element count not divisible by subarray size");
  const auto theta = theta_grid(grid_points);
  const ComplexMatrix c = steering_matrix(theta, ArrayGeometry{subarray, geometry.spacing});
  std::vector<double> log_power(theta.size(), 0.0);
  for (std::size_t s = 0; s < n / subarray; ++s) {
    ComplexMatrix rs(subarray, subarray);
    for (std::size_t j = 0; j < subarray; ++j)
      for (std::size_t i = 0; i < subarray; ++i) rs(i, j) = r(s * subarray + i, s * subarray + j);
    const auto p = inverse_quad_forms(factor_covariance(rs).inverse(), c);
    for (std::size_t g = 0; g < p.size(); ++g) log_power[g] += std::log(p[g]);
  }
  const double top = *std::max_element(log_power.begin(), log_power.end());
  std::vector<double> power(theta.size());
  for (std::size_t g = 0; g < power.size(); ++g) power[g] = std::exp(log_power[g] - top);
  return make_spectrum(theta, std::move(power));
}

// ---------------------------------------------------------------------------
// Scoring

PeakPick peaks_to_angles(const PseudoSpectrum& spectrum, std::size_t targets) {
  if (targets < 1) throw Error(Errc::invalid_argument, "need at least one target");
  const auto& p = spectrum.power;
  const std::size_t g = p.size();
  if (g < 3) throw Error(Errc::invalid_argument, "spectrum too short");
  const double step = spectrum.theta[1] - spectrum.theta[0];

  std::vector<std::size_t> idx;
  for (std::size_t i = 1; i + 1 < g; ++i)
    if (p[i] > p[i - 1] && p[i] >= p[i + 1]) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
  if (idx.size() > targets) idx.resize(targets);

  PeakPick out;
  for (std::size_t i : idx) {
    const double a = p[i - 1], b = p[i], c = p[i + 1];
    const double den = a - 2.0 * b + c;
    const double d = den == 0.0 ? 0.0 : 0.5 * (a - c) / den;
    out.thetas.push_back(spectrum.theta[i] + d * step);
  }
  if (out.thetas.size() < targets) {
    out.fewer_peaks = true;
    const double fill = out.thetas.empty()
                            ? spectrum.theta[static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin())]
                            : out.thetas.front();
    out.thetas.resize(targets, fill);
  }
  std::sort(out.thetas.begin(), out.thetas.end());
  return out;
}

double rmse_deg(std::span<const double> truth, std::span<const double> estimate) {
  if (truth.size() != estimate.size()) throw Error(Errc::length_mismatch, "truth and estimate lengths differ");
  if (truth.empty()) return 0.0;
  std::vector<double> t(truth.begin(), truth.end()), e(estimate.begin(), estimate.end());
  std::sort(t.begin(), t.end());
  std::sort(e.begin(), e.end());
  double s = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) s += (t[i] - e[i]) * (t[i] - e[i]);
  return std::sqrt(s / static_cast<double>(t.size())) * 180.0 / std::numbers::pi;
}

}  // namespace siir
