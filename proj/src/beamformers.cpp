#include "siir/beamformers.hpp"

#include <cmath>
#include <string>

#include "siir/kernels.hpp"

namespace siir {

namespace {

cdouble dot(std::span<const cdouble> a, std::span<const cdouble> b) {
  return kernels::active().dot_conj(a.data(), b.data(), a.size());
}

// v^H diag(0, -j, ..., -j(N-1)) x, i.e. w^H (dv/dpsi) for w = x.
cdouble dot_derivative(std::span<const cdouble> w, std::span<const cdouble> v) {
  cdouble s = 0.0;
  for (std::size_t n = 0; n < v.size(); ++n) s += std::conj(w[n]) * cdouble(0.0, -static_cast<double>(n)) * v[n];
  return s;
}

void require_length(std::span<const cdouble> w, std::size_t n, const char* what) {
  if (w.size() != n) throw Error(Errc::length_mismatch, std::string(what) + " length does not match the array");
}

double rms(std::span<const cdouble> y) {
  double s = 0.0;
  for (const auto& v : y) s += std::norm(v);
  return y.empty() ? 0.0 : std::sqrt(s / static_cast<double>(y.size()));
}

}  // namespace

cdouble fir_response(std::span<const cdouble> beta, double psi) {
  const CVector v = steering_vector(psi, beta.size());
  return dot(beta, v);
}

cdouble single_feedback_response(std::span<const cdouble> beta, double psi) {
  const cdouble b = fir_response(beta, psi);
  const cdouble den = 1.0 - b;
  if (std::abs(den) <= kPoleTolerance) throw Error(Errc::pole_at_angle, "single-feedback loop gain is 1");
  return b / den;
}

cdouble loop_gain(const BeamformerWeights& w, double psi0) {
  if (w.alpha.empty()) return 0.0;
  require_length(w.alpha, w.beta.size(), "alpha");
  const CVector v = steering_vector(psi0, w.beta.size());
  return w.g * dot(w.beta, v) * dot(w.alpha, v);
}

cdouble array_feedback_response(const BeamformerWeights& w, double psi0) {
  const CVector v = steering_vector(psi0, w.beta.size());
  const cdouble num = w.g * dot(w.beta, v);
  if (w.alpha.empty()) return num;
  require_length(w.alpha, w.beta.size(), "alpha");
  const cdouble den = 1.0 - num * dot(w.alpha, v);
  if (std::abs(den) <= kPoleTolerance) throw Error(Errc::pole_at_angle, "array-feedback loop gain is 1");
  return num / den;
}

BeamformerWeights optimal_weights(double psi, std::size_t n, cdouble k, double g_hat, WeightMode mode) {
  if (k == cdouble{}) throw Error(Errc::zero_tuning_scalar, "k must be nonzero");
  if (n < 2) throw Error(Errc::invalid_geometry, "need at least 2 elements");
  if (!(g_hat > 0.0)) throw Error(Errc::invalid_argument, "g_hat must be positive");
  const CVector v = steering_vector(psi, n);
  const double nn = static_cast<double>(n);
  BeamformerWeights w;
  w.k = k;
  w.g = g_hat;
  w.g_hat = g_hat;
  const cdouble beta_scale = (mode == WeightMode::ideal ? k : cdouble(1.0)) / (g_hat * nn);
  const cdouble alpha_scale = 1.0 / (k * nn);
  w.beta.resize(n);
  w.alpha.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    w.beta[i] = beta_scale * v[i];
    w.alpha[i] = alpha_scale * v[i];
  }
  return w;
}

CVector feedback_signature(const SceneRealization& scene, std::span<const cdouble> alpha) {
  const std::size_t n = scene.elements();
  require_length(alpha, n, "alpha");
  CVector u(n);
  for (std::size_t k = 0; k < scene.targets(); ++k) {
    const auto vk = scene.steering().col(k);
    const cdouble coef = dot(alpha, vk);
    for (std::size_t i = 0; i < n; ++i) u[i] += coef * vk[i];
  }
  return u;
}

LoopResult simulate_retransmission_loop(const SceneRealization& scene, const BeamformerWeights& w,
                                        std::size_t retransmissions) {
  const std::size_t n = scene.elements(), t = scene.snapshot_count();
  require_length(w.beta, n, "beta");
  const auto& kt = kernels::active();

  CVector u;
  if (!w.alpha.empty()) {
    u = feedback_signature(scene, w.alpha);
    for (auto& e : u) e *= w.g;
  }

  auto received = [&](std::size_t pass) {
    ComplexMatrix r = scene.source();
    r *= w.g;
    r += scene.noise(pass);
    return r;
  };

  LoopResult out;
  out.received = received(0);
  out.y.resize(t);
  kt.project(w.beta.data(), out.received.data(), n, t, out.y.data());
  const double rms0 = rms(out.y);

  for (std::size_t m = 1; m <= retransmissions; ++m) {
    ComplexMatrix r = received(m);
    if (!u.empty()) kt.add_outer(r.data(), u.data(), out.y.data(), n, t);
    out.received = std::move(r);
    kt.project(w.beta.data(), out.received.data(), n, t, out.y.data());
    const double rm = rms(out.y);
    if (!std::isfinite(rm) || (rms0 > 0.0 && rm > 1e6 * rms0))
      throw Error(Errc::unstable_loop, "output grew beyond 1e6x its initial level at pass " + std::to_string(m));
  }
  return out;
}

TransferDerivatives transfer_derivatives(const BeamformerWeights& w, double psi, double phi, cdouble source) {
  const std::size_t n = w.beta.size();
  const CVector v = steering_vector(psi, n);
  const cdouble e = std::polar(1.0, -phi);
  const cdouble b = w.g * dot(w.beta, v);
  const cdouble db = w.g * dot_derivative(w.beta, v);
  cdouble a = 0.0, da = 0.0;
  if (!w.alpha.empty()) {
    require_length(w.alpha, n, "alpha");
    a = dot(w.alpha, v);
    da = dot_derivative(w.alpha, v);
  }
  const cdouble den = 1.0 - a * b * e;
  if (std::abs(den) <= kPoleTolerance) throw Error(Errc::pole_at_angle, "transfer function has a pole here");
  const cdouble den2 = den * den;
  TransferDerivatives out;
  out.y = source * e * b / den;
  out.d_psi = source * e * (db + e * b * b * da) / den2;
  out.d_phi = cdouble(0.0, -1.0) * b * e * source / den2;
  return out;
}

FimResult fisher_information(const BeamformerWeights& w, double psi, double phi, const FimOptions& opt) {
  if (!(opt.sigma2 > 0.0)) throw Error(Errc::invalid_argument, "sigma2 must be positive");
  if (!(opt.omega_s > 0.0)) throw Error(Errc::invalid_argument, "omega_s must be positive");
  const std::size_t points = std::max<std::size_t>(opt.points, 1024);
  const double h = opt.omega_s / static_cast<double>(points - 1);
  const auto unit = transfer_derivatives(w, psi, phi, 1.0);

  double jpp = 0.0, jpf = 0.0, jff = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double omega = -0.5 * opt.omega_s + h * static_cast<double>(i);
    const double weight = (i == 0 || i + 1 == points) ? 0.5 : 1.0;
    const cdouble s = opt.source ? opt.source(omega) : cdouble(1.0);
    // The narrowband transfer is frequency-flat; S(omega) scales it.
    const cdouble dpsi = s * unit.d_psi;
    const cdouble dphi = s * unit.d_phi;
    jpp += weight * std::norm(dpsi);
    jpf += weight * (std::conj(dpsi) * dphi).real();
    jff += weight * std::norm(dphi);
  }
  const double scale = h / (2.0 * 3.141592653589793 * opt.sigma2);
  return {jpp * scale, jpf * scale, jff * scale};
}

}  // namespace siir
