#pragma once

// FIR, single-antenna feedback and array feedback (retransmission) beamformers,
// their closed-loop simulation, and the Fisher information of the output.

#include <functional>
#include <span>

#include "siir/array_model.hpp"
#include "siir/linalg.hpp"

namespace siir {

struct BeamformerWeights {
  CVector beta;   // receive
  CVector alpha;  // transmit; empty means no feedback
  cdouble k = 1.0;
  double g = 1.0;      // received gain
  double g_hat = 1.0;  // gain assumed when forming the weights

  double r() const noexcept { return g / g_hat; }
};

enum class WeightMode {
  ideal,          // beta = k v / (g_hat N),  alpha = v / (k N)
  gain_mismatch,  // beta = v / (g_hat N),    alpha = v / (k N)
};

// Denominators at or below this magnitude are reported as poles.
inline constexpr double kPoleTolerance = 1e-12;

cdouble fir_response(std::span<const cdouble> beta, double psi);

// b / (1 - b), b = beta^H v(psi). Throws pole_at_angle.
cdouble single_feedback_response(std::span<const cdouble> beta, double psi);

// g b / (1 - g b a) with b = beta^H v(psi0), a = alpha^H v(psi0); the weights
// were formed for some steer angle and psi0 is the true target. Throws
// pole_at_angle.
cdouble array_feedback_response(const BeamformerWeights& w, double psi0);

// g * beta^H v(psi0) * alpha^H v(psi0)
cdouble loop_gain(const BeamformerWeights& w, double psi0);

// Sets g = g_hat. Throws zero_tuning_scalar when k == 0.
BeamformerWeights optimal_weights(double psi, std::size_t n, cdouble k, double g_hat = 1.0,
                                  WeightMode mode = WeightMode::ideal);

// u = sum_k (alpha^H v_k) v_k: the spatial signature of one retransmission.
CVector feedback_signature(const SceneRealization& scene, std::span<const cdouble> alpha);

struct LoopResult {
  CVector y;              // y^(M)
  ComplexMatrix received;  // r^(M)
};

// r^(0) = g S + w^(0);  y^(m) = beta^H r^(m);
// r^(m+1) = g (S + u y^(m)^T) + w^(m+1)
// Throws unstable_loop once rms(y^(m)) exceeds 1e6 rms(y^(0)).
LoopResult simulate_retransmission_loop(const SceneRealization& scene, const BeamformerWeights& w,
                                        std::size_t retransmissions);

struct TransferDerivatives {
  cdouble y;
  cdouble d_psi;
  cdouble d_phi;
};

// Y = S e^{-j phi} b / (1 - a b e^{-j phi}), b = g beta^H v(psi), a = alpha^H v(psi),
// with both partial derivatives in closed form. Throws pole_at_angle.
TransferDerivatives transfer_derivatives(const BeamformerWeights& w, double psi, double phi, cdouble source);

struct FimResult {
  double psi_psi = 0.0;
  double psi_phi = 0.0;
  double phi_phi = 0.0;
};

struct FimOptions {
  double omega_s = 2.0 * 3.141592653589793;
  double sigma2 = 1.0;
  std::size_t points = 1024;  // trapezoid nodes over [-omega_s/2, omega_s/2]
  // Source spectrum S(omega); flat unit spectrum when empty.
  std::function<cdouble(double)> source;
};

FimResult fisher_information(const BeamformerWeights& w, double psi, double phi, const FimOptions& opt = {});

}  // namespace siir
