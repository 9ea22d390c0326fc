#pragma once

// Beam patterns over the spatial-frequency grid and the metrics read off
// them: half-power beamwidth, first sidelobe level and directivity.

#include <cstdint>
#include <vector>

#include "siir/array_model.hpp"
#include "siir/beamformers.hpp"

namespace siir {

enum class BeamformerKind {
  fir,
  single_feedback,
  array_feedback,
  array_feedback_finite,  // geometric partial sum after a finite retransmission count
};

enum class PatternNormalization {
  unit_gain,        // optimal weights with 1/N scaling; FIR peak is 1
  dirichlet_ratio,  // B = r X / (1 - (r/k) X^2), X = sin(N d/2) / sin(d/2)
};

struct PatternSpec {
  BeamformerKind kind = BeamformerKind::fir;
  double psi0 = 0.0;  // true target
  ArrayGeometry geometry{};
  std::size_t grid_points = 8192;
  double r = 1.0;  // gain mismatch g / g_hat
  cdouble k = 1.0;
  double clamp_db = 200.0;
  PatternNormalization normalization = PatternNormalization::unit_gain;
  std::size_t retransmissions = 100;  // array_feedback_finite only
};

// Response when the beam is steered to psi and the target sits at spec.psi0.
// Throws pole_at_angle.
cdouble pattern_response(const PatternSpec& spec, double psi);

// FIR numerator of the same beam (g beta^H v(psi0)); equals the response for FIR.
cdouble pattern_numerator(const PatternSpec& spec, double psi);

struct BeamPattern {
  std::vector<double> psi;       // strictly increasing, covers [-2 pi d, 2 pi d)
  std::vector<cdouble> response;  // clamped entries have magnitude 10^(clamp_db/20)
  std::vector<double> numerator;  // |FIR numerator| on the same grid
  std::vector<std::uint8_t> clamped;
  double clamp_db = 200.0;
  BeamformerKind kind = BeamformerKind::fir;
  PatternNormalization normalization = PatternNormalization::unit_gain;
  cdouble k = 1.0;
  bool periodic = true;  // grid spans a full 2 pi period

  bool any_clamped() const;
};

// Throws invalid_argument when grid_points < 4096.
BeamPattern beam_pattern(const PatternSpec& spec);

// Width in psi between the -3 dB power crossings around the global peak.
// Throws no_half_power_crossing.
double half_power_beamwidth(const BeamPattern& pattern);

struct SidelobeInfo {
  double level_db = 0.0;
  double psi = 0.0;       // location of the first sidelobe
  bool absolute = false;  // |H|^2 / |k|^2 rather than relative to the peak
};

// First sidelobe located on the FIR numerator: the main lobe ends at the first
// local minimum on each side of the peak and the larger adjacent maximum is
// taken. Relative to the peak unless the peak is clamped or the pattern uses
// the Dirichlet-ratio form. Throws no_sidelobe.
SidelobeInfo first_sidelobe(const BeamPattern& pattern);
double first_sidelobe_level(const BeamPattern& pattern);

// 9 pi^2 |k|^2 / (4 N^2) * (1 + 9 pi^2 / (2 N^2)), linear power.
double closed_form_fsll(std::size_t n, cdouble k);

struct Directivity {
  double value = 0.0;
  bool lower_bound = false;  // peak was clamped
};

// Peak |H| over mean |H| on the grid (trapezoid over a full period).
Directivity directivity(const BeamPattern& pattern);

}  // namespace siir
