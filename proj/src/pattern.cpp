#include "siir/pattern.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace siir {

namespace {

// sin(N d / 2) / sin(d / 2), continuous at d = 2 pi m.
double dirichlet(double delta, std::size_t n) {
  const double half = 0.5 * delta;
  const double s = std::sin(half);
  const double nn = static_cast<double>(n);
  if (std::abs(s) < 1e-12) {
    // Limit: N * cos(N h) / cos(h) at h = m pi.
    return nn * std::cos(nn * half) / std::cos(half);
  }
  return std::sin(nn * half) / s;
}

BeamformerWeights steered_weights(const PatternSpec& spec, double psi) {
  BeamformerWeights w = optimal_weights(psi, spec.geometry.elements, spec.k, 1.0, WeightMode::ideal);
  w.g = spec.r;
  return w;
}

}  // namespace

cdouble pattern_numerator(const PatternSpec& spec, double psi) {
  const std::size_t n = spec.geometry.elements;
  if (spec.normalization == PatternNormalization::dirichlet_ratio) {
    const double x = dirichlet(spec.psi0 - psi, n);
    return spec.kind == BeamformerKind::fir ? cdouble(x) : spec.r * x;
  }
  const CVector beta = steering_vector(psi, n);
  const cdouble b = fir_response(beta, spec.psi0) / static_cast<double>(n);
  return spec.kind == BeamformerKind::fir ? b : spec.r * b;
}

cdouble pattern_response(const PatternSpec& spec, double psi) {
  const std::size_t n = spec.geometry.elements;
  if (spec.normalization == PatternNormalization::dirichlet_ratio) {
    const double x = dirichlet(spec.psi0 - psi, n);
    switch (spec.kind) {
      case BeamformerKind::fir:
        return x;
      case BeamformerKind::single_feedback:
      case BeamformerKind::array_feedback:
      case BeamformerKind::array_feedback_finite: {
        if (spec.k == cdouble{}) throw Error(Errc::zero_tuning_scalar, "k must be nonzero");
        const cdouble q = (spec.r / spec.k) * x * x;
        if (spec.kind == BeamformerKind::single_feedback) {
          const cdouble den = 1.0 - spec.r * x;
          if (std::abs(den) <= kPoleTolerance) throw Error(Errc::pole_at_angle, "pattern pole");
          return spec.r * x / den;
        }
        if (spec.kind == BeamformerKind::array_feedback_finite) {
          const double m1 = static_cast<double>(spec.retransmissions + 1);
          const cdouble partial = std::abs(1.0 - q) <= kPoleTolerance ? cdouble(m1) : (1.0 - std::pow(q, m1)) / (1.0 - q);
          return spec.r * x * partial;
        }
        const cdouble den = 1.0 - q;
        if (std::abs(den) <= kPoleTolerance) throw Error(Errc::pole_at_angle, "pattern pole");
        return spec.r * x / den;
      }
    }
  }

  switch (spec.kind) {
    case BeamformerKind::fir: {
      const CVector beta = steering_vector(psi, n);
      return fir_response(beta, spec.psi0) / static_cast<double>(n);
    }
    case BeamformerKind::single_feedback: {
      CVector beta = steering_vector(psi, n);
      for (auto& b : beta) b *= spec.r / static_cast<double>(n);
      return single_feedback_response(beta, spec.psi0);
    }
    case BeamformerKind::array_feedback:
      return array_feedback_response(steered_weights(spec, psi), spec.psi0);
    case BeamformerKind::array_feedback_finite: {
      const BeamformerWeights w = steered_weights(spec, psi);
      const cdouble b = w.g * fir_response(w.beta, spec.psi0);
      const cdouble q = loop_gain(w, spec.psi0);
      const double m1 = static_cast<double>(spec.retransmissions + 1);
      const cdouble partial = std::abs(1.0 - q) <= kPoleTolerance ? cdouble(m1) : (1.0 - std::pow(q, m1)) / (1.0 - q);
      return b * partial;
    }
  }
  return 0.0;
}

bool BeamPattern::any_clamped() const {
  return std::any_of(clamped.begin(), clamped.end(), [](std::uint8_t c) { return c != 0; });
}

BeamPattern beam_pattern(const PatternSpec& spec) {
  spec.geometry.validate();
  if (spec.grid_points < 4096) throw Error(Errc::invalid_argument, "pattern grid needs at least 4096 points");
  const std::size_t g = spec.grid_points;
  const double span = 4.0 * std::numbers::pi * spec.geometry.spacing;
  const double lo = -0.5 * span;
  const double clamp_mag = std::pow(10.0, spec.clamp_db / 20.0);

  BeamPattern p;
  p.clamp_db = spec.clamp_db;
  p.kind = spec.kind;
  p.normalization = spec.normalization;
  p.k = spec.k;
  p.periodic = spec.geometry.spacing >= 0.5;
  p.psi.resize(g);
  p.response.resize(g);
  p.numerator.resize(g);
  p.clamped.assign(g, 0);
  for (std::size_t i = 0; i < g; ++i) {
    const double psi = lo + span * static_cast<double>(i) / static_cast<double>(g);
    p.psi[i] = psi;
    p.numerator[i] = std::abs(pattern_numerator(spec, psi));
    cdouble h;
    bool pole = false;
    try {
      h = pattern_response(spec, psi);
    } catch (const Error& e) {
      if (e.code() != Errc::pole_at_angle) throw;
      pole = true;
    }
    if (pole || !std::isfinite(std::abs(h)) || std::abs(h) > clamp_mag) {
      const cdouble phase = (!pole && std::isfinite(std::abs(h)) && std::abs(h) > 0.0) ? h / std::abs(h) : cdouble(1.0);
      h = clamp_mag * phase;
      p.clamped[i] = 1;
    }
    p.response[i] = h;
  }
  return p;
}

namespace {

std::size_t argmax_abs(const std::vector<cdouble>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  return best;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

double half_power_beamwidth(const BeamPattern& pattern) {
  const std::size_t g = pattern.psi.size();
  if (g < 3) throw Error(Errc::no_half_power_crossing, "pattern too short");
  const std::size_t peak = argmax_abs(pattern.response);
  const double peak_pow = std::norm(pattern.response[peak]);
  const double half = 0.5 * peak_pow;
  const double step = pattern.psi[1] - pattern.psi[0];

  // Distance from the peak to the crossing, in grid steps, walking in `dir`.
  auto crossing = [&](int dir) -> double {
    std::size_t prev = peak;
    for (std::size_t s = 1; s < g; ++s) {
      const long raw = static_cast<long>(peak) + dir * static_cast<long>(s);
      if (!pattern.periodic && (raw < 0 || raw >= static_cast<long>(g))) break;
      const std::size_t idx = static_cast<std::size_t>((raw % static_cast<long>(g) + static_cast<long>(g)) % static_cast<long>(g));
      const double p = std::norm(pattern.response[idx]);
      if (p <= half) {
        const double p0 = std::norm(pattern.response[prev]);
        const double frac = p0 == p ? 0.0 : (p0 - half) / (p0 - p);
        return static_cast<double>(s - 1) + frac;
      }
      prev = idx;
    }
    throw Error(Errc::no_half_power_crossing, "pattern never drops 3 dB below its peak");
  };

  return (crossing(-1) + crossing(+1)) * step;
}

SidelobeInfo first_sidelobe(const BeamPattern& pattern) {
  const std::size_t g = pattern.numerator.size();
  const auto& num = pattern.numerator;
  const std::size_t peak = argmax(num);
  auto wrap = [&](long i) -> long {
    if (pattern.periodic) return (i % static_cast<long>(g) + static_cast<long>(g)) % static_cast<long>(g);
    return (i < 0 || i >= static_cast<long>(g)) ? -1 : i;
  };

  // Walk to the first local minimum, then to the next local maximum.
  auto adjacent_max = [&](int dir) -> long {
    long i = static_cast<long>(peak);
    long steps = 0;
    const long limit = static_cast<long>(g);
    while (true) {
      const long n = wrap(i + dir);
      if (n < 0 || ++steps > limit) return -1;
      if (num[n] > num[i]) break;
      i = n;
    }
    while (true) {
      const long n = wrap(i + dir);
      if (n < 0 || ++steps > limit) return -1;
      if (num[n] < num[i]) return i;
      i = n;
    }
  };

  const long left = adjacent_max(-1);
  const long right = adjacent_max(+1);
  if (left < 0 && right < 0) throw Error(Errc::no_sidelobe, "no local maximum outside the main lobe");
  long side = left;
  if (side < 0 || (right >= 0 && num[right] > num[left])) side = right;

  const bool peak_clamped = pattern.clamped[argmax_abs(pattern.response)] != 0;
  SidelobeInfo info;
  info.psi = pattern.psi[static_cast<std::size_t>(side)];
  const double side_pow = std::norm(pattern.response[static_cast<std::size_t>(side)]);
  const bool feedback = pattern.kind != BeamformerKind::fir;
  if (feedback && (peak_clamped || pattern.normalization == PatternNormalization::dirichlet_ratio)) {
    info.absolute = true;
    info.level_db = 10.0 * std::log10(side_pow / std::norm(pattern.k));
  } else {
    const double peak_pow = std::norm(pattern.response[argmax_abs(pattern.response)]);
    info.level_db = 10.0 * std::log10(side_pow / peak_pow);
  }
  return info;
}

double first_sidelobe_level(const BeamPattern& pattern) { return first_sidelobe(pattern).level_db; }

double closed_form_fsll(std::size_t n, cdouble k) {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double nn = static_cast<double>(n);
  return 9.0 * pi2 * std::norm(k) / (4.0 * nn * nn) * (1.0 + 9.0 * pi2 / (2.0 * nn * nn));
}

Directivity directivity(const BeamPattern& pattern) {
  const std::size_t peak = argmax_abs(pattern.response);
  double sum = 0.0;
  const std::size_t g = pattern.response.size();
  if (pattern.periodic) {
    for (const auto& h : pattern.response) sum += std::abs(h);
    sum /= static_cast<double>(g);
  } else {
    for (std::size_t i = 0; i + 1 < g; ++i) sum += 0.5 * (std::abs(pattern.response[i]) + std::abs(pattern.response[i + 1]));
    sum /= static_cast<double>(g - 1);
  }
  Directivity d;
  d.value = sum > 0.0 ? std::abs(pattern.response[peak]) / sum : 1.0;
  d.lower_bound = pattern.clamped[peak] != 0;
  return d;
}

}  // namespace siir
