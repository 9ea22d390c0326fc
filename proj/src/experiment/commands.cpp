#include "siir/experiment/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numbers>
#include <optional>
#include <string>
#include <thread>

#include "siir/beamformers.hpp"
#include "siir/doa.hpp"
#include "siir/kernels.hpp"
#include "siir/pattern.hpp"

namespace siir::experiment {

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;
constexpr double kRad = std::numbers::pi / 180.0;

std::string join(const std::vector<double>& v, int decimals) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + fixed(v[i], decimals);
  return s;
}

std::vector<double> truth_thetas(const TargetScene& scene) {
  std::vector<double> t;
  for (const auto& tg : scene.targets) t.push_back(tg.theta);
  std::sort(t.begin(), t.end());
  return t;
}

std::vector<double> to_degrees(std::vector<double> v) {
  for (double& x : v) x *= kDeg;
  return v;
}

void common_meta(const ExperimentConfig& cfg, TableWriter& out, const std::string& command) {
  out.meta("command", command);
  if (!cfg.description.empty()) out.meta("description", cfg.description);
  out.meta("elements", std::to_string(cfg.geometry.elements));
  out.meta("spacing_wavelengths", fixed(cfg.geometry.spacing_wavelengths, 4));
  out.meta("kernels", std::string(kernels::isa_name(kernels::active_isa())));
}

void scene_meta(const ExperimentConfig& cfg, TableWriter& out) {
  std::vector<double> deg;
  for (const auto& t : cfg.scene.targets) deg.push_back(t.theta_deg);
  out.meta("targets_deg", join(deg, 4));
  out.meta("snapshots", std::to_string(cfg.scene.snapshots));
  out.meta("seed", std::to_string(cfg.scene.seed));
}

void require_targets(const ExperimentConfig& cfg) {
  if (cfg.scene.targets.empty()) throw ConfigError("scene.targets: at least one target required");
}

BeamformerKind beamformer_kind(const std::string& name) {
  if (name == "fir") return BeamformerKind::fir;
  if (name == "single") return BeamformerKind::single_feedback;
  if (name == "array") return BeamformerKind::array_feedback;
  return BeamformerKind::array_feedback_finite;
}

PatternNormalization normalization(const std::string& name) {
  return name == "dirichlet_ratio" ? PatternNormalization::dirichlet_ratio : PatternNormalization::unit_gain;
}

bool is_feedback(const std::string& method) { return method == "alg1" || method == "alg2"; }

// Angle estimates (radians, ascending) for a non-feedback method.
std::vector<double> baseline_estimate(const std::string& method, const ExperimentConfig& cfg,
                                      const TargetScene& scene, const ComplexMatrix& r0, bool* fewer = nullptr) {
  const auto geo = to_geometry(cfg);
  const auto& p = cfg.method.params;
  const std::size_t l = scene.targets.size();
  if (method == "esprit") return esprit(r0, l, geo);
  PseudoSpectrum s;
  if (method == "mvdr") s = mvdr_spectrum(r0, geo, p.grid_points);
  else if (method == "music") s = music(r0, l, geo, p.grid_points);
  else if (method == "robust") s = robust_mvdr(r0, geo, p.grid_points, p.lambda_r);
  else if (method == "nested") s = nested_mvdr(scene, geo.spacing, {p.nested_n1, p.nested_n2}, p.grid_points);
  else if (method == "reduced") s = reduced_dim_mvdr(r0, geo, p.subarray_size, p.grid_points);
  else throw ConfigError("method.name: '" + method + "' is not a baseline");
  auto pick = peaks_to_angles(s, l);
  if (fewer) *fewer = pick.fewer_peaks;
  return pick.thetas;
}

FeedbackOptions feedback_options(const ExperimentConfig& cfg) {
  return FeedbackOptions{cfg.method.params.grid_points, cfg.method.params.loop_gain};
}

}  // namespace

std::size_t resolve_threads(std::optional<std::size_t> flag) {
  if (flag && *flag > 0) return *flag;
  if (const char* env = std::getenv("SPATIAL_IIR_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"pattern", "fsll", "estimate", "sweep", "fim"};
  return names;
}

const std::vector<std::string>& columns_for(const std::string& command) {
  static const std::vector<std::string> pattern{"beamformer", "theta_deg", "psi", "magnitude_db", "clamped"};
  static const std::vector<std::string> fsll{"elements", "fsll_fir_db", "fsll_array_db", "fsll_closed_form_db",
                                             "delta_per_doubling_db"};
  static const std::vector<std::string> estimate{"theta_deg", "power_db"};
  static const std::vector<std::string> sweep{"snr_db", "method", "retransmissions", "rmse_deg", "trials", "seed", "error"};
  static const std::vector<std::string> fim{"psi_offset", "j_psipsi", "j_psiphi", "j_phiphi", "fd_rel_err", "pole"};
  if (command == "pattern") return pattern;
  if (command == "fsll") return fsll;
  if (command == "estimate") return estimate;
  if (command == "sweep") return sweep;
  if (command == "fim") return fim;
  throw ConfigError("unknown command '" + command + "'");
}

// ---------------------------------------------------------------------------

void cmd_pattern(const ExperimentConfig& cfg, TableWriter& out) {
  const auto& p = cfg.method.params;
  if (p.grid_points < 4096) throw ConfigError("method.params.grid_points: pattern needs at least 4096 points");
  if (cfg.pattern.beamformers.empty()) throw ConfigError("pattern.beamformers: at least one beamformer required");
  const auto geo = to_geometry(cfg);
  const double psi0 = spatial_frequency(cfg.pattern.theta0_deg * kRad, geo);

  common_meta(cfg, out, "pattern");
  out.meta("theta0_deg", fixed(cfg.pattern.theta0_deg, 4));
  out.meta("r", fixed(p.r, 4));
  out.meta("k", fixed(p.k, 4));
  out.meta("normalization", cfg.pattern.normalization);
  out.meta("clamp_db", fixed(p.clamp_db, 4));

  std::vector<PatternSpec> specs;
  for (const auto& name : cfg.pattern.beamformers) {
    PatternSpec s;
    s.kind = beamformer_kind(name);
    s.psi0 = psi0;
    s.geometry = geo;
    s.grid_points = p.grid_points;
    s.r = p.r;
    s.k = p.k;
    s.clamp_db = p.clamp_db;
    s.normalization = normalization(cfg.pattern.normalization);
    s.retransmissions = p.retransmissions;
    specs.push_back(s);

    // Summary metrics on the psi grid.
    const BeamPattern bp = beam_pattern(s);
    try {
      out.meta(name + ".hpbw_rad", sci(half_power_beamwidth(bp)));
    } catch (const Error& e) {
      out.meta(name + ".hpbw_rad", std::string(errc_name(e.code())));
    }
    try {
      const auto sl = first_sidelobe(bp);
      out.meta(name + ".fsll_db", fixed(sl.level_db, 4) + (sl.absolute ? " (absolute)" : ""));
    } catch (const Error& e) {
      out.meta(name + ".fsll_db", std::string(errc_name(e.code())));
    }
    const auto d = directivity(bp);
    out.meta(name + ".directivity", sci(d.value) + (d.lower_bound ? " (lower bound)" : ""));
  }

  const double clamp_mag = std::pow(10.0, p.clamp_db / 20.0);
  const auto theta = theta_grid(p.grid_points);
  for (std::size_t b = 0; b < specs.size(); ++b) {
    for (double th : theta) {
      const double psi = spatial_frequency(th, geo);
      double mag = 0.0;
      bool clamped = false;
      try {
        mag = std::abs(pattern_response(specs[b], psi));
      } catch (const Error& e) {
        if (e.code() != Errc::pole_at_angle) throw;
        mag = clamp_mag;
        clamped = true;
      }
      double db = mag > 0.0 ? 20.0 * std::log10(mag) : -p.clamp_db;
      if (!std::isfinite(db) || db > p.clamp_db) {
        db = p.clamp_db;
        clamped = true;
      } else if (db < -p.clamp_db) {
        db = -p.clamp_db;
        clamped = true;
      }
      out.row({Cell::str(cfg.pattern.beamformers[b]), Cell::num(fixed(th * kDeg, 4)), Cell::num(fixed(psi, 6)),
               Cell::num(fixed(db, 4)), Cell::num(clamped ? "1" : "0")});
    }
  }
}

// ---------------------------------------------------------------------------

void cmd_fsll(const ExperimentConfig& cfg, TableWriter& out) {
  if (cfg.fsll.elements.empty()) throw ConfigError("fsll.elements: at least one element count required");
  const auto& p = cfg.method.params;
  common_meta(cfg, out, "fsll");
  out.meta("r", fixed(p.r, 4));
  out.meta("k", "tuned to r; array FSLL is |H|^2/|k|^2 on the Dirichlet-ratio pattern");

  std::optional<std::pair<std::size_t, double>> prev;
  for (std::size_t n : cfg.fsll.elements) {
    PatternSpec s;
    s.geometry = ArrayGeometry{n, 0.5};
    s.psi0 = 0.0;
    s.grid_points = std::max<std::size_t>(p.grid_points, 64 * n);
    s.clamp_db = p.clamp_db;
    s.kind = BeamformerKind::fir;
    const double fir = first_sidelobe_level(beam_pattern(s));

    s.kind = BeamformerKind::array_feedback;
    s.normalization = PatternNormalization::dirichlet_ratio;
    s.r = p.r;
    s.k = p.r;
    const double arr = first_sidelobe_level(beam_pattern(s));
    const double closed = 10.0 * std::log10(closed_form_fsll(n, 1.0));

    std::string delta;
    if (prev) delta = fixed((arr - prev->second) / std::log2(static_cast<double>(n) / static_cast<double>(prev->first)), 4);
    out.row({Cell::num(std::to_string(n)), Cell::num(fixed(fir, 4)), Cell::num(fixed(arr, 4)),
             Cell::num(fixed(closed, 4)), Cell::num(delta)});
    prev = {n, arr};
  }
}

// ---------------------------------------------------------------------------

void cmd_estimate(const ExperimentConfig& cfg, TableWriter& out) {
  require_targets(cfg);
  const auto geo = to_geometry(cfg);
  const auto scene = to_scene(cfg);
  const auto& p = cfg.method.params;
  const std::string& method = cfg.method.name;

  common_meta(cfg, out, "estimate");
  scene_meta(cfg, out);
  out.meta("snr_db", fixed(cfg.scene.snr_db, 4));
  out.meta("method", method);
  if (is_feedback(method)) out.meta("retransmissions", std::to_string(p.retransmissions));

  const std::size_t passes = is_feedback(method) ? p.retransmissions + 1 : 1;
  const SceneRealization real(scene, geo, passes);
  const auto truth = truth_thetas(scene);

  std::optional<PseudoSpectrum> spectrum;
  std::vector<double> est;
  bool fewer = false;
  if (method == "alg1") {
    spectrum = feedback_mvdr_alg1(real, geo, p.retransmissions, feedback_options(cfg));
  } else if (method == "alg2") {
    spectrum = feedback_mvdr_alg2(real, geo, p.retransmissions, feedback_options(cfg));
  } else if (method == "esprit") {
    est = esprit(sample_autocorrelation(real.snapshots(0)), truth.size(), geo);
  } else {
    const ComplexMatrix r0 = sample_autocorrelation(real.snapshots(0));
    if (method == "mvdr") spectrum = mvdr_spectrum(r0, geo, p.grid_points);
    else if (method == "music") spectrum = music(r0, truth.size(), geo, p.grid_points);
    else if (method == "robust") spectrum = robust_mvdr(r0, geo, p.grid_points, p.lambda_r);
    else if (method == "nested") spectrum = nested_mvdr(scene, geo.spacing, {p.nested_n1, p.nested_n2}, p.grid_points);
    else spectrum = reduced_dim_mvdr(r0, geo, p.subarray_size, p.grid_points);
  }
  if (spectrum) {
    const auto pick = peaks_to_angles(*spectrum, truth.size());
    est = pick.thetas;
    fewer = pick.fewer_peaks;
  }
  out.meta("estimated_deg", join(to_degrees(est), 4));
  out.meta("rmse_deg", fixed(rmse_deg(truth, est), 6));
  if (fewer) out.meta("fewer_peaks_than_targets", "1");

  if (spectrum) {
    for (std::size_t i = 0; i < spectrum->theta.size(); ++i) {
      const double db = 10.0 * std::log10(std::max(spectrum->power[i], 1e-30));
      out.row({Cell::num(fixed(spectrum->theta[i] * kDeg, 4)), Cell::num(fixed(db, 4))});
    }
  }
}

// ---------------------------------------------------------------------------

namespace {

struct CellResult {
  double rmse = 0.0;
  std::optional<Errc> error;
};

// results[method][retransmission index]
using TrialResult = std::vector<std::vector<CellResult>>;

TrialResult run_trial(const ExperimentConfig& cfg, const std::vector<std::string>& methods,
                      const std::vector<std::size_t>& ms, double snr, std::uint64_t seed) {
  const auto geo = to_geometry(cfg);
  TargetScene scene = to_scene(cfg);
  scene.snr_db = snr;
  scene.seed = seed;
  const auto truth = truth_thetas(scene);
  const bool any_feedback = std::any_of(methods.begin(), methods.end(), is_feedback);
  const std::size_t max_m = *std::max_element(ms.begin(), ms.end());
  const SceneRealization real(scene, geo, any_feedback ? max_m + 1 : 1);

  std::optional<ComplexMatrix> r0;
  TrialResult out(methods.size(), std::vector<CellResult>(ms.size()));
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    const std::string& method = methods[mi];
    try {
      if (is_feedback(method)) {
        const auto spectra = method == "alg1" ? feedback_mvdr_alg1(real, geo, ms, feedback_options(cfg))
                                              : feedback_mvdr_alg2(real, geo, ms, feedback_options(cfg));
        for (std::size_t k = 0; k < ms.size(); ++k)
          out[mi][k].rmse = rmse_deg(truth, peaks_to_angles(spectra[k], truth.size()).thetas);
      } else {
        if (!r0) r0 = sample_autocorrelation(real.snapshots(0));
        const double e = rmse_deg(truth, baseline_estimate(method, cfg, scene, *r0));
        for (auto& c : out[mi]) c.rmse = e;
      }
    } catch (const Error& e) {
      for (auto& c : out[mi]) c.error = e.code();
    }
  }
  return out;
}

}  // namespace

void cmd_sweep(const ExperimentConfig& cfg, TableWriter& out, const RunOptions& opt) {
  require_targets(cfg);
  if (cfg.sweep.snr_db.empty()) throw ConfigError("sweep.snr_db: at least one SNR required");
  std::vector<std::string> methods = cfg.sweep.methods;
  if (methods.empty()) methods.push_back(cfg.method.name);
  std::vector<std::size_t> ms = cfg.sweep.retransmissions;
  if (ms.empty()) ms.push_back(cfg.method.params.retransmissions);
  std::sort(ms.begin(), ms.end());
  ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
  std::vector<double> snrs = cfg.sweep.snr_db;
  std::sort(snrs.begin(), snrs.end());
  snrs.erase(std::unique(snrs.begin(), snrs.end()), snrs.end());
  const std::size_t trials = cfg.sweep.monte_carlo;
  const std::uint64_t seed = cfg.scene.seed;

  common_meta(cfg, out, "sweep");
  scene_meta(cfg, out);
  out.meta("monte_carlo", std::to_string(trials));
  out.meta("trial_seeds", "seed + trial index");

  const std::size_t threads = std::max<std::size_t>(1, std::min(opt.threads, trials));
  for (double snr : snrs) {
    std::vector<TrialResult> results(trials);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto worker = [&] {
      while (!failed.load()) {
        const std::size_t t = next.fetch_add(1);
        if (t >= trials) return;
        try {
          results[t] = run_trial(cfg, methods, ms, snr, seed + t);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
          return;
        }
      }
    };
    if (threads == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    // Reduce in trial order so the sums do not depend on scheduling.
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      for (std::size_t k = 0; k < ms.size(); ++k) {
        double sum = 0.0;
        std::size_t ok = 0;
        std::optional<Errc> first_error;
        for (std::size_t t = 0; t < trials; ++t) {
          const CellResult& c = results[t][mi][k];
          if (c.error) {
            if (!first_error) first_error = c.error;
          } else {
            sum += c.rmse;
            ++ok;
          }
        }
        const std::string rmse = ok ? fixed(sum / static_cast<double>(ok), 6) : "";
        const std::string err = first_error ? std::string(errc_name(*first_error)) : "";
        out.row({Cell::num(fixed(snr, 4)), Cell::str(methods[mi]), Cell::num(std::to_string(ms[k])), Cell::num(rmse),
                 Cell::num(std::to_string(ok)), Cell::num(std::to_string(seed)), Cell::str(err)});
      }
    }
  }
}

// ---------------------------------------------------------------------------

void cmd_fim(const ExperimentConfig& cfg, TableWriter& out) {
  const auto geo = to_geometry(cfg);
  const auto& p = cfg.method.params;
  const auto& f = cfg.fim;
  const double psi0 = spatial_frequency(f.theta0_deg * kRad, geo);
  BeamformerWeights w = optimal_weights(psi0, geo.elements, p.k, 1.0, WeightMode::ideal);
  w.g = p.r;

  common_meta(cfg, out, "fim");
  out.meta("theta0_deg", fixed(f.theta0_deg, 4));
  out.meta("sigma2", sci(f.sigma2));
  out.meta("omega_s", sci(f.omega_s));
  out.meta("phi", sci(f.phi));
  out.meta("r", fixed(p.r, 4));
  out.meta("k", fixed(p.k, 4));

  FimOptions opt;
  opt.omega_s = f.omega_s;
  opt.sigma2 = f.sigma2;
  opt.points = f.integration_points;
  constexpr double h = 1e-6;
  for (std::size_t i = 0; i < f.offsets; ++i) {
    const double offset = -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(f.offsets);
    const double psi = psi0 + offset;
    try {
      const FimResult j = fisher_information(w, psi, f.phi, opt);
      const auto d = transfer_derivatives(w, psi, f.phi, 1.0);
      const cdouble fd_psi = (transfer_derivatives(w, psi + h, f.phi, 1.0).y - transfer_derivatives(w, psi - h, f.phi, 1.0).y) / (2.0 * h);
      const cdouble fd_phi = (transfer_derivatives(w, psi, f.phi + h, 1.0).y - transfer_derivatives(w, psi, f.phi - h, 1.0).y) / (2.0 * h);
      const double e_psi = std::abs(fd_psi - d.d_psi) / std::max(std::abs(d.d_psi), 1e-300);
      const double e_phi = std::abs(fd_phi - d.d_phi) / std::max(std::abs(d.d_phi), 1e-300);
      out.row({Cell::num(fixed(offset, 6)), Cell::num(sci(j.psi_psi)), Cell::num(sci(j.psi_phi)),
               Cell::num(sci(j.phi_phi)), Cell::num(sci(std::max(e_psi, e_phi))), Cell::num("0")});
    } catch (const Error& e) {
      if (e.code() != Errc::pole_at_angle) throw;
      out.row({Cell::num(fixed(offset, 6)), Cell::num(""), Cell::num(""), Cell::num(""), Cell::num(""), Cell::num("1")});
    }
  }
}

// ---------------------------------------------------------------------------

void run_command(const std::string& command, const ExperimentConfig& cfg, std::ostream& os, Format format,
                 const RunOptions& opt) {
  TableWriter out(os, format, columns_for(command));
  if (command == "pattern") cmd_pattern(cfg, out);
  else if (command == "fsll") cmd_fsll(cfg, out);
  else if (command == "estimate") cmd_estimate(cfg, out);
  else if (command == "sweep") cmd_sweep(cfg, out, opt);
  else cmd_fim(cfg, out);
  out.finish(true);
}

}  // namespace siir::experiment
