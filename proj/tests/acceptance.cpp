// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "siir/array_model.hpp"
#include "siir/beamformers.hpp"
#include "siir/doa.hpp"
#include "siir/experiment/commands.hpp"
#include "siir/experiment/config.hpp"
#include "siir/linalg.hpp"
#include "siir/pattern.hpp"

using namespace siir;
namespace ex = siir::experiment;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = 180.0 / kPi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::mt19937_64& rng() {
  static std::mt19937_64 g(20261015);
  return g;
}

double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

cdouble cgauss() {
  std::normal_distribution<double> n;
  return {n(rng()), n(rng())};
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

cdouble dot(std::span<const cdouble> a, std::span<const cdouble> b) {
  cdouble s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double quad(const ComplexMatrix& r, std::span<const cdouble> x) { return dot(x, r * x).real(); }

// Sweep CSV rows keyed by (snr, method, M).
using SweepTable = std::map<std::tuple<double, std::string, std::size_t>, double>;

SweepTable parse_sweep(const std::string& csv, std::string* errors) {
  SweepTable t;
  std::istringstream in(csv);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() < 7) f.resize(7);
    if (!f[6].empty()) *errors += f[1] + "@" + f[0] + ":" + f[6] + " ";
    t[{std::stod(f[0]), f[1], std::stoul(f[2])}] = f[3].empty() ? NAN : std::stod(f[3]);
  }
  return t;
}

std::string run_sweep(const std::string& preset, std::size_t threads) {
  std::ostringstream out;
  ex::run_command("sweep", ex::load_preset(preset), out, ex::Format::csv, ex::RunOptions{threads});
  return out.str();
}

// 1 ------------------------------------------------------------------------
Outcome mvdr_oracle() {
  double worst_constraint = 0.0;
  std::size_t violations = 0;
  for (int m = 0; m < 200; ++m) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng()() % 7);
    ComplexMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a(i, j) = cgauss();
    ComplexMatrix r = a * a.adjoint();
    for (std::size_t i = 0; i < n; ++i) r(i, i) += 0.1;
    CVector c(n);
    for (auto& x : c) x = cgauss();
    const CVector beta = mvdr_weights(r, c);
    worst_constraint = std::max(worst_constraint, std::abs(dot(beta, c) - 1.0));
    const double best = quad(r, beta);
    const cdouble cc = dot(c, c);
    for (int t = 0; t < 10000; ++t) {
      CVector x(n);
      for (auto& v : x) v = cgauss();
      const cdouble shift = (1.0 - dot(x, c)) / cc;
      for (std::size_t i = 0; i < n; ++i) x[i] += std::conj(shift) * c[i];
      if (quad(r, x) < best) ++violations;
    }
  }
  return {worst_constraint < 1e-10 && violations == 0,
          "max|beta^H c - 1|=" + fmt("%.2e", worst_constraint) + " beaten=" + std::to_string(violations)};
}

// 2 ------------------------------------------------------------------------
Outcome pole_at_target() {
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const double psi0 = uniform(-kPi, kPi);
    const std::size_t n = 2 + static_cast<std::size_t>(rng()() % 63);
    cdouble k = std::polar(uniform(0.1, 10.0), uniform(-kPi, kPi));
    const auto w = optimal_weights(psi0, n, k);
    const CVector v = steering_vector(psi0, n);
    worst = std::max(worst, std::abs(1.0 - dot(w.beta, v) * dot(w.alpha, v)));
  }
  return {worst < 1e-12, "max|1 - loop gain|=" + fmt("%.2e", worst)};
}

// 3 ------------------------------------------------------------------------
double array_fsll(std::size_t n, double r) {
  PatternSpec s;
  s.geometry = ArrayGeometry{n, 0.5};
  s.grid_points = std::max<std::size_t>(8192, 64 * n);
  s.kind = BeamformerKind::array_feedback;
  s.normalization = PatternNormalization::dirichlet_ratio;
  s.r = r;
  s.k = r;
  return first_sidelobe_level(beam_pattern(s));
}

double fir_fsll(std::size_t n) {
  PatternSpec s;
  s.geometry = ArrayGeometry{n, 0.5};
  s.grid_points = std::max<std::size_t>(8192, 64 * n);
  return first_sidelobe_level(beam_pattern(s));
}

Outcome fsll_law() {
  const std::vector<std::size_t> ns{16, 32, 64, 128};
  bool ok = true;
  double worst_closed = 0.0, worst_r = 0.0, worst_fir = 0.0;
  std::vector<double> x, y;
  std::string pairs;
  for (std::size_t n : ns) {
    const double level = array_fsll(n, 1.0);
    worst_closed = std::max(worst_closed, std::abs(level - 10.0 * std::log10(closed_form_fsll(n, 1.0))));
    worst_r = std::max(worst_r, std::abs(array_fsll(n, 1.5) - level));
    worst_fir = std::max(worst_fir, std::abs(fir_fsll(n) + 13.5));
    if (!y.empty()) pairs += fmt("%.2f", level - y.back()) + " ";
    x.push_back(std::log2(static_cast<double>(n)));
    y.push_back(level);
  }
  // Least-squares slope over the whole set, dB per doubling.
  const double mx = (x[0] + x[1] + x[2] + x[3]) / 4.0, my = (y[0] + y[1] + y[2] + y[3]) / 4.0;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxy / sxx;
  ok = worst_closed < 1.0 && std::abs(slope + 6.0) <= 0.3 && worst_r < 0.1 && worst_fir <= 0.5;
  return {ok, "max|fsll - closed form|=" + fmt("%.3f", worst_closed) + "dB slope=" + fmt("%.3f", slope) +
                  "dB/doubling (pairwise " + pairs + ") r-shift=" + fmt("%.4f", worst_r) +
                  "dB max|FIR + 13.5|=" + fmt("%.3f", worst_fir)};
}

// 4 ------------------------------------------------------------------------
Outcome pattern_ordering() {
  const auto cfg = ex::load_preset("fig3");
  const auto geo = ex::to_geometry(cfg);
  auto make = [&](BeamformerKind kind) {
    PatternSpec s;
    s.kind = kind;
    s.psi0 = spatial_frequency(cfg.pattern.theta0_deg / kDeg, geo);
    s.geometry = geo;
    s.grid_points = cfg.method.params.grid_points;
    s.r = cfg.method.params.r;
    s.k = cfg.method.params.k;
    return beam_pattern(s);
  };
  const auto fir = make(BeamformerKind::fir);
  const auto single = make(BeamformerKind::single_feedback);
  const auto array = make(BeamformerKind::array_feedback);
  const double sl_fir = first_sidelobe_level(fir), sl_single = first_sidelobe_level(single),
               sl_array = first_sidelobe_level(array);
  const double ratio = half_power_beamwidth(array) / half_power_beamwidth(single);
  const bool ok = std::abs(cfg.method.params.r - 1.1) < 1e-12 && geo.elements == 3 &&
                  std::abs(cfg.pattern.theta0_deg - 60.0) < 1e-12 && sl_array < sl_single && sl_single < sl_fir &&
                  ratio <= 0.6;
  return {ok, "fsll fir/single/array=" + fmt("%.2f", sl_fir) + "/" + fmt("%.2f", sl_single) + "/" +
                  fmt("%.2f", sl_array) + "dB hpbw array/single=" + fmt("%.3f", ratio)};
}

// 5 ------------------------------------------------------------------------
Outcome loop_convergence() {
  double worst = 0.0;
  int done = 0;
  while (done < 50) {
    const std::size_t n = 4 + static_cast<std::size_t>(rng()() % 13);
    const ArrayGeometry geo{n, 0.5};
    TargetScene scene;
    scene.targets = {Target{uniform(0.2, kPi - 0.2), 1.0}};
    scene.snr_db = 400.0;  // noise at 1e-20 amplitude
    scene.snapshots = 8;
    scene.seed = 1000 + static_cast<std::uint64_t>(done);
    const SceneRealization real(scene, geo);
    const double psi_t = spatial_frequency(scene.targets[0].theta, geo);
    const double psi_s = uniform(-kPi, kPi);
    const auto w = optimal_weights(psi_s, n, std::polar(uniform(0.5, 2.0), uniform(-kPi, kPi)));
    const cdouble lg = loop_gain(w, psi_t);
    if (std::abs(lg) >= 0.9) continue;
    const auto res = simulate_retransmission_loop(real, w, 200);
    // Fixed point y = g beta^H S / (1 - g beta^H u).
    const CVector u = feedback_signature(real, w.alpha);
    const cdouble denom = 1.0 - w.g * dot(w.beta, u);
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < real.snapshot_count(); ++t) {
      const cdouble yinf = w.g * dot(w.beta, real.source().col(t)) / denom;
      num += std::norm(res.y[t] - yinf);
      den += std::norm(yinf);
    }
    worst = std::max(worst, std::sqrt(num / den));
    ++done;
  }
  return {worst < 1e-6, "max relative error at M=200: " + fmt("%.2e", worst)};
}

// 6 ------------------------------------------------------------------------
Outcome fim_gradients() {
  double worst = 0.0;
  int done = 0;
  const double h = 1e-6;
  while (done < 100) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng()() % 15);
    auto w = optimal_weights(uniform(-kPi, kPi), n, std::polar(uniform(0.5, 2.0), uniform(-kPi, kPi)),
                             uniform(0.5, 2.0), WeightMode::gain_mismatch);
    w.g = w.g_hat * uniform(0.5, 1.5);
    const double psi = uniform(-kPi, kPi), phi = uniform(-kPi, kPi);
    const cdouble s = cgauss();
    const cdouble b = w.g * dot(w.beta, steering_vector(psi, n));
    const cdouble a = dot(w.alpha, steering_vector(psi, n));
    if (std::abs(1.0 - a * b * std::polar(1.0, -phi)) < 0.05) continue;
    const auto d = transfer_derivatives(w, psi, phi, s);
    const cdouble fd_psi =
        (transfer_derivatives(w, psi + h, phi, s).y - transfer_derivatives(w, psi - h, phi, s).y) / (2 * h);
    const cdouble fd_phi =
        (transfer_derivatives(w, psi, phi + h, s).y - transfer_derivatives(w, psi, phi - h, s).y) / (2 * h);
    worst = std::max(worst, std::abs(fd_psi - d.d_psi) / std::abs(d.d_psi));
    worst = std::max(worst, std::abs(fd_phi - d.d_phi) / std::abs(d.d_phi));
    ++done;
  }
  return {worst < 1e-5, "max relative error=" + fmt("%.2e", worst)};
}

// 7 ------------------------------------------------------------------------
Outcome fig5() {
  const auto cfg = ex::load_preset("fig5");
  std::string errors;
  const auto t = parse_sweep(run_sweep("fig5", 2), &errors);
  const std::vector<std::size_t> ms{0, 1, 2, 3, 5};
  bool ok = errors.empty() && cfg.geometry.elements == 8 && cfg.scene.targets.size() == 4 &&
            cfg.sweep.monte_carlo == 100;
  std::string detail;
  for (double snr : {-10.0, 0.0, 10.0}) {
    detail += fmt("snr %g: alg1", snr);
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const double a1 = t.at({snr, "alg1", ms[i]});
      detail += " " + fmt("%.3f", a1);
      if (i > 0 && !(a1 <= t.at({snr, "alg1", ms[i - 1]}))) ok = false;
      if (ms[i] >= 1 && !(a1 <= t.at({snr, "alg2", ms[i]}))) ok = false;
    }
    detail += " alg2";
    for (std::size_t m : ms) detail += " " + fmt("%.3f", t.at({snr, "alg2", m}));
    detail += "; ";
  }
  return {ok, detail + errors};
}

// 8 ------------------------------------------------------------------------
Outcome fig6() {
  bool ok = true;
  std::string detail;
  for (auto [preset, tol] : {std::pair{"fig6", 2.0}, std::pair{"fig6_0db", 5.0}}) {
    const auto cfg = ex::load_preset(preset);
    const auto geo = ex::to_geometry(cfg);
    const auto scene = ex::to_scene(cfg);
    const auto& p = cfg.method.params;
    const SceneRealization real(scene, geo, p.retransmissions + 1);
    const auto spec = feedback_mvdr_alg1(real, geo, p.retransmissions, FeedbackOptions{p.grid_points, p.loop_gain});
    const auto pick = peaks_to_angles(spec, scene.targets.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < scene.targets.size(); ++i)
      worst = std::max(worst, std::abs(pick.thetas[i] - scene.targets[i].theta) * kDeg);
    const bool here = cfg.method.name == "alg1" && p.retransmissions == 2 && scene.targets.size() == 4 &&
                      !pick.fewer_peaks && worst <= tol;
    ok = ok && here;
    detail += std::string(preset) + fmt(" (%.0f dB) max error=", scene.snr_db) + fmt("%.3f", worst) + "deg; ";
  }
  return {ok, detail};
}

// 9 ------------------------------------------------------------------------
std::string fig7_csv;

Outcome fig7() {
  const auto cfg = ex::load_preset("fig7");
  fig7_csv = run_sweep("fig7", 2);
  std::string errors;
  const auto t = parse_sweep(fig7_csv, &errors);
  const std::vector<std::string> baselines{"music", "esprit", "robust", "nested", "reduced"};
  bool ok = errors.empty() && cfg.geometry.elements == 8 && cfg.scene.targets.size() == 2 &&
            cfg.sweep.monte_carlo == 100 && std::abs(cfg.method.params.lambda_r - 0.05) < 1e-12;
  double min_margin = INFINITY;
  for (int snr = -60; snr <= -10; snr += 10) {
    const double fb = t.at({double(snr), "alg1", 2});
    for (const auto& b : baselines) min_margin = std::min(min_margin, t.at({double(snr), b, 2}) - fb);
  }
  ok = ok && min_margin >= 10.0;
  return {ok, "min margin over baselines for SNR in [-60,-10]=" + fmt("%.2f", min_margin) + "deg " + errors};
}

// 10 -----------------------------------------------------------------------
Outcome subspace_sanity() {
  const ArrayGeometry geo{8, 0.5};
  const std::vector<double> truth{50.0 / kDeg, 120.0 / kDeg};
  const std::size_t grid = 3600;
  const ComplexMatrix a = steering_matrix(truth, geo);
  ComplexMatrix r = a * a.adjoint();
  const auto es = esprit(r, 2, geo);
  double esprit_err = 0.0;
  for (std::size_t i = 0; i < 2; ++i) esprit_err = std::max(esprit_err, std::abs(es[i] - truth[i]));
  const auto mu = peaks_to_angles(music(r, 2, geo, grid), 2);
  double music_err = 0.0;
  for (std::size_t i = 0; i < 2; ++i) music_err = std::max(music_err, std::abs(mu.thetas[i] - truth[i]));

  TargetScene scene;
  scene.targets = {Target{truth[0], 1.0}, Target{truth[1], 1.0}};
  scene.snr_db = 40.0;
  scene.snapshots = 256;
  scene.seed = 7;
  const ComplexMatrix rn = sample_autocorrelation(synthesize_snapshots(scene, geo));
  const auto es40 = esprit(rn, 2, geo);
  const auto mu40 = peaks_to_angles(music(rn, 2, geo, grid), 2);
  double noisy = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    noisy = std::max(noisy, std::abs(es40[i] - truth[i]) * kDeg);
    noisy = std::max(noisy, std::abs(mu40.thetas[i] - truth[i]) * kDeg);
  }
  const bool ok = esprit_err < 1e-8 && music_err <= kPi / grid && noisy < 1.0;
  return {ok, "noiseless esprit=" + fmt("%.2e", esprit_err) + "rad music=" + fmt("%.2e", music_err) +
                  "rad (grid step " + fmt("%.2e", kPi / grid) + "); 40 dB max error=" + fmt("%.4f", noisy) + "deg"};
}

// 11 -----------------------------------------------------------------------
Outcome determinism() {
  if (fig7_csv.empty()) fig7_csv = run_sweep("fig7", 2);
  const std::string single = run_sweep("fig7", 1);
  const bool same = single == fig7_csv;
  return {same && !single.empty(), std::string(same ? "identical" : "differ") + " across 1 and 2 threads (" +
                                       std::to_string(single.size()) + " bytes)"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"mvdr-oracle", 10, mvdr_oracle},
      {"pole-at-target", 1, pole_at_target},
      {"fsll-law", 30, fsll_law},
      {"pattern-ordering", 10, pattern_ordering},
      {"loop-convergence", 10, loop_convergence},
      {"fim-gradient", 5, fim_gradients},
      {"fig5-ordering", 300, fig5},
      {"fig6-peaks", 60, fig6},
      {"fig7-margin", 600, fig7},
      {"subspace-sanity", 30, subspace_sanity},
      {"determinism", 1200, determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s %2zu %-17s %7.2fs/%gs  %s%s\n", pass ? "PASS" : "FAIL", i + 1, c.name, secs, c.budget_s,
                o.detail.c_str(), in_time ? "" : " [over time budget]");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
