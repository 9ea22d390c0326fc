#pragma once

// JSON experiment configuration. Unknown keys are rejected; every field has a
// default so presets only list what they change.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "siir/doa.hpp"

namespace siir::experiment {

// Malformed or out-of-range configuration. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TargetSpec {
  double theta_deg = 90.0;
  double power_db = 0.0;
  bool operator==(const TargetSpec&) const = default;
};

struct GeometryConfig {
  std::size_t elements = 8;
  double spacing_wavelengths = 0.5;
  bool operator==(const GeometryConfig&) const = default;
};

struct SceneConfig {
  std::vector<TargetSpec> targets;
  double snr_db = 10.0;
  std::size_t snapshots = 32;
  std::uint64_t seed = 1;
  bool operator==(const SceneConfig&) const = default;
};

struct MethodParams {
  double lambda_r = 0.05;
  std::size_t subarray_size = 2;
  std::size_t nested_n1 = 4;
  std::size_t nested_n2 = 4;
  std::size_t retransmissions = 2;
  std::size_t grid_points = 8192;
  double k = 1.0;
  double r = 1.0;
  double loop_gain = 0.0;  // 0 selects N
  double clamp_db = 200.0;
  bool operator==(const MethodParams&) const = default;
};

struct MethodConfig {
  std::string name = "alg1";
  MethodParams params;
  bool operator==(const MethodConfig&) const = default;
};

struct SweepConfig {
  std::vector<std::string> methods;  // empty: method.name
  std::vector<double> snr_db;
  std::vector<std::size_t> retransmissions;  // empty: method.params.retransmissions
  std::size_t monte_carlo = 100;
  bool operator==(const SweepConfig&) const = default;
};

struct PatternConfig {
  double theta0_deg = 60.0;
  std::vector<std::string> beamformers{"fir", "single", "array"};
  std::string normalization = "unit_gain";  // or "dirichlet_ratio"
  bool operator==(const PatternConfig&) const = default;
};

struct FsllConfig {
  std::vector<std::size_t> elements{16, 32, 64, 128, 256, 512, 1024};
  bool operator==(const FsllConfig&) const = default;
};

struct FimConfig {
  double theta0_deg = 60.0;
  std::size_t offsets = 64;
  double sigma2 = 1.0;
  double omega_s = 6.283185307179586;
  double phi = 0.0;
  std::size_t integration_points = 1024;
  bool operator==(const FimConfig&) const = default;
};

struct OutputConfig {
  std::string format = "csv";  // or "jsonl"
  std::string path;            // empty: stdout
  bool operator==(const OutputConfig&) const = default;
};

struct ExperimentConfig {
  std::string description;
  GeometryConfig geometry;
  SceneConfig scene;
  MethodConfig method;
  SweepConfig sweep;
  PatternConfig pattern;
  FsllConfig fsll;
  FimConfig fim;
  OutputConfig output;
  bool operator==(const ExperimentConfig&) const = default;
};

inline const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names{"alg1", "alg2", "mvdr", "music", "esprit", "robust", "nested", "reduced"};
  return names;
}

inline const std::vector<std::string>& beamformer_names() {
  static const std::vector<std::string> names{"fir", "single", "array", "array_finite"};
  return names;
}

// Parses and validates. Throws ConfigError with the offending field path.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config_file(const std::string& path);

// Looks in $SPATIAL_IIR_PRESETS, then the installed presets directory.
std::string preset_path(const std::string& name);
ExperimentConfig load_preset(const std::string& name);

// Complete JSON form with every default filled in; parse_config round-trips it.
std::string serialize_config(const ExperimentConfig& cfg);

// Scene in library units (radians, linear power).
TargetScene to_scene(const ExperimentConfig& cfg);
ArrayGeometry to_geometry(const ExperimentConfig& cfg);

}  // namespace siir::experiment
