#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "polariton/sweep.hpp"
#include "polariton/theory.hpp"

namespace polariton {

/// Declarative run description.
///
/// File format: INI-style sections [grid], [physics], [sweep], [solver], [output]
/// holding `key = value` lines. Lines starting with '#' or ';' are comments.
/// Lists are comma separated. Unknown sections or keys and duplicate keys are errors.
struct RunConfig {
  // [grid]
  int n = 1;
  int N = 256;
  double L = 10.0;
  std::uint64_t max_points = Grid::default_max_points;

  // [physics]
  Model model = Model::ep;
  double g = 1.0;
  double gamma = 1.0;
  double omega0 = 1.0;
  double p = 3.0;
  double s = 1.0;  ///< defaults to floor(n/2 + 1)
  double Kp = 1.0;
  double Ktilde = 1.0;

  // [sweep]
  std::vector<double> alphas{0.0};
  std::vector<double> epsilons = default_epsilons();
  std::vector<double> deltas;
  Comparator comparator = Comparator::system_b;
  double C1 = 0.0;
  double epsilon_floor = 1e-12;

  // [solver]
  double T = 2.0;
  double dt = 1e-3;
  int samples_per_unit_time = 100;
  int workers = 1;

  // [output]
  std::string directory = "polariton-out";
  std::string cache_dir;  ///< empty means <directory>/curves

  bool operator==(const RunConfig&) const = default;

  ModelParams model_params() const { return ModelParams{g, gamma, omega0, p, s}; }
  SweepConfig sweep_config() const;
  std::filesystem::path cache_root() const;
  void validate() const;
};

/// Defaults with s = floor(n/2 + 1) for the given dimension.
RunConfig default_config(int n = 1);

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::filesystem::path& path);

/// Canonical text: fixed section and key order, 17 significant digits.
std::string serialize_config(const RunConfig& config);

/// Canonical text of the fields that determine an error curve.
std::string canonical_physics(const RunConfig& config);

std::string sha256_hex(const std::string& data);

/// Stable hash of the physics/numerics fields plus delta (and handoff time, when used).
std::string cache_key(const RunConfig& config, double delta, double handoff = 0.0);

/// Short hash naming the curve directory of one physics configuration.
std::string physics_hash(const RunConfig& config);

/// POLARITON_OUTPUT_DIR and POLARITON_WORKERS, when set, override the file values.
void apply_environment(RunConfig& config);

}  // namespace polariton
