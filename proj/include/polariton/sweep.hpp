#pragma once

#include <optional>
#include <string>
#include <vector>

#include "polariton/evolution.hpp"
#include "polariton/grid.hpp"
#include "polariton/theory.hpp"

namespace polariton {

/// Linear solution the nonlinear photon field is measured against.
enum class Comparator {
  system_b,    ///< fully linear exciton system
  composite,   ///< approximation A up to C1 sqrt(eps), then B
  linear_nls,  ///< free Schroedinger flow (NLS model only)
};

std::string to_string(Comparator comparator);
Comparator parse_comparator(const std::string& text);

/// Everything that determines the error curves and the regression.
struct SweepConfig {
  Model model = Model::ep;
  int n = 1;
  int N = 256;
  double L = 10.0;
  std::size_t max_points = Grid::default_max_points;
  ModelParams physics{};
  std::vector<double> alphas{0.0};
  /// Tolerances swept for every alpha; delta = eps^alpha (delta = 1 at alpha = 0).
  std::vector<double> epsilons;
  /// Optional explicit amplitude set for alpha > 0; eps = delta^(1/alpha).
  std::vector<double> deltas;
  double T = 2.0;
  double dt = 1e-3;
  int samples_per_unit_time = 100;
  Comparator comparator = Comparator::system_b;
  double C1 = 0.0;
  double epsilon_floor = 1e-12;
  int workers = 1;

  void validate() const;
  StepSpec step() const { return StepSpec{dt, samples_per_unit_time}; }
};

/// `count` values log-spaced from lo to hi, inclusive, in decreasing order.
std::vector<double> log_spaced_descending(double lo, double hi, int count);

/// Default tolerance set: 6 points log-spaced in [1e-3, 1e-2].
std::vector<double> default_epsilons();

enum class CrossingStatus { ok, no_crossing, below_floor, solver_failed };

std::string to_string(CrossingStatus status);

struct CrossingRecord {
  double alpha = 0.0;
  double delta = 1.0;
  double epsilon = 0.0;
  double t_cross = 0.0;  ///< NaN unless status is ok
  CrossingStatus status = CrossingStatus::ok;
};

struct RegressionResult {
  double alpha = 0.0;
  double beta = 0.0;       ///< slope of log t against log eps
  double intercept = 0.0;  ///< log C in t = C eps^beta
  double r_squared = 0.0;
  int points = 0;
};

/// Ordinary least squares y = slope x + intercept.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

/// Too few usable points for a regression.
class RegressionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// First time the curve reaches epsilon, interpolated linearly in (log t, log rho).
/// Returns nullopt when rho stays below epsilon over the whole curve.
/// Throws ConfigError for epsilon <= 0 or epsilon below `epsilon_floor`.
std::optional<double> find_crossing(const ErrorCurve& curve, double epsilon,
                                    double epsilon_floor = 0.0);

/// OLS of log t_cross on log eps over the records with status ok.
RegressionResult regress_loglog(const std::vector<CrossingRecord>& records);

/// One simulation pair needed by a sweep.
struct CurveJob {
  double delta = 1.0;
  double handoff = 0.0;  ///< C1 sqrt(eps) for the composite comparator, else 0
};

/// Persistent store for error curves of one physics configuration.
class CurveStore {
 public:
  virtual ~CurveStore() = default;
  virtual std::optional<ErrorCurve> load(const CurveJob& job) = 0;
  virtual void store(const CurveJob& job, const ErrorCurve& curve) = 0;
};

/// Simulates the nonlinear system and the comparator from amplitude `delta` and
/// records rho(t) at the configured cadence.
ErrorCurve compute_error_curve(const SweepConfig& config, const CurveJob& job);

struct CurveRunResult {
  std::vector<CurveJob> jobs;
  std::vector<ErrorCurve> curves;      ///< parallel to jobs; empty times on failure
  std::vector<std::string> failures;   ///< parallel to jobs; empty on success
  int simulations_run = 0;
  int cache_hits = 0;
};

/// Distinct simulation jobs of a sweep, in deterministic (delta, handoff) order.
std::vector<CurveJob> plan_curve_jobs(const SweepConfig& config);

/// Runs or loads every curve the sweep needs. Jobs run on `config.workers` threads.
CurveRunResult run_error_curves(const SweepConfig& config, CurveStore* store = nullptr);

struct MetaFit {
  bool valid = false;
  LinearFit fit;
  double theory_slope = 0.0;
  double theory_intercept = 0.0;
};

struct BetaRow {
  RegressionResult regression;
  bool valid = false;
  std::string note;
  BetaPrediction prediction;
};

struct AlgorithmAResult {
  CurveRunResult curves;
  std::vector<CrossingRecord> crossings;  ///< sorted by (alpha, delta)
  std::vector<BetaRow> betas;             ///< one per alpha, ascending
  MetaFit meta;
  std::vector<std::string> warnings;

  /// Every crossing found and every alpha regressed.
  bool complete() const;
};

/// Both loops of the procedure: curves per delta, crossings and a regression per
/// alpha, then a straight-line fit of beta against alpha.
AlgorithmAResult run_algorithm_a(const SweepConfig& config, CurveStore* store = nullptr);

}  // namespace polariton
