// Command-line front end: simulate, sweep, verify, lemma, predict.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "polariton/config.hpp"
#include "polariton/errors.hpp"
#include "polariton/evolution.hpp"
#include "polariton/grid.hpp"
#include "polariton/run_io.hpp"
#include "polariton/sweep.hpp"
#include "polariton/theory.hpp"
#include "polariton/verify.hpp"

namespace fs = std::filesystem;
using namespace polariton;

namespace {

enum ExitCode : int {
  exit_ok = 0,
  exit_usage = 2,
  exit_config = 3,
  exit_numerical = 4,
  exit_incomplete = 5,
  exit_io = 6,
};

struct CommonOptions {
  std::string config_path;
  std::string output;
  int workers = 0;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config_path, "Run configuration file")->check(CLI::ExistingFile);
  cmd->add_option("-o,--output", opts.output, "Output directory (overrides config and environment)");
  cmd->add_option("-j,--workers", opts.workers, "Worker threads (overrides config and environment)")
      ->check(CLI::PositiveNumber);
}

RunConfig load_config(const CommonOptions& opts) {
  RunConfig cfg = opts.config_path.empty() ? default_config() : parse_config(opts.config_path);
  apply_environment(cfg);
  if (!opts.output.empty()) cfg.directory = opts.output;
  if (opts.workers > 0) cfg.workers = opts.workers;
  cfg.validate();
  return cfg;
}

// --- simulate -------------------------------------------------------------------

struct SimulateOptions {
  CommonOptions common;
  std::optional<double> delta;
  double alpha = 0.0;
  double epsilon = 1e-2;
  std::optional<double> horizon;
  bool full_state = false;
};

int run_simulate(const SimulateOptions& opts) {
  RunConfig cfg = load_config(opts.common);
  if (opts.horizon) cfg.T = *opts.horizon;
  cfg.validate();
  const ModelParams params = cfg.model_params();
  const double amplitude = opts.delta ? *opts.delta : std::pow(opts.epsilon, opts.alpha);

  const fs::path dir = cfg.directory;
  OutputDirectoryLock lock(dir);
  RunManifest manifest;
  manifest.command = "simulate";
  manifest.config_hash = sha256_hex(serialize_config(cfg));
  manifest.start = std::chrono::system_clock::now();

  const GridPtr grid = make_grid(cfg.n, cfg.N, cfg.L, cfg.max_points);
  const Field phi0 = gaussian_initial(grid, amplitude);
  const double M = sobolev_norm(gaussian_initial(grid, 1.0), params.s);

  SweepConfig sc = cfg.sweep_config();
  sc.workers = 1;
  const ErrorCurve curve = compute_error_curve(sc, CurveJob{amplitude, 0.0});
  const Trajectory traj = cfg.model == Model::ep
                              ? evolve_ep(photon_only_state(phi0), params, sc.step(), cfg.T,
                                          opts.full_state ? RecordPolicy::full_state
                                                          : RecordPolicy::norms_only)
                              : evolve_nls(phi0, params, sc.step(), cfg.T, RecordPolicy::norms_only);

  write_file_atomic(dir / "trajectory.csv", trajectory_csv(traj));
  write_file_atomic(dir / "rho.csv", curve_csv(curve));
  if (opts.full_state) {
    std::string states = "t,point,re_phi,im_phi,re_psi,im_psi\n";
    for (const auto& st : traj.states) {
      for (Eigen::Index j = 0; j < st.phi.values().size(); ++j) {
        states += fmt::format("{},{},{},{},{},{}\n", format_double(st.time), j,
                              format_double(st.phi.values()[j].real()),
                              format_double(st.phi.values()[j].imag()),
                              format_double(st.psi.values()[j].real()),
                              format_double(st.psi.values()[j].imag()));
      }
    }
    write_file_atomic(dir / "states.csv", states);
  }

  nlohmann::json diag;
  diag["amplitude"] = amplitude;
  diag["M"] = M;
  diag["mass_drift"] = std::abs(traj.mass.back() / traj.mass.front() - 1.0);
  diag["Kp"] = cfg.Kp;
  diag["Ktilde"] = cfg.Ktilde;
  if (cfg.model == Model::ep) {
    // Exciton bound ||psi(t)|| <= y*(t); reported as a ratio, never asserted.
    double worst_ratio = 0.0;
    nlohmann::json ratios = nlohmann::json::array();
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const double t = traj.times[i];
      if (t <= 0.0 || t > 0.1) continue;
      try {
        const double bound = y_star(t, amplitude, params, M, cfg.Kp, 1.0);
        const double ratio = traj.norm_psi[i] / bound;
        worst_ratio = std::max(worst_ratio, ratio);
        ratios.push_back({{"t", t}, {"ratio", ratio}});
      } catch (const std::exception&) {
        ratios.push_back({{"t", t}, {"ratio", nullptr}});
      }
    }
    diag["psi_over_ystar_max"] = worst_ratio;
    diag["psi_over_ystar"] = ratios;
    const double r = 0.5;
    const double horizon = existence_horizon(amplitude * M / r, r, params.gamma, params.g, cfg.Ktilde);
    diag["existence_horizon"] = horizon;
    if (cfg.T > horizon) {
      std::cerr << fmt::format("note: T = {} exceeds the guaranteed existence horizon {:.4g} "
                               "(r = {}, Ktilde = {})\n",
                               cfg.T, horizon, r, cfg.Ktilde);
    }
  }
  write_file_atomic(dir / "diagnostics.json", diag.dump(2) + "\n");
  write_file_atomic(dir / "config.ini", serialize_config(cfg));

  manifest.jobs.push_back({fmt::format("delta={}", format_double(amplitude)), "ok", ""});
  manifest.end = std::chrono::system_clock::now();
  write_manifest(dir, manifest);
  std::cout << fmt::format("simulated {} samples to {}\n", traj.size(), dir.string());
  return exit_ok;
}

// --- sweep ------------------------------------------------------------------------

int run_sweep(const CommonOptions& opts) {
  const RunConfig cfg = load_config(opts);
  const fs::path dir = cfg.directory;
  OutputDirectoryLock lock(dir);
  RunManifest manifest;
  manifest.command = "sweep";
  manifest.config_hash = sha256_hex(serialize_config(cfg));
  manifest.start = std::chrono::system_clock::now();

  DirectoryCurveStore store(cfg);
  const AlgorithmAResult result = run_algorithm_a(cfg.sweep_config(), &store);

  write_file_atomic(dir / "crossings.csv", crossings_csv(result));
  write_file_atomic(dir / "betas.csv", betas_csv(result));
  write_file_atomic(dir / "summary.json", summary_json(cfg, result).dump(2) + "\n");
  write_file_atomic(dir / "config.ini", serialize_config(cfg));

  for (std::size_t i = 0; i < result.curves.jobs.size(); ++i) {
    const auto& job = result.curves.jobs[i];
    const auto& failure = result.curves.failures[i];
    manifest.jobs.push_back({fmt::format("delta={}", format_double(job.delta)),
                             failure.empty() ? "ok" : "failed",
                             failure.empty() ? cache_key(cfg, job.delta, job.handoff) : failure});
  }
  manifest.end = std::chrono::system_clock::now();
  write_manifest(dir, manifest);

  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "alpha,beta,theory_beta,r2,npoints\n";
  for (const auto& row : result.betas) {
    std::cout << fmt::format("{},{},{},{},{}\n", row.regression.alpha,
                             row.valid ? fmt::format("{:.6f}", row.regression.beta) : "nan",
                             row.prediction.beta, row.valid ? row.regression.r_squared : 0.0,
                             row.valid ? row.regression.points : 0);
  }
  if (result.meta.valid) {
    std::cout << fmt::format("meta-fit: slope {:.6f} (theory {:.6f}), intercept {:.6f} (theory {:.6f})\n",
                             result.meta.fit.slope, result.meta.theory_slope,
                             result.meta.fit.intercept, result.meta.theory_intercept);
  }
  std::cout << fmt::format("{} simulations, {} cached curves\n", result.curves.simulations_run,
                           result.curves.cache_hits);
  return result.complete() ? exit_ok : exit_incomplete;
}

// --- verify -----------------------------------------------------------------------

int run_verify(const CommonOptions& opts) {
  const RunConfig cfg = load_config(opts);
  const fs::path dir = cfg.directory;
  OutputDirectoryLock lock(dir);
  RunManifest manifest;
  manifest.command = "verify";
  manifest.config_hash = sha256_hex(serialize_config(cfg));
  manifest.start = std::chrono::system_clock::now();

  const auto checks = run_verification(cfg);
  nlohmann::json report = nlohmann::json::array();
  bool all = true;
  for (const auto& c : checks) {
    std::cout << fmt::format("[{}] {:<42} {:.3e} (threshold {:.0e})\n", c.passed ? "PASS" : "FAIL",
                             c.name, c.value, c.threshold);
    report.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"passed", c.passed}});
    manifest.jobs.push_back({c.name, c.passed ? "pass" : "fail", format_double(c.value)});
    all = all && c.passed;
  }
  write_file_atomic(dir / "verify.json", report.dump(2) + "\n");
  manifest.end = std::chrono::system_clock::now();
  write_manifest(dir, manifest);
  return all ? exit_ok : exit_numerical;
}

// --- lemma ------------------------------------------------------------------------

struct LemmaOptions {
  double p = 3.0;
  double delta = 0.5;
  std::vector<double> etas{1e-4, 1e-3, 1e-2, 5e-2};
  std::string output;
};

int run_lemma(const LemmaOptions& opts) {
  std::string table = "eta,delta,p,y1,y2,y_min,series1,series2,series3\n";
  for (double eta : opts.etas) {
    const RootProblem<double> in{eta, opts.delta, opts.p};
    std::string row = fmt::format("{},{},{}", eta, opts.delta, opts.p);
    try {
      const auto roots = solve_roots(in);
      row += fmt::format(",{},{},{}", format_double(roots.y1), format_double(roots.y2),
                         format_double(roots.y_min));
    } catch (const NoRealRoots&) {
      row += ",nan,nan,nan";
    }
    for (int order = 1; order <= 3; ++order) {
      try {
        row += "," + format_double(y1_series(in, order));
      } catch (const ConfigError&) {
        row += ",nan";
      }
    }
    table += row + "\n";
  }
  std::cout << table;
  if (!opts.output.empty()) {
    OutputDirectoryLock lock(opts.output);
    RunManifest manifest{.command = "lemma", .start = std::chrono::system_clock::now()};
    manifest.config_hash = sha256_hex(table);
    write_file_atomic(fs::path(opts.output) / "lemma.csv", table);
    manifest.end = std::chrono::system_clock::now();
    write_manifest(opts.output, manifest);
  }
  return exit_ok;
}

// --- predict ----------------------------------------------------------------------

struct PredictOptions {
  std::vector<double> alphas{0.0};
  double p = 3.0;
  std::string model = "ep";
  double g = 1.0;
  double gamma = 1.0;
  double M = 1.0;
  double Kp = 1.0;
  double C = 1.0;
  double C1 = 0.0;
  double C2 = 1.0;
  bool json = false;
  std::string output;
};

int run_predict(const PredictOptions& opts) {
  const Model model = parse_model(opts.model);
  ModelParams params;
  params.g = opts.g;
  params.gamma = opts.gamma;
  params.p = opts.p;
  std::string text;
  if (opts.json) {
    nlohmann::json rows = nlohmann::json::array();
    for (double alpha : opts.alphas) {
      const auto pred = beta_predict(alpha, opts.p, model);
      const auto b = bound_constants(params, opts.M, opts.Kp, opts.C, opts.C1, opts.C2, alpha);
      rows.push_back({{"alpha", alpha},
                      {"beta", pred.regime == Regime::exact ? nlohmann::json(pred.beta) : nullptr},
                      {"regime", to_string(pred.regime)},
                      {"model", to_string(model)},
                      {"B", b.B},
                      {"B1", b.B1},
                      {"B2", b.B2},
                      {"q", b.q},
                      {"Kp", b.Kp}});
    }
    text = rows.dump(2) + "\n";
  } else {
    text = "alpha,beta,regime,model,B,B1,B2,q,Kp\n";
    for (double alpha : opts.alphas) {
      const auto pred = beta_predict(alpha, opts.p, model);
      const auto b = bound_constants(params, opts.M, opts.Kp, opts.C, opts.C1, opts.C2, alpha);
      text += fmt::format("{},{},{},{},{},{},{},{},{}\n", alpha, pred.beta, to_string(pred.regime),
                          to_string(model), b.B, b.B1, b.B2, b.q, b.Kp);
    }
  }
  std::cout << text;
  if (!opts.output.empty()) {
    OutputDirectoryLock lock(opts.output);
    RunManifest manifest{.command = "predict", .start = std::chrono::system_clock::now()};
    manifest.config_hash = sha256_hex(text);
    write_file_atomic(fs::path(opts.output) / (opts.json ? "predict.json" : "predict.csv"), text);
    manifest.end = std::chrono::system_clock::now();
    write_manifest(opts.output, manifest);
  }
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Short-time nonlinear onset in exciton-polariton and NLS dynamics"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Single trajectory with full diagnostics");
  add_common(simulate, sim.common);
  auto* delta_opt = simulate->add_option("--delta", sim.delta, "Initial photon amplitude");
  auto* alpha_opt = simulate->add_option("--alpha", sim.alpha, "Amplitude exponent (amplitude = eps^alpha)");
  auto* eps_opt = simulate->add_option("--epsilon", sim.epsilon, "Tolerance epsilon");
  delta_opt->excludes(alpha_opt)->excludes(eps_opt);
  simulate->add_option("-T,--horizon", sim.horizon, "Simulation horizon");
  simulate->add_flag("--full-state", sim.full_state, "Also write every sampled field to states.csv");

  CommonOptions sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "Crossing-time sweep and beta(alpha) regression");
  add_common(sweep, sweep_opts);

  CommonOptions verify_opts;
  auto* verify = app.add_subcommand("verify", "Solver and theory self-checks");
  add_common(verify, verify_opts);

  LemmaOptions lem;
  auto* lemma = app.add_subcommand("lemma", "Roots and series of eta y^p - y + delta");
  lemma->add_option("--p", lem.p, "Power p > 1");
  lemma->add_option("--delta", lem.delta, "delta > 0");
  lemma->add_option("--eta", lem.etas, "eta values")->delimiter(',');
  lemma->add_option("-o,--output", lem.output, "Also write lemma.csv to this directory");

  PredictOptions pred;
  auto* predict = app.add_subcommand("predict", "Predicted beta(alpha) and bound constants");
  predict->add_option("--alpha", pred.alphas, "alpha values")->delimiter(',');
  predict->add_option("--p", pred.p, "Power p > 1");
  predict->add_option("--model", pred.model, "ep or nls")->check(CLI::IsMember({"ep", "nls", "EP", "NLS"}));
  predict->add_option("--g", pred.g, "Nonlinear coupling");
  predict->add_option("--gamma", pred.gamma, "Photon-exciton coupling");
  predict->add_option("--M", pred.M, "||phi_0|| in H^s");
  predict->add_option("--Kp", pred.Kp, "Sobolev algebra constant");
  predict->add_option("--C", pred.C, "NLS time constant");
  predict->add_option("--C1", pred.C1, "Approximation-A time constant");
  predict->add_option("--C2", pred.C2, "Approximation-B time constant");
  auto* json_flag = predict->add_flag("--json", pred.json, "JSON instead of CSV");
  auto* csv_flag = predict->add_flag("--csv", "CSV output (default)");
  json_flag->excludes(csv_flag);
  predict->add_option("-o,--output", pred.output, "Also write the table to this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*sweep) return run_sweep(sweep_opts);
    if (*verify) return run_verify(verify_opts);
    if (*lemma) return run_lemma(lem);
    if (*predict) return run_predict(pred);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return exit_numerical;
  } catch (const NoRealRoots& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return exit_numerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_io;
  }
  return exit_usage;
}
