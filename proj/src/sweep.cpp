#include "polariton/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <thread>

#include <fmt/format.h>

#include "polariton/errors.hpp"

namespace polariton {

std::string to_string(Comparator comparator) {
  switch (comparator) {
    case Comparator::system_b: return "system-b";
    case Comparator::composite: return "composite";
    case Comparator::linear_nls: return "linear-nls";
  }
  return "unknown";
}

Comparator parse_comparator(const std::string& text) {
  if (text == "system-b" || text == "systemB") return Comparator::system_b;
  if (text == "composite") return Comparator::composite;
  if (text == "linear-nls") return Comparator::linear_nls;
  throw ConfigError("unknown comparator '" + text + "' (expected system-b, composite, linear-nls)",
                    "comparator");
}

std::string to_string(CrossingStatus status) {
  switch (status) {
    case CrossingStatus::ok: return "ok";
    case CrossingStatus::no_crossing: return "no-crossing";
    case CrossingStatus::below_floor: return "below-floor";
    case CrossingStatus::solver_failed: return "solver-failed";
  }
  return "unknown";
}

void SweepConfig::validate() const {
  physics.validate();
  if (n < 1 || n > 3) throw ConfigError("dimension n must be 1, 2 or 3", "n");
  if (N % 2 != 0 || N < 4) throw ConfigError("N must be even and at least 4", "N");
  if (!(L > 0.0)) throw ConfigError("L must be positive", "L");
  if (alphas.empty()) throw ConfigError("alpha set must not be empty", "alphas");
  for (double a : alphas) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("alphas must be >= 0", "alphas");
  }
  for (double e : epsilons) {
    if (!(e > 0.0 && e < 1.0)) throw ConfigError("epsilons must lie in (0, 1)", "epsilons");
  }
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0 && deltas[i] <= 1.0)) {
      throw ConfigError("deltas must lie in (0, 1]", "deltas");
    }
    if (i > 0 && !(deltas[i] < deltas[i - 1])) {
      throw ConfigError("deltas must be strictly decreasing", "deltas");
    }
  }
  const bool any_zero_alpha = std::ranges::any_of(alphas, [](double a) { return a == 0.0; });
  if (any_zero_alpha && epsilons.empty()) {
    throw ConfigError("alpha = 0 needs an explicit epsilon set", "epsilons");
  }
  if (epsilons.empty() && deltas.empty()) {
    throw ConfigError("either epsilons or deltas must be given", "epsilons");
  }
  if (!(T > 0.0)) throw ConfigError("horizon T must be positive", "T");
  step().steps_per_sample();
  if (!(epsilon_floor >= 0.0)) throw ConfigError("epsilon_floor must be >= 0", "epsilon_floor");
  if (!(C1 >= 0.0)) throw ConfigError("C1 must be >= 0", "C1");
  if (workers < 1) throw ConfigError("workers must be >= 1", "workers");
  if (model == Model::nls && comparator != Comparator::linear_nls) {
    throw ConfigError("the NLS model is compared against linear-nls", "comparator");
  }
  if (model == Model::ep && comparator == Comparator::linear_nls) {
    throw ConfigError("the EP model is compared against system-b or composite", "comparator");
  }
}

std::vector<double> log_spaced_descending(double lo, double hi, int count) {
  if (count < 1 || !(lo > 0.0) || !(hi >= lo)) throw ConfigError("invalid log-spaced range");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  const double a = std::log10(hi);
  const double b = std::log10(lo);
  for (int i = 0; i < count; ++i) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    out.push_back(std::pow(10.0, a + (b - a) * frac));
  }
  return out;
}

std::vector<double> default_epsilons() { return log_spaced_descending(1e-3, 1e-2, 6); }

// --- crossings and regression -------------------------------------------------

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw RegressionError("regression inputs differ in length");
  if (x.size() < 2) throw RegressionError("regression needs at least two points");
  const auto count = static_cast<double>(x.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= count;
  mean_y /= count;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw RegressionError("regression abscissae are all equal");
  LinearFit fit;
  fit.points = static_cast<int>(x.size());
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  if (syy > 0.0) {
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - (fit.slope * x[i] + fit.intercept);
      ss_res += r * r;
    }
    fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  } else {
    fit.r_squared = 1.0;
  }
  return fit;
}

std::optional<double> find_crossing(const ErrorCurve& curve, double epsilon, double epsilon_floor) {
  if (!(epsilon > 0.0)) throw ConfigError("crossing tolerance must be positive", "epsilon");
  if (epsilon < epsilon_floor) {
    throw ConfigError(fmt::format("epsilon {:.6g} is below the floor {:.6g}", epsilon, epsilon_floor),
                      "epsilon_floor");
  }
  if (curve.times.size() != curve.rho.size()) throw ConfigError("malformed error curve");
  for (std::size_t i = 0; i < curve.rho.size(); ++i) {
    if (!(curve.rho[i] >= epsilon)) continue;
    if (i == 0) return curve.times[0];
    const double t0 = curve.times[i - 1];
    const double t1 = curve.times[i];
    const double r0 = curve.rho[i - 1];
    const double r1 = curve.rho[i];
    if (r1 == epsilon) return t1;
    if (t0 > 0.0 && r0 > 0.0) {
      const double frac = (std::log(epsilon) - std::log(r0)) / (std::log(r1) - std::log(r0));
      return std::exp(std::log(t0) + frac * (std::log(t1) - std::log(t0)));
    }
    // First bracket starts at t = 0 or rho = 0; no power law to follow there.
    return t0 + (epsilon - r0) / (r1 - r0) * (t1 - t0);
  }
  return std::nullopt;
}

RegressionResult regress_loglog(const std::vector<CrossingRecord>& records) {
  std::vector<double> log_eps;
  std::vector<double> log_t;
  double alpha = records.empty() ? 0.0 : records.front().alpha;
  for (const auto& r : records) {
    if (r.status != CrossingStatus::ok || !(r.t_cross > 0.0) || !std::isfinite(r.t_cross)) continue;
    log_eps.push_back(std::log(r.epsilon));
    log_t.push_back(std::log(r.t_cross));
  }
  if (log_eps.size() < 3) {
    throw RegressionError(fmt::format("alpha = {}: {} usable crossings, at least 3 needed", alpha,
                                      log_eps.size()));
  }
  const LinearFit fit = fit_line(log_eps, log_t);
  return RegressionResult{alpha, fit.slope, fit.intercept, fit.r_squared, fit.points};
}

// --- error curves -------------------------------------------------------------

namespace {

struct PlannedRecord {
  double alpha;
  double delta;
  double epsilon;
  double handoff;
};

std::vector<PlannedRecord> plan_records(const SweepConfig& config) {
  std::vector<PlannedRecord> out;
  auto handoff_for = [&](double eps) {
    return config.comparator == Comparator::composite ? config.C1 * std::sqrt(eps) : 0.0;
  };
  for (double alpha : config.alphas) {
    if (alpha == 0.0) {
      for (double eps : config.epsilons) out.push_back({alpha, 1.0, eps, handoff_for(eps)});
    } else if (!config.deltas.empty()) {
      for (double delta : config.deltas) {
        const double eps = std::pow(delta, 1.0 / alpha);
        out.push_back({alpha, delta, eps, handoff_for(eps)});
      }
    } else {
      for (double eps : config.epsilons) {
        out.push_back({alpha, std::pow(eps, alpha), eps, handoff_for(eps)});
      }
    }
  }
  return out;
}

bool job_less(const CurveJob& a, const CurveJob& b) {
  if (a.delta != b.delta) return a.delta > b.delta;
  return a.handoff < b.handoff;
}

bool job_equal(const CurveJob& a, const CurveJob& b) {
  return a.delta == b.delta && a.handoff == b.handoff;
}

}  // namespace

std::vector<CurveJob> plan_curve_jobs(const SweepConfig& config) {
  std::vector<CurveJob> jobs;
  for (const auto& r : plan_records(config)) jobs.push_back({r.delta, r.handoff});
  std::ranges::sort(jobs, job_less);
  auto tail = std::ranges::unique(jobs, job_equal);
  jobs.erase(tail.begin(), tail.end());
  return jobs;
}

ErrorCurve compute_error_curve(const SweepConfig& config, const CurveJob& job) {
  const GridPtr grid = make_grid(config.n, config.N, config.L, config.max_points);
  const Field phi0 = gaussian_initial(grid, job.delta);
  const SobolevNorm norm(grid, config.physics.s);

  ErrorCurve curve;
  curve.delta = job.delta;
  auto observe_against = [&](const auto& comparator_phi) {
    return [&](const EPState& state) {
      curve.times.push_back(state.time);
      if (state.time == 0.0) {
        curve.rho.push_back(0.0);
        return;
      }
      const double denominator = norm(state.phi.values());
      if (!(denominator >= 1e-300)) {
        throw NumericalError("photon norm vanishes", state.time);
      }
      const ComplexArray diff = comparator_phi(state.time) - state.phi.values();
      curve.rho.push_back(norm(diff) / denominator);
    };
  };

  if (config.model == Model::nls) {
    ComplexArray phi0_hat = phi0.values();
    grid->forward_fft(phi0_hat);
    const double scale = 1.0 / static_cast<double>(grid->size());
    const ComplexArray k2 = grid->wavenumber_squared().cast<Complex>();
    auto free_phi = [&](double t) {
      ComplexArray out = phi0_hat * (Complex(0.0, -t) * k2).exp() * scale;
      grid->inverse_fft(out);
      return out;
    };
    evolve_nls(phi0, config.physics, config.step(), config.T, RecordPolicy::norms_only,
               observe_against(free_phi));
    return curve;
  }

  const EPState initial = photon_only_state(phi0);
  if (config.comparator == Comparator::composite) {
    const CompositeTildePropagator tilde(phi0, config.physics, job.handoff);
    auto tilde_phi = [&](double t) { return tilde.at(t).phi.values(); };
    evolve_ep(initial, config.physics, config.step(), config.T, RecordPolicy::norms_only,
              observe_against(tilde_phi));
    return curve;
  }
  const LinearBPropagator linear(initial, config.physics);
  auto linear_phi = [&](double t) { return linear.at(t).phi.values(); };
  evolve_ep(initial, config.physics, config.step(), config.T, RecordPolicy::norms_only,
            observe_against(linear_phi));
  return curve;
}

CurveRunResult run_error_curves(const SweepConfig& config, CurveStore* store) {
  config.validate();
  CurveRunResult out;
  out.jobs = plan_curve_jobs(config);
  const std::size_t count = out.jobs.size();
  out.curves.resize(count);
  out.failures.resize(count);

  std::vector<char> pending(count, 1);
  if (store != nullptr) {
    for (std::size_t i = 0; i < count; ++i) {
      if (auto cached = store->load(out.jobs[i])) {
        out.curves[i] = std::move(*cached);
        pending[i] = 0;
        ++out.cache_hits;
      }
    }
  }

  std::vector<std::size_t> work;
  for (std::size_t i = 0; i < count; ++i) {
    if (pending[i]) work.push_back(i);
  }
  out.simulations_run = static_cast<int>(work.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t w = next++; w < work.size(); w = next++) {
      const std::size_t i = work[w];
      try {
        out.curves[i] = compute_error_curve(config, out.jobs[i]);
      } catch (const std::exception& e) {
        out.curves[i] = ErrorCurve{out.jobs[i].delta, {}, {}};
        out.failures[i] = e.what();
      }
    }
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(config.workers), work.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  if (store != nullptr) {
    for (std::size_t i : work) {
      if (out.failures[i].empty()) store->store(out.jobs[i], out.curves[i]);
    }
  }
  return out;
}

// --- the two-loop procedure ---------------------------------------------------

bool AlgorithmAResult::complete() const {
  const bool crossings_ok = std::ranges::all_of(
      crossings, [](const CrossingRecord& r) { return r.status == CrossingStatus::ok; });
  const bool betas_ok = std::ranges::all_of(betas, [](const BetaRow& b) { return b.valid; });
  return crossings_ok && betas_ok;
}

AlgorithmAResult run_algorithm_a(const SweepConfig& config, CurveStore* store) {
  AlgorithmAResult out;
  out.curves = run_error_curves(config, store);

  const auto& jobs = out.curves.jobs;
  auto find_job = [&](double delta, double handoff) {
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      if (jobs[i].delta == delta && jobs[i].handoff == handoff) return i;
    }
    throw std::logic_error("sweep record without a matching curve job");
  };
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!out.curves.failures[i].empty()) {
      out.warnings.push_back(
          fmt::format("delta = {:.6g}: solver failed: {}", jobs[i].delta, out.curves.failures[i]));
    }
  }

  std::vector<double> alphas = config.alphas;
  std::ranges::sort(alphas);
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());

  std::vector<PlannedRecord> planned = plan_records(config);
  std::ranges::stable_sort(planned, [](const PlannedRecord& a, const PlannedRecord& b) {
    if (a.alpha != b.alpha) return a.alpha < b.alpha;
    if (a.delta != b.delta) return a.delta > b.delta;
    return a.epsilon > b.epsilon;
  });

  std::map<double, std::vector<CrossingRecord>> by_alpha;
  for (const auto& plan : planned) {
    CrossingRecord rec{plan.alpha, plan.delta, plan.epsilon,
                       std::numeric_limits<double>::quiet_NaN(), CrossingStatus::ok};
    const std::size_t j = find_job(plan.delta, plan.handoff);
    if (!out.curves.failures[j].empty()) {
      rec.status = CrossingStatus::solver_failed;
    } else if (plan.epsilon < config.epsilon_floor) {
      rec.status = CrossingStatus::below_floor;
      out.warnings.push_back(fmt::format("alpha = {}, delta = {:.6g}: epsilon {:.6g} below floor",
                                         plan.alpha, plan.delta, plan.epsilon));
    } else if (auto t = find_crossing(out.curves.curves[j], plan.epsilon, config.epsilon_floor)) {
      rec.t_cross = *t;
    } else {
      rec.status = CrossingStatus::no_crossing;
      out.warnings.push_back(fmt::format(
          "alpha = {}, delta = {:.6g}: rho never reaches epsilon = {:.6g} before T = {}", plan.alpha,
          plan.delta, plan.epsilon, config.T));
    }
    out.crossings.push_back(rec);
    by_alpha[plan.alpha].push_back(rec);
  }

  std::vector<double> meta_alpha;
  std::vector<double> meta_beta;
  for (double alpha : alphas) {
    BetaRow row;
    row.prediction = beta_predict(alpha, config.physics.p, config.model);
    row.regression.alpha = alpha;
    try {
      row.regression = regress_loglog(by_alpha[alpha]);
      row.regression.alpha = alpha;
      row.valid = true;
    } catch (const RegressionError& e) {
      row.note = e.what();
      out.warnings.push_back(e.what());
    }
    if (row.valid && row.prediction.regime == Regime::exact) {
      meta_alpha.push_back(alpha);
      meta_beta.push_back(row.regression.beta);
    }
    out.betas.push_back(row);
  }

  const double p = config.physics.p;
  if (config.model == Model::ep) {
    out.meta.theory_slope = -(p - 1.0) / (p + 2.0);
    out.meta.theory_intercept = 1.0 / (p + 2.0);
  } else {
    out.meta.theory_slope = -(p - 1.0);
    out.meta.theory_intercept = 1.0;
  }
  if (meta_alpha.size() >= 2) {
    out.meta.fit = fit_line(meta_alpha, meta_beta);
    out.meta.valid = true;
  }
  return out;
}

}  // namespace polariton
