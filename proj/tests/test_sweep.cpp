#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <vector>

#include "polariton/config.hpp"
#include "polariton/errors.hpp"
#include "polariton/run_io.hpp"
#include "polariton/sweep.hpp"

using namespace polariton;

namespace {

ErrorCurve synthetic(double (*f)(double), double T, int samples) {
  ErrorCurve c;
  for (int i = 0; i <= samples; ++i) {
    const double t = T * i / samples;
    c.times.push_back(t);
    c.rho.push_back(f(t));
  }
  return c;
}

// Small EP configuration that still crosses every default epsilon well before T.
SweepConfig small_ep() {
  SweepConfig c;
  c.N = 64;
  c.L = 8.0;
  c.T = 1.0;
  c.epsilons = default_epsilons();
  c.alphas = {0.0};
  return c;
}

class MemoryStore : public CurveStore {
 public:
  std::optional<ErrorCurve> load(const CurveJob& job) override {
    const auto it = curves_.find({job.delta, job.handoff});
    if (it == curves_.end()) return std::nullopt;
    return it->second;
  }
  void store(const CurveJob& job, const ErrorCurve& curve) override { curves_[{job.delta, job.handoff}] = curve; }
  std::size_t size() const { return curves_.size(); }

 private:
  std::map<std::pair<double, double>, ErrorCurve> curves_;
};

}  // namespace

TEST_CASE("epsilon sets") {
  const auto eps = default_epsilons();
  REQUIRE(eps.size() == 6);
  CHECK(eps.front() == doctest::Approx(1e-2).epsilon(1e-15));
  CHECK(eps.back() == doctest::Approx(1e-3).epsilon(1e-15));
  for (std::size_t i = 1; i < eps.size(); ++i) {
    CHECK(eps[i] < eps[i - 1]);
    CHECK(std::log10(eps[i - 1]) - std::log10(eps[i]) == doctest::Approx(0.2));
  }
}

TEST_CASE("find_crossing") {
  SUBCASE("identity curve") {
    const auto c = synthetic([](double t) { return t; }, 1.0, 10000);
    const auto t = find_crossing(c, 0.1);
    REQUIRE(t.has_value());
    CHECK(std::abs(*t - 0.1) < 1e-6);
  }
  SUBCASE("fifth power") {
    const auto c = synthetic([](double t) { return std::pow(t, 5); }, 1.0, 1000);
    const auto t = find_crossing(c, 1e-5);
    REQUIRE(t.has_value());
    CHECK(std::abs(*t / 0.1 - 1.0) < 1e-4);
  }
  SUBCASE("first of two crossings") {
    const auto c = synthetic([](double t) { return std::sin(6.0 * t) * std::sin(6.0 * t); }, 1.0, 2000);
    const auto t = find_crossing(c, 0.5);
    REQUIRE(t.has_value());
    CHECK(std::abs(*t - std::numbers::pi / 24.0) < 1e-4);
  }
  SUBCASE("power law crossing sits between samples and is exact in log-log") {
    const auto c = synthetic([](double t) { return 3.0 * std::pow(t, 2.5); }, 2.0, 37);
    const double eps = 0.4;
    const auto t = find_crossing(c, eps);
    REQUIRE(t.has_value());
    CHECK(*t > 0.0);
    CHECK(*t <= 2.0);
    CHECK(3.0 * std::pow(*t, 2.5) == doctest::Approx(eps).epsilon(1e-12));
  }
  SUBCASE("no crossing and bad tolerances") {
    const auto c = synthetic([](double t) { return 0.1 * t; }, 1.0, 100);
    CHECK_FALSE(find_crossing(c, 0.5).has_value());
    CHECK_THROWS_AS(find_crossing(c, 0.0), ConfigError);
    CHECK_THROWS_AS(find_crossing(c, 1e-13, 1e-12), ConfigError);
  }
}

TEST_CASE("regress_loglog") {
  auto records = [](double (*t_of)(double)) {
    std::vector<CrossingRecord> out;
    for (double e : default_epsilons()) out.push_back({0.0, 1.0, e, t_of(e), CrossingStatus::ok});
    return out;
  };
  const auto exact = regress_loglog(records([](double e) { return 0.7 * std::pow(e, 0.2); }));
  CHECK(std::abs(exact.beta - 0.2) < 1e-12);
  CHECK(std::abs(exact.intercept - std::log(0.7)) < 1e-12);
  CHECK(exact.points == 6);
  CHECK(exact.r_squared == doctest::Approx(1.0));

  const auto flat = regress_loglog(records([](double) { return 0.4; }));
  CHECK(std::abs(flat.beta) < 1e-12);
  CHECK(flat.r_squared >= 0.0);
  CHECK(flat.r_squared <= 1.0);

  auto noisy = records([](double e) { return std::pow(e, 0.3); });
  noisy[1].t_cross *= 1.2;
  noisy[4].t_cross *= 0.9;
  const auto fit = regress_loglog(noisy);
  CHECK(fit.r_squared > 0.0);
  CHECK(fit.r_squared < 1.0);

  auto sparse = records([](double e) { return e; });
  for (std::size_t i = 2; i < sparse.size(); ++i) {
    sparse[i].status = CrossingStatus::no_crossing;
    sparse[i].t_cross = std::nan("");
  }
  CHECK_THROWS_AS(regress_loglog(sparse), RegressionError);
}

TEST_CASE("sweep configuration checks") {
  SweepConfig c = small_ep();
  CHECK_NOTHROW(c.validate());
  c.alphas = {0.2};
  c.deltas = {0.5, 0.8};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.deltas = {1.5, 0.5};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_ep();
  c.comparator = Comparator::linear_nls;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(parse_comparator("system-b") == Comparator::system_b);
  CHECK(parse_comparator("composite") == Comparator::composite);
  CHECK_THROWS_AS(parse_comparator("systemC"), ConfigError);
}

TEST_CASE("curve planning shares one curve across alphas") {
  SweepConfig c = small_ep();
  CHECK(plan_curve_jobs(c).size() == 1);
  c.alphas = {0.0, 0.2, 0.3};
  c.deltas = {1.0};
  CHECK(plan_curve_jobs(c).size() == 1);
  const auto run = run_error_curves(c);
  CHECK(run.simulations_run == 1);

  c = small_ep();
  c.alphas = {0.1, 0.2};
  const auto jobs = plan_curve_jobs(c);
  CHECK(jobs.size() == 12);
  for (std::size_t i = 1; i < jobs.size(); ++i) CHECK(jobs[i].delta < jobs[i - 1].delta);

  c = small_ep();
  c.comparator = Comparator::composite;
  c.C1 = 1.0;
  CHECK(plan_curve_jobs(c).size() == 6);  // one handoff time per epsilon
}

TEST_CASE("zero coupling gives zero error curves") {
  SweepConfig c = small_ep();
  c.physics.g = 0.0;
  c.alphas = {0.0, 0.2};
  const auto run = run_error_curves(c);
  for (const auto& curve : run.curves) {
    REQUIRE_FALSE(curve.rho.empty());
    for (double r : curve.rho) CHECK(std::abs(r) <= 1e-12);
  }
  c.model = Model::nls;
  c.comparator = Comparator::linear_nls;
  for (const auto& curve : run_error_curves(c).curves) {
    for (double r : curve.rho) CHECK(std::abs(r) <= 1e-12);
  }
}

TEST_CASE("error curve shape") {
  SweepConfig c = small_ep();
  c.N = 128;
  c.L = 10.0;
  c.samples_per_unit_time = 1000;
  const ErrorCurve curve = compute_error_curve(c, CurveJob{1.0, 0.0});
  CHECK(curve.rho.front() == 0.0);
  for (double r : curve.rho) CHECK(std::isfinite(r));
  std::vector<double> lt;
  std::vector<double> lr;
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    if (curve.times[i] >= 0.01 - 1e-12 && curve.times[i] <= 0.1 + 1e-12) {
      lt.push_back(std::log(curve.times[i]));
      lr.push_back(std::log(curve.rho[i]));
    }
  }
  const double slope = fit_line(lt, lr).slope;
  MESSAGE("early log-log slope " << slope);
  CHECK(std::abs(slope - 5.0) <= 0.25);
}

TEST_CASE("algorithm A on a small grid") {
  SweepConfig c = small_ep();
  c.alphas = {0.0, 0.1};
  const auto first = run_algorithm_a(c);
  REQUIRE(first.complete());
  REQUIRE(first.betas.size() == 2);
  CHECK(first.betas[0].regression.beta == doctest::Approx(0.2).epsilon(0.25));
  CHECK(first.meta.valid);

  SUBCASE("crossing times grow with epsilon at alpha = 0") {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : first.crossings) {
      if (r.alpha == 0.0) pts.emplace_back(r.epsilon, r.t_cross);
    }
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 1; i < pts.size(); ++i) CHECK(pts[i].second >= pts[i - 1].second);
  }

  SUBCASE("repeated runs are bitwise identical, with any worker count") {
    SweepConfig parallel = c;
    parallel.workers = 3;
    const auto again = run_algorithm_a(parallel);
    CHECK(crossings_csv(again) == crossings_csv(first));
    CHECK(betas_csv(again) == betas_csv(first));
  }

  SUBCASE("warm cache reproduces the cold result") {
    MemoryStore store;
    const auto cold = run_algorithm_a(c, &store);
    CHECK(cold.curves.cache_hits == 0);
    CHECK(store.size() == cold.curves.jobs.size());
    const auto warm = run_algorithm_a(c, &store);
    CHECK(warm.curves.simulations_run == 0);
    CHECK(warm.curves.cache_hits == static_cast<int>(cold.curves.jobs.size()));
    CHECK(crossings_csv(warm) == crossings_csv(cold));
    CHECK(crossings_csv(cold) == crossings_csv(first));
  }

  SUBCASE("halving the cadence moves crossings by less than a sample") {
    SweepConfig coarse = c;
    coarse.samples_per_unit_time = 50;
    const auto other = run_algorithm_a(coarse);
    REQUIRE(other.crossings.size() == first.crossings.size());
    for (std::size_t i = 0; i < first.crossings.size(); ++i) {
      CHECK(std::abs(other.crossings[i].t_cross - first.crossings[i].t_cross) < 1.0 / 50);
    }
  }
}

TEST_CASE("short horizon leaves the sweep incomplete") {
  SweepConfig c = small_ep();
  c.T = 0.1;
  const auto result = run_algorithm_a(c);
  CHECK_FALSE(result.complete());
  CHECK_FALSE(result.warnings.empty());
  for (const auto& r : result.crossings) {
    CHECK(r.status == CrossingStatus::no_crossing);
    CHECK(std::isnan(r.t_cross));
  }
  CHECK_FALSE(result.betas[0].valid);
}

TEST_CASE("epsilon floor marks records") {
  SweepConfig c = small_ep();
  c.epsilon_floor = 2e-3;
  const auto result = run_algorithm_a(c);
  int below = 0;
  for (const auto& r : result.crossings) below += r.status == CrossingStatus::below_floor;
  CHECK(below == 2);
  CHECK(result.betas[0].valid);  // four usable points remain
  CHECK(result.betas[0].regression.points == 4);
}

TEST_CASE("any-positive regime is reported but kept out of the meta fit") {
  SweepConfig c = small_ep();
  c.T = 2.0;
  c.alphas = {0.0, 0.1, 0.6};
  c.epsilons = log_spaced_descending(0.1, 0.3, 4);
  const auto result = run_algorithm_a(c);
  const auto& row = result.betas.back();
  CHECK(row.prediction.regime == Regime::any_positive);
  if (row.valid) MESSAGE("alpha = 0.6 slope " << row.regression.beta);
  CHECK(result.meta.fit.points <= 2);
}
