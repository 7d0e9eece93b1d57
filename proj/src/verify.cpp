#include "polariton/verify.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "polariton/evolution.hpp"
#include "polariton/grid.hpp"
#include "polariton/theory.hpp"

namespace polariton {

namespace {

Field random_smooth_field(const GridPtr& grid, unsigned seed) {
  // Random complex amplitudes under a Gaussian envelope keep the field resolved.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  ComplexArray values(static_cast<Eigen::Index>(grid->size()));
  for (auto& v : values) v = Complex(normal(rng), normal(rng));
  values *= (-0.5 * grid->radius_squared()).exp().cast<Complex>();
  // Low-pass so high modes do not dominate the H^s checks.
  grid->forward_fft(values);
  values *= (-0.05 * grid->wavenumber_squared()).exp().cast<Complex>() / static_cast<double>(grid->size());
  grid->inverse_fft(values);
  return Field(grid, values);
}

CheckResult check(std::string name, double value, double threshold) {
  return CheckResult{std::move(name), value, threshold, value <= threshold};
}

double relative_difference(const ComplexArray& a, const ComplexArray& b) {
  return std::sqrt((a - b).abs2().sum() / b.abs2().sum());
}

}  // namespace

std::vector<CheckResult> run_verification(const RunConfig& config) {
  std::vector<CheckResult> out;
  const GridPtr grid = make_grid(config.n, config.N, config.L, config.max_points);
  const ModelParams params = config.model_params();
  const double s = params.s;

  const Field u = random_smooth_field(grid, 7);
  const Field back = spectral_transform(spectral_transform(u, TransformDirection::forward),
                                        TransformDirection::inverse);
  out.push_back(check("transform roundtrip (relative)", relative_difference(back.values(), u.values()), 1e-13));

  const double parseval = std::abs(sobolev_norm(u, 0.0) / l2_norm_physical(u) - 1.0);
  out.push_back(check("Parseval identity (relative)", parseval, 1e-12));

  const double gaussian_norm = sobolev_norm(gaussian_initial(grid, 1.0), 0.0);
  const double gaussian_exact = std::pow(std::numbers::pi, config.n / 4.0);
  out.push_back(check("Gaussian L2 norm vs pi^(n/4)", std::abs(gaussian_norm - gaussian_exact), 1e-12));

  const double iso = std::abs(sobolev_norm(free_propagate(u, 0.83), s) / sobolev_norm(u, s) - 1.0);
  out.push_back(check("free propagation H^s isometry", iso, 1e-12));

  {
    ComplexArray psi = u.values();
    const RealArray before = psi.abs();
    nonlinear_rotation(psi, params.g, params.p, 0.37);
    out.push_back(check("nonlinear rotation preserves |psi|", (psi.abs() - before).abs().maxCoeff(), 1e-14));
  }

  {
    const Field w = random_smooth_field(grid, 11);
    ComplexArray phi_hat = u.values();
    ComplexArray psi_hat = w.values();
    grid->forward_fft(phi_hat);
    grid->forward_fft(psi_hat);
    const RealArray before = phi_hat.abs2() + psi_hat.abs2();
    CoupledModePropagator(*grid, params, 0.29).apply(phi_hat, psi_hat);
    const RealArray after = phi_hat.abs2() + psi_hat.abs2();
    const double worst = ((after - before).abs() / before.max(1e-300)).maxCoeff();
    out.push_back(check("linear substep per-mode unitarity", worst, 1e-13));
  }

  {
    const Field w = random_smooth_field(grid, 13);
    const EPState initial{u, w, 0.0};
    const LinearBPropagator linear(initial, params);
    ComplexArray phi0 = u.values();
    ComplexArray psi0 = w.values();
    grid->forward_fft(phi0);
    grid->forward_fft(psi0);
    double worst = 0.0;
    for (double t : {0.0, 0.25, 0.5, 0.7, 1.0}) {
      const auto [phi_t, psi_t] = linear.spectrum_at(t);
      double err2 = 0.0;
      double ref2 = 0.0;
      for (Eigen::Index j = 0; j < phi0.size(); ++j) {
        Eigen::Matrix2cd h;
        h << grid->wavenumber_squared()[j], params.gamma, params.gamma, params.omega0;
        const Eigen::Matrix2cd propagator = (Complex(0.0, -t) * h).exp();
        const Eigen::Vector2cd expected = propagator * Eigen::Vector2cd(phi0[j], psi0[j]);
        err2 += std::norm(expected[0] - phi_t[j]) + std::norm(expected[1] - psi_t[j]);
        ref2 += std::norm(expected[0]) + std::norm(expected[1]);
      }
      worst = std::max(worst, std::sqrt(err2 / ref2));
    }
    out.push_back(check("linear B vs matrix-exponential oracle", worst, 1e-10));
  }

  {
    const EPState initial = photon_only_state(gaussian_initial(grid, 1.0));
    const auto traj = evolve_ep(initial, params, StepSpec{1e-3, 100}, 1.0, RecordPolicy::norms_only);
    const double drift = std::abs(traj.mass.back() / traj.mass.front() - 1.0);
    out.push_back(check("EP mass drift over T = 1, dt = 1e-3", drift, 1e-10));
  }

  {
    ComplexArray phi = gaussian_initial(grid, 1.0).values();
    ComplexArray psi = ComplexArray::Zero(phi.size());
    const ComplexArray phi_start = phi;
    EpSplitStepper forward(grid, params, 1e-3);
    EpSplitStepper backward(grid, params, -1e-3);
    for (int i = 0; i < 1000; ++i) forward.step(phi, psi);
    for (int i = 0; i < 1000; ++i) backward.step(phi, psi);
    const SobolevNorm norm(grid, s);
    const double err = norm(phi - phi_start) + norm(psi);
    out.push_back(check("EP time reversal (H^s)", err, 1e-8));
  }

  {
    const Field phi0 = gaussian_initial(grid, 1.0);
    const auto traj = evolve_nls(phi0, params, StepSpec{1e-3, 100}, 1.0, RecordPolicy::norms_only);
    const double drift = std::abs(traj.mass.back() / traj.mass.front() - 1.0);
    out.push_back(check("NLS mass drift over T = 1, dt = 1e-3", drift, 1e-10));
  }

  {
    double worst = 0.0;
    for (double eta : {1e-4, 1e-3, 1e-2, 5e-2}) {
      const RootProblem<double> in{eta, 0.5, params.p};
      const auto roots = solve_roots(in);
      worst = std::max({worst, std::abs(q_eval(roots.y1, in)), std::abs(q_eval(roots.y2, in))});
    }
    out.push_back(check("root residuals of eta y^p - y + delta", worst, 1e-12));
  }

  {
    double worst = 0.0;
    for (double alpha : {0.0, 0.1, 0.2, 0.3}) {
      const auto pred = beta_predict(alpha, params.p, Model::ep);
      if (pred.regime != Regime::exact) continue;
      worst = std::max(worst, std::abs(pred.beta * (params.p + 2.0) + (params.p - 1.0) * alpha - 1.0));
    }
    out.push_back(check("beta(alpha) identity", worst, 1e-14));
  }
  return out;
}

}  // namespace polariton
