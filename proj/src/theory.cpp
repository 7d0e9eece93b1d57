#include "polariton/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace polariton {

BetaPrediction beta_predict(double alpha, double p, Model model) {
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be nonnegative", "alpha");
  if (!(p > 1.0)) throw ConfigError("nonlinearity power must satisfy p > 1", "p");
  BetaPrediction out{alpha, p, model, 0.0, Regime::exact};
  if (alpha >= 1.0 / (p - 1.0)) {
    out.regime = Regime::any_positive;
    out.beta = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const double nls_beta = 1.0 - (p - 1.0) * alpha;
  out.beta = model == Model::nls ? nls_beta : nls_beta / (p + 2.0);
  return out;
}

BoundConstants bound_constants(const ModelParams& params, double M, double Kp, double C, double C1,
                               double C2, double alpha) {
  if (!(params.p > 1.0)) throw ConfigError("nonlinearity power must satisfy p > 1", "p");
  if (!(M >= 0.0) || !(Kp >= 0.0) || !(C >= 0.0) || !(C1 >= 0.0) || !(C2 >= 0.0) ||
      !(alpha >= 0.0)) {
    throw ConfigError("bound constants need nonnegative inputs");
  }
  const double p = params.p;
  const double abs_g = std::abs(params.g);
  BoundConstants out{M, Kp, C, C1, C2, 0.0, 0.0, 0.0, 0.0};
  out.B = abs_g * Kp * C * std::pow(M, p - 1.0);
  out.B1 = 0.5 * params.gamma * params.gamma * C1 * C1;
  out.B2 = out.B1;
  if (alpha <= 0.5) {
    out.B2 += abs_g * Kp * std::pow(params.gamma, p + 1.0) * std::pow(M, p - 1.0) *
              std::pow(C2, p + 2.0) / (p + 2.0);
  }
  out.q = std::min(2.0, 1.0 + 0.5 * p + alpha * (p - 1.0));
  return out;
}

double y_star(double t, double epsilon, const ModelParams& params, double M, double Kp,
              double alpha) {
  if (!(t >= 0.0) || !(epsilon >= 0.0)) throw ConfigError("y_star needs t >= 0 and epsilon >= 0");
  const double damping = 1.0 - 0.5 * params.gamma * params.gamma * t * t;
  if (!(damping > 0.0)) throw ConfigError("y_star needs gamma^2 t^2 / 2 < 1", "t");
  const double drive = params.gamma * M * std::pow(epsilon, alpha);
  if (t == 0.0 || drive == 0.0) return 0.0;

  const double coupling = std::abs(params.g) * Kp;
  // Without the nonlinear term the bound closes linearly.
  if (coupling == 0.0) return drive * t / damping;

  const double eta = std::pow(coupling * t / damping, params.p);
  const double delta = drive / coupling;
  const auto roots = solve_roots(RootProblem<double>{eta, delta, params.p});
  return std::pow(eta, 1.0 / params.p) * roots.y1;
}

double y_star_series(double t, double epsilon, const ModelParams& params, double M, double Kp,
                     double alpha) {
  const double p = params.p;
  const double gm = params.gamma * M;
  const double eps_alpha = std::pow(epsilon, alpha);
  const double nonlinear =
      std::abs(params.g) * Kp * std::pow(gm, p - 1.0) * std::pow(eps_alpha, p - 1.0) * std::pow(t, p);
  return gm * eps_alpha * t * (1.0 + 0.5 * params.gamma * params.gamma * t * t + nonlinear);
}

double existence_horizon(double N, double r, double gamma, double g, double Ktilde) {
  if (!(r > 0.0 && r < 1.0)) throw ConfigError("existence horizon needs 0 < r < 1", "r");
  if (!(N > 0.0)) throw ConfigError("existence horizon needs N > 0", "N");
  return (1.0 - r) / (2.0 * gamma + std::abs(g) * Ktilde * N * N);
}

std::string to_string(Model model) { return model == Model::nls ? "nls" : "ep"; }

std::string to_string(Regime regime) {
  return regime == Regime::exact ? "exact" : "any-positive";
}

Model parse_model(const std::string& text) {
  if (text == "ep" || text == "EP") return Model::ep;
  if (text == "nls" || text == "NLS") return Model::nls;
  throw ConfigError("unknown model '" + text + "' (expected ep or nls)", "model");
}

}  // namespace polariton
