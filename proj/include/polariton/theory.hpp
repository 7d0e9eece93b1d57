#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "polariton/errors.hpp"
#include "polariton/evolution.hpp"

namespace polariton {

/// Coefficients of Q(y) = eta y^p - y + delta.
template <typename Real = double>
struct RootProblem {
  Real eta;
  Real delta;
  Real p;
};

template <typename Real = double>
struct PolynomialRoots {
  Real y1;     ///< smaller positive root
  Real y2;     ///< larger positive root
  Real y_min;  ///< minimiser (1/(p eta))^(1/(p-1)), y1 < y_min < y2
  int iterations = 0;
};

/// Q has no positive root: the minimum over y > 0 is not negative.
/// Signals that eta or delta is outside the small-parameter regime.
class NoRealRoots : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

template <typename Real>
Real q_eval(const Real& y, const RootProblem<Real>& in) {
  using std::pow;
  return in.eta * pow(y, in.p) - y + in.delta;
}

template <typename Real>
Real q_derivative(const Real& y, const RootProblem<Real>& in) {
  using std::pow;
  return in.p * in.eta * pow(y, in.p - 1) - 1;
}

namespace detail {

/// Bisection down to 1e-6 relative bracket width, then Newton kept inside the bracket.
/// `lo` and `hi` must bracket a sign change of Q.
template <typename Real>
Real polish_root(const RootProblem<Real>& in, Real lo, Real hi, int& iterations) {
  using std::abs;
  constexpr int max_iterations = 200;
  const Real eps = std::numeric_limits<Real>::epsilon();
  const bool rising = q_eval(lo, in) < 0;

  auto keep_side = [&](const Real& y, const Real& qy) {
    if ((qy < 0) == rising) {
      lo = y;
    } else {
      hi = y;
    }
  };

  while (hi - lo > Real(1e-6) * abs(hi)) {
    if (++iterations > max_iterations) throw NumericalError("root bracketing did not converge");
    const Real mid = (lo + hi) / 2;
    keep_side(mid, q_eval(mid, in));
  }

  Real y = (lo + hi) / 2;
  for (;;) {
    if (++iterations > max_iterations) throw NumericalError("Newton polish did not converge");
    const Real qy = q_eval(y, in);
    if (qy == 0) return y;
    keep_side(y, qy);
    const Real slope = q_derivative(y, in);
    Real next = y - qy / slope;
    if (!(next > lo && next < hi)) next = (lo + hi) / 2;
    const Real change = abs(next - y);
    y = next;
    if (change <= 4 * eps * abs(y) || hi - lo <= 4 * eps * abs(hi)) return y;
  }
}

}  // namespace detail

/// Both positive roots of Q. Throws NoRealRoots when Q(y_min) >= 0.
template <typename Real>
PolynomialRoots<Real> solve_roots(const RootProblem<Real>& in) {
  using std::pow;
  if (!(in.p > 1)) throw ConfigError("root solver needs p > 1", "p");
  if (!(in.eta > 0) || !(in.delta > 0)) {
    throw ConfigError("roots need eta > 0 and delta > 0");
  }
  PolynomialRoots<Real> out{};
  out.y_min = pow(1 / (in.p * in.eta), 1 / (in.p - 1));
  if (!(q_eval(out.y_min, in) < 0)) {
    throw NoRealRoots("Q(y; eta, delta) has no positive root: Q(y_min) >= 0");
  }

  // Q(delta) = eta delta^p > 0 and Q is convex, so y1 lies in (delta, y_min).
  Real lo = in.delta < out.y_min ? in.delta : Real(0);
  out.y1 = detail::polish_root(in, lo, out.y_min, out.iterations);

  Real hi = 2 * out.y_min;
  for (int i = 0; !(q_eval(hi, in) > 0); ++i) {
    if (i > 200) throw NumericalError("could not bracket the larger root of Q");
    hi *= 2;
  }
  out.y2 = detail::polish_root(in, out.y_min, hi, out.iterations);
  return out;
}

/// Lagrange-inversion coefficient binom(p m, m - 1) / m of the small root.
template <typename Real>
Real lagrange_coefficient(const Real& p, int m) {
  Real c = 1;
  for (int j = 0; j < m - 1; ++j) c *= (p * m - j) / Real(j + 1);
  return c / m;
}

/// Small-root expansion delta (1 + x + p x^2 + ...), x = eta delta^(p-1), through x^order.
template <typename Real>
Real y1_series(const RootProblem<Real>& in, int order) {
  using std::pow;
  if (order < 1 || order > 3) throw ConfigError("series order must be 1, 2 or 3", "order");
  const Real x = in.eta * pow(in.delta, in.p - 1);
  if (!(x < Real(0.3))) throw ConfigError("eta delta^(p-1) must be below 0.3 for the series");
  Real sum = 1;
  Real xm = 1;
  for (int m = 1; m <= order; ++m) {
    xm *= x;
    sum += lagrange_coefficient(in.p, m) * xm;
  }
  return in.delta * sum;
}

/// Expansion of y1^p, delta^p (1 + p x + ...), through x^order.
template <typename Real>
Real y1_pow_p_series(const RootProblem<Real>& in, int order) {
  using std::pow;
  if (order < 1 || order > 2) throw ConfigError("series order must be 1 or 2", "order");
  const Real x = in.eta * pow(in.delta, in.p - 1);
  if (!(x < Real(0.3))) throw ConfigError("eta delta^(p-1) must be below 0.3 for the series");
  Real sum = 1;
  Real xm = 1;
  for (int m = 1; m <= order; ++m) {
    xm *= x;
    sum += lagrange_coefficient(in.p, m + 1) * xm;
  }
  return pow(in.delta, in.p) * sum;
}

// --- scaling predictions and bound constants ---------------------------------

enum class Model { nls, ep };
enum class Regime { exact, any_positive };

struct BetaPrediction {
  double alpha = 0.0;
  double p = 3.0;
  Model model = Model::ep;
  double beta = 0.0;  ///< NaN in the any-positive regime
  Regime regime = Regime::exact;
};

BetaPrediction beta_predict(double alpha, double p, Model model);

struct BoundConstants {
  double M = 0.0;
  double Kp = 1.0;
  double C = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double B = 0.0;
  double B1 = 0.0;
  double B2 = 0.0;
  double q = 0.0;
};

BoundConstants bound_constants(const ModelParams& params, double M, double Kp, double C, double C1,
                               double C2, double alpha);

/// A-priori bound on ||psi(t)||: eta^(1/p) z1(eta, delta) with
/// eta = (|g| Kp t / (1 - gamma^2 t^2 / 2))^p and delta = gamma M eps^alpha / (|g| Kp).
double y_star(double t, double epsilon, const ModelParams& params, double M, double Kp,
              double alpha);

/// gamma M eps^alpha t (1 + gamma^2 t^2 / 2 + |g| Kp (gamma M)^(p-1) eps^(alpha (p-1)) t^p)
double y_star_series(double t, double epsilon, const ModelParams& params, double M, double Kp,
                     double alpha);

/// (1 - r) / (2 gamma + |g| Ktilde N^2)
double existence_horizon(double N, double r, double gamma, double g, double Ktilde);

std::string to_string(Model model);
std::string to_string(Regime regime);
Model parse_model(const std::string& text);

}  // namespace polariton
