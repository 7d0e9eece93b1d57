#include "polariton/evolution.hpp"

#include <cmath>
#include <string>
#include <tuple>

#include "polariton/errors.hpp"

namespace polariton {

namespace {

constexpr double resonance_threshold = 1e-8;

void require_physical(const Field& f, const char* what) {
  if (f.representation() != Representation::physical) {
    throw ConfigError(std::string(what) + " must be a physical-space field");
  }
}

long long checked_step_count(double T, double dt) {
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("horizon T must be positive", "T");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step dt must be positive", "dt");
  const auto steps = std::llround(T / dt);
  if (steps < 1 || std::abs(static_cast<double>(steps) * dt - T) > 1e-9 * T) {
    throw ConfigError("horizon T must be a whole number of time steps", "T");
  }
  return steps;
}

void check_times(std::span<const double> times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || times[i] < 0.0) {
      throw ConfigError("sample times must be finite and nonnegative");
    }
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw ConfigError("sample times must be strictly increasing");
    }
  }
}

/// Accumulates samples into a trajectory according to its policy.
class Recorder {
 public:
  Recorder(const GridPtr& grid, double s, RecordPolicy policy) : norm_(grid, s) {
    trajectory_.policy = policy;
    trajectory_.s = s;
  }

  void record(const EPState& state) {
    trajectory_.times.push_back(state.time);
    trajectory_.norm_phi.push_back(norm_(state.phi.values()));
    trajectory_.norm_psi.push_back(norm_(state.psi.values()));
    trajectory_.mass.push_back(total_mass(state));
    if (trajectory_.policy == RecordPolicy::full_state) trajectory_.states.push_back(state);
  }

  Trajectory take() { return std::move(trajectory_); }

 private:
  SobolevNorm norm_;
  Trajectory trajectory_;
};

ComplexArray inverse_normalised(ComplexArray spectrum, const Grid& grid) {
  grid.inverse_fft(spectrum);
  spectrum /= static_cast<double>(grid.size());
  return spectrum;
}

}  // namespace

void ModelParams::validate() const {
  if (!(p > 1.0) || !std::isfinite(p)) throw ConfigError("nonlinearity power must satisfy p > 1", "p");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be >= 0", "gamma");
  if (!std::isfinite(g)) throw ConfigError("g must be finite", "g");
  if (!std::isfinite(omega0)) throw ConfigError("omega0 must be finite", "omega0");
  if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("Sobolev index must be >= 0", "s");
}

EPState photon_only_state(const Field& phi) {
  require_physical(phi, "photon field");
  return EPState{phi, Field::zeros(phi.grid_ptr()), 0.0};
}

long long StepSpec::steps_per_sample() const {
  if (!(dt > 0.0)) throw ConfigError("time step dt must be positive", "dt");
  if (samples_per_unit_time < 1) {
    throw ConfigError("samples_per_unit_time must be positive", "samples_per_unit_time");
  }
  const double interval = 1.0 / samples_per_unit_time;
  const auto steps = std::llround(interval / dt);
  if (steps < 1 || std::abs(static_cast<double>(steps) * dt - interval) > 1e-9 * interval) {
    throw ConfigError("dt must divide the sampling interval exactly", "dt");
  }
  return steps;
}

void nonlinear_rotation(ComplexArray& u, double g, double p, double tau) {
  if (g == 0.0 || tau == 0.0) return;
  const RealArray mag2 = u.abs2();
  RealArray power;
  if (p == 3.0) {
    power = mag2;
  } else if (p == 5.0) {
    power = mag2.square();
  } else {
    // |u|^(p-1) = exp((p-1) ln|u|), with 0^(p-1) = 0.
    power = (mag2 > 0.0).select((0.5 * (p - 1.0) * mag2.log()).exp(), 0.0);
  }
  u *= (Complex(0.0, -g * tau) * power.cast<Complex>()).exp();
}

CoupledModePropagator::CoupledModePropagator(const Grid& grid, const ModelParams& params, double t,
                                             double scale) {
  const RealArray& k2 = grid.wavenumber_squared();
  const auto n = k2.size();
  u11_.resize(n);
  u12_.resize(n);
  u22_.resize(n);
  const double gamma = params.gamma;
  for (Eigen::Index j = 0; j < n; ++j) {
    // H = a I + [[d, gamma], [gamma, -d]], whose traceless part squares to Omega^2 I.
    const double a = 0.5 * (k2[j] + params.omega0);
    const double d = 0.5 * (k2[j] - params.omega0);
    const double omega = std::hypot(d, gamma);
    const double c = std::cos(omega * t);
    const double sinc_t = omega > 0.0 ? std::sin(omega * t) / omega : t;
    const Complex phase = std::polar(scale, -a * t);
    u11_[j] = phase * Complex(c, -sinc_t * d);
    u22_[j] = phase * Complex(c, sinc_t * d);
    u12_[j] = phase * Complex(0.0, -sinc_t * gamma);
  }
}

void CoupledModePropagator::apply(ComplexArray& phi_hat, ComplexArray& psi_hat) const {
  ComplexArray next_phi = u11_ * phi_hat + u12_ * psi_hat;
  psi_hat = u12_ * phi_hat + u22_ * psi_hat;
  phi_hat = std::move(next_phi);
}

EpSplitStepper::EpSplitStepper(GridPtr grid, const ModelParams& params, double dt)
    : grid_(std::move(grid)),
      params_(params),
      dt_(dt),
      linear_(*grid_, params, dt, 1.0 / static_cast<double>(grid_->size())) {}

void EpSplitStepper::step(ComplexArray& phi, ComplexArray& psi) {
  nonlinear_rotation(psi, params_.g, params_.p, 0.5 * dt_);
  grid_->forward_fft(phi);
  grid_->forward_fft(psi);
  linear_.apply(phi, psi);
  grid_->inverse_fft(phi);
  grid_->inverse_fft(psi);
  nonlinear_rotation(psi, params_.g, params_.p, 0.5 * dt_);
}

NlsSplitStepper::NlsSplitStepper(GridPtr grid, const ModelParams& params, double dt)
    : grid_(std::move(grid)), params_(params), dt_(dt) {
  const double scale = 1.0 / static_cast<double>(grid_->size());
  phase_ = (Complex(0.0, -dt) * grid_->wavenumber_squared().cast<Complex>()).exp() * scale;
}

void NlsSplitStepper::step(ComplexArray& phi) {
  nonlinear_rotation(phi, params_.g, params_.p, 0.5 * dt_);
  grid_->forward_fft(phi);
  phi *= phase_;
  grid_->inverse_fft(phi);
  nonlinear_rotation(phi, params_.g, params_.p, 0.5 * dt_);
}

// --- exact linear solutions -------------------------------------------------

LinearBPropagator::LinearBPropagator(const EPState& initial, const ModelParams& params)
    : grid_(initial.phi.grid_ptr()),
      params_(params),
      t0_(initial.time),
      phi_hat_(initial.phi.values()),
      psi_hat_(initial.psi.values()) {
  require_physical(initial.phi, "photon field");
  require_physical(initial.psi, "exciton field");
  grid_->forward_fft(phi_hat_);
  grid_->forward_fft(psi_hat_);
}

std::pair<ComplexArray, ComplexArray> LinearBPropagator::spectrum_at(double t) const {
  ComplexArray phi = phi_hat_;
  ComplexArray psi = psi_hat_;
  CoupledModePropagator(*grid_, params_, t - t0_).apply(phi, psi);
  return {std::move(phi), std::move(psi)};
}

EPState LinearBPropagator::at(double t) const {
  auto [phi, psi] = spectrum_at(t);
  return EPState{Field(grid_, inverse_normalised(std::move(phi), *grid_)),
                 Field(grid_, inverse_normalised(std::move(psi), *grid_)), t};
}

SystemAPropagator::SystemAPropagator(const Field& phi0, const ModelParams& params)
    : grid_(phi0.grid_ptr()), params_(params), phi_hat_(phi0.values()) {
  require_physical(phi0, "photon field");
  grid_->forward_fft(phi_hat_);
}

std::pair<ComplexArray, ComplexArray> SystemAPropagator::spectrum_at(double t) const {
  const RealArray& k2 = grid_->wavenumber_squared();
  const auto n = k2.size();
  ComplexArray phi(n);
  ComplexArray psi(n);
  const Complex exciton_phase = Complex(0.0, -params_.gamma) * std::polar(1.0, -params_.omega0 * t);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double detuning = params_.omega0 - k2[j];
    const double theta = detuning * t;
    // (exp(i theta) - 1) / (i detuning)
    Complex duhamel;
    if (std::abs(detuning) < resonance_threshold) {
      duhamel = t * Complex(1.0 - theta * theta / 6.0, 0.5 * theta);
    } else {
      const double half = std::sin(0.5 * theta);
      duhamel = Complex(std::sin(theta), 2.0 * half * half) / detuning;
    }
    phi[j] = std::polar(1.0, -k2[j] * t) * phi_hat_[j];
    psi[j] = exciton_phase * duhamel * phi_hat_[j];
  }
  return {std::move(phi), std::move(psi)};
}

EPState SystemAPropagator::at(double t) const {
  auto [phi, psi] = spectrum_at(t);
  return EPState{Field(grid_, inverse_normalised(std::move(phi), *grid_)),
                 Field(grid_, inverse_normalised(std::move(psi), *grid_)), t};
}

CompositeTildePropagator::CompositeTildePropagator(const Field& phi0, const ModelParams& params,
                                                   double t1)
    : grid_(phi0.grid_ptr()), params_(params), t1_(t1), phase_a_(phi0, params) {
  if (!(t1 >= 0.0)) throw ConfigError("handoff time must be nonnegative", "C1");
  std::tie(phi_hat_t1_, psi_hat_t1_) = phase_a_.spectrum_at(t1);
}

EPState CompositeTildePropagator::at(double t) const {
  if (t <= t1_) return phase_a_.at(t);
  ComplexArray phi = phi_hat_t1_;
  ComplexArray psi = psi_hat_t1_;
  CoupledModePropagator(*grid_, params_, t - t1_).apply(phi, psi);
  return EPState{Field(grid_, inverse_normalised(std::move(phi), *grid_)),
                 Field(grid_, inverse_normalised(std::move(psi), *grid_)), t};
}

// --- trajectory drivers -----------------------------------------------------

Trajectory evolve_ep(const EPState& initial, const ModelParams& params, const StepSpec& step,
                     double T, RecordPolicy policy, const SampleObserver& observer) {
  params.validate();
  require_physical(initial.phi, "photon field");
  require_physical(initial.psi, "exciton field");
  const long long total = checked_step_count(T, step.dt);
  const long long cadence = step.steps_per_sample();

  const GridPtr& grid = initial.phi.grid_ptr();
  EpSplitStepper stepper(grid, params, step.dt);
  Recorder recorder(grid, params.s, policy);

  ComplexArray phi = initial.phi.values();
  ComplexArray psi = initial.psi.values();
  auto emit = [&](double t) {
    EPState state{Field(grid, phi), Field(grid, psi), t};
    recorder.record(state);
    if (observer) observer(state);
  };

  emit(initial.time);
  for (long long i = 1; i <= total; ++i) {
    stepper.step(phi, psi);
    const double t = initial.time + static_cast<double>(i) * step.dt;
    if (!phi.allFinite() || !psi.allFinite()) {
      throw NumericalError("EP solver produced non-finite values at t = " + std::to_string(t) +
                               " (step " + std::to_string(i) + ")",
                           t, i);
    }
    if (i % cadence == 0 || i == total) emit(t);
  }
  return recorder.take();
}

Trajectory evolve_linear_b(const EPState& initial, const ModelParams& params,
                           std::span<const double> times, RecordPolicy policy) {
  params.validate();
  check_times(times);
  LinearBPropagator propagator(initial, params);
  Recorder recorder(initial.phi.grid_ptr(), params.s, policy);
  for (double t : times) recorder.record(propagator.at(t));
  return recorder.take();
}

Trajectory evolve_system_a(const Field& phi0, const ModelParams& params,
                           std::span<const double> times, RecordPolicy policy) {
  params.validate();
  check_times(times);
  SystemAPropagator propagator(phi0, params);
  Recorder recorder(phi0.grid_ptr(), params.s, policy);
  for (double t : times) recorder.record(propagator.at(t));
  return recorder.take();
}

Trajectory evolve_composite_tilde(const Field& phi0, const ModelParams& params, double C1,
                                  double epsilon, double T, std::span<const double> times,
                                  RecordPolicy policy) {
  params.validate();
  check_times(times);
  if (!(C1 >= 0.0)) throw ConfigError("C1 must be nonnegative", "C1");
  if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be nonnegative", "epsilon");
  const double t1 = C1 * std::sqrt(epsilon);
  if (t1 > T) throw ConfigError("handoff time C1 sqrt(epsilon) exceeds the horizon T", "C1");
  CompositeTildePropagator propagator(phi0, params, t1);
  Recorder recorder(phi0.grid_ptr(), params.s, policy);
  for (double t : times) recorder.record(propagator.at(t));
  return recorder.take();
}

Trajectory evolve_nls(const Field& phi0, const ModelParams& params, const StepSpec& step, double T,
                      RecordPolicy policy, const SampleObserver& observer) {
  params.validate();
  require_physical(phi0, "photon field");
  const long long total = checked_step_count(T, step.dt);
  const long long cadence = step.steps_per_sample();

  const GridPtr& grid = phi0.grid_ptr();
  NlsSplitStepper stepper(grid, params, step.dt);
  Recorder recorder(grid, params.s, policy);
  const Field zero = Field::zeros(grid);

  ComplexArray phi = phi0.values();
  auto emit = [&](double t) {
    EPState state{Field(grid, phi), zero, t};
    recorder.record(state);
    if (observer) observer(state);
  };

  emit(0.0);
  for (long long i = 1; i <= total; ++i) {
    stepper.step(phi);
    const double t = static_cast<double>(i) * step.dt;
    if (!phi.allFinite()) {
      throw NumericalError("NLS solver produced non-finite values at t = " + std::to_string(t) +
                               " (step " + std::to_string(i) + ")",
                           t, i);
    }
    if (i % cadence == 0 || i == total) emit(t);
  }
  return recorder.take();
}

ErrorCurve relative_error_curve(const Trajectory& reference, const Trajectory& truth, double s) {
  if (reference.policy != RecordPolicy::full_state || truth.policy != RecordPolicy::full_state) {
    throw ConfigError("relative error needs full-state trajectories");
  }
  if (reference.times != truth.times) {
    throw ConfigError("trajectories must share identical sample times");
  }
  ErrorCurve curve;
  if (truth.states.empty()) return curve;
  SobolevNorm norm(truth.states.front().phi.grid_ptr(), s);
  curve.times = truth.times;
  curve.rho.reserve(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double denominator = norm(truth.states[i].phi.values());
    if (!(denominator >= 1e-300)) {
      throw NumericalError("reference photon norm vanishes at t = " + std::to_string(truth.times[i]),
                           truth.times[i]);
    }
    const ComplexArray diff = reference.states[i].phi.values() - truth.states[i].phi.values();
    curve.rho.push_back(norm(diff) / denominator);
  }
  return curve;
}

double total_mass(const EPState& state) {
  const double dv = state.phi.grid().cell_volume();
  return (state.phi.values().abs2().sum() + state.psi.values().abs2().sum()) * dv;
}

std::vector<double> uniform_sample_times(double T, int samples_per_unit_time) {
  if (samples_per_unit_time < 1) {
    throw ConfigError("samples_per_unit_time must be positive", "samples_per_unit_time");
  }
  const auto count = static_cast<long long>(std::floor(T * samples_per_unit_time + 1e-9));
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(count + 1));
  for (long long i = 0; i <= count; ++i) {
    times.push_back(static_cast<double>(i) / samples_per_unit_time);
  }
  return times;
}

}  // namespace polariton
