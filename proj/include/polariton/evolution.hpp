#pragma once

#include <functional>
#include <span>
#include <vector>

#include "polariton/grid.hpp"

namespace polariton {

/// Physical constants of the coupled photon-exciton system and of NLS.
struct ModelParams {
  double g = 1.0;       ///< nonlinear coupling
  double gamma = 1.0;   ///< photon-exciton coupling, >= 0
  double omega0 = 1.0;  ///< exciton detuning
  double p = 3.0;       ///< nonlinearity power, > 1
  double s = 1.0;       ///< Sobolev index used for recorded norms, >= 0

  void validate() const;
};

/// Photon field phi and exciton field psi at one time. Both in physical space.
struct EPState {
  Field phi;
  Field psi;
  double time = 0.0;
};

/// Photon initial data with the exciton absent.
EPState photon_only_state(const Field& phi);

/// Strang step size and output cadence.
struct StepSpec {
  double dt = 1e-3;
  int samples_per_unit_time = 100;

  /// Number of steps between samples; throws unless dt divides the interval.
  long long steps_per_sample() const;
};

enum class RecordPolicy { norms_only, full_state };

struct Trajectory {
  RecordPolicy policy = RecordPolicy::full_state;
  double s = 1.0;
  std::vector<double> times;
  std::vector<double> norm_phi;
  std::vector<double> norm_psi;
  std::vector<double> mass;
  std::vector<EPState> states;  ///< filled only for RecordPolicy::full_state

  std::size_t size() const noexcept { return times.size(); }
};

/// Relative error samples rho(t) of one amplitude delta.
struct ErrorCurve {
  double delta = 1.0;
  std::vector<double> times;
  std::vector<double> rho;
};

/// Called once per sample, t = 0 included, with the current state.
using SampleObserver = std::function<void(const EPState&)>;

// --- substeps ----------------------------------------------------------------

/// u <- exp(-i g |u|^(p-1) tau) u pointwise; |u| is unchanged.
void nonlinear_rotation(ComplexArray& u, double g, double p, double tau);

/// Per-mode exact propagator exp(-i t H_k), H_k = [[|k|^2, gamma], [gamma, omega0]].
/// Acts on raw FFT coefficients; `scale` is folded into every entry.
class CoupledModePropagator {
 public:
  CoupledModePropagator(const Grid& grid, const ModelParams& params, double t, double scale = 1.0);

  void apply(ComplexArray& phi_hat, ComplexArray& psi_hat) const;

  const ComplexArray& diagonal_photon() const noexcept { return u11_; }
  const ComplexArray& diagonal_exciton() const noexcept { return u22_; }
  const ComplexArray& off_diagonal() const noexcept { return u12_; }

 private:
  ComplexArray u11_;
  ComplexArray u12_;
  ComplexArray u22_;
};

/// One Strang step of the nonlinear EP system. Negative dt runs backwards.
class EpSplitStepper {
 public:
  EpSplitStepper(GridPtr grid, const ModelParams& params, double dt);

  void step(ComplexArray& phi, ComplexArray& psi);

 private:
  GridPtr grid_;
  ModelParams params_;
  double dt_;
  CoupledModePropagator linear_;
};

/// One Strang step of NLS. Negative dt runs backwards.
class NlsSplitStepper {
 public:
  NlsSplitStepper(GridPtr grid, const ModelParams& params, double dt);

  void step(ComplexArray& phi);

 private:
  GridPtr grid_;
  ModelParams params_;
  double dt_;
  ComplexArray phase_;
};

// --- exact linear solutions --------------------------------------------------

/// Exact solution of the linear exciton system (g = 0) from a fixed state.
class LinearBPropagator {
 public:
  LinearBPropagator(const EPState& initial, const ModelParams& params);

  EPState at(double t) const;
  /// Raw FFT coefficients of (phi, psi) at time t.
  std::pair<ComplexArray, ComplexArray> spectrum_at(double t) const;

 private:
  GridPtr grid_;
  ModelParams params_;
  double t0_;
  ComplexArray phi_hat_;
  ComplexArray psi_hat_;
};

/// Exact solution of approximation A with psi(0) = 0.
class SystemAPropagator {
 public:
  SystemAPropagator(const Field& phi0, const ModelParams& params);

  EPState at(double t) const;
  std::pair<ComplexArray, ComplexArray> spectrum_at(double t) const;

 private:
  GridPtr grid_;
  ModelParams params_;
  ComplexArray phi_hat_;
};

/// Approximation A on [0, t1], then approximation B from A's state at t1.
class CompositeTildePropagator {
 public:
  CompositeTildePropagator(const Field& phi0, const ModelParams& params, double t1);

  double handoff_time() const noexcept { return t1_; }
  EPState at(double t) const;

 private:
  GridPtr grid_;
  ModelParams params_;
  double t1_;
  SystemAPropagator phase_a_;
  ComplexArray phi_hat_t1_;
  ComplexArray psi_hat_t1_;
};

// --- trajectory drivers -----------------------------------------------------

/// Strang split-step solution of the nonlinear EP system on [0, T].
Trajectory evolve_ep(const EPState& initial, const ModelParams& params, const StepSpec& step,
                     double T, RecordPolicy policy = RecordPolicy::full_state,
                     const SampleObserver& observer = {});

/// Exact linear-B solution sampled at the requested times.
Trajectory evolve_linear_b(const EPState& initial, const ModelParams& params,
                           std::span<const double> times,
                           RecordPolicy policy = RecordPolicy::full_state);

/// Exact approximation-A solution from (phi0, 0) sampled at the requested times.
Trajectory evolve_system_a(const Field& phi0, const ModelParams& params,
                           std::span<const double> times,
                           RecordPolicy policy = RecordPolicy::full_state);

/// A on [0, C1 sqrt(epsilon)], B afterwards. Requires C1 sqrt(epsilon) <= T.
Trajectory evolve_composite_tilde(const Field& phi0, const ModelParams& params, double C1,
                                  double epsilon, double T, std::span<const double> times,
                                  RecordPolicy policy = RecordPolicy::full_state);

/// Strang split-step NLS solution on [0, T]; psi stays zero.
Trajectory evolve_nls(const Field& phi0, const ModelParams& params, const StepSpec& step, double T,
                      RecordPolicy policy = RecordPolicy::full_state,
                      const SampleObserver& observer = {});

/// rho(t) = ||phi_ref(t) - phi(t)||_s / ||phi(t)||_s from two full-state trajectories.
ErrorCurve relative_error_curve(const Trajectory& reference, const Trajectory& truth, double s);

/// sum_j (|phi_j|^2 + |psi_j|^2) dx^n
double total_mass(const EPState& state);

/// Sample times 0, h, 2h, ... up to T (T itself included when it lies on the lattice).
std::vector<double> uniform_sample_times(double T, int samples_per_unit_time);

}  // namespace polariton
