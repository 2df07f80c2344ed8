#pragma once

// Effective one-dimensional models of the interface separation: the Toda
// equation c0 q'' + c0 q' / r = c1 exp(-2 sqrt2 q), its explicit solution,
// and the flux form of the nodal-line equation
//
//   (r p' / sqrt(1 + p'^2))' = (c1 / c0) r exp(-2 sqrt2 p).

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "twoend/geometry.hpp"

namespace twoend::reduced {

/// q_eps(r) = q(eps r) - (sqrt2 / 2) ln eps with
/// q(x) = ln((1 + a x^2)^2 / 8) / (2 sqrt2), or its first/second derivative.
double toda_explicit(double eps, double r, int order);

struct TodaResidual {
  double value = 0.0;
  bool axis_limit = false;  // evaluated as 2 c0 q''(0) - c1 exp(-2 sqrt2 q(0))
};

/// Left side of the Toda equation for q given as r -> (q, q', q'').
TodaResidual toda_residual(const std::function<std::array<double, 3>(double)>& q, double r);

NodalCurve catenoid_curve(double k, double b);

enum class InteractionMode { D_equals_2p };

/// (c1 / c0) r exp(-2 sqrt2 p); the slope argument is unused by this mode.
double reduced_flux_rhs(double p, double dp, double r, InteractionMode mode = InteractionMode::D_equals_2p);

/// exact: mu = r p' / sqrt(1 + p'^2). small_slope: mu = r p', for which the
/// flux equation is the Toda equation itself.
enum class FluxForm { exact, small_slope };

struct StepControl {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double initial_step = 1e-3;  // in s = ln r
  double min_step = 1e-12;
  long max_steps = 2'000'000;
  double output_spacing = 0.0;  // in s; 0 records every accepted step
  double forcing = 0.0;         // C0 in the optional -C0 / r^2 term
  FluxForm form = FluxForm::exact;
};

struct ReducedTrajectory {
  std::vector<double> r, p, dp, mu;
  double rel_tol = 0.0, abs_tol = 0.0;
  long accepted_steps = 0, rejected_steps = 0;

  /// Samples of an explicit curve at the given abscissae.
  static ReducedTrajectory from_curve(const NodalCurve& curve, const std::vector<double>& r);
};

/// Integrates the flux form in s = ln r from r0 to r_end. Throws BlowUpError
/// when mu reaches r and StiffnessError on step underflow.
ReducedTrajectory integrate_reduced(double p0, double slope0, double r0, double r_end,
                                    const StepControl& control = {});

struct ProbeOptions {
  int trials = 50;
  std::uint64_t seed = 20240611;
  double r0 = 1.0;
  double p0_min = 1.0, p0_max = 20.0;
  double r_horizon = 1e6;   // minimum integration range
  double log_r_cap = 700.0;
  double forcing = 0.0;
  double gain_tolerance = 1e-12;
  int threads = 0;          // 0: TWO_END_LAB_THREADS or hardware concurrency
};

struct ProbeTrial {
  int index = 0;
  double p0 = 0.0, slope0 = 0.0, mu0 = 0.0;
  double final_mu = 0.0;
  double final_log_r = 0.0;
  bool interaction_reached = false;
  bool failed = false;
  std::string failure;
};

struct ProbeReport {
  double k_target = 0.0;
  double forcing = 0.0;
  std::uint64_t seed = 0;
  std::vector<ProbeTrial> trials;
  double min_final_mu = 0.0;
  double delta_obs = 0.0;         // min final mu - sqrt2 / 2 over decided trials
  int failures = 0;
  int undecided = 0;              // interaction not reached before the cap
  bool no_two_end_regime = false;

  std::string verdict() const { return no_two_end_regime ? "no-two-end-regime" : "inconclusive"; }
};

/// Shoots trajectories from r0 with p0 log-uniform in [p0_min, p0_max] and
/// slope0 uniform in [0, k_target / r0], and records the terminal flux once
/// the interaction is exhausted.
ProbeReport nonexistence_probe(double k_target, const ProbeOptions& options = {});

/// Single probe trial; exposed for the horizon diagnostics.
ProbeTrial probe_trial(double p0, double slope0, const ProbeOptions& options);

struct JacobiFields {
  double xi1 = 0.0, xi2 = 0.0;
  double dxi1 = 0.0, dxi2 = 0.0;
  double wronskian = 0.0;  // xi1 xi2' - xi2 xi1'
};

/// xi1 = sinh z, xi2 = -cosh z + z sinh z, solutions of
/// xi'' - 2 tanh(z) xi' + xi = 0.
JacobiFields jacobi_fields(double z);

/// Largest |r_i - cosh(eps p_i) / eps| over trajectory samples with p_i in
/// [z_lo, z_hi] (all samples when no window is given).
double catenoid_match_error(const ReducedTrajectory& traj, double eps,
                            std::optional<std::array<double, 2>> window = std::nullopt);

/// CSV with header `r,p,dp,mu`.
void write_trajectory_csv(std::ostream& out, const ReducedTrajectory& traj);

/// Worker count for parallel loops: TWO_END_LAB_THREADS when set, else the
/// hardware concurrency, capped by `work`.
int worker_count(int requested, int work);

}  // namespace twoend::reduced
