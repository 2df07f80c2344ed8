#include "twoend/reduced.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "twoend/closed_form.hpp"
#include "twoend/errors.hpp"
#include "twoend/ode.hpp"
#include "twoend/profile.hpp"

namespace twoend::reduced {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

const profile::HeteroclinicProfile& constants() { return profile::HeteroclinicProfile::standard(); }

using Solver = ode::Dopri5<2>;
using State = Solver::State;

// Right side in s = ln r for the state (p, mu).
struct FluxField {
  double K;
  double forcing;
  FluxForm form;

  bool operator()(double s, const State& y, State& dy) const {
    const double p = y[0], mu = y[1];
    if (form == FluxForm::exact) {
      const double q = mu * std::exp(-s);
      if (!(std::abs(q) < 1.0)) return false;
      dy[0] = mu / std::sqrt(1.0 - q * q);
    } else {
      dy[0] = mu;
    }
    dy[1] = K * std::exp(2.0 * s - 2.0 * kSqrt2 * p) - forcing * std::exp(-s);
    return std::isfinite(dy[0]) && std::isfinite(dy[1]);
  }
};

double slope_from_flux(double mu, double r, FluxForm form) {
  return form == FluxForm::exact ? mu / std::sqrt((r - mu) * (r + mu)) : mu / r;
}

double flux_from_slope(double dp, double r, FluxForm form) {
  return form == FluxForm::exact ? r * dp / std::sqrt(1.0 + dp * dp) : r * dp;
}

// Advances until s_end or until `stop` returns true after an accepted step.
template <class OnStep>
void advance(Solver& solver, const FluxField& field, double s_end, const StepControl& control,
             OnStep&& on_step) {
  long steps = 0;
  while (solver.t() < s_end) {
    if (++steps > control.max_steps) throw StiffnessError("reduced: step budget exhausted", std::exp(solver.t()));
    const double t_before = solver.t();
    const auto status = solver.step(field, s_end - solver.t());
    if (status == ode::StepStatus::accepted) {
      if (on_step(t_before)) return;
      continue;
    }
    if (solver.step_size() < control.min_step) {
      const double r = std::exp(solver.t());
      std::ostringstream msg;
      msg << "reduced: " << (status == ode::StepStatus::invalid ? "vertical tangent (mu >= r)" : "step underflow")
          << " near r = " << r;
      if (status == ode::StepStatus::invalid) throw BlowUpError(msg.str(), r);
      throw StiffnessError(msg.str(), r);
    }
  }
}

}  // namespace

double toda_explicit(double eps, double r, int order) {
  if (!std::isfinite(eps) || !std::isfinite(r) || !(eps > 0.0) || r < 0.0)
    throw DomainError("toda_explicit: need finite eps > 0 and r >= 0");
  if (order < 0 || order > 2) throw DomainError("toda_explicit: order must be 0, 1 or 2");
  return closed_form::toda_jet(constants().toda_a(), eps, r)[order];
}

TodaResidual toda_residual(const std::function<std::array<double, 3>(double)>& q, double r) {
  if (!std::isfinite(r) || r < 0.0) throw DomainError("toda_residual: need finite r >= 0");
  const double c0 = constants().c0(), c1 = constants().c1();
  const auto v = q(r);
  TodaResidual out;
  if (r == 0.0) {
    out.axis_limit = true;
    out.value = 2.0 * c0 * v[2] - c1 * std::exp(-2.0 * kSqrt2 * v[0]);
  } else {
    out.value = c0 * v[2] + c0 * v[1] / r - c1 * std::exp(-2.0 * kSqrt2 * v[0]);
  }
  return out;
}

NodalCurve catenoid_curve(double k, double b) { return NodalCurve::catenoid(k, b); }

double reduced_flux_rhs(double p, double /*dp*/, double r, InteractionMode /*mode*/) {
  if (!(r > 0.0)) throw DomainError("reduced_flux_rhs: need r > 0");
  return constants().c1() / constants().c0() * r * std::exp(-2.0 * kSqrt2 * p);
}

ReducedTrajectory ReducedTrajectory::from_curve(const NodalCurve& curve, const std::vector<double>& r) {
  ReducedTrajectory t;
  for (double x : r) {
    const auto j = curve.jet(x);
    t.r.push_back(x);
    t.p.push_back(j[0]);
    t.dp.push_back(j[1]);
    t.mu.push_back(flux_from_slope(j[1], x, FluxForm::exact));
  }
  return t;
}

ReducedTrajectory integrate_reduced(double p0, double slope0, double r0, double r_end,
                                    const StepControl& control) {
  if (!std::isfinite(p0) || !std::isfinite(slope0) || !std::isfinite(r0) || !std::isfinite(r_end))
    throw DomainError("integrate_reduced: non-finite input");
  if (!(r0 > 0.0) || !(r_end > r0) || !(p0 > 0.0))
    throw DomainError("integrate_reduced: need r0 > 0, r_end > r0 and p0 > 0");

  const FluxField field{constants().c1() / constants().c0(), control.forcing, control.form};
  const double s0 = std::log(r0), s_end = std::log(r_end);
  const double mu0 = flux_from_slope(slope0, r0, control.form);
  if (control.form == FluxForm::exact && !(std::abs(mu0) < r0))
    throw BlowUpError("integrate_reduced: initial flux reaches r", r0);

  ReducedTrajectory traj;
  traj.rel_tol = control.rel_tol;
  traj.abs_tol = control.abs_tol;
  auto record = [&](double s, const State& y) {
    const double r = std::exp(s);
    traj.r.push_back(r);
    traj.p.push_back(y[0]);
    traj.mu.push_back(y[1]);
    traj.dp.push_back(slope_from_flux(y[1], r, control.form));
  };
  record(s0, {p0, mu0});

  Solver solver(s0, {p0, mu0}, control.initial_step, {control.rel_tol, control.abs_tol});
  int next_out = 1;
  advance(solver, field, s_end, control, [&](double) {
    ++traj.accepted_steps;
    if (control.output_spacing > 0.0) {
      for (;;) {
        const double s = s0 + next_out * control.output_spacing;
        if (s > solver.t() || s >= s_end) break;
        record(s, solver.interpolate(s));
        ++next_out;
      }
      if (solver.t() >= s_end) record(s_end, solver.y());
    } else {
      record(solver.t(), solver.y());
    }
    return false;
  });
  return traj;
}

ProbeTrial probe_trial(double p0, double slope0, const ProbeOptions& options) {
  ProbeTrial trial;
  trial.p0 = p0;
  trial.slope0 = slope0;
  const FluxField field{constants().c1() / constants().c0(), options.forcing, FluxForm::exact};
  const double K = field.K;
  const double s0 = std::log(options.r0);
  const double s_min = std::log(options.r_horizon);
  trial.mu0 = flux_from_slope(slope0, options.r0, FluxForm::exact);
  StepControl control;
  try {
    Solver solver(s0, {p0, trial.mu0}, control.initial_step, {control.rel_tol, control.abs_tol});
    advance(solver, field, options.log_r_cap, control, [&](double) {
      const double s = solver.t();
      const double p = solver.y()[0], mu = solver.y()[1];
      if (s < s_min || !(mu > 1.0 / kSqrt2)) return false;
      // remaining flux gain: exp(2s - 2 sqrt2 p) decays at rate 2 sqrt2 mu - 2
      const double gain =
          K * std::exp(2.0 * s - 2.0 * kSqrt2 * p) / (2.0 * kSqrt2 * mu - 2.0) + std::abs(options.forcing) * std::exp(-s);
      return gain < options.gain_tolerance;
    });
    trial.final_mu = solver.y()[1];
    trial.final_log_r = solver.t();
    trial.interaction_reached = solver.t() < options.log_r_cap;
  } catch (const Error& e) {
    trial.failed = true;
    trial.failure = e.what();
  }
  return trial;
}

int worker_count(int requested, int work) {
  int n = requested > 0 ? requested : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("TWO_END_LAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return std::max(1, std::min(n, work));
}

ProbeReport nonexistence_probe(double k_target, const ProbeOptions& options) {
  if (!(k_target > 0.0) || k_target > std::sqrt(0.5) + 1e-12)
    throw DomainError("nonexistence_probe: k_target must lie in (0, sqrt2/2]");
  if (options.trials < 1) throw DomainError("nonexistence_probe: need at least one trial");

  ProbeReport report;
  report.k_target = k_target;
  report.forcing = options.forcing;
  report.seed = options.seed;
  report.trials.resize(options.trials);

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> log_p0(std::log(options.p0_min), std::log(options.p0_max));
  std::uniform_real_distribution<double> slope(0.0, k_target / options.r0);
  for (int i = 0; i < options.trials; ++i) {
    report.trials[i].index = i;
    report.trials[i].p0 = std::exp(log_p0(rng));
    report.trials[i].slope0 = slope(rng);
  }

  std::atomic<int> next{0};
  auto work = [&] {
    for (int i; (i = next.fetch_add(1)) < options.trials;) {
      ProbeTrial t = probe_trial(report.trials[i].p0, report.trials[i].slope0, options);
      t.index = i;
      report.trials[i] = std::move(t);
    }
  };
  const int n = worker_count(options.threads, options.trials);
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  bool any = false;
  report.min_final_mu = std::numeric_limits<double>::infinity();
  for (const auto& t : report.trials) {
    if (t.failed) {
      ++report.failures;
    } else if (!t.interaction_reached) {
      ++report.undecided;
    } else {
      any = true;
      report.min_final_mu = std::min(report.min_final_mu, t.final_mu);
    }
  }
  report.delta_obs = any ? report.min_final_mu - 1.0 / kSqrt2 : 0.0;
  if (!any) report.min_final_mu = 0.0;
  report.no_two_end_regime = any && report.failures == 0 && report.undecided == 0 && report.delta_obs > 0.0;
  return report;
}

JacobiFields jacobi_fields(double z) {
  JacobiFields j;
  const double sh = std::sinh(z), ch = std::cosh(z);
  j.xi1 = sh;
  j.xi2 = -ch + z * sh;
  j.dxi1 = ch;
  j.dxi2 = z * ch;
  j.wronskian = j.xi1 * j.dxi2 - j.xi2 * j.dxi1;
  return j;
}

double catenoid_match_error(const ReducedTrajectory& traj, double eps,
                            std::optional<std::array<double, 2>> window) {
  if (!(eps > 0.0)) throw DomainError("catenoid_match_error: need eps > 0");
  double worst = -1.0;
  for (std::size_t i = 0; i < traj.r.size(); ++i) {
    const double z = traj.p[i];
    if (window && (z < (*window)[0] || z > (*window)[1])) continue;
    worst = std::max(worst, std::abs(traj.r[i] - std::cosh(eps * z) / eps));
  }
  if (worst < 0.0) throw DomainError("catenoid_match_error: empty matching window");
  return worst;
}

void write_trajectory_csv(std::ostream& out, const ReducedTrajectory& traj) {
  const auto prec = out.precision(12);
  out << "r,p,dp,mu\n";
  for (std::size_t i = 0; i < traj.r.size(); ++i)
    out << traj.r[i] << ',' << traj.p[i] << ',' << traj.dp[i] << ',' << traj.mu[i] << '\n';
  out.precision(prec);
}

}  // namespace twoend::reduced
