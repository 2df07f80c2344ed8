#include "twoend/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <optional>
#include <sstream>

#include "twoend/errors.hpp"

namespace twoend::continuation {

namespace {

using Vec = Eigen::VectorXd;
using pde::DiscreteSystem;

ScalarField with_closure(ScalarField u, double lambda, double b) {
  pde::apply_far_field(u, {lambda, closure_offset(lambda, b)});
  return u;
}

struct Correction {
  bool ok = false;
  ScalarField field;
  int iterations = 0;
};

struct Tangent {
  Vec U;
  double lambda = 0.0;
};

class Tracer {
 public:
  Tracer(const AxiGrid& grid, BottomBoundary bottom, double b, const Controls& controls)
      : sys_(grid, bottom), b_(b), controls_(controls) {
    metric_ = sys_.weights() * (grid.h_r() * grid.h_z());
  }

  double norm(const Vec& dU, double dl) const { return std::sqrt(dU.dot(metric_.cwiseProduct(dU)) + dl * dl); }

  // Bordered Newton corrector on [G(U, lambda); N(U, lambda)] = 0 with
  // N = t_U . M (U - U_last) + t_l (lambda - lambda_last) - ds.
  Correction correct(ScalarField u, double lambda, const Tangent& t, const Vec& U_last, double lambda_last,
                     double ds, int& singular_warnings) {
    Correction out;
    u = with_closure(std::move(u), lambda, b_);
    const double e0 = pde::residual_norm(u);
    const Vec Mt = metric_.cwiseProduct(t.U);
    for (int it = 1; it <= controls_.max_corrector; ++it) {
      try {
        sys_.factorize(u);
      } catch (const ConvergenceError&) {
        return out;
      }
      if (sys_.condition_estimate() > controls_.singular_condition) {
        ++singular_warnings;
        return out;
      }
      const double delta = 1e-6 * std::max(1.0, lambda);
      const Vec G = sys_.weighted_residual(u);
      const Vec G_l = (sys_.weighted_residual(with_closure(u, lambda + delta, b_)) -
                       sys_.weighted_residual(with_closure(u, lambda - delta, b_))) /
                      (2.0 * delta);
      const double N = Mt.dot(sys_.gather(u) - U_last) + t.lambda * (lambda - lambda_last) - ds;
      Vec a, bb;
      try {
        a = sys_.solve(-G);
        bb = sys_.solve(-G_l);
      } catch (const ConvergenceError&) {
        return out;
      }
      const double den = Mt.dot(bb) + t.lambda;
      if (!(std::abs(den) > 1e-14)) {
        ++singular_warnings;
        return out;
      }
      const double dl = (-N - Mt.dot(a)) / den;
      sys_.scatter_add(a + dl * bb, 1.0, u);
      lambda += dl;
      u = with_closure(std::move(u), lambda, b_);
      const double e = pde::residual_norm(u);
      if (!std::isfinite(e) || e > 10.0 * std::max(e0, controls_.tol)) return out;
      if (e < controls_.tol) {
        out.ok = true;
        out.field = std::move(u);
        out.iterations = it;
        return out;
      }
    }
    return out;
  }

  DiscreteSystem& sys() { return sys_; }

 private:
  DiscreteSystem sys_;
  double b_;
  Controls controls_;
  Vec metric_;
};

double max_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t q = 0; q < a.values.size(); ++q) m = std::max(m, std::abs(a.values[q] - b.values[q]));
  return m;
}

}  // namespace

std::string to_string(Termination t) {
  switch (t) {
    case Termination::k_floor_reached: return "k_floor_reached";
    case Termination::k_ceiling_reached: return "k_ceiling_reached";
    case Termination::step_underflow: return "step_underflow";
    case Termination::max_points: return "max_points";
    case Termination::nonconvergence: return "nonconvergence";
  }
  return "unknown";
}

std::string to_string(EndpointClass c) {
  switch (c) {
    case EndpointClass::toda_like: return "toda_like";
    case EndpointClass::catenoid_like: return "catenoid_like";
    case EndpointClass::interior: return "interior";
  }
  return "unknown";
}

double closure_offset(double lambda, double b) { return lambda * std::log(2.0 / lambda) + b; }

BranchPoint make_point(ScalarField field, int newton_iters) {
  BranchPoint p;
  const AxiGrid& g = field.grid;
  p.lambda = field.far_field.k;
  p.newton_iters = newton_iters;
  p.residual_norm = pde::residual_norm(field);
  const NodalCurve curve = nodal_curve_from_field(field);
  const pde::GrowthFit fit = pde::growth_rate_fit(curve, 0.5 * g.R, g.R);
  p.k = fit.k;
  p.c = fit.c;
  p.apex = pde::locate_apex(field);
  p.monotone = pde::monotonicity_check(field).passes;
  for (const auto& rect : pde::nested_flux_rects(g)) {
    const auto f = pde::balancing_flux(field, rect);
    const double scale = std::abs(f.top) + std::abs(f.bottom) + std::abs(f.left) + std::abs(f.right);
    p.flux_relative = std::max(p.flux_relative, scale > 0.0 ? std::abs(f.value) / scale : 0.0);
  }
  p.field = std::make_shared<const ScalarField>(std::move(field));
  return p;
}

SolutionBranch trace_branch(const BranchPoint& start, int direction, const Controls& controls) {
  if (!start.field) throw DomainError("trace_branch: start point has no field");
  if (direction != 1 && direction != -1) throw DomainError("trace_branch: direction must be +1 or -1");
  const ScalarField& u0 = *start.field;
  SolutionBranch br;
  const double lambda0 = u0.far_field.k;
  br.b = u0.far_field.c - lambda0 * std::log(2.0 / lambda0);
  br.points.push_back(start);
  br.points.back().s = 0.0;

  Tracer tracer(u0.grid, u0.bottom, br.b, controls);
  DiscreteSystem& sys = tracer.sys();
  pde::NewtonOptions nopt;
  nopt.tol = controls.tol;

  // first step in the natural parameter
  double dk = controls.first_dk;
  std::optional<pde::NewtonResult> first;
  for (int attempt = 0; attempt <= controls.max_halvings && !first; ++attempt, dk *= 0.5) {
    try {
      auto res = pde::newton_solve(with_closure(u0, lambda0 + direction * dk, br.b), sys, nopt);
      if (max_diff(res.field, u0) <= controls.field_step_bound) first = std::move(res);
    } catch (const ConvergenceError&) {
    }
  }
  if (!first)
    throw ConvergenceError("trace_branch: cannot start, first corrector failed", ConvergenceError::Kind::max_iterations, {});
  {
    BranchPoint p = make_point(std::move(first->field), first->iterations);
    p.s = tracer.norm(sys.gather(*p.field) - sys.gather(u0), p.lambda - lambda0);
    br.points.push_back(std::move(p));
  }
  double ds = br.points.back().s;
  const double ds_min = controls.ds_min * ds;

  bool done = false;
  while (!done) {
    const BranchPoint& last = br.points.back();
    const double slack = 0.01 * controls.max_dk;
    if (direction < 0 && (last.lambda <= controls.k_floor + slack || last.k <= controls.k_floor)) {
      br.reason = Termination::k_floor_reached;
      break;
    }
    if (direction > 0 && last.lambda >= controls.k_ceiling - slack) {
      br.reason = Termination::k_ceiling_reached;
      break;
    }
    if (static_cast<int>(br.points.size()) >= controls.max_points) {
      br.reason = Termination::max_points;
      break;
    }
    const BranchPoint& prev = br.points[br.points.size() - 2];
    const Vec U_last = sys.gather(*last.field);
    Tangent t;
    t.U = U_last - sys.gather(*prev.field);
    t.lambda = last.lambda - prev.lambda;
    const double len = tracer.norm(t.U, t.lambda);
    t.U /= len;
    t.lambda /= len;

    if (std::abs(t.lambda) * ds > controls.max_dk) ds = controls.max_dk / std::abs(t.lambda);
    if (direction < 0 && t.lambda < 0.0 && last.lambda + ds * t.lambda < controls.k_floor)
      ds = std::max((last.lambda - controls.k_floor) / -t.lambda, ds_min);
    if (direction > 0 && t.lambda > 0.0 && last.lambda + ds * t.lambda > controls.k_ceiling)
      ds = std::max((controls.k_ceiling - last.lambda) / t.lambda, ds_min);

    Correction corr;
    for (int halving = 0;; ++halving) {
      ScalarField pred = *last.field;
      sys.scatter_add(t.U, ds, pred);
      corr = tracer.correct(std::move(pred), last.lambda + ds * t.lambda, t, U_last, last.lambda, ds,
                            br.singular_warnings);
      if (corr.ok && max_diff(corr.field, *last.field) <= controls.field_step_bound) break;
      corr.ok = false;
      ++br.rejected_steps;
      if (halving >= controls.max_halvings) {
        br.reason = Termination::nonconvergence;
        done = true;
        break;
      }
      ds *= 0.5;
      if (ds < ds_min) {
        br.reason = Termination::step_underflow;
        done = true;
        break;
      }
    }
    if (!corr.ok) break;
    BranchPoint p = make_point(std::move(corr.field), corr.iterations);
    p.s = last.s + ds;
    br.points.push_back(std::move(p));
    if (corr.iterations <= controls.fast_corrector)
      ds *= controls.ds_growth;
    else if (corr.iterations >= controls.slow_corrector)
      ds *= 0.7;
  }
  return br;
}

Classification classify_endpoint(const BranchPoint& point, double threshold) {
  Classification out;
  const double P = point.apex.distance;
  if (!(P > threshold)) return out;
  if (point.apex.axis == pde::ApexAxis::z_axis) {
    if (point.k < std::numbers::sqrt2 + 0.3) {
      out.kind = EndpointClass::toda_like;
    } else {
      std::ostringstream msg;
      msg << "apex on z-axis at " << P << " but growth rate " << point.k << " is not near sqrt2";
      out.warning = msg.str();
    }
    return out;
  }
  if (!(std::abs(point.k - P) / point.k < 0.2)) {
    std::ostringstream msg;
    msg << "apex on r-axis at " << P << " but growth rate " << point.k << " differs by more than 20%";
    out.warning = msg.str();
    return out;
  }
  if (!point.field) {
    out.kind = EndpointClass::catenoid_like;
    out.warning = "no field snapshot: catenoid proximity not checked";
    return out;
  }
  const NodalCurve curve = nodal_curve_from_field(*point.field);
  std::vector<double> rs, dev;
  for (double r : curve.spline().knots())
    if (r > P) {
      rs.push_back(r);
      dev.push_back(curve.value(r) - P * std::acosh(r / P));
    }
  if (rs.empty()) {
    out.warning = "nodal curve has no samples beyond the apex";
    return out;
  }
  double b = 0.0;
  for (double d : dev) b += d;
  b /= static_cast<double>(dev.size());
  for (double d : dev) out.catenoid_deviation = std::max(out.catenoid_deviation, std::abs(d - b));
  if (out.catenoid_deviation <= 6.0 / P) {
    out.kind = EndpointClass::catenoid_like;
  } else {
    std::ostringstream msg;
    msg << "nodal curve deviates from the catenoid by " << out.catenoid_deviation << " > 6/P";
    out.warning = msg.str();
  }
  return out;
}

void write_branch_csv(std::ostream& out, const SolutionBranch& branch) {
  const auto prec = out.precision(12);
  out << "s,k,c,apex_axis,apex_dist,newton_iters,residual_norm\n";
  for (const auto& p : branch.points)
    out << p.s << ',' << p.k << ',' << p.c << ',' << pde::to_string(p.apex.axis) << ',' << p.apex.distance << ','
        << p.newton_iters << ',' << p.residual_norm << '\n';
  out.precision(prec);
}

}  // namespace twoend::continuation
