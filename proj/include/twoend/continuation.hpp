#pragma once

// Pseudo-arclength continuation of two-end solutions in the far-field growth
// parameter. The Dirichlet data on r = R, z = Z are the composite profile
// with k = lambda and offset c(lambda) = lambda ln(2 / lambda) + b, the
// catenoidal asymptote, with b fixed by the start point.

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "twoend/pde.hpp"

namespace twoend::continuation {

struct BranchPoint {
  std::shared_ptr<const ScalarField> field;
  double lambda = 0.0;      // far-field k imposed on the boundary
  double k = 0.0;           // growth rate fitted to the nodal curve
  double c = 0.0;           // fitted offset
  pde::Apex apex;
  double s = 0.0;           // arclength
  int newton_iters = 0;
  double residual_norm = 0.0;
  bool monotone = false;
  double flux_relative = 0.0;  // max |flux| / sum |face terms| over nested rectangles
};

/// Converged solution with diagnostics filled in; the growth rate is fitted
/// over r in [R/2, R].
BranchPoint make_point(ScalarField field, int newton_iters);

struct Controls {
  double first_dk = 0.25;       // natural-parameter first step
  double max_dk = 0.3;          // cap on |delta lambda| per step
  double ds_min = 1e-3;         // relative to the first arclength step
  double ds_growth = 1.5;
  int fast_corrector = 4;       // grow the step at or below this count
  int slow_corrector = 7;       // shrink it at or above this count
  double k_floor = 1.5;         // downward branches stop here
  double k_ceiling = 10.0;      // upward branches stop here
  int max_points = 40;          // including the start point
  int max_corrector = 8;
  int max_halvings = 4;
  double tol = 1e-8;
  double field_step_bound = 1.0;  // max-norm change between consecutive points
  double singular_condition = 1e12;
};

enum class Termination { k_floor_reached, k_ceiling_reached, step_underflow, max_points, nonconvergence };
std::string to_string(Termination t);

struct SolutionBranch {
  std::vector<BranchPoint> points;
  Termination reason = Termination::max_points;
  int singular_warnings = 0;
  int rejected_steps = 0;
  double b = 0.0;  // offset constant of the boundary closure
};

/// Offset of the boundary closure at lambda.
double closure_offset(double lambda, double b);

/// Traces the branch from a converged start in direction +1 (larger k) or
/// -1. Throws ConvergenceError when the first corrector fails.
SolutionBranch trace_branch(const BranchPoint& start, int direction, const Controls& controls = {});

enum class EndpointClass { toda_like, catenoid_like, interior };
std::string to_string(EndpointClass c);

struct Classification {
  EndpointClass kind = EndpointClass::interior;
  std::string warning;
  double catenoid_deviation = 0.0;  // max |f - (P acosh(r / P) + b)| when tested
};

/// toda_like: apex on the z-axis beyond the threshold, requiring
/// k < sqrt2 + 0.3. catenoid_like: apex on the r-axis beyond the threshold,
/// requiring |k - P| / k < 0.2 and the nodal curve within 6 / P of the
/// fitted catenoid. Failed requirements downgrade to interior with a warning.
Classification classify_endpoint(const BranchPoint& point, double threshold = 6.0);

/// CSV with header `s,k,c,apex_axis,apex_dist,newton_iters,residual_norm`.
void write_branch_csv(std::ostream& out, const SolutionBranch& branch);

}  // namespace twoend::continuation
