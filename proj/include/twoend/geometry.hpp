#pragma once

#include <array>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "twoend/grid.hpp"
#include "twoend/spline.hpp"

namespace twoend {

/// Planar curve z = f(r) in the upper (r, z) half-plane: a catenoidal end,
/// a scaled Toda profile, or a spline through sampled points. Every kind may
/// carry a constant vertical offset.
class NodalCurve {
 public:
  enum class Kind { catenoid, toda, sampled };

  /// f(r) = k arccosh(r / k) + b for r >= k.
  static NodalCurve catenoid(double k, double b);
  /// f = q_eps with the Toda constant a (defaults to the profile value).
  static NodalCurve toda(double eps);
  static NodalCurve toda(double eps, double a);
  static NodalCurve sampled(std::vector<double> r, std::vector<double> f);

  /// Same curve raised by dz.
  NodalCurve shifted(double dz) const;

  Kind kind() const noexcept { return kind_; }
  double r_min() const noexcept { return r_min_; }
  double r_max() const noexcept { return r_max_; }
  double k() const noexcept { return k_; }
  double b() const noexcept { return b_; }
  double eps() const noexcept { return eps_; }
  double offset() const noexcept { return dz_; }

  /// f, f', f'', f''' at r. Throws DomainError outside [r_min, r_max] or on
  /// non-finite input; a catenoid evaluated at r = k has no finite slope.
  std::array<double, 4> jet(double r) const;
  double value(double r) const { return jet(r)[0]; }
  double d1(double r) const { return jet(r)[1]; }
  double d2(double r) const { return jet(r)[2]; }

  /// Polyline approximation (r, z) from the lower end of the domain up to
  /// r_end, spaced by roughly `spacing` in arclength. Catenoids are sampled
  /// through their waist in the z-parametrisation.
  std::vector<std::array<double, 2>> polyline(double r_end, double spacing) const;

  const CubicSpline& spline() const noexcept { return spline_; }

 private:
  Kind kind_ = Kind::sampled;
  double k_ = 0.0, b_ = 0.0, eps_ = 0.0, a_ = 0.0, dz_ = 0.0;
  double r_min_ = 0.0;
  double r_max_ = std::numeric_limits<double>::infinity();
  CubicSpline spline_;
};

/// Pulled-back planar Laplacian: d_rr + d_zz = a_rr d_r1r1 + a_zz d_z1z1 +
/// a_r d_r1 + a_z d_z1.
struct LaplacianCoeffs {
  double a_rr = 0.0, a_zz = 1.0, a_r = 0.0, a_z = 0.0;
};

struct MetricFactors {
  double A = 1.0, B = 1.0;
};

/// Quintic smoothstep, 0 for x <= 0 and 1 for x >= 1, C2 at both ends.
double smoothstep(double x);

/// Fermi chart X(r1, z1) = (r1, f(r1)) + z1 n(r1) around a nodal curve, with
/// n = (-f', 1) / sqrt(1 + f'^2) the upward normal. The validity radius d(r1)
/// is tabulated at construction over [curve.r_min(), r_end].
class FermiChart {
 public:
  struct Options {
    double cutoff_width = 2.0;    // transition width of the cutoff eta
    double separation_factor = 3.0;
    double focal_window = 5.0;    // half-width of the curvature window
    double table_spacing = 0.05;
  };

  FermiChart(NodalCurve curve, double r_end);
  FermiChart(NodalCurve curve, double r_end, Options options);

  const NodalCurve& curve() const noexcept { return curve_; }
  const Options& options() const noexcept { return options_; }
  double r_begin() const noexcept { return r_begin_; }
  double r_end() const noexcept { return r_end_; }

  /// Validity radius d(r1); Lipschitz constant at most 1/2.
  double half_width(double r1) const;
  /// eta(r1, z1) = S((d(r1) - |z1|) / w).
  double cutoff(double r1, double z1) const;
  /// Smallest tabulated r1 from which d(r1) >= width for the rest of the
  /// chart, or nullopt.
  std::optional<double> first_wide(double width) const;

  std::array<double, 2> forward(double r1, double z1) const;
  /// Normal projection by Newton on r1 from the initial guess r1 = r.
  /// Throws ChartDomainError when the iteration fails, the projection is
  /// not a local distance minimum, or the result lies outside the region.
  std::array<double, 2> inverse(double r, double z) const;
  /// Same, without the validity-radius check; nullopt on failure.
  std::optional<std::array<double, 2>> project(double r, double z) const;

  MetricFactors metric(double r1, double z1) const;
  LaplacianCoeffs laplacian(double r1, double z1) const;

  /// Round-trips `samples` x `samples` points of the validity region through
  /// forward and inverse; returns the largest coordinate error.
  double injectivity_defect(int samples) const;

 private:
  void check_region(double r1, double z1) const;

  NodalCurve curve_;
  Options options_;
  double r_begin_ = 0.0, r_end_ = 0.0, step_ = 0.0;
  std::vector<double> width_;
};

/// Upper nodal curve of a field: in each column the lowest z where u turns
/// from negative to non-negative, located by linear interpolation. The window
/// defaults to the first column with a crossing through the last column.
/// Throws ExtractionError listing columns without a crossing.
NodalCurve nodal_curve_from_field(const ScalarField& field);
NodalCurve nodal_curve_from_field(const ScalarField& field, double r_from, double r_to);

/// CSV with header `r,f,fp,fpp`.
void write_curve_csv(std::ostream& out, const NodalCurve& curve, const std::vector<double>& r);

}  // namespace twoend
