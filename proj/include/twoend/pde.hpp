#pragma once

// Axisymmetric Allen-Cahn problem u_rr + u_r / r + u_zz + u - u^3 = 0 on
// the half-strip [0, R] x [0, Z], even in z, with composite far-field
// Dirichlet data on r = R and z = Z.

#include <Eigen/Sparse>
#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "twoend/geometry.hpp"
#include "twoend/grid.hpp"

namespace twoend::pde {

/// H(z - k ln r - c) + H(-z - k ln r - c) + 1, with r clamped to r_bc_min.
double far_field_bc(double k, double c, double r, double z, double r_bc_min = 1.0);

/// Writes far-field data into every Dirichlet node and records (k, c).
void apply_far_field(ScalarField& field, FarField ff);

/// Far-field parameters matched to a curve at r = R: the exact asymptote for
/// catenoids, the tangent in ln r otherwise.
FarField far_field_for(const NodalCurve& curve, double R);

struct AnsatzOptions {
  double core_spacing = 0.05;   // polyline spacing of the nodal set
  double distance_cap = 20.0;   // H(d) is +-1 to machine precision beyond
  double outer_width = 6.0;     // chart half-width required by the outer region
};

/// Pointwise approximate solution: in the outer region (r >= r0, where the chart
/// half-width exceeds outer_width) the Fermi construction
/// ubar = H1(r, z) + H1(r, -z) + 1 with H1 = eta H(z1) + (1 - eta) sign;
/// near the waist sigma H(dist) to the symmetric nodal set. The two are
/// blended in r over the cutoff width.
class AnsatzModel {
 public:
  AnsatzModel(const NodalCurve& curve, const FermiChart& chart, double r_cover,
              const AnsatzOptions& options = {});
  ~AnsatzModel();
  AnsatzModel(AnsatzModel&&) noexcept;

  /// ubar at any (r, z) with 0 <= r <= r_cover; even in z.
  double value(double r, double z) const;
  /// Blend weight of the outer construction at r.
  double outer_weight(double r) const;
  /// Start of the blend (infinity when there is no outer region).
  double r0() const noexcept { return r0_; }
  double blend_width() const noexcept { return width_; }

 private:
  struct Index;
  double outer(double r, double z) const;
  double fermi_term(double r, double z) const;
  double core(double r, double z) const;

  NodalCurve curve_;
  FermiChart chart_;
  AnsatzOptions options_;
  double r0_, width_;
  std::unique_ptr<Index> index_;
};

struct Ansatz {
  ScalarField field;
  double r0 = 0.0;  // start of the blend
  double blend_width = 0.0;
};

/// Throws ConstructionError when the chart cannot cover outer nodes or the
/// curve leaves the grid through z = Z.
Ansatz build_ansatz(const NodalCurve& curve, const FermiChart& chart, const AxiGrid& grid,
                    const AnsatzOptions& options = {});
ScalarField build_approximate_solution(const NodalCurve& curve, const FermiChart& chart, const AxiGrid& grid);

/// Discrete Allen-Cahn residual (zero at Dirichlet nodes). The axis uses the
/// limit 2 u_rr; Neumann edges use mirrored ghost values.
ScalarField residual(const ScalarField& field);
/// Max-norm of the residual over the unknown nodes.
double residual_norm(const ScalarField& field);

/// Unknowns, weighted residual, symmetric weighted Jacobian and its sparse
/// LDL^T factorisation for one grid layout. Row (i, j) is scaled by
/// w_i v_j, with w_0 = h_r / 8, w_i = r_i, v_0 = 1/2 (even bottom), v_j = 1,
/// which makes the Jacobian symmetric.
class DiscreteSystem {
 public:
  DiscreteSystem(const AxiGrid& grid, BottomBoundary bottom);
  ~DiscreteSystem();
  DiscreteSystem(DiscreteSystem&&) noexcept;
  DiscreteSystem& operator=(DiscreteSystem&&) noexcept;

  const AxiGrid& grid() const noexcept { return grid_; }
  BottomBoundary bottom() const noexcept { return bottom_; }
  int unknowns() const noexcept { return static_cast<int>(nodes_.size()); }
  /// Unknown index of node (i, j), or -1 for Dirichlet nodes.
  int unknown(int i, int j) const { return index_[grid_.index(i, j)]; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }

  Eigen::VectorXd weighted_residual(const ScalarField& u) const;
  Eigen::VectorXd gather(const ScalarField& u) const;
  void scatter_add(const Eigen::VectorXd& delta, double scale, ScalarField& u) const;

  /// Assembles and factorises the weighted Jacobian at u. Throws
  /// ConvergenceError(linear_solve) when the factorisation breaks down.
  void factorize(const ScalarField& u);
  /// Solves J x = rhs with the last factorisation; verifies the relative
  /// residual (falls back to sparse LU when LDL^T is inaccurate).
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  /// max|D| / min|D| of the LDL^T factor.
  double condition_estimate() const;
  const Eigen::SparseMatrix<double>& jacobian() const noexcept { return jac_; }

 private:
  struct Solver;
  AxiGrid grid_;
  BottomBoundary bottom_;
  std::vector<int> index_;
  std::vector<std::array<int, 2>> nodes_;
  Eigen::VectorXd weights_;
  Eigen::SparseMatrix<double> lap_;  // weighted linear part
  Eigen::SparseMatrix<double> jac_;
  std::vector<int> diag_pos_;
  std::unique_ptr<Solver> solver_;
};

struct NewtonOptions {
  double tol = 1e-8;
  int max_iter = 30;
  int max_halvings = 8;
  double divergence_factor = 10.0;
};

struct NewtonResult {
  ScalarField field;
  std::vector<double> history;  // residual max-norm per iterate, initial first
  int iterations = 0;
  double residual_norm = 0.0;
};

/// Damped Newton iteration; Dirichlet values are held fixed. Throws
/// ConvergenceError (max_iterations or divergence) with the history.
NewtonResult newton_solve(const ScalarField& initial, const NewtonOptions& options = {});
NewtonResult newton_solve(const ScalarField& initial, DiscreteSystem& system, const NewtonOptions& options);

struct FluxRect {
  double r_a = 0.0, r_b = 0.0, z_top = 0.0;
};

struct FluxResult {
  double value = 0.0;
  double top = 0.0, bottom = 0.0, left = 0.0, right = 0.0;
  double measure = 0.0;        // 2 pi r weighted area of the closed boundary
  bool contaminated = false;   // rectangle touches the Dirichlet boundary
  FluxRect snapped;            // rectangle after snapping to grid lines
};

/// Balancing flux of Y = (|grad u|^2 / 2 + F(u)) e_z - u_z grad u through the
/// boundary of the solid of revolution {r_a <= r <= r_b, 0 <= z <= z_top},
/// with u_z = 0 on z = 0 by evenness. Vanishes for exact solutions.
FluxResult balancing_flux(const ScalarField& field, const FluxRect& rect);

/// Three nested rectangles crossing the interface, well inside the grid.
std::vector<FluxRect> nested_flux_rects(const AxiGrid& grid);

struct MonotonicityReport {
  bool passes = true;
  double tol = 0.0;
  double max_ur = 0.0;       // largest u_r over r > 0 (should be <= tol)
  double min_uz = 0.0;       // smallest u_z over z > 0 (should be >= -tol)
  int violations = 0;
  std::vector<std::array<double, 2>> located;  // first few violating nodes
};

/// Central-difference signs of u_r and u_z on interior nodes with
/// tol = 10 ||residual|| + 1e-8 unless given.
MonotonicityReport monotonicity_check(const ScalarField& field, std::optional<double> tol = std::nullopt);

struct GrowthFit {
  double k = 0.0, c = 0.0, rms = 0.0;
  int samples = 0;
  bool short_window = false;  // less than one decade
};

/// Least squares of f(r) against k ln r + c over [r_a, r_b]: spline knots for
/// sampled curves, 401 uniform samples otherwise.
GrowthFit growth_rate_fit(const NodalCurve& curve, double r_a, double r_b);

enum class ApexAxis { z_axis, r_axis };

struct Apex {
  ApexAxis axis = ApexAxis::r_axis;
  double distance = 0.0;
};

/// Intersection of the nodal set with the coordinate axes: on the z-axis when
/// u(0, 0) < 0, otherwise on the r-axis. Throws ExtractionError if absent.
Apex locate_apex(const ScalarField& field);
std::string to_string(ApexAxis axis);

struct DecompositionOptions {
  double slice_spacing = 0.5;
  double max_half_width = 10.0;
  int slice_points = 401;
  std::optional<double> r1_from, r1_to;
};

struct InterfaceDecomposition {
  std::vector<double> r1, h, phi_norm, orthogonality;
  std::vector<int> iterations;
};

/// Per slice r1, the modulation h solving
///   int (u - ubar_h)(X(r1, z1)) eta+ H'(z1 - h) dz1 = 0,
/// with ubar_h the ansatz whose upper Fermi term is shifted to H(z1 - h),
/// and phi = u - ubar_h. Throws DecompositionError on a failed slice.
InterfaceDecomposition decompose_interface(const ScalarField& field, const NodalCurve& curve,
                                           const FermiChart& chart, const DecompositionOptions& options = {});
InterfaceDecomposition decompose_interface(const ScalarField& field, const Ansatz& ansatz,
                                           const FermiChart& chart, const DecompositionOptions& options = {});

}  // namespace twoend::pde
