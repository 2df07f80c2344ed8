#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace twoend {

/// Structured axisymmetric half-strip [0, R] x [0, Z] with nodes at
/// (i h_r, j h_z).
struct AxiGrid {
  double R = 0.0;
  double Z = 0.0;
  int n_r = 0;
  int n_z = 0;

  /// Grid with spacing as close to `h` as the extents allow. Throws
  /// DomainError when the resulting spacing exceeds `max_spacing`.
  static AxiGrid with_spacing(double R, double Z, double h, double max_spacing = 0.25);

  double h_r() const { return R / (n_r - 1); }
  double h_z() const { return Z / (n_z - 1); }
  double r(int i) const { return i * h_r(); }
  double z(int j) const { return j * h_z(); }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(n_r) + static_cast<std::size_t>(i);
  }
  std::size_t size() const { return static_cast<std::size_t>(n_r) * static_cast<std::size_t>(n_z); }

  bool operator==(const AxiGrid&) const = default;
};

/// Bottom edge z = 0: even reflection (u_z = 0) or Dirichlet data.
enum class BottomBoundary { even, dirichlet };

/// Far-field parameters of the composite Dirichlet profile.
struct FarField {
  double k = 0.0;
  double c = 0.0;
};

/// Nodal values on an AxiGrid. The axis r = 0 is always a symmetry
/// (Neumann) edge; the top and right edges hold Dirichlet data in place.
struct ScalarField {
  AxiGrid grid;
  std::vector<double> values;
  BottomBoundary bottom = BottomBoundary::even;
  FarField far_field;

  ScalarField() = default;
  explicit ScalarField(const AxiGrid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}

  double& operator()(int i, int j) { return values[grid.index(i, j)]; }
  double operator()(int i, int j) const { return values[grid.index(i, j)]; }

  /// True for nodes whose value is prescribed (not an unknown).
  bool is_dirichlet(int i, int j) const {
    return i == grid.n_r - 1 || j == grid.n_z - 1 || (j == 0 && bottom == BottomBoundary::dirichlet);
  }

  double max_abs() const;
};

/// Keys cubic-convolution interpolation with symmetric ghost values across
/// r = 0 and (for even fields) z = 0. Throws DomainError outside
/// [0, R] x [-Z, Z] (z >= 0 for Dirichlet-bottom fields).
double interpolate(const ScalarField& field, double r, double z);

/// Text dump: header `axi-field v1 n_r n_z h_r h_z k c`, then n_z rows of
/// n_r space-separated values (row j = 0 first).
void write_field(std::ostream& out, const ScalarField& field);
ScalarField read_field(std::istream& in);

}  // namespace twoend
