#include "twoend/grid.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "twoend/errors.hpp"

namespace twoend {

AxiGrid AxiGrid::with_spacing(double R, double Z, double h, double max_spacing) {
  if (!(R > 0.0) || !(Z > 0.0) || !(h > 0.0)) throw DomainError("grid: extents and spacing must be positive");
  AxiGrid g;
  g.R = R;
  g.Z = Z;
  g.n_r = static_cast<int>(std::lround(R / h)) + 1;
  g.n_z = static_cast<int>(std::lround(Z / h)) + 1;
  if (g.n_r < 4 || g.n_z < 4) throw DomainError("grid: need at least 4 nodes per direction");
  if (g.h_r() > max_spacing + 1e-12 || g.h_z() > max_spacing + 1e-12) {
    std::ostringstream msg;
    msg << "grid: spacing " << std::max(g.h_r(), g.h_z()) << " exceeds " << max_spacing;
    throw DomainError(msg.str());
  }
  return g;
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

namespace {

double keys(double t) {
  constexpr double a = -0.5;
  t = std::abs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

int reflect(int idx, int n) {
  // even reflection about index 0; clamp at the far end
  if (idx < 0) idx = -idx;
  return std::min(idx, n - 1);
}

}  // namespace

double interpolate(const ScalarField& field, double r, double z) {
  const AxiGrid& g = field.grid;
  const bool even_bottom = field.bottom == BottomBoundary::even;
  const double zmin = even_bottom ? -g.Z : 0.0;
  constexpr double slack = 1e-9;
  if (!(r >= -slack && r <= g.R + slack && z >= zmin - slack && z <= g.Z + slack)) {
    std::ostringstream msg;
    msg << "interpolate: point (" << r << ", " << z << ") outside grid";
    throw DomainError(msg.str());
  }
  r = std::abs(r);
  if (even_bottom) z = std::abs(z);
  const double x = r / g.h_r();
  const double y = z / g.h_z();
  const int i0 = static_cast<int>(std::floor(x));
  const int j0 = static_cast<int>(std::floor(y));
  const double tx = x - i0;
  const double ty = y - j0;
  double wx[4], wy[4];
  for (int q = 0; q < 4; ++q) {
    wx[q] = keys(tx - (q - 1));
    wy[q] = keys(ty - (q - 1));
  }
  double sum = 0.0;
  for (int b = 0; b < 4; ++b) {
    int j = j0 - 1 + b;
    if (j < 0) j = even_bottom ? -j : 0;
    j = std::min(j, g.n_z - 1);
    double row = 0.0;
    for (int a = 0; a < 4; ++a) row += wx[a] * field(reflect(i0 - 1 + a, g.n_r), j);
    sum += wy[b] * row;
  }
  return sum;
}

void write_field(std::ostream& out, const ScalarField& field) {
  const AxiGrid& g = field.grid;
  auto flags = out.flags();
  auto prec = out.precision();
  out.precision(17);
  out << "axi-field v1 " << g.n_r << ' ' << g.n_z << ' ' << g.h_r() << ' ' << g.h_z() << ' '
      << field.far_field.k << ' ' << field.far_field.c << '\n';
  for (int j = 0; j < g.n_z; ++j) {
    for (int i = 0; i < g.n_r; ++i) {
      if (i) out << ' ';
      out << field(i, j);
    }
    out << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

ScalarField read_field(std::istream& in) {
  std::string tag, version;
  int n_r = 0, n_z = 0;
  double h_r = 0.0, h_z = 0.0, k = 0.0, c = 0.0;
  if (!(in >> tag >> version >> n_r >> n_z >> h_r >> h_z >> k >> c) || tag != "axi-field" ||
      version != "v1")
    throw DomainError("read_field: bad header");
  AxiGrid g;
  g.n_r = n_r;
  g.n_z = n_z;
  g.R = h_r * (n_r - 1);
  g.Z = h_z * (n_z - 1);
  ScalarField field(g);
  field.far_field = {k, c};
  for (double& v : field.values)
    if (!(in >> v)) throw DomainError("read_field: truncated data");
  return field;
}

}  // namespace twoend
