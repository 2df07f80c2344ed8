#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "twoend/errors.hpp"
#include "twoend/pde.hpp"
#include "twoend/profile.hpp"

namespace twoend::pde {

namespace {

struct Gradient {
  double ur = 0.0, uz = 0.0;
};

Gradient gradient(const ScalarField& u, int i, int j) {
  const AxiGrid& g = u.grid;
  Gradient d;
  if (i > 0) d.ur = (u(i + 1, j) - u(i - 1, j)) / (2.0 * g.h_r());
  if (j > 0)
    d.uz = (u(i, j + 1) - u(i, j - 1)) / (2.0 * g.h_z());
  else if (u.bottom == BottomBoundary::dirichlet)
    d.uz = (-3.0 * u(i, 0) + 4.0 * u(i, 1) - u(i, 2)) / (2.0 * g.h_z());
  return d;
}

// normal component of Y = (|grad u|^2/2 + F) e_z - u_z grad u along +e_z
double vertical_flux(const ScalarField& u, int i, int j) {
  const Gradient d = gradient(u, i, j);
  return 0.5 * (d.ur * d.ur + d.uz * d.uz) + profile::potential(u(i, j)) - d.uz * d.uz;
}

}  // namespace

FluxResult balancing_flux(const ScalarField& field, const FluxRect& rect) {
  const AxiGrid& g = field.grid;
  FluxResult out;
  int ia = static_cast<int>(std::lround(rect.r_a / g.h_r()));
  int ib = static_cast<int>(std::lround(rect.r_b / g.h_r()));
  int jt = static_cast<int>(std::lround(rect.z_top / g.h_z()));
  if (ia < 0 || ib <= ia || jt <= 0) throw DomainError("balancing_flux: degenerate rectangle");
  if (ib > g.n_r - 2 || jt > g.n_z - 2) out.contaminated = true;
  ib = std::min(ib, g.n_r - 2);
  jt = std::min(jt, g.n_z - 2);
  if (ib <= ia) throw DomainError("balancing_flux: rectangle outside the grid");
  out.snapped = {g.r(ia), g.r(ib), g.z(jt)};
  const double two_pi = 2.0 * std::numbers::pi;

  auto trapezoid = [](int n, auto&& f, double step) {
    double s = 0.5 * (f(0) + f(n));
    for (int q = 1; q < n; ++q) s += f(q);
    return s * step;
  };
  out.top = trapezoid(ib - ia, [&](int q) { return vertical_flux(field, ia + q, jt) * two_pi * g.r(ia + q); }, g.h_r());
  out.bottom = -trapezoid(ib - ia, [&](int q) { return vertical_flux(field, ia + q, 0) * two_pi * g.r(ia + q); }, g.h_r());
  out.right = trapezoid(jt, [&](int q) {
    const Gradient d = gradient(field, ib, q);
    return -d.uz * d.ur * two_pi * g.r(ib);
  }, g.h_z());
  out.left = trapezoid(jt, [&](int q) {
    const Gradient d = gradient(field, ia, q);
    return d.uz * d.ur * two_pi * g.r(ia);
  }, g.h_z());
  out.value = out.top + out.bottom + out.left + out.right;
  const double ra = g.r(ia), rb = g.r(ib);
  out.measure = two_pi * (rb * rb - ra * ra) + two_pi * (ra + rb) * g.z(jt);
  return out;
}

std::vector<FluxRect> nested_flux_rects(const AxiGrid& grid) {
  const double R = grid.R, Z = grid.Z;
  return {{R / 6.0, R / 2.0, Z / 3.0}, {2.0 * R / 15.0, 2.0 * R / 3.0, Z / 2.0}, {R / 12.0, 5.0 * R / 6.0, 2.0 * Z / 3.0}};
}

MonotonicityReport monotonicity_check(const ScalarField& field, std::optional<double> tol) {
  const AxiGrid& g = field.grid;
  MonotonicityReport rep;
  rep.tol = tol ? *tol : 10.0 * residual_norm(field) + 1e-8;
  rep.max_ur = -std::numeric_limits<double>::infinity();
  rep.min_uz = std::numeric_limits<double>::infinity();
  for (int j = 1; j + 1 < g.n_z; ++j) {
    for (int i = 1; i + 1 < g.n_r; ++i) {
      const Gradient d = gradient(field, i, j);
      rep.max_ur = std::max(rep.max_ur, d.ur);
      rep.min_uz = std::min(rep.min_uz, d.uz);
      if (d.ur > rep.tol || d.uz < -rep.tol) {
        ++rep.violations;
        if (rep.located.size() < 10) rep.located.push_back({g.r(i), g.z(j)});
      }
    }
  }
  rep.passes = rep.violations == 0;
  return rep;
}

GrowthFit growth_rate_fit(const NodalCurve& curve, double r_a, double r_b) {
  if (!(r_a > 0.0) || !(r_b > r_a)) throw DomainError("growth_rate_fit: need 0 < r_a < r_b");
  std::vector<double> xs, ys;
  if (curve.kind() == NodalCurve::Kind::sampled) {
    const auto& r = curve.spline().knots();
    for (std::size_t q = 0; q < r.size(); ++q)
      if (r[q] >= r_a && r[q] <= r_b) {
        xs.push_back(std::log(r[q]));
        ys.push_back(curve.value(r[q]));
      }
  } else {
    constexpr int n = 401;
    for (int q = 0; q < n; ++q) {
      const double r = r_a + (r_b - r_a) * q / (n - 1);
      xs.push_back(std::log(r));
      ys.push_back(curve.value(r));
    }
  }
  if (xs.size() < 2) throw DomainError("growth_rate_fit: fewer than two samples in window");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t q = 0; q < xs.size(); ++q) {
    mx += xs[q];
    my += ys[q];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t q = 0; q < xs.size(); ++q) {
    sxx += (xs[q] - mx) * (xs[q] - mx);
    sxy += (xs[q] - mx) * (ys[q] - my);
  }
  GrowthFit fit;
  fit.k = sxy / sxx;
  fit.c = my - fit.k * mx;
  double ss = 0.0;
  for (std::size_t q = 0; q < xs.size(); ++q) {
    const double e = ys[q] - fit.k * xs[q] - fit.c;
    ss += e * e;
  }
  fit.rms = std::sqrt(ss / n);
  fit.samples = static_cast<int>(xs.size());
  fit.short_window = r_b < 10.0 * r_a;
  return fit;
}

Apex locate_apex(const ScalarField& field) {
  const AxiGrid& g = field.grid;
  Apex apex;
  if (field(0, 0) < 0.0) {
    apex.axis = ApexAxis::z_axis;
    for (int j = 0; j + 1 < g.n_z; ++j) {
      const double lo = field(0, j), hi = field(0, j + 1);
      if (lo < 0.0 && hi >= 0.0) {
        apex.distance = g.z(j) + g.h_z() * lo / (lo - hi);
        return apex;
      }
    }
  } else {
    apex.axis = ApexAxis::r_axis;
    for (int i = 0; i + 1 < g.n_r; ++i) {
      const double lo = field(i, 0), hi = field(i + 1, 0);
      if (lo >= 0.0 && hi < 0.0) {
        apex.distance = g.r(i) + g.h_r() * lo / (lo - hi);
        return apex;
      }
    }
  }
  throw ExtractionError("locate_apex: nodal set does not meet the axes", {});
}

std::string to_string(ApexAxis axis) { return axis == ApexAxis::z_axis ? "z" : "r"; }

InterfaceDecomposition decompose_interface(const ScalarField& field, const NodalCurve& curve,
                                           const FermiChart& chart, const DecompositionOptions& options) {
  const Ansatz ansatz = build_ansatz(curve, chart, field.grid);
  return decompose_interface(field, ansatz, chart, options);
}

InterfaceDecomposition decompose_interface(const ScalarField& field, const Ansatz& ansatz,
                                           const FermiChart& chart, const DecompositionOptions& options) {
  const AxiGrid& g = field.grid;
  if (!(ansatz.field.grid == g)) throw DomainError("decompose_interface: ansatz grid differs from field grid");
  if (!std::isfinite(ansatz.r0)) throw DecompositionError("decompose_interface: no outer region", 0.0);
  const int n = options.slice_points | 1;
  const double w = chart.options().cutoff_width;

  ScalarField phi(g);
  phi.bottom = field.bottom;
  for (std::size_t q = 0; q < phi.values.size(); ++q) phi.values[q] = field.values[q] - ansatz.field.values[q];

  const double r1_from = options.r1_from.value_or(ansatz.r0 + ansatz.blend_width + options.max_half_width);
  const double r1_to = options.r1_to.value_or(std::min(chart.r_end(), g.R) - 1.0 - options.max_half_width);
  const bool explicit_range = options.r1_from.has_value() || options.r1_to.has_value();

  std::vector<double> z1(n), eta(n), eta_plus(n), psi(n), weight(n);
  InterfaceDecomposition out;
  for (double r1 = r1_from; r1 <= r1_to + 1e-9; r1 += options.slice_spacing) {
    const double L = std::min(chart.half_width(r1) * (1.0 - 1e-9), options.max_half_width);
    const double dz = 2.0 * L / (n - 1);
    bool inside = true;
    for (int q = 0; q < n; ++q) {
      z1[q] = -L + q * dz;
      const auto x = chart.forward(r1, z1[q]);
      if (x[0] < 0.0 || x[0] > g.R - g.h_r() || x[1] > g.Z - g.h_z() ||
          (field.bottom == BottomBoundary::dirichlet && x[1] < 0.0)) {
        inside = false;
        break;
      }
      psi[q] = interpolate(phi, x[0], x[1]);
      eta[q] = chart.cutoff(r1, z1[q]);
      eta_plus[q] = eta[q] * smoothstep(x[1] / w);
      weight[q] = dz / 3.0 * ((q == 0 || q == n - 1) ? 1.0 : (q % 2 ? 4.0 : 2.0));
    }
    if (!inside) {
      if (explicit_range) throw DecompositionError("decompose_interface: slice leaves the grid", r1);
      break;
    }

    auto phi_at = [&](int q, double h) { return psi[q] - eta[q] * (profile::value(z1[q] - h) - profile::value(z1[q])); };
    auto g_of = [&](double h) {
      double s = 0.0;
      for (int q = 0; q < n; ++q) s += weight[q] * phi_at(q, h) * eta_plus[q] * profile::d1(z1[q] - h);
      return s;
    };
    double h = 0.0, gh = g_of(0.0);
    int it = 0;
    for (; std::abs(gh) > 1e-13 && it < 50; ++it) {
      double gp = 0.0;
      for (int q = 0; q < n; ++q) {
        const double hp = profile::d1(z1[q] - h);
        gp += weight[q] * eta_plus[q] * (eta[q] * hp * hp - phi_at(q, h) * profile::d2(z1[q] - h));
      }
      if (!(gp > 0.0)) throw DecompositionError("decompose_interface: degenerate slice derivative", r1);
      const double step = gh / gp;
      h -= step;
      if (!(std::abs(h) < 0.5 * L)) throw DecompositionError("decompose_interface: modulation left the slice", r1);
      gh = g_of(h);
      if (std::abs(step) < 1e-15) break;
    }
    if (!(std::abs(gh) <= 1e-10)) {
      std::ostringstream msg;
      msg << "decompose_interface: orthogonality " << gh << " not reached";
      throw DecompositionError(msg.str(), r1);
    }
    double norm = 0.0;
    for (int q = 0; q < n; ++q) norm = std::max(norm, std::abs(phi_at(q, h)));
    out.r1.push_back(r1);
    out.h.push_back(h);
    out.phi_norm.push_back(norm);
    out.orthogonality.push_back(gh);
    out.iterations.push_back(it);
  }
  if (out.r1.empty()) throw DecompositionError("decompose_interface: no slice fits in the grid", r1_from);
  return out;
}

}  // namespace twoend::pde
