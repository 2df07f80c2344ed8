#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "twoend/errors.hpp"
#include "twoend/pde.hpp"
#include "twoend/profile.hpp"

namespace twoend::pde {

double far_field_bc(double k, double c, double r, double z, double r_bc_min) {
  const double lift = k * std::log(std::max(r, r_bc_min)) + c;
  return profile::value(z - lift) + profile::value(-z - lift) + 1.0;
}

void apply_far_field(ScalarField& field, FarField ff) {
  field.far_field = ff;
  const AxiGrid& g = field.grid;
  for (int j = 0; j < g.n_z; ++j)
    for (int i = 0; i < g.n_r; ++i)
      if (field.is_dirichlet(i, j)) field(i, j) = far_field_bc(ff.k, ff.c, g.r(i), g.z(j));
}

FarField far_field_for(const NodalCurve& curve, double R) {
  if (curve.kind() == NodalCurve::Kind::catenoid)
    return {curve.k(), curve.k() * std::log(2.0 / curve.k()) + curve.b() + curve.offset()};
  const double r = std::min(R, curve.r_max());
  const auto j = curve.jet(r);
  const double k = r * j[1];
  return {k, j[0] - k * std::log(r)};
}

// Uniform bucket grid over the segments of the symmetric nodal set.
struct AnsatzModel::Index {
  struct Segment {
    double ax, az, bx, bz;
  };
  double cell = 1.0;
  double r_lo = 0.0, z_lo = 0.0;
  int nr = 0, nz = 0;
  std::vector<Segment> segments;
  std::vector<std::vector<int>> buckets;

  explicit Index(std::vector<Segment> segs) : segments(std::move(segs)) {
    double r_hi = -1e300, z_hi = -1e300;
    r_lo = z_lo = 1e300;
    for (const auto& s : segments) {
      r_lo = std::min({r_lo, s.ax, s.bx});
      z_lo = std::min({z_lo, s.az, s.bz});
      r_hi = std::max({r_hi, s.ax, s.bx});
      z_hi = std::max({z_hi, s.az, s.bz});
    }
    nr = static_cast<int>((r_hi - r_lo) / cell) + 1;
    nz = static_cast<int>((z_hi - z_lo) / cell) + 1;
    buckets.resize(static_cast<std::size_t>(nr) * nz);
    for (int q = 0; q < static_cast<int>(segments.size()); ++q) {
      const auto& s = segments[q];
      const int i0 = cell_r(std::min(s.ax, s.bx)), i1 = cell_r(std::max(s.ax, s.bx));
      const int j0 = cell_z(std::min(s.az, s.bz)), j1 = cell_z(std::max(s.az, s.bz));
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) buckets[static_cast<std::size_t>(j) * nr + i].push_back(q);
    }
  }

  int cell_r(double r) const { return std::clamp(static_cast<int>(std::floor((r - r_lo) / cell)), 0, nr - 1); }
  int cell_z(double z) const { return std::clamp(static_cast<int>(std::floor((z - z_lo) / cell)), 0, nz - 1); }

  static double distance(const Segment& s, double px, double pz) {
    const double dx = s.bx - s.ax, dz = s.bz - s.az;
    const double len2 = dx * dx + dz * dz;
    double t = len2 > 0.0 ? ((px - s.ax) * dx + (pz - s.az) * dz) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(px - s.ax - t * dx, pz - s.az - t * dz);
  }

  double nearest(double px, double pz, double cap) const {
    const int ci = static_cast<int>(std::floor((px - r_lo) / cell));
    const int cj = static_cast<int>(std::floor((pz - z_lo) / cell));
    // distance from p to the bucket grid, so rings start where cells exist
    const double ox = std::max({0.0, r_lo - px, px - (r_lo + nr * cell)});
    const double oz = std::max({0.0, z_lo - pz, pz - (z_lo + nz * cell)});
    if (std::hypot(ox, oz) > cap) return cap;
    double best = cap;
    const int max_ring = static_cast<int>(cap / cell) + 2;
    for (int ring = 0; ring <= max_ring; ++ring) {
      for (int j = cj - ring; j <= cj + ring; ++j) {
        if (j < 0 || j >= nz) continue;
        const bool edge = j == cj - ring || j == cj + ring;
        for (int i = ci - ring; i <= ci + ring; i += (edge || ring == 0) ? 1 : 2 * ring) {
          if (i < 0 || i >= nr) continue;
          for (int q : buckets[static_cast<std::size_t>(j) * nr + i])
            best = std::min(best, distance(segments[q], px, pz));
        }
      }
      // unvisited cells lie at least ring * cell away
      if (best <= ring * cell) break;
    }
    return best;
  }
};

AnsatzModel::AnsatzModel(const NodalCurve& curve, const FermiChart& chart, double r_cover,
                         const AnsatzOptions& options)
    : curve_(curve), chart_(chart), options_(options), width_(chart.options().cutoff_width) {
  r0_ = chart_.first_wide(options_.outer_width).value_or(std::numeric_limits<double>::infinity());
  if (r_cover > chart_.r_end() + 1e-9 && r0_ < r_cover) {
    std::ostringstream msg;
    msg << "ansatz: chart ends at r = " << chart_.r_end() << " before the covered range " << r_cover;
    throw ConstructionError(msg.str(), {});
  }

  const double reach = std::min(r0_ + width_, r_cover) + options_.distance_cap;
  const auto pts = curve_.polyline(std::min(reach, curve_.r_max()), options_.core_spacing);
  std::vector<Index::Segment> segs;
  for (std::size_t q = 0; q + 1 < pts.size(); ++q) {
    segs.push_back({pts[q][0], pts[q][1], pts[q + 1][0], pts[q + 1][1]});
    segs.push_back({pts[q][0], -pts[q][1], pts[q + 1][0], -pts[q + 1][1]});
  }
  if (!pts.empty() && pts.front()[0] > 0.0)  // waist on the r-axis joins the pair
    segs.push_back({pts.front()[0], pts.front()[1], pts.front()[0], -pts.front()[1]});
  if (segs.empty()) throw ConstructionError("ansatz: empty nodal set", {});
  index_ = std::make_unique<Index>(std::move(segs));
}

AnsatzModel::~AnsatzModel() = default;
AnsatzModel::AnsatzModel(AnsatzModel&&) noexcept = default;

double AnsatzModel::outer_weight(double r) const { return smoothstep((r - r0_) / width_); }

double AnsatzModel::fermi_term(double r, double z) const {
  if (const auto p = chart_.project(r, z)) {
    const double r1 = (*p)[0], z1 = (*p)[1];
    const double d = chart_.half_width(r1);
    if (std::abs(z1) < d) {
      const double eta = smoothstep((d - std::abs(z1)) / width_);
      return eta * profile::value(z1) + (1.0 - eta) * (z1 > 0.0 ? 1.0 : -1.0);
    }
  }
  return z > curve_.value(r) ? 1.0 : -1.0;
}

double AnsatzModel::outer(double r, double z) const { return fermi_term(r, z) + fermi_term(r, -z) + 1.0; }

double AnsatzModel::core(double r, double z) const {
  const double d = index_->nearest(r, z, options_.distance_cap);
  const bool plus = r < curve_.r_min() || std::abs(z) > curve_.value(r);
  return (plus ? 1.0 : -1.0) * profile::value(d);
}

double AnsatzModel::value(double r, double z) const {
  const double chi = outer_weight(r);
  if (chi >= 1.0) return outer(r, z);
  if (chi <= 0.0) return core(r, z);
  return chi * outer(r, z) + (1.0 - chi) * core(r, z);
}

Ansatz build_ansatz(const NodalCurve& curve, const FermiChart& chart, const AxiGrid& grid,
                    const AnsatzOptions& options) {
  const double r_exit = std::min(grid.R, curve.r_max());
  if (!(curve.value(r_exit) < grid.Z)) {
    std::ostringstream msg;
    msg << "ansatz: nodal curve reaches z = Z before r = R (f(" << r_exit << ") = " << curve.value(r_exit) << ")";
    throw ConstructionError(msg.str(), {});
  }
  std::vector<std::pair<int, int>> uncovered;
  if (curve.r_max() < grid.R) {
    for (int i = 0; i < grid.n_r; ++i)
      if (grid.r(i) > curve.r_max())
        for (int j = 0; j < grid.n_z; ++j) uncovered.emplace_back(i, j);
    throw ConstructionError("ansatz: curve does not cover the grid", std::move(uncovered));
  }
  AnsatzModel model(curve, chart, grid.R, options);
  Ansatz out;
  out.field = ScalarField(grid);
  out.field.far_field = far_field_for(curve, grid.R);
  out.r0 = model.r0();
  out.blend_width = model.blend_width();
  for (int j = 0; j < grid.n_z; ++j)
    for (int i = 0; i < grid.n_r; ++i) out.field(i, j) = model.value(grid.r(i), grid.z(j));
  return out;
}

ScalarField build_approximate_solution(const NodalCurve& curve, const FermiChart& chart, const AxiGrid& grid) {
  return build_ansatz(curve, chart, grid).field;
}

}  // namespace twoend::pde
