#include "twoend/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "twoend/closed_form.hpp"
#include "twoend/errors.hpp"
#include "twoend/profile.hpp"

namespace twoend {

NodalCurve NodalCurve::catenoid(double k, double b) {
  if (!(k > 0.0) || !std::isfinite(k) || !std::isfinite(b)) throw DomainError("catenoid: need finite k > 0");
  NodalCurve c;
  c.kind_ = Kind::catenoid;
  c.k_ = k;
  c.b_ = b;
  c.r_min_ = k;
  return c;
}

NodalCurve NodalCurve::toda(double eps) { return toda(eps, profile::HeteroclinicProfile::standard().toda_a()); }

NodalCurve NodalCurve::toda(double eps, double a) {
  if (!(eps > 0.0) || !std::isfinite(eps) || !(a > 0.0)) throw DomainError("toda: need eps > 0 and a > 0");
  NodalCurve c;
  c.kind_ = Kind::toda;
  c.eps_ = eps;
  c.a_ = a;
  c.r_min_ = 0.0;
  return c;
}

NodalCurve NodalCurve::sampled(std::vector<double> r, std::vector<double> f) {
  NodalCurve c;
  c.kind_ = Kind::sampled;
  c.spline_ = CubicSpline(std::move(r), std::move(f));
  c.r_min_ = c.spline_.front();
  c.r_max_ = c.spline_.back();
  return c;
}

NodalCurve NodalCurve::shifted(double dz) const {
  NodalCurve c = *this;
  c.dz_ += dz;
  return c;
}

std::array<double, 4> NodalCurve::jet(double r) const {
  if (!std::isfinite(r) || r < r_min_ || r > r_max_) {
    std::ostringstream msg;
    msg << "nodal curve: r = " << r << " outside [" << r_min_ << ", " << r_max_ << "]";
    throw DomainError(msg.str());
  }
  std::array<double, 4> j{};
  switch (kind_) {
    case Kind::catenoid:
      j = closed_form::catenoid_jet(k_, b_, r);
      break;
    case Kind::toda:
      j = closed_form::toda_jet(a_, eps_, r);
      break;
    case Kind::sampled:
      j = {spline_.value(r), spline_.d1(r), spline_.d2(r), spline_.d3(r)};
      break;
  }
  j[0] += dz_;
  return j;
}

std::vector<std::array<double, 2>> NodalCurve::polyline(double r_end, double spacing) const {
  std::vector<std::array<double, 2>> pts;
  r_end = std::min(r_end, r_max_);
  if (!(r_end > r_min_)) return pts;
  if (kind_ == Kind::catenoid) {
    const double t_end = k_ * std::acosh(r_end / k_);
    for (double t = 0.0;; t += spacing / std::cosh(t / k_)) {
      const double tt = std::min(t, t_end);
      pts.push_back({k_ * std::cosh(tt / k_), b_ + dz_ + tt});
      if (tt >= t_end) break;
    }
    return pts;
  }
  double r = r_min_;
  for (;;) {
    const auto j = jet(r);
    pts.push_back({r, j[0]});
    if (r >= r_end) break;
    const double dr = std::max(spacing / std::sqrt(1.0 + j[1] * j[1]), 1e-6 * spacing);
    r = std::min(r + dr, r_end);
  }
  return pts;
}

double smoothstep(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

FermiChart::FermiChart(NodalCurve curve, double r_end) : FermiChart(std::move(curve), r_end, Options{}) {}

FermiChart::FermiChart(NodalCurve curve, double r_end, Options options)
    : curve_(std::move(curve)), options_(options) {
  r_begin_ = curve_.r_min();
  if (curve_.kind() == NodalCurve::Kind::catenoid) r_begin_ += 1e-9 * std::max(1.0, r_begin_);
  r_end_ = std::min(r_end, curve_.r_max());
  if (!(r_end_ > r_begin_)) throw ChartDomainError("fermi chart: empty parameter range");

  const double range = r_end_ - r_begin_;
  const int n = std::max(2, static_cast<int>(std::ceil(range / std::max(options_.table_spacing, range / 20000.0))) + 1);
  step_ = range / (n - 1);

  std::vector<double> kappa(n), width(n);
  for (int i = 0; i < n; ++i) {
    const double r1 = r_begin_ + i * step_;
    const auto j = curve_.jet(r1);
    const double s = std::sqrt(1.0 + j[1] * j[1]);
    kappa[i] = std::abs(j[2]) / (s * s * s);
    const double axis =
        j[1] == 0.0 ? std::numeric_limits<double>::infinity() : r1 * std::sqrt(1.0 + 1.0 / (j[1] * j[1]));
    width[i] = std::min(axis, options_.separation_factor * std::max(j[0], 0.0));
  }
  const int reach = static_cast<int>(std::ceil(options_.focal_window / step_));
  for (int i = 0; i < n; ++i) {
    double kmax = 0.0;
    for (int q = std::max(0, i - reach); q <= std::min(n - 1, i + reach); ++q) kmax = std::max(kmax, kappa[q]);
    if (kmax > 0.0) width[i] = std::min(width[i], 1.0 / kmax);
  }
  // Lipschitz-1/2 envelope
  for (int i = 1; i < n; ++i) width[i] = std::min(width[i], width[i - 1] + 0.5 * step_);
  for (int i = n - 1; i-- > 0;) width[i] = std::min(width[i], width[i + 1] + 0.5 * step_);
  width_ = std::move(width);
}

double FermiChart::half_width(double r1) const {
  if (!(r1 >= r_begin_ && r1 <= r_end_)) {
    std::ostringstream msg;
    msg << "fermi chart: r1 = " << r1 << " outside [" << r_begin_ << ", " << r_end_ << "]";
    throw ChartDomainError(msg.str());
  }
  const double x = (r1 - r_begin_) / step_;
  const int i = std::min(static_cast<int>(x), static_cast<int>(width_.size()) - 2);
  const double t = x - i;
  return (1.0 - t) * width_[i] + t * width_[i + 1];
}

double FermiChart::cutoff(double r1, double z1) const {
  return smoothstep((half_width(r1) - std::abs(z1)) / options_.cutoff_width);
}

std::optional<double> FermiChart::first_wide(double width) const {
  if (width_.back() < width) return std::nullopt;
  std::size_t i = width_.size() - 1;
  while (i > 0 && width_[i - 1] >= width) --i;
  return r_begin_ + static_cast<double>(i) * step_;
}

void FermiChart::check_region(double r1, double z1) const {
  if (!std::isfinite(z1) || !(std::abs(z1) < half_width(r1))) {
    std::ostringstream msg;
    msg << "fermi chart: (" << r1 << ", " << z1 << ") outside validity radius";
    throw ChartDomainError(msg.str());
  }
}

std::array<double, 2> FermiChart::forward(double r1, double z1) const {
  check_region(r1, z1);
  const auto j = curve_.jet(r1);
  const double s = std::sqrt(1.0 + j[1] * j[1]);
  return {r1 - z1 * j[1] / s, j[0] + z1 / s};
}

std::optional<std::array<double, 2>> FermiChart::project(double r, double z) const {
  if (!std::isfinite(r) || !std::isfinite(z)) return std::nullopt;
  double r1 = std::clamp(r, r_begin_, r_end_);
  int pinned = 0;
  for (int it = 0; it < 50; ++it) {
    const auto j = curve_.jet(r1);
    const double g = (r - r1) + (z - j[0]) * j[1];
    const double gp = -(1.0 + j[1] * j[1]) + (z - j[0]) * j[2];
    if (!(gp < 0.0)) return std::nullopt;
    const double step = -g / gp;
    const double next = std::clamp(r1 + step, r_begin_, r_end_);
    if (next != r1 + step && ++pinned > 2) return std::nullopt;
    const bool done = std::abs(next - r1) <= 1e-13 * std::max(1.0, std::abs(r1));
    r1 = next;
    if (done) {
      const auto jf = curve_.jet(r1);
      const double s = std::sqrt(1.0 + jf[1] * jf[1]);
      const double z1 = ((z - jf[0]) - (r - r1) * jf[1]) / s;
      if (!(1.0 - z1 * jf[2] / (s * s * s) > 0.0)) return std::nullopt;
      return std::array<double, 2>{r1, z1};
    }
  }
  return std::nullopt;
}

std::array<double, 2> FermiChart::inverse(double r, double z) const {
  const auto p = project(r, z);
  if (!p) {
    std::ostringstream msg;
    msg << "fermi chart: no normal projection for (" << r << ", " << z << ")";
    throw ChartDomainError(msg.str());
  }
  check_region((*p)[0], (*p)[1]);
  return *p;
}

MetricFactors FermiChart::metric(double r1, double z1) const {
  check_region(r1, z1);
  const auto j = curve_.jet(r1);
  const double s2 = 1.0 + j[1] * j[1];
  const double s = std::sqrt(s2);
  MetricFactors m;
  m.A = s2 - 2.0 * z1 * j[2] / s + z1 * z1 * j[2] * j[2] / (s2 * s2);
  m.B = 1.0 - z1 * j[2] / (s2 * s);
  if (!(m.B > 0.0)) throw ChartDomainError("fermi chart: focal point reached (B <= 0)");
  return m;
}

LaplacianCoeffs FermiChart::laplacian(double r1, double z1) const {
  const MetricFactors m = metric(r1, z1);
  const auto j = curve_.jet(r1);
  const double fp = j[1], fpp = j[2], fppp = j[3];
  const double s2 = 1.0 + fp * fp;
  const double s = std::sqrt(s2);
  const double s3 = s2 * s;
  const double dA_dz1 = -2.0 * fpp / s + 2.0 * z1 * fpp * fpp / (s2 * s2);
  const double dB_dr1 = -z1 * (fppp / s3 - 3.0 * fpp * fpp * fp / (s3 * s2));
  const double dA_dr1 = 2.0 * fp * fpp * m.B * m.B + 2.0 * s2 * m.B * dB_dr1;
  LaplacianCoeffs c;
  c.a_rr = 1.0 / m.A;
  c.a_zz = 1.0;
  c.a_r = -dA_dr1 / (2.0 * m.A * m.A);
  c.a_z = dA_dz1 / (2.0 * m.A);
  return c;
}

double FermiChart::injectivity_defect(int samples) const {
  double worst = 0.0;
  for (int a = 0; a < samples; ++a) {
    const double r1 = r_begin_ + (r_end_ - r_begin_) * (a + 0.5) / samples;
    const double d = half_width(r1);
    for (int b = 0; b < samples; ++b) {
      const double z1 = 0.95 * d * (2.0 * (b + 0.5) / samples - 1.0);
      const auto x = forward(r1, z1);
      const auto p = project(x[0], x[1]);
      if (!p) return std::numeric_limits<double>::infinity();
      worst = std::max({worst, std::abs((*p)[0] - r1), std::abs((*p)[1] - z1)});
    }
  }
  return worst;
}

namespace {

std::optional<double> column_crossing(const ScalarField& field, int i) {
  const AxiGrid& g = field.grid;
  for (int j = 0; j + 1 < g.n_z; ++j) {
    const double lo = field(i, j), hi = field(i, j + 1);
    if (lo < 0.0 && hi >= 0.0) return g.z(j) + g.h_z() * lo / (lo - hi);
  }
  return std::nullopt;
}

NodalCurve extract(const ScalarField& field, int i_from, int i_to) {
  std::vector<double> r, f;
  std::vector<int> missing;
  for (int i = i_from; i <= i_to; ++i) {
    if (const auto z = column_crossing(field, i)) {
      r.push_back(field.grid.r(i));
      f.push_back(*z);
    } else {
      missing.push_back(i);
    }
  }
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "nodal curve: " << missing.size() << " column(s) without sign change, first at r = "
        << field.grid.r(missing.front());
    throw ExtractionError(msg.str(), std::move(missing));
  }
  if (r.size() < 4) throw ExtractionError("nodal curve: fewer than 4 columns in window", {});
  return NodalCurve::sampled(std::move(r), std::move(f));
}

}  // namespace

NodalCurve nodal_curve_from_field(const ScalarField& field) {
  const int n = field.grid.n_r;
  int first = 0;
  while (first < n && !column_crossing(field, first)) ++first;
  if (first == n) {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    throw ExtractionError("nodal curve: field has no sign change", std::move(all));
  }
  return extract(field, first, n - 1);
}

NodalCurve nodal_curve_from_field(const ScalarField& field, double r_from, double r_to) {
  const AxiGrid& g = field.grid;
  const int i_from = std::max(0, static_cast<int>(std::ceil(r_from / g.h_r() - 1e-9)));
  const int i_to = std::min(g.n_r - 1, static_cast<int>(std::floor(r_to / g.h_r() + 1e-9)));
  return extract(field, i_from, i_to);
}

void write_curve_csv(std::ostream& out, const NodalCurve& curve, const std::vector<double>& r) {
  const auto prec = out.precision(12);
  out << "r,f,fp,fpp\n";
  for (double x : r) {
    const auto j = curve.jet(x);
    out << x << ',' << j[0] << ',' << j[1] << ',' << j[2] << '\n';
  }
  out.precision(prec);
}

}  // namespace twoend
