#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "twoend/cli_io.hpp"
#include "twoend/errors.hpp"
#include "twoend/geometry.hpp"
#include "twoend/pde.hpp"
#include "twoend/profile.hpp"
#include "twoend/reduced.hpp"

namespace twoend::cli {

namespace {

Check make_check(std::string name, double value, double tolerance) {
  return {std::move(name), value, tolerance, std::isfinite(value) && value <= tolerance};
}

struct ChartErrors {
  double metric = 0.0;      // |A - (1 + f'^2) B^2| / A
  double round_trip = 0.0;  // forward then inverse
};

ChartErrors chart_errors(const FermiChart& chart, std::mt19937_64& rng, int metric_points, int trip_points) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto sample = [&] {
    const double r1 = chart.r_begin() + (chart.r_end() - chart.r_begin()) * unit(rng);
    const double z1 = 0.99 * chart.half_width(r1) * (2.0 * unit(rng) - 1.0);
    return std::array<double, 2>{r1, z1};
  };
  ChartErrors e;
  for (int n = 0; n < metric_points; ++n) {
    const auto [r1, z1] = sample();
    const auto m = chart.metric(r1, z1);
    const double fp = chart.curve().d1(r1);
    e.metric = std::max(e.metric, std::abs(m.A - (1.0 + fp * fp) * m.B * m.B) / m.A);
  }
  for (int n = 0; n < trip_points; ++n) {
    const auto [r1, z1] = sample();
    const auto x = chart.forward(r1, z1);
    try {
      const auto p = chart.inverse(x[0], x[1]);
      e.round_trip = std::max({e.round_trip, std::abs(p[0] - r1), std::abs(p[1] - z1)});
    } catch (const ChartDomainError&) {
      e.round_trip = std::numeric_limits<double>::infinity();
    }
  }
  return e;
}

}  // namespace

std::vector<Check> oracle_suite(std::uint64_t seed) {
  constexpr double s2 = std::numbers::sqrt2;
  std::vector<Check> out;
  const auto& prof = profile::HeteroclinicProfile::standard();

  out.push_back(make_check("profile.c0", std::abs(prof.c0() - 2.0 * s2 / 3.0), 1e-10));
  out.push_back(make_check("profile.c1", std::abs(prof.c1() - 8.0), 1e-8));
  {
    double ode = 0.0, first = 0.0;
    for (int n = 0; n <= 400; ++n) {
      const double t = -20.0 + 0.1 * n;
      const double H = profile::value(t);
      ode = std::max(ode, std::abs(profile::d2(t) - (H * H * H - H)));
      first = std::max(first, std::abs(profile::d1(t) - (1.0 - H * H) / s2));
    }
    out.push_back(make_check("profile.ode_residual", ode, 1e-13));
    out.push_back(make_check("profile.first_integral", first, 1e-13));
  }

  {
    double worst = 0.0;
    for (double eps : {1.0, 0.1, 0.01})
      for (double r : {0.1, 1.0, 10.0, 100.0}) {
        auto q = [eps](double x) {
          return std::array<double, 3>{reduced::toda_explicit(eps, x, 0), reduced::toda_explicit(eps, x, 1),
                                       reduced::toda_explicit(eps, x, 2)};
        };
        worst = std::max(worst, std::abs(reduced::toda_residual(q, r).value));
      }
    out.push_back(make_check("reduced.toda_residual", worst, 1e-9));
    auto q = [](double x) {
      return std::array<double, 3>{reduced::toda_explicit(0.1, x, 0), reduced::toda_explicit(0.1, x, 1),
                                   reduced::toda_explicit(0.1, x, 2)};
    };
    out.push_back(make_check("reduced.toda_axis_limit", std::abs(reduced::toda_residual(q, 0.0).value), 1e-9));
    out.push_back(make_check("reduced.toda_slope_at_axis", std::abs(reduced::toda_explicit(0.1, 0.0, 1)), 0.0));
  }

  {
    std::mt19937_64 rng(seed);
    const FermiChart cat(NodalCurve::catenoid(2.0, 0.0), 60.0);
    const FermiChart toda(NodalCurve::toda(0.1), 60.0);
    const auto ec = chart_errors(cat, rng, 10000, 1000);
    const auto et = chart_errors(toda, rng, 10000, 1000);
    out.push_back(make_check("geometry.metric_identity.catenoid", ec.metric, 1e-12));
    out.push_back(make_check("geometry.metric_identity.toda", et.metric, 1e-12));
    out.push_back(make_check("geometry.round_trip.catenoid", ec.round_trip, 1e-10));
    out.push_back(make_check("geometry.round_trip.toda", et.round_trip, 1e-10));
    const auto p = cat.forward(4.0, 0.0);
    out.push_back(make_check("geometry.catenoid_point",
                             std::abs(p[0] - 4.0) + std::abs(p[1] - 2.0 * std::acosh(2.0)), 1e-12));
    const double r = 6e6;
    out.push_back(make_check("geometry.catenoid_slope_limit",
                             std::abs(r * NodalCurve::catenoid(6.0, 0.0).d1(r) - 6.0), 1e-6));
    const auto fit = pde::growth_rate_fit(reduced::catenoid_curve(2.0, 0.0), 1e3, 1e4);
    out.push_back(make_check("geometry.catenoid_growth_fit", std::abs(fit.k - 2.0), 1e-3));
  }

  {
    double ode = 0.0, wr = 0.0;
    for (int n = 0; n <= 2000; ++n) {
      const double z = -10.0 + 0.01 * n;
      const auto j = reduced::jacobi_fields(z);
      const double th = std::tanh(z), ch2 = std::cosh(z) * std::cosh(z);
      const double xi1pp = std::sinh(z);
      const double xi2pp = z * std::sinh(z) + std::cosh(z);
      ode = std::max({ode, std::abs(xi1pp - 2.0 * th * j.dxi1 + j.xi1) / ch2,
                      std::abs(xi2pp - 2.0 * th * j.dxi2 + j.xi2) / ch2});
      wr = std::max(wr, std::abs(j.wronskian - ch2) / ch2);
    }
    out.push_back(make_check("reduced.jacobi_ode_residual", ode, 1e-10));
    out.push_back(make_check("reduced.jacobi_wronskian", wr, 1e-10));
  }

  {
    const double eps = 0.1, r0 = 1.0;
    reduced::StepControl control;
    control.form = reduced::FluxForm::small_slope;
    const auto traj = reduced::integrate_reduced(reduced::toda_explicit(eps, r0, 0),
                                                 reduced::toda_explicit(eps, r0, 1), r0, 100.0, control);
    double track = 0.0;
    bool monotone = true;
    for (std::size_t i = 0; i < traj.r.size(); ++i) {
      track = std::max(track, std::abs(traj.p[i] - reduced::toda_explicit(eps, traj.r[i], 0)));
      if (i > 0 && traj.mu[i] < traj.mu[i - 1]) monotone = false;
    }
    out.push_back(make_check("reduced.small_slope_tracks_toda", track, 1e-6));
    out.push_back({"reduced.flux_monotone", monotone ? 0.0 : 1.0, 0.0, monotone});
  }
  return out;
}

}  // namespace twoend::cli
