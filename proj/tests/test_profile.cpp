#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "twoend/errors.hpp"
#include "twoend/profile.hpp"
#include "twoend/quadrature.hpp"

using namespace twoend;

namespace {

// Trapezoid sums are spectrally accurate for analytic, exponentially decaying
// integrands, so they serve as an independent check of the Gauss-Legendre path.
double trapezoid(double (*f)(double), double a, double b, int n) {
  const double h = (b - a) / n;
  double s = 0.5 * (f(a) + f(b));
  for (int i = 1; i < n; ++i) s += f(a + i * h);
  return s * h;
}

double c0_integrand(double t) {
  const double c = 1.0 / std::cosh(t / std::numbers::sqrt2);
  return 0.5 * c * c * c * c;
}

double c1_oracle_integrand(double s) {
  const double c = 1.0 / std::cosh(s / std::numbers::sqrt2);
  return 3.0 * std::numbers::sqrt2 * 0.5 * c * c * c * c * std::exp(std::numbers::sqrt2 * s);
}

}  // namespace

TEST_CASE("profile values") {
  CHECK(profile::value(0.0) == 0.0);
  CHECK(profile::d1(0.0) == doctest::Approx(1.0 / std::numbers::sqrt2).epsilon(1e-15));
  CHECK(std::abs(profile::value(30.0) - 1.0) < 1e-12);
  CHECK(std::abs(profile::value(-30.0) + 1.0) < 1e-12);
  for (double t = -12.0; t <= 12.0; t += 0.37) {
    const double H = profile::value(t);
    CHECK(profile::value(-t) == -H);
    CHECK(std::abs(H) < 1.0);
    CHECK(profile::d1(t) > 0.0);
    CHECK(profile::d1(t) <= profile::d1(0.0));
    CHECK(std::abs(profile::d2(t) + H - H * H * H) < 1e-12);
    const double g = 1.0 - H * H;
    CHECK(std::abs(profile::d1(t) * profile::d1(t) - 0.5 * g * g) < 1e-12);
  }
}

TEST_CASE("profile domain errors") {
  CHECK_THROWS_AS(profile::eval(std::numeric_limits<double>::quiet_NaN(), 0), DomainError);
  CHECK_THROWS_AS(profile::eval(std::numeric_limits<double>::infinity(), 1), DomainError);
  CHECK_THROWS_AS(profile::eval(0.0, 3), DomainError);
}

TEST_CASE("c0 against closed form and trapezoid oracle") {
  const double closed = 2.0 * std::numbers::sqrt2 / 3.0;
  CHECK(std::abs(closed - 0.9428090415820634) < 1e-15);
  CHECK(std::abs(trapezoid(c0_integrand, -40.0, 40.0, 8000) - closed) < 1e-13);
  const double c0 = profile::compute_c0();
  CHECK(std::abs(c0 - closed) < 1e-10);
  CHECK(std::abs(profile::compute_c0({10.0, 2000}) - c0) < 1e-10);
  CHECK(profile::compute_c0() == c0);
}

TEST_CASE("c0 invariant under rescaling") {
  const double lambda = 2.0;
  const auto rule = quadrature::gauss_legendre(10);
  const double scaled = quadrature::composite(
      [&](double t) {
        const double d = profile::d1(lambda * t);
        return lambda * d * d;
      },
      -20.0, 20.0, 400, rule);
  CHECK(std::abs(scaled - 2.0 * std::numbers::sqrt2 / 3.0) < 1e-10);
}

TEST_CASE("c1 against closed form and trapezoid oracle") {
  CHECK(std::abs(trapezoid(c1_oracle_integrand, -60.0, 60.0, 24000) - 8.0) < 1e-10);
  const double c1 = profile::compute_c1();
  CHECK(std::abs(c1 - 8.0) < 1e-8);
  CHECK(std::abs(profile::compute_c1({15.0, 2000}) - profile::compute_c1({25.0, 4000})) < 1e-8);
  CHECK(profile::c1_integrand(2.0) != profile::c1_integrand(-2.0));
  CHECK(std::abs(c1 / profile::compute_c0() - 6.0 * std::numbers::sqrt2) < 1e-8);
}

TEST_CASE("standard profile stores constants") {
  const auto& p = profile::HeteroclinicProfile::standard();
  CHECK(&p == &profile::HeteroclinicProfile::standard());
  CHECK(std::abs(p.c0() - 2.0 * std::numbers::sqrt2 / 3.0) < 1e-10);
  CHECK(std::abs(p.c1() - 8.0) < 1e-8);
  CHECK(std::abs(p.toda_a() - 24.0) < 1e-7);
}

TEST_CASE("line integral rejects non-decaying integrands") {
  CHECK_THROWS_AS(profile::integrate_line([](double) { return 1.0; }, {}, 1e-10), AccuracyError);
  const auto g = profile::integrate_line([](double t) { return std::exp(-t * t); }, {}, 1e-12);
  CHECK(std::abs(g.value - std::sqrt(std::numbers::pi)) < 1e-12);
}
