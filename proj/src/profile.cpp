#include "twoend/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "twoend/errors.hpp"
#include "twoend/quadrature.hpp"

namespace twoend::profile {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr int kPanelOrder = 10;

// Decay rate of the integrand at x towards +-infinity, from a centred
// log-derivative. Returns a non-positive value when it does not decay.
double decay_rate(const std::function<double(double)>& g, double x, double outward) {
  const double step = 0.25;
  const double inner = std::abs(g(x - outward * step));
  const double outer = std::abs(g(x + outward * step));
  if (inner <= 0.0 || outer <= 0.0) return std::numeric_limits<double>::infinity();
  return (std::log(inner) - std::log(outer)) / (2.0 * step);
}

struct Tail {
  double value = 0.0;
  double error = 0.0;
};

Tail tail_beyond(const std::function<double(double)>& g, double x, double outward) {
  const double lambda = decay_rate(g, x, outward);
  if (!(lambda > 0.0)) {
    std::ostringstream msg;
    msg << "integrand does not decay at " << outward * x;
    throw AccuracyError(msg.str(), std::numeric_limits<double>::infinity());
  }
  if (std::isinf(lambda)) return {};
  const double gx = g(x);
  Tail tail;
  tail.value = gx / lambda;
  // The fitted rate drifts by the next exponential order; use the drift
  // one unit further out as the relative uncertainty of the tail.
  const double lambda_far = decay_rate(g, x + outward, outward);
  const double drift = std::isinf(lambda_far) ? 0.0 : std::abs(lambda_far - lambda) / lambda;
  tail.error = std::abs(tail.value) * drift;
  return tail;
}

}  // namespace

double eval(double t, int order) {
  if (!std::isfinite(t)) throw DomainError("profile: non-finite argument");
  const double h = std::tanh(t / kSqrt2);
  switch (order) {
    case 0:
      return h;
    case 1:
      return (1.0 - h * h) / kSqrt2;
    case 2:
      // H'' = H^3 - H
      return h * h * h - h;
    default:
      throw DomainError("profile: order must be 0, 1 or 2");
  }
}

Integral integrate_line(const std::function<double(double)>& integrand,
                        const QuadratureSpec& spec, double tolerance) {
  if (!(spec.half_width >= 5.0) || spec.nodes < 2 * kPanelOrder) {
    throw AccuracyError("quadrature spec under-resolved (need T >= 5 and at least 20 nodes)",
                        std::numeric_limits<double>::infinity());
  }
  static const quadrature::Rule rule = quadrature::gauss_legendre(kPanelOrder);
  const double T = spec.half_width;
  const int panels = std::max(2, spec.nodes / kPanelOrder);
  const double fine = quadrature::composite(integrand, -T, T, panels, rule);
  const double coarse = quadrature::composite(integrand, -T, T, panels / 2, rule);
  const Tail right = tail_beyond(integrand, T, +1.0);
  const Tail left = tail_beyond(integrand, -T, -1.0);

  Integral out;
  out.tail_correction = right.value + left.value;
  out.value = fine + out.tail_correction;
  out.error_estimate = std::abs(fine - coarse) + right.error + left.error;
  if (out.error_estimate > tolerance) {
    std::ostringstream msg;
    msg << "quadrature self-estimated error " << out.error_estimate << " exceeds " << tolerance;
    throw AccuracyError(msg.str(), out.error_estimate);
  }
  return out;
}

double c1_integrand(double s) {
  const double hp = eval(s, 1);
  return 3.0 * kSqrt2 * hp * hp * std::exp(kSqrt2 * s);
}

double compute_c0(const QuadratureSpec& spec) {
  auto g = [](double t) {
    const double hp = eval(t, 1);
    return hp * hp;
  };
  return integrate_line(g, spec, 1e-10).value;
}

double compute_c1(const QuadratureSpec& spec) {
  // c1 is of order 10, so 1e-10 absolute is well inside the 1e-8 contract.
  return integrate_line(c1_integrand, spec, 1e-10).value;
}

HeteroclinicProfile::HeteroclinicProfile(QuadratureSpec spec)
    : spec_(spec), c0_(compute_c0(spec)), c1_(compute_c1(spec)) {}

double HeteroclinicProfile::toda_a() const noexcept { return 2.0 * kSqrt2 * c1_ / c0_; }

const HeteroclinicProfile& HeteroclinicProfile::standard() {
  static const HeteroclinicProfile instance{};
  return instance;
}

}  // namespace twoend::profile
