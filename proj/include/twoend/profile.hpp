#pragma once

// One-dimensional heteroclinic profile H(t) = tanh(t / sqrt 2) of the
// Allen-Cahn double well F(u) = (u^2 - 1)^2 / 4, and the two interaction
// constants built from it:
//
//   c0 = int H'(t)^2 dt                       (= 2 sqrt2 / 3)
//   c1 = 3 sqrt2 int H'(s)^2 exp(sqrt2 s) ds  (= 8)

#include <functional>

namespace twoend::profile {

/// H (order 0), H' (order 1) or H'' (order 2) at t. Throws DomainError for
/// non-finite t or an order outside {0, 1, 2}.
double eval(double t, int order);

inline double value(double t) { return eval(t, 0); }
inline double d1(double t) { return eval(t, 1); }
inline double d2(double t) { return eval(t, 2); }

/// Double-well potential F(u) = (u^2 - 1)^2 / 4.
inline double potential(double u) {
  const double s = u * u - 1.0;
  return 0.25 * s * s;
}

struct QuadratureSpec {
  double half_width = 25.0;  // truncation T, integrate over [-T, T]
  int nodes = 4000;          // total Gauss-Legendre nodes (10 per panel)
};

/// Result of a line integral with its self-estimated absolute error.
struct Integral {
  double value = 0.0;
  double error_estimate = 0.0;
  double tail_correction = 0.0;
};

/// Integrates an exponentially decaying integrand over the real line:
/// composite Gauss-Legendre on [-T, T] plus exponential tail corrections
/// fitted from the log-derivative at +-T. Throws AccuracyError when the
/// estimate exceeds `tolerance` or when an end does not decay.
Integral integrate_line(const std::function<double(double)>& integrand,
                        const QuadratureSpec& spec, double tolerance);

double compute_c0(const QuadratureSpec& spec = {});
double compute_c1(const QuadratureSpec& spec = {});

/// Integrand of c1, exposed for the asymmetry sanity check.
double c1_integrand(double s);

/// Immutable profile with constants computed once.
class HeteroclinicProfile {
 public:
  explicit HeteroclinicProfile(QuadratureSpec spec = {});

  double value(double t) const { return eval(t, 0); }
  double d1(double t) const { return eval(t, 1); }
  double d2(double t) const { return eval(t, 2); }

  double c0() const noexcept { return c0_; }
  double c1() const noexcept { return c1_; }
  /// a = 2 sqrt2 c1 / c0, the Toda scaling constant.
  double toda_a() const noexcept;
  const QuadratureSpec& quadrature() const noexcept { return spec_; }

  /// Process-wide instance; every module reads its constants from here.
  static const HeteroclinicProfile& standard();

 private:
  QuadratureSpec spec_;
  double c0_;
  double c1_;
};

}  // namespace twoend::profile
