#pragma once

// Closed-form nodal curves shared by the geometry and reduced modules.

#include <array>
#include <cmath>
#include <numbers>

namespace twoend::closed_form {

/// Catenoidal end f(r) = k arccosh(r / k) + b and its first three
/// derivatives; requires r >= k.
inline std::array<double, 4> catenoid_jet(double k, double b, double r) {
  const double gap = (r - k) * (r + k);  // r^2 - k^2 without cancellation
  const double root = std::sqrt(gap);
  std::array<double, 4> j{};
  j[0] = k * std::acosh(r / k) + b;
  j[1] = k / root;
  j[2] = -k * r / (gap * root);
  j[3] = k * (2.0 * r * r + k * k) / (gap * gap * root);
  return j;
}

/// Scaled Toda profile q(x) = ln((1 + a x^2)^2 / 8) / (2 sqrt2) and its first
/// three derivatives in x.
inline std::array<double, 4> toda_unit_jet(double a, double x) {
  constexpr double s2 = std::numbers::sqrt2;
  const double g = 1.0 + a * x * x;
  std::array<double, 4> j{};
  j[0] = std::log(g * g / 8.0) / (2.0 * s2);
  j[1] = s2 * a * x / g;
  j[2] = s2 * a * (1.0 - a * x * x) / (g * g);
  j[3] = -2.0 * s2 * a * a * x * (3.0 - a * x * x) / (g * g * g);
  return j;
}

/// q_eps(r) = q(eps r) - (sqrt2 / 2) ln eps with derivatives in r.
inline std::array<double, 4> toda_jet(double a, double eps, double r) {
  auto j = toda_unit_jet(a, eps * r);
  j[0] -= 0.5 * std::numbers::sqrt2 * std::log(eps);
  j[1] *= eps;
  j[2] *= eps * eps;
  j[3] *= eps * eps * eps;
  return j;
}

}  // namespace twoend::closed_form
