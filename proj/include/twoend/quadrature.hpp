#pragma once

#include <functional>
#include <span>
#include <vector>

namespace twoend::quadrature {

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

Rule gauss_legendre(int n);

/// Composite Gauss-Legendre over [a, b] with `panels` equal panels of the
/// given rule.
double composite(const std::function<double(double)>& f, double a, double b, int panels,
                 const Rule& rule);

/// Composite Simpson on equally spaced samples (odd count >= 3).
double simpson(std::span<const double> samples, double spacing);

}  // namespace twoend::quadrature
