#include "twoend/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace twoend::quadrature {

Rule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = 2.0;
  }
  return rule;
}

double composite(const std::function<double(double)>& f, double a, double b, int panels,
                 const Rule& rule) {
  const double width = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * width;
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q)
      sum += rule.weights[q] * f(mid + 0.5 * width * rule.nodes[q]);
    total += 0.5 * width * sum;
  }
  return total;
}

double simpson(std::span<const double> samples, double spacing) {
  const std::size_t n = samples.size();
  if (n < 3 || n % 2 == 0) throw std::invalid_argument("simpson: need an odd sample count >= 3");
  double sum = samples.front() + samples.back();
  for (std::size_t i = 1; i + 1 < n; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * samples[i];
  return sum * spacing / 3.0;
}

}  // namespace twoend::quadrature
