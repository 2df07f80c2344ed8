#include "twoend/spline.hpp"

#include <algorithm>
#include <stdexcept>

#include "twoend/errors.hpp"

namespace twoend {

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 3 || y_.size() != n) throw DomainError("spline: need at least 3 matching samples");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1])) throw DomainError("spline: abscissae must be strictly increasing");

  // Tridiagonal system for the knot second derivatives, natural ends.
  m_.assign(n, 0.0);
  std::vector<double> diag(n, 1.0), upper(n, 0.0), rhs(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hl = x_[i] - x_[i - 1];
    const double hr = x_[i + 1] - x_[i];
    const double lower = hl / 6.0;
    diag[i] = (hl + hr) / 3.0;
    upper[i] = hr / 6.0;
    rhs[i] = (y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl;
    // forward elimination against row i-1
    const double factor = lower / diag[i - 1];
    diag[i] -= factor * upper[i - 1];
    rhs[i] -= factor * rhs[i - 1];
  }
  for (std::size_t i = n - 1; i-- > 1;) m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];

  std::vector<double> raw(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) raw[i] = (m_[i + 1] - m_[i]) / (x_[i + 1] - x_[i]);
  d3_.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t lo = i >= 2 ? i - 2 : 0;
    const std::size_t hi = std::min(n - 2, i + 2);
    double sum = 0.0;
    for (std::size_t q = lo; q <= hi; ++q) sum += raw[q];
    d3_[i] = sum / static_cast<double>(hi - lo + 1);
  }
}

std::size_t CubicSpline::interval(double x) const {
  if (x < x_.front() || x > x_.back()) throw DomainError("spline: evaluation outside sampled range");
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = static_cast<std::size_t>(it - x_.begin());
  if (i == 0) return 0;
  return std::min(i - 1, x_.size() - 2);
}

double CubicSpline::value(double x) const {
  const std::size_t i = interval(x);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - x) / h;
  const double b = (x - x_[i]) / h;
  return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::d1(double x) const {
  const std::size_t i = interval(x);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - x) / h;
  const double b = (x - x_[i]) / h;
  return (y_[i + 1] - y_[i]) / h + ((3.0 * b * b - 1.0) * m_[i + 1] - (3.0 * a * a - 1.0) * m_[i]) * h / 6.0;
}

double CubicSpline::d2(double x) const {
  const std::size_t i = interval(x);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - x) / h;
  const double b = (x - x_[i]) / h;
  return a * m_[i] + b * m_[i + 1];
}

double CubicSpline::d3(double x) const { return d3_[interval(x)]; }

}  // namespace twoend
