#pragma once

#include <vector>

namespace twoend {

/// Natural C2 cubic spline through strictly increasing abscissae. The third
/// derivative is the piecewise-constant derivative of the piecewise-linear
/// second derivative, smoothed by a 5-interval moving average.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> x, std::vector<double> y);

  double value(double x) const;
  double d1(double x) const;
  double d2(double x) const;
  double d3(double x) const;

  double front() const { return x_.front(); }
  double back() const { return x_.back(); }
  const std::vector<double>& knots() const { return x_; }
  const std::vector<double>& values() const { return y_; }

 private:
  std::size_t interval(double x) const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;   // second derivatives at knots
  std::vector<double> d3_;  // smoothed third derivative per interval
};

}  // namespace twoend
