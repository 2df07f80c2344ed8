#pragma once

// Dormand-Prince 5(4) with the standard 4th-order dense output.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace twoend::ode {

struct Tolerance {
  double rel = 1e-10;
  double abs = 1e-12;
};

enum class StepStatus { accepted, rejected, invalid };

template <std::size_t N>
class Dopri5 {
 public:
  using State = std::array<double, N>;

  Dopri5(double t, const State& y, double h, Tolerance tol) : t_(t), y_(y), h_(h), tol_(tol) {}

  double t() const { return t_; }
  const State& y() const { return y_; }
  double step_size() const { return h_; }
  void limit_step(double h_max) { h_ = std::min(h_, h_max); }

  /// Attempts one step of at most h_max. `rhs(t, y, dy)` returns false when
  /// y lies outside the domain of the vector field; the step is then
  /// rejected and shrunk.
  template <class Rhs>
  StepStatus step(Rhs&& rhs, double h_max) {
    const double h = std::min(h_, h_max);
    State k1, k2, k3, k4, k5, k6, k7, tmp, y1;
    auto axpy = [&](std::initializer_list<std::pair<double, const State*>> terms) {
      for (std::size_t i = 0; i < N; ++i) {
        double s = y_[i];
        for (const auto& [c, k] : terms) s += h * c * (*k)[i];
        tmp[i] = s;
      }
      return tmp;
    };
    auto shrink = [&] {
      h_ = 0.25 * h;
      return StepStatus::invalid;
    };
    if (!rhs(t_, y_, k1)) return shrink();
    if (!rhs(t_ + h / 5.0, axpy({{1.0 / 5.0, &k1}}), k2)) return shrink();
    if (!rhs(t_ + 3.0 * h / 10.0, axpy({{3.0 / 40.0, &k1}, {9.0 / 40.0, &k2}}), k3)) return shrink();
    if (!rhs(t_ + 4.0 * h / 5.0, axpy({{44.0 / 45.0, &k1}, {-56.0 / 15.0, &k2}, {32.0 / 9.0, &k3}}), k4))
      return shrink();
    if (!rhs(t_ + 8.0 * h / 9.0,
             axpy({{19372.0 / 6561.0, &k1}, {-25360.0 / 2187.0, &k2}, {64448.0 / 6561.0, &k3},
                   {-212.0 / 729.0, &k4}}),
             k5))
      return shrink();
    if (!rhs(t_ + h,
             axpy({{9017.0 / 3168.0, &k1}, {-355.0 / 33.0, &k2}, {46732.0 / 5247.0, &k3},
                   {49.0 / 176.0, &k4}, {-5103.0 / 18656.0, &k5}}),
             k6))
      return shrink();
    y1 = axpy({{35.0 / 384.0, &k1}, {500.0 / 1113.0, &k3}, {125.0 / 192.0, &k4},
               {-2187.0 / 6784.0, &k5}, {11.0 / 84.0, &k6}});
    if (!rhs(t_ + h, y1, k7)) return shrink();

    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double e = h * (71.0 / 57600.0 * k1[i] - 71.0 / 16695.0 * k3[i] + 71.0 / 1920.0 * k4[i] -
                            17253.0 / 339200.0 * k5[i] + 22.0 / 525.0 * k6[i] - 1.0 / 40.0 * k7[i]);
      const double sc = tol_.abs + tol_.rel * std::max(std::abs(y_[i]), std::abs(y1[i]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / N);
    if (!std::isfinite(err)) return shrink();
    const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-300), -0.2), 0.2, 10.0);
    if (err > 1.0) {
      h_ = h * std::min(fac, 1.0);
      return StepStatus::rejected;
    }
    for (std::size_t i = 0; i < N; ++i) {
      const double d = y1[i] - y_[i];
      cont_[0][i] = y_[i];
      cont_[1][i] = d;
      cont_[2][i] = h * k1[i] - d;
      cont_[3][i] = d - h * k7[i] - cont_[2][i];
      cont_[4][i] = h * (-12715105075.0 / 11282082432.0 * k1[i] + 87487479700.0 / 32700410799.0 * k3[i] -
                         10690763975.0 / 1880347072.0 * k4[i] + 701980252875.0 / 199316789632.0 * k5[i] -
                         1453857185.0 / 822651844.0 * k6[i] + 69997945.0 / 29380423.0 * k7[i]);
    }
    t_prev_ = t_;
    h_prev_ = h;
    t_ += h;
    y_ = y1;
    h_ = h * fac;
    return StepStatus::accepted;
  }

  /// Dense output on the last accepted step.
  State interpolate(double t) const {
    const double th = (t - t_prev_) / h_prev_;
    const double th1 = 1.0 - th;
    State y;
    for (std::size_t i = 0; i < N; ++i)
      y[i] = cont_[0][i] +
             th * (cont_[1][i] + th1 * (cont_[2][i] + th * (cont_[3][i] + th1 * cont_[4][i])));
    return y;
  }

 private:
  double t_;
  State y_;
  double h_;
  Tolerance tol_;
  double t_prev_ = 0.0, h_prev_ = 1.0;
  std::array<State, 5> cont_{};
};

}  // namespace twoend::ode
