#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "twoend/errors.hpp"
#include "twoend/pde.hpp"

using namespace twoend;
using oracle::H;

namespace {

// Flat interface H(z - c) on a narrow strip, Dirichlet bottom.
ScalarField flat_strip(double h, double shift, double R = 2.0, double Z = 20.0) {
  const AxiGrid g = AxiGrid::with_spacing(R, Z, h);
  ScalarField u(g);
  u.bottom = BottomBoundary::dirichlet;
  for (int j = 0; j < g.n_z; ++j)
    for (int i = 0; i < g.n_r; ++i) u(i, j) = H(g.z(j) - shift);
  return u;
}

struct Catenoid {
  AxiGrid grid = AxiGrid::with_spacing(60.0, 60.0, 0.2);
  NodalCurve curve = NodalCurve::catenoid(6.0, 0.0);
  FermiChart chart{curve, 60.0};
  pde::Ansatz ansatz = pde::build_ansatz(curve, chart, grid);
};

const Catenoid& catenoid() {
  static const Catenoid c;
  return c;
}

}  // namespace

TEST_CASE("grid spacing and field io") {
  const AxiGrid g = AxiGrid::with_spacing(10.0, 5.0, 0.1);
  CHECK(g.n_r == 101);
  CHECK(g.n_z == 51);
  CHECK(g.h_r() == doctest::Approx(0.1));
  CHECK_THROWS_AS(AxiGrid::with_spacing(10.0, 5.0, 0.5), DomainError);

  ScalarField u(g);
  u.far_field = {2.5, -1.25};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& v : u.values) v = dist(rng);
  std::stringstream io;
  write_field(io, u);
  CHECK(io.str().rfind("axi-field v1 101 51 ", 0) == 0);
  const ScalarField back = read_field(io);
  CHECK(back.grid == g);
  CHECK(back.values == u.values);
  CHECK(back.far_field.k == 2.5);
  CHECK(back.far_field.c == -1.25);
}

TEST_CASE("bicubic interpolation reproduces even quadratics") {
  const AxiGrid g = AxiGrid::with_spacing(10.0, 10.0, 0.25);
  ScalarField u(g);
  auto f = [](double r, double z) { return 1.0 + 0.5 * r * r - 0.3 * z * z + 0.1 * r * r * z * z; };
  for (int j = 0; j < g.n_z; ++j)
    for (int i = 0; i < g.n_r; ++i) u(i, j) = f(g.r(i), g.z(j));
  for (double r : {0.0, 0.1, 3.33, 7.7})
    for (double z : {-2.2, 0.0, 0.05, 4.4})
      CHECK(interpolate(u, r, z) == doctest::Approx(f(r, z)).epsilon(1e-12));
  CHECK_THROWS_AS(interpolate(u, 11.0, 0.0), DomainError);
}

TEST_CASE("far-field composite") {
  const double k = 2.0, c = 1.0, r = 10.0;
  const double z = k * std::log(r) + c;
  CHECK(std::abs(pde::far_field_bc(k, c, r, z)) < 1e-6);
  const double r10 = std::exp((10.0 - c) / k);
  const double v = pde::far_field_bc(k, c, r10, 0.0);
  CHECK(v > -1.0);
  CHECK(v < -1.0 + 1e-3);
  for (double zz : {0.3, 2.0, 9.0}) CHECK(pde::far_field_bc(k, c, r, zz) == pde::far_field_bc(k, c, r, -zz));
  const auto ff = pde::far_field_for(NodalCurve::catenoid(6.0, 0.5), 60.0);
  CHECK(ff.k == 6.0);
  CHECK(ff.c == doctest::Approx(6.0 * std::log(2.0 / 6.0) + 0.5));
}

TEST_CASE("catenoid ansatz") {
  const auto& cat = catenoid();
  pde::AnsatzModel model(cat.curve, cat.chart, 60.0);
  CHECK(model.value(30.0, 60.0) >= 1.0 - 1e-3);
  CHECK(model.value(30.0, 60.0) <= 1.0);
  for (double r : {20.0, 30.0, 50.0}) CHECK(std::abs(model.value(r, cat.curve.value(r))) < 1e-3);
  for (double r : {0.0, 3.0, 7.0, 25.0})
    for (double z : {0.5, 4.0, 11.0}) CHECK(model.value(r, z) == model.value(r, -z));
  for (double v : cat.ansatz.field.values) {
    CHECK(v >= -1.0 - 1e-12);
    CHECK(v <= 1.0 + 1e-12);
  }
  CHECK(cat.ansatz.r0 == doctest::Approx(18.0).epsilon(0.05));

  // residual of the ansatz decays away from the waist
  ScalarField u = cat.ansatz.field;
  pde::apply_far_field(u, u.far_field);
  const ScalarField e = pde::residual(u);
  double inner = 0.0, outer = 0.0;
  for (int j = 0; j < e.grid.n_z; ++j)
    for (int i = 0; i < e.grid.n_r; ++i) {
      const double r = e.grid.r(i);
      if (r >= 6.0 && r < 12.0) inner = std::max(inner, std::abs(e(i, j)));
      if (r >= 12.0 && r < 58.0) outer = std::max(outer, std::abs(e(i, j)));
    }
  CHECK(outer < inner);
}

TEST_CASE("residual of constants and flat interfaces") {
  const AxiGrid g = AxiGrid::with_spacing(5.0, 5.0, 0.25);
  CHECK(pde::residual_norm(ScalarField(g, 1.0)) == 0.0);
  const double e1 = pde::residual_norm(flat_strip(0.1, 8.0));
  const double e2 = pde::residual_norm(flat_strip(0.05, 8.0));
  CHECK(e2 < 1e-3);
  CHECK(e1 / e2 > 3.5);
  CHECK(e1 / e2 < 4.5);
}

TEST_CASE("jacobian is symmetric and consistent") {
  const AxiGrid g = AxiGrid::with_spacing(4.0, 4.0, 0.25);
  ScalarField u(g);
  for (int j = 0; j < g.n_z; ++j)
    for (int i = 0; i < g.n_r; ++i) u(i, j) = H(g.z(j) - 1.0 - 0.2 * g.r(i));
  pde::DiscreteSystem sys(g, BottomBoundary::even);
  sys.factorize(u);
  const Eigen::SparseMatrix<double> J = sys.jacobian();
  const Eigen::SparseMatrix<double> Jt = J.transpose();
  CHECK((J - Jt).norm() <= 1e-12 * J.norm());

  const Eigen::VectorXd r0 = sys.weighted_residual(u);
  Eigen::VectorXd dir = Eigen::VectorXd::LinSpaced(sys.unknowns(), -1.0, 1.0);
  const double eps = 1e-6;
  ScalarField up = u, um = u;
  sys.scatter_add(dir, eps, up);
  sys.scatter_add(dir, -eps, um);
  const Eigen::VectorXd fd = (sys.weighted_residual(up) - sys.weighted_residual(um)) / (2.0 * eps);
  CHECK((fd - J * dir).norm() <= 1e-6 * fd.norm());

  const Eigen::VectorXd x = sys.solve(r0);
  CHECK((J * x - r0).norm() <= 1e-10 * r0.norm());
  CHECK(sys.condition_estimate() >= 1.0);
}

TEST_CASE("newton on a flat interface converges to the discrete profile") {
  const double h = 0.1, shift = 5.0;
  ScalarField u = flat_strip(h, shift);
  const auto exact = oracle::discrete_profile(shift, u.grid.h_z(), u.grid.n_z);
  for (int j = 0; j < u.grid.n_z; ++j) u(u.grid.n_r - 1, j) = exact[j];
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> noise(-0.05, 0.05);
  for (int j = 1; j < u.grid.n_z - 1; ++j)
    for (int i = 0; i < u.grid.n_r - 1; ++i) u(i, j) += noise(rng);

  pde::NewtonOptions opt;
  opt.tol = 1e-10;
  const auto res = pde::newton_solve(u, opt);
  CHECK(res.residual_norm < 1e-10);
  double err = 0.0;
  for (int j = 0; j < u.grid.n_z; ++j)
    for (int i = 0; i < u.grid.n_r; ++i) err = std::max(err, std::abs(res.field(i, j) - exact[j]));
  CHECK(err < 1e-8);
  const auto& hist = res.history;
  REQUIRE(hist.size() >= 3);
  const std::size_t n = hist.size();
  CHECK(hist[n - 1] < 10.0 * hist[n - 2] * hist[n - 2] + 1e-13);
  CHECK(res.field.max_abs() <= 1.0 + 1e-6);

  const auto again = pde::newton_solve(res.field, opt);
  CHECK(again.iterations <= 1);
  double moved = 0.0;
  for (std::size_t q = 0; q < again.field.values.size(); ++q)
    moved = std::max(moved, std::abs(again.field.values[q] - res.field.values[q]));
  CHECK(moved < 1e-10);
}

TEST_CASE("newton reports nonconvergence with history") {
  ScalarField u = flat_strip(0.1, 5.0);
  for (int j = 1; j < u.grid.n_z - 1; ++j) u(0, j) += 0.3;
  pde::NewtonOptions opt;
  opt.max_iter = 1;
  try {
    pde::newton_solve(u, opt);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.kind() == ConvergenceError::Kind::max_iterations);
    CHECK(e.history().size() == 2u);
  }
  opt.tol = 1e-12;
  CHECK_THROWS_AS(pde::newton_solve(u, opt), DomainError);
}

TEST_CASE("monotonicity check") {
  const ScalarField strip = flat_strip(0.1, 5.0);
  const auto ok = pde::monotonicity_check(strip);
  CHECK(ok.passes);
  CHECK(ok.tol == doctest::Approx(10.0 * pde::residual_norm(strip) + 1e-8));

  ScalarField bumped = strip;
  bumped(10, 60) += 0.5;
  const auto bad = pde::monotonicity_check(bumped, 1e-8);
  CHECK_FALSE(bad.passes);
  CHECK(bad.violations > 0);
  REQUIRE_FALSE(bad.located.empty());
  bool near = false;
  for (const auto& p : bad.located) near |= std::abs(p[0] - 1.0) < 0.25 && std::abs(p[1] - 6.0) < 0.25;
  CHECK(near);
}

TEST_CASE("growth rate fit") {
  std::vector<double> r, f;
  for (int i = 0; i <= 200; ++i) {
    r.push_back(10.0 + 0.5 * i);
    f.push_back(3.0 * std::log(r.back()) + 1.0);
  }
  const auto exact = pde::growth_rate_fit(NodalCurve::sampled(r, f), 10.0, 110.0);
  CHECK(exact.k == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(exact.c == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(exact.rms < 1e-10);
  CHECK_FALSE(exact.short_window);

  const auto cat = pde::growth_rate_fit(NodalCurve::catenoid(6.0, 0.0), 60.0, 600.0);
  CHECK(std::abs(cat.k - 6.0) < 2e-2);
  const auto toda = pde::growth_rate_fit(NodalCurve::toda(0.05), 1e3, 1e4);
  CHECK(std::abs(toda.k - std::numbers::sqrt2) < 1e-2);
  CHECK(pde::growth_rate_fit(NodalCurve::catenoid(6.0, 0.0), 30.0, 60.0).short_window);
}

TEST_CASE("balancing flux") {
  const AxiGrid g = AxiGrid::with_spacing(10.0, 20.0, 0.05);
  const ScalarField one(g, 1.0);
  CHECK(pde::balancing_flux(one, {2.0, 6.0, 10.0}).value == 0.0);

  ScalarField u(g);
  u.bottom = BottomBoundary::dirichlet;
  for (int j = 0; j < g.n_z; ++j)
    for (int i = 0; i < g.n_r; ++i) u(i, j) = H(g.z(j) - 8.0);
  const auto f = pde::balancing_flux(u, {2.0, 6.0, 16.0});
  CHECK(std::abs(f.value) < 1e-3);
  CHECK_FALSE(f.contaminated);
  CHECK(pde::balancing_flux(u, {2.0, 10.0, 16.0}).contaminated);

  const auto rects = pde::nested_flux_rects(AxiGrid::with_spacing(60.0, 60.0, 0.2));
  REQUIRE(rects.size() == 3u);
  CHECK(rects[0].r_a == doctest::Approx(10.0));
  CHECK(rects[1].r_b == doctest::Approx(40.0));
  CHECK(rects[2].z_top == doctest::Approx(40.0));
}

TEST_CASE("apex location") {
  const auto& cat = catenoid();
  const auto apex = pde::locate_apex(cat.ansatz.field);
  CHECK(apex.axis == pde::ApexAxis::r_axis);
  CHECK(apex.distance == doctest::Approx(6.0).epsilon(0.02));
  CHECK(pde::to_string(apex.axis) == "r");
  const AxiGrid g = AxiGrid::with_spacing(5.0, 5.0, 0.25);
  CHECK_THROWS_AS(pde::locate_apex(ScalarField(g, 1.0)), ExtractionError);
}

TEST_CASE("self-decomposition of the ansatz is trivial") {
  const auto& cat = catenoid();
  const auto dec = pde::decompose_interface(cat.ansatz.field, cat.ansatz, cat.chart);
  REQUIRE(dec.r1.size() > 10);
  for (std::size_t i = 0; i < dec.r1.size(); ++i) {
    CHECK(std::abs(dec.h[i]) < 1e-8);
    CHECK(dec.phi_norm[i] < 1e-8);
    CHECK(std::abs(dec.orthogonality[i]) < 1e-8);
  }
}

TEST_CASE("planted shift is recovered along the normal") {
  const auto& cat = catenoid();
  const double dz = 0.1;
  const auto shifted = pde::build_ansatz(cat.curve.shifted(dz), FermiChart(cat.curve.shifted(dz), 60.0), cat.grid);
  const auto dec = pde::decompose_interface(shifted.field, cat.ansatz, cat.chart);
  REQUIRE(dec.r1.size() > 10);
  for (std::size_t i = 0; i < dec.r1.size(); ++i) {
    const double fp = cat.curve.d1(dec.r1[i]);
    CHECK(std::abs(dec.h[i] - dz / std::sqrt(1.0 + fp * fp)) < 5e-3);
    CHECK(std::abs(dec.orthogonality[i]) < 1e-8);
  }
}
