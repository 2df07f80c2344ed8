#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "twoend/errors.hpp"
#include "twoend/pde.hpp"

namespace twoend::pde {

namespace {

bool unknown_node(const ScalarField& f, int i, int j) { return !f.is_dirichlet(i, j); }

double node_residual(const ScalarField& u, int i, int j) {
  const AxiGrid& g = u.grid;
  const double hr2 = g.h_r() * g.h_r(), hz2 = g.h_z() * g.h_z();
  const double c = u(i, j);
  double lap;
  if (i == 0) {
    lap = 4.0 * (u(1, j) - c) / hr2;
  } else {
    const double e = u(i + 1, j), w = u(i - 1, j);
    lap = (e - 2.0 * c + w) / hr2 + (e - w) / (2.0 * g.h_r() * g.r(i));
  }
  if (j == 0)
    lap += 2.0 * (u(i, 1) - c) / hz2;
  else
    lap += (u(i, j + 1) - 2.0 * c + u(i, j - 1)) / hz2;
  return lap + c - c * c * c;
}

}  // namespace

ScalarField residual(const ScalarField& field) {
  ScalarField out(field.grid, 0.0);
  out.bottom = field.bottom;
  out.far_field = field.far_field;
  const AxiGrid& g = field.grid;
  for (int j = 0; j < g.n_z; ++j)
    for (int i = 0; i < g.n_r; ++i)
      if (unknown_node(field, i, j)) out(i, j) = node_residual(field, i, j);
  return out;
}

double residual_norm(const ScalarField& field) {
  const AxiGrid& g = field.grid;
  double m = 0.0;
  for (int j = 0; j < g.n_z; ++j)
    for (int i = 0; i < g.n_r; ++i)
      if (unknown_node(field, i, j)) m = std::max(m, std::abs(node_residual(field, i, j)));
  return m;
}

struct DiscreteSystem::Solver {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu;
  bool analyzed = false;
  bool lu_current = false;
};

DiscreteSystem::DiscreteSystem(const AxiGrid& grid, BottomBoundary bottom)
    : grid_(grid), bottom_(bottom), index_(grid.size(), -1), solver_(std::make_unique<Solver>()) {
  ScalarField probe(grid);
  probe.bottom = bottom;
  for (int j = 0; j < grid.n_z; ++j)
    for (int i = 0; i < grid.n_r; ++i)
      if (!probe.is_dirichlet(i, j)) {
        index_[grid.index(i, j)] = static_cast<int>(nodes_.size());
        nodes_.push_back({i, j});
      }

  const int n = unknowns();
  const double hr = grid.h_r(), hz = grid.h_z();
  const double hr2 = hr * hr, hz2 = hz * hz;
  weights_.resize(n);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * 5);
  for (int p = 0; p < n; ++p) {
    const auto [i, j] = nodes_[p];
    const double wr = i == 0 ? hr / 8.0 : grid.r(i);
    const double vz = (j == 0 && bottom == BottomBoundary::even) ? 0.5 : 1.0;
    const double W = wr * vz;
    weights_[p] = W;
    auto add = [&](int ii, int jj, double coef) {
      const int q = index_[grid.index(ii, jj)];
      if (q >= 0) trip.emplace_back(p, q, W * coef);
    };
    double diag = 0.0;
    if (i == 0) {
      add(1, j, 4.0 / hr2);
      diag -= 4.0 / hr2;
    } else {
      const double adv = 1.0 / (2.0 * hr * grid.r(i));
      add(i + 1, j, 1.0 / hr2 + adv);
      add(i - 1, j, 1.0 / hr2 - adv);
      diag -= 2.0 / hr2;
    }
    if (j == 0) {
      add(i, 1, 2.0 / hz2);
      diag -= 2.0 / hz2;
    } else {
      add(i, j + 1, 1.0 / hz2);
      add(i, j - 1, 1.0 / hz2);
      diag -= 2.0 / hz2;
    }
    trip.emplace_back(p, p, W * diag);
  }
  lap_.resize(n, n);
  lap_.setFromTriplets(trip.begin(), trip.end());
  lap_.makeCompressed();
  jac_ = lap_;
  diag_pos_.resize(n);
  for (int col = 0; col < n; ++col)
    for (int k = lap_.outerIndexPtr()[col]; k < lap_.outerIndexPtr()[col + 1]; ++k)
      if (lap_.innerIndexPtr()[k] == col) diag_pos_[col] = k;
}

DiscreteSystem::~DiscreteSystem() = default;
DiscreteSystem::DiscreteSystem(DiscreteSystem&&) noexcept = default;
DiscreteSystem& DiscreteSystem::operator=(DiscreteSystem&&) noexcept = default;

Eigen::VectorXd DiscreteSystem::weighted_residual(const ScalarField& u) const {
  Eigen::VectorXd g(unknowns());
  for (int p = 0; p < unknowns(); ++p) g[p] = weights_[p] * node_residual(u, nodes_[p][0], nodes_[p][1]);
  return g;
}

Eigen::VectorXd DiscreteSystem::gather(const ScalarField& u) const {
  Eigen::VectorXd x(unknowns());
  for (int p = 0; p < unknowns(); ++p) x[p] = u(nodes_[p][0], nodes_[p][1]);
  return x;
}

void DiscreteSystem::scatter_add(const Eigen::VectorXd& delta, double scale, ScalarField& u) const {
  for (int p = 0; p < unknowns(); ++p) u(nodes_[p][0], nodes_[p][1]) += scale * delta[p];
}

void DiscreteSystem::factorize(const ScalarField& u) {
  std::copy(lap_.valuePtr(), lap_.valuePtr() + lap_.nonZeros(), jac_.valuePtr());
  for (int p = 0; p < unknowns(); ++p) {
    const double v = u(nodes_[p][0], nodes_[p][1]);
    jac_.valuePtr()[diag_pos_[p]] += weights_[p] * (1.0 - 3.0 * v * v);
  }
  if (!solver_->analyzed) {
    solver_->ldlt.analyzePattern(jac_);
    solver_->analyzed = true;
  }
  solver_->ldlt.factorize(jac_);
  solver_->lu_current = false;
  if (solver_->ldlt.info() != Eigen::Success)
    throw ConvergenceError("newton: sparse LDL^T factorisation failed", ConvergenceError::Kind::linear_solve, {});
}

Eigen::VectorXd DiscreteSystem::solve(const Eigen::VectorXd& rhs) const {
  constexpr double target = 1e-10;
  const double scale = std::max(rhs.norm(), 1e-300);
  Eigen::VectorXd x = solver_->ldlt.solve(rhs);
  for (int refine = 0; refine < 2; ++refine) {
    const Eigen::VectorXd r = rhs - jac_ * x;
    if (r.norm() <= target * scale) return x;
    x += solver_->ldlt.solve(r);
  }
  if ((rhs - jac_ * x).norm() <= target * scale) return x;
  if (!solver_->lu_current) {
    if (!solver_->lu) solver_->lu = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    solver_->lu->compute(jac_);
    if (solver_->lu->info() != Eigen::Success)
      throw ConvergenceError("newton: sparse LU factorisation failed", ConvergenceError::Kind::linear_solve, {});
    solver_->lu_current = true;
  }
  x = solver_->lu->solve(rhs);
  const double rel = (rhs - jac_ * x).norm() / scale;
  if (!(rel <= target)) {
    std::ostringstream msg;
    msg << "newton: linear solve relative residual " << rel << " above " << target;
    throw ConvergenceError(msg.str(), ConvergenceError::Kind::linear_solve, {});
  }
  return x;
}

double DiscreteSystem::condition_estimate() const {
  const Eigen::VectorXd d = solver_->ldlt.vectorD().cwiseAbs();
  const double lo = d.minCoeff();
  return lo > 0.0 ? d.maxCoeff() / lo : std::numeric_limits<double>::infinity();
}

NewtonResult newton_solve(const ScalarField& initial, const NewtonOptions& options) {
  DiscreteSystem system(initial.grid, initial.bottom);
  return newton_solve(initial, system, options);
}

NewtonResult newton_solve(const ScalarField& initial, DiscreteSystem& system, const NewtonOptions& options) {
  if (!(options.tol >= 1e-10)) throw DomainError("newton: tolerance must be at least 1e-10");
  NewtonResult out;
  out.field = initial;
  double current = residual_norm(out.field);
  if (!std::isfinite(current)) throw DomainError("newton: initial residual is not finite");
  const double initial_norm = current;
  out.history.push_back(current);
  for (int it = 1; current >= options.tol; ++it) {
    if (it > options.max_iter) {
      std::ostringstream msg;
      msg << "newton: no convergence in " << options.max_iter << " iterations (residual " << current << ")";
      throw ConvergenceError(msg.str(), ConvergenceError::Kind::max_iterations, out.history);
    }
    system.factorize(out.field);
    const Eigen::VectorXd delta = system.solve(-system.weighted_residual(out.field));
    double scale = 1.0;
    ScalarField trial = out.field;
    double trial_norm = 0.0;
    for (int halving = 0; halving <= options.max_halvings; ++halving, scale *= 0.5) {
      trial = out.field;
      system.scatter_add(delta, scale, trial);
      trial_norm = residual_norm(trial);
      if (trial_norm < current) break;
    }
    out.field = std::move(trial);
    current = trial_norm;
    out.history.push_back(current);
    out.iterations = it;
    if (!(current <= options.divergence_factor * initial_norm)) {
      std::ostringstream msg;
      msg << "newton: diverged (residual " << current << " > " << options.divergence_factor << " x initial)";
      throw ConvergenceError(msg.str(), ConvergenceError::Kind::divergence, out.history);
    }
  }
  out.residual_norm = current;
  return out;
}

}  // namespace twoend::pde
