#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace twoend {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (non-finite
/// input, r < k on a catenoid, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A quadrature or integrator could not certify the requested accuracy.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double estimate)
      : Error(what), estimate_(estimate) {}
  double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

/// Point outside the validity region of a Fermi chart, or focal point hit.
class ChartDomainError : public Error {
 public:
  using Error::Error;
};

/// Nodal-set extraction failed; carries the offending grid columns.
class ExtractionError : public Error {
 public:
  ExtractionError(const std::string& what, std::vector<int> columns)
      : Error(what), columns_(std::move(columns)) {}
  const std::vector<int>& columns() const noexcept { return columns_; }

 private:
  std::vector<int> columns_;
};

/// Reduced ODE trajectory reached a vertical tangent (mu >= r).
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, double r) : Error(what), r_(r) {}
  double location() const noexcept { return r_; }

 private:
  double r_;
};

/// Adaptive step size fell below the underflow threshold.
class StiffnessError : public Error {
 public:
  StiffnessError(const std::string& what, double r) : Error(what), r_(r) {}
  double location() const noexcept { return r_; }

 private:
  double r_;
};

/// Nonlinear iteration failed; carries the residual history.
class ConvergenceError : public Error {
 public:
  enum class Kind { max_iterations, divergence, linear_solve, singular };
  ConvergenceError(const std::string& what, Kind kind, std::vector<double> history)
      : Error(what), kind_(kind), history_(std::move(history)) {}
  Kind kind() const noexcept { return kind_; }
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  Kind kind_;
  std::vector<double> history_;
};

/// Ansatz construction hit nodes that no chart and no fallback could cover.
class ConstructionError : public Error {
 public:
  ConstructionError(const std::string& what, std::vector<std::pair<int, int>> nodes)
      : Error(what), nodes_(std::move(nodes)) {}
  const std::vector<std::pair<int, int>>& nodes() const noexcept { return nodes_; }

 private:
  std::vector<std::pair<int, int>> nodes_;
};

/// Per-slice solve of the modulation function failed.
class DecompositionError : public Error {
 public:
  DecompositionError(const std::string& what, double r1) : Error(what), r1_(r1) {}
  double slice() const noexcept { return r1_; }

 private:
  double r1_;
};

/// Configuration text could not be parsed or validated.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line) : Error(what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace twoend
