#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "twoend/cli_io.hpp"
#include "twoend/continuation.hpp"
#include "twoend/errors.hpp"
#include "twoend/geometry.hpp"
#include "twoend/pde.hpp"
#include "twoend/profile.hpp"
#include "twoend/reduced.hpp"

namespace twoend::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

class Run {
 public:
  Run(const RunConfig& config, const RunOptions& options)
      : cfg_(config), dir_(config.out), log_(options.log ? *options.log : std::cerr), quiet_(options.quiet) {}

  RunResult execute();

 private:
  void note(const std::string& msg) {
    if (!quiet_) log_ << "[two-end-lab] " << msg << std::endl;
  }
  void assert_that(const std::string& name, bool pass, double value, double tolerance) {
    report_["assertions"].push_back({{"name", name}, {"pass", pass}, {"value", value}, {"tolerance", tolerance}});
    if (!pass) failed_ = true;
  }
  template <class Writer>
  void artifact(const std::string& name, Writer&& write) {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    write(out);
    if (!out) throw Error("write failed: " + path.string());
    artifacts_.push_back(path);
  }

  json header() const;
  pde::NewtonResult solve_start(json& section);
  void run_solve();
  void run_continue();
  void run_reduced();
  void run_probe();
  void run_verify();

  const RunConfig& cfg_;
  fs::path dir_;
  std::ostream& log_;
  bool quiet_;
  json report_;
  bool failed_ = false;
  std::vector<fs::path> artifacts_;
};

json Run::header() const {
  json h;
  h["schema"] = "two-end-lab/1";
  h["mode"] = to_string(cfg_.mode);
  json config = json::object();
  std::istringstream lines(emit_config(cfg_));
  for (std::string line; std::getline(lines, line);) {
    const auto eq = line.find(" = ");
    config[line.substr(0, eq)] = line.substr(eq + 3);
  }
  h["config"] = config;
  const auto& prof = profile::HeteroclinicProfile::standard();
  h["constants"] = {{"c0", prof.c0()}, {"c1", prof.c1()}, {"toda_a", prof.toda_a()}};
  h["assertions"] = json::array();
  return h;
}

json fit_json(const pde::GrowthFit& f) {
  return {{"k", f.k}, {"c", f.c}, {"rms", f.rms}, {"samples", f.samples}, {"short_window", f.short_window}};
}

json monotonicity_json(const pde::MonotonicityReport& m) {
  json located = json::array();
  for (const auto& p : m.located) located.push_back({p[0], p[1]});
  return {{"passes", m.passes}, {"tol", m.tol},          {"max_ur", m.max_ur},
          {"min_uz", m.min_uz}, {"violations", m.violations}, {"located", located}};
}

pde::NewtonResult Run::solve_start(json& section) {
  const AxiGrid grid = AxiGrid::with_spacing(cfg_.R, cfg_.Z, cfg_.h);
  const NodalCurve curve = NodalCurve::catenoid(cfg_.k, cfg_.b);
  const FermiChart chart(curve, cfg_.R);
  const pde::Ansatz ansatz = pde::build_ansatz(curve, chart, grid);
  ScalarField u0 = ansatz.field;
  pde::apply_far_field(u0, ansatz.field.far_field);
  note("grid " + std::to_string(grid.n_r) + " x " + std::to_string(grid.n_z) + ", ansatz catenoid k = " +
       std::to_string(cfg_.k));

  pde::NewtonOptions opt;
  opt.tol = cfg_.newton_tol;
  opt.max_iter = cfg_.newton_max_iter;
  pde::NewtonResult res;
  try {
    res = pde::newton_solve(u0, opt);
  } catch (const ConvergenceError& e) {
    section["newton"] = {{"converged", false}, {"history", e.history()}};
    throw;
  }
  note("newton converged in " + std::to_string(res.iterations) + " iterations");
  section["grid"] = {{"R", grid.R}, {"Z", grid.Z}, {"n_r", grid.n_r}, {"n_z", grid.n_z},
                     {"h_r", grid.h_r()}, {"h_z", grid.h_z()}};
  section["far_field"] = {{"k", u0.far_field.k}, {"c", u0.far_field.c}};
  section["newton"] = {{"converged", true},
                       {"iterations", res.iterations},
                       {"residual_norm", res.residual_norm},
                       {"history", res.history}};
  assert_that("newton.converged", res.residual_norm <= cfg_.newton_tol, res.residual_norm, cfg_.newton_tol);

  if (cfg_.decompose) {
    try {
      const auto dec = pde::decompose_interface(res.field, ansatz, chart);
      artifact("decomposition.csv", [&](std::ostream& out) {
        out.precision(12);
        out << "r1,h,phi_norm,orthogonality,iterations\n";
        for (std::size_t i = 0; i < dec.r1.size(); ++i)
          out << dec.r1[i] << ',' << dec.h[i] << ',' << dec.phi_norm[i] << ',' << dec.orthogonality[i] << ','
              << dec.iterations[i] << '\n';
      });
      double max_h = 0.0, max_phi = 0.0;
      for (std::size_t i = 0; i < dec.r1.size(); ++i) {
        max_h = std::max(max_h, std::abs(dec.h[i]));
        max_phi = std::max(max_phi, dec.phi_norm[i]);
      }
      section["decomposition"] = {{"slices", dec.r1.size()}, {"max_abs_h", max_h}, {"max_phi_norm", max_phi}};
    } catch (const Error& e) {
      section["decomposition"] = {{"error", e.what()}};
    }
  }
  return res;
}

void Run::run_solve() {
  json& section = report_["solve"];
  pde::NewtonResult res = solve_start(section);
  const ScalarField& u = res.field;
  const AxiGrid& g = u.grid;

  artifact("field.txt", [&](std::ostream& out) { write_field(out, u); });
  const NodalCurve curve = nodal_curve_from_field(u);
  std::vector<double> rs;
  for (int i = 0; i < g.n_r; ++i)
    if (g.r(i) >= curve.r_min() && g.r(i) <= curve.r_max()) rs.push_back(g.r(i));
  artifact("curve.csv", [&](std::ostream& out) { write_curve_csv(out, curve, rs); });

  const auto fit = pde::growth_rate_fit(curve, 0.5 * g.R, g.R);
  section["growth_fit"] = fit_json(fit);
  section["growth_fit"]["window"] = {0.5 * g.R, g.R};
  const double rel = std::abs(fit.k - cfg_.k) / cfg_.k;
  assert_that("growth_rate.within_10_percent", rel < 0.1, rel, 0.1);

  const auto apex = pde::locate_apex(u);
  section["apex"] = {{"axis", pde::to_string(apex.axis)}, {"distance", apex.distance}};

  const auto mono = pde::monotonicity_check(u);
  section["monotonicity"] = monotonicity_json(mono);
  assert_that("monotonicity", mono.passes, std::max(mono.max_ur, -mono.min_uz), mono.tol);

  json flux = json::array();
  double worst = 0.0;
  for (const auto& rect : pde::nested_flux_rects(g)) {
    const auto f = pde::balancing_flux(u, rect);
    const double scale = std::abs(f.top) + std::abs(f.bottom) + std::abs(f.left) + std::abs(f.right);
    worst = std::max(worst, scale > 0.0 ? std::abs(f.value) / scale : 0.0);
    flux.push_back({{"rect", {f.snapped.r_a, f.snapped.r_b, f.snapped.z_top}},
                    {"value", f.value},
                    {"top", f.top},
                    {"bottom", f.bottom},
                    {"left", f.left},
                    {"right", f.right},
                    {"measure", f.measure},
                    {"contaminated", f.contaminated}});
  }
  section["flux"] = flux;
  const double tol = 0.25 * g.h_r() * g.h_z();
  assert_that("flux.relative_below_quarter_h2", worst < tol, worst, tol);
}

void Run::run_continue() {
  json& section = report_["continue"];
  pde::NewtonResult res = solve_start(section);
  const auto start = continuation::make_point(std::move(res.field), res.iterations);
  artifact("field_start.txt", [&](std::ostream& out) { write_field(out, *start.field); });

  continuation::Controls ctl;
  ctl.first_dk = cfg_.first_dk;
  ctl.max_dk = cfg_.max_dk;
  ctl.k_floor = cfg_.k_floor;
  ctl.k_ceiling = cfg_.k_ceiling;
  ctl.max_points = cfg_.max_points;
  ctl.tol = cfg_.newton_tol;

  std::vector<std::pair<std::string, int>> dirs;
  if (cfg_.direction != Direction::up) dirs.emplace_back("down", -1);
  if (cfg_.direction != Direction::down) dirs.emplace_back("up", 1);
  const double flux_tol = 0.25 * start.field->grid.h_r() * start.field->grid.h_z();

  for (const auto& [name, dir] : dirs) {
    note("tracing branch " + name);
    const auto br = continuation::trace_branch(start, dir, ctl);
    artifact("branch_" + name + ".csv", [&](std::ostream& out) { continuation::write_branch_csv(out, br); });
    json points = json::array();
    bool strict = true, diagnostics = true;
    for (std::size_t i = 0; i < br.points.size(); ++i) {
      const auto& p = br.points[i];
      points.push_back({{"s", p.s},
                        {"lambda", p.lambda},
                        {"k", p.k},
                        {"c", p.c},
                        {"apex_axis", pde::to_string(p.apex.axis)},
                        {"apex_dist", p.apex.distance},
                        {"newton_iters", p.newton_iters},
                        {"residual_norm", p.residual_norm},
                        {"monotone", p.monotone},
                        {"flux_relative", p.flux_relative}});
      if (i > 0 && !(dir * (p.k - br.points[i - 1].k) > 0.0)) strict = false;
      const bool growth = std::abs(p.k - p.lambda) < 0.1 * p.lambda;
      if (!(p.monotone && growth && p.residual_norm <= cfg_.newton_tol && p.flux_relative < flux_tol))
        diagnostics = false;
      if (cfg_.dump_branch_fields)
        artifact("field_" + name + "_" + std::to_string(i) + ".txt",
                 [&](std::ostream& out) { write_field(out, *p.field); });
    }
    const auto cls = continuation::classify_endpoint(br.points.back());
    section["branches"][name] = {{"points", points},
                                 {"termination", continuation::to_string(br.reason)},
                                 {"singular_warnings", br.singular_warnings},
                                 {"rejected_steps", br.rejected_steps},
                                 {"closure_b", br.b},
                                 {"endpoint", {{"class", continuation::to_string(cls.kind)},
                                               {"warning", cls.warning},
                                               {"catenoid_deviation", cls.catenoid_deviation}}}};
    assert_that("branch_" + name + ".k_strictly_monotone", strict, static_cast<double>(br.points.size()), 0.0);
    assert_that("branch_" + name + ".point_diagnostics", diagnostics, static_cast<double>(br.points.size()), 0.0);
    note(name + ": " + std::to_string(br.points.size()) + " points, " + continuation::to_string(br.reason));
  }
}

void Run::run_reduced() {
  reduced::StepControl control;
  control.rel_tol = cfg_.rel_tol;
  control.abs_tol = cfg_.abs_tol;
  control.forcing = cfg_.forcing;
  control.form = cfg_.small_slope ? reduced::FluxForm::small_slope : reduced::FluxForm::exact;
  const double p0 = reduced::toda_explicit(cfg_.eps, cfg_.r0, 0);
  const double slope0 = reduced::toda_explicit(cfg_.eps, cfg_.r0, 1);
  const auto traj = reduced::integrate_reduced(p0, slope0, cfg_.r0, cfg_.r_end, control);
  artifact("trajectory.csv", [&](std::ostream& out) { reduced::write_trajectory_csv(out, traj); });

  double deviation = 0.0;
  bool mu_monotone = true;
  for (std::size_t i = 0; i < traj.r.size(); ++i) {
    deviation = std::max(deviation, std::abs(traj.p[i] - reduced::toda_explicit(cfg_.eps, traj.r[i], 0)));
    if (i > 0 && cfg_.forcing == 0.0 && traj.mu[i] < traj.mu[i - 1]) mu_monotone = false;
  }
  json section;
  section["initial"] = {{"r0", cfg_.r0}, {"p0", p0}, {"slope0", slope0}};
  section["form"] = cfg_.small_slope ? "small_slope" : "exact";
  section["samples"] = traj.r.size();
  section["accepted_steps"] = traj.accepted_steps;
  section["rejected_steps"] = traj.rejected_steps;
  section["final"] = {{"r", traj.r.back()}, {"p", traj.p.back()}, {"dp", traj.dp.back()}, {"mu", traj.mu.back()}};
  section["max_deviation_from_toda"] = deviation;
  report_["reduced"] = section;
  if (cfg_.forcing == 0.0) assert_that("reduced.flux_monotone", mu_monotone, 0.0, 0.0);
  if (cfg_.small_slope && cfg_.forcing == 0.0)
    assert_that("reduced.tracks_toda", deviation < 1e-6, deviation, 1e-6);
}

void Run::run_probe() {
  reduced::ProbeOptions opt;
  opt.trials = cfg_.trials;
  opt.seed = cfg_.seed;
  opt.r0 = cfg_.r0;
  opt.p0_min = cfg_.p0_min;
  opt.p0_max = cfg_.p0_max;
  opt.forcing = cfg_.forcing;
  opt.threads = cfg_.threads;
  note("probe k_target = " + std::to_string(cfg_.k_target) + ", " + std::to_string(cfg_.trials) + " trials");
  const auto rep = reduced::nonexistence_probe(cfg_.k_target, opt);
  artifact("probe.csv", [&](std::ostream& out) {
    out.precision(12);
    out << "index,p0,slope0,mu0,final_mu,final_log_r,interaction_reached,failed\n";
    for (const auto& t : rep.trials)
      out << t.index << ',' << t.p0 << ',' << t.slope0 << ',' << t.mu0 << ',' << t.final_mu << ','
          << t.final_log_r << ',' << t.interaction_reached << ',' << t.failed << '\n';
  });
  json failures = json::array();
  for (const auto& t : rep.trials)
    if (t.failed) failures.push_back({{"index", t.index}, {"reason", t.failure}});
  report_["probe"] = {{"k_target", rep.k_target},
                      {"trials", rep.trials.size()},
                      {"seed", rep.seed},
                      {"forcing", rep.forcing},
                      {"min_final_mu", rep.min_final_mu},
                      {"threshold", std::numbers::sqrt2 / 2.0},
                      {"delta_obs", rep.delta_obs},
                      {"failures", rep.failures},
                      {"failure_list", failures},
                      {"undecided", rep.undecided},
                      {"verdict", rep.verdict()}};
  if (cfg_.k_target <= std::numbers::sqrt2 / 2.0 + 1e-12) {
    assert_that("probe.verdict_no_two_end_regime", rep.no_two_end_regime, rep.delta_obs, 0.0);
    assert_that("probe.delta_obs_positive", rep.delta_obs > 0.0, rep.delta_obs, 0.0);
  }
  note("verdict " + rep.verdict());
}

void Run::run_verify() {
  const auto checks = oracle_suite(cfg_.seed);
  json list = json::array();
  for (const auto& c : checks) {
    list.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"tolerance", c.tolerance}});
    assert_that(c.name, c.pass, c.value, c.tolerance);
    note(std::string(c.pass ? "PASS " : "FAIL ") + c.name);
  }
  report_["invariants"] = list;
}

RunResult Run::execute() {
  report_ = header();
  RunResult result;
  try {
    fs::create_directories(dir_);
    switch (cfg_.mode) {
      case Mode::solve: run_solve(); break;
      case Mode::continue_branch: run_continue(); break;
      case Mode::reduced: run_reduced(); break;
      case Mode::probe: run_probe(); break;
      case Mode::verify: run_verify(); break;
    }
    report_["status"] = failed_ ? "fail" : "pass";
    result.exit_code = failed_ ? 1 : 0;
  } catch (const std::exception& e) {
    report_["status"] = "error";
    report_["error"] = {{"message", e.what()}};
    if (const auto* ce = dynamic_cast<const ConvergenceError*>(&e)) report_["error"]["history"] = ce->history();
    note(std::string("error: ") + e.what());
    result.exit_code = 1;
  }
  result.report = report_.dump(2) + "\n";
  try {
    fs::create_directories(dir_);
    artifact("report.json", [&](std::ostream& out) { out << result.report; });
  } catch (const std::exception& e) {
    note(std::string("cannot write report: ") + e.what());
    result.exit_code = 1;
  }
  result.artifacts = artifacts_;
  return result;
}

}  // namespace

RunResult run(const RunConfig& config, const RunOptions& options) {
  Run r(config, options);
  return r.execute();
}

}  // namespace twoend::cli
