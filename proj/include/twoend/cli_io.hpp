#pragma once

// Run configuration, orchestration and artifact emission.
//
// Configs are flat `key = value` text with `#` comments. Every run writes a
// JSON report (`report.json`, schema "two-end-lab/1") plus mode-specific
// field dumps and CSV tables into the output directory.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace twoend::cli {

enum class Mode { solve, continue_branch, reduced, probe, verify };
enum class AnsatzKind { catenoid, toda };
enum class Direction { down, up, both };

std::string to_string(Mode m);
std::string to_string(AnsatzKind a);
std::string to_string(Direction d);

struct RunConfig {
  Mode mode = Mode::verify;
  std::string out = "out";
  int threads = 0;
  std::uint64_t seed = 20240611;

  // grid
  double R = 60.0;
  double Z = 60.0;
  double h = 0.2;

  // ansatz
  AnsatzKind ansatz = AnsatzKind::catenoid;
  double k = 6.0;
  double b = 0.0;
  double eps = 0.1;

  // Newton
  double newton_tol = 1e-8;
  int newton_max_iter = 30;
  bool decompose = true;

  // continuation
  Direction direction = Direction::both;
  int max_points = 40;
  double first_dk = 0.25;
  double max_dk = 0.3;
  double k_floor = 1.5;
  double k_ceiling = 10.0;
  bool dump_branch_fields = false;

  // reduced model and probe
  double k_target = 0.70710678118654757;
  int trials = 50;
  double p0_min = 1.0;
  double p0_max = 20.0;
  double forcing = 0.0;
  double r0 = 1.0;
  double r_end = 100.0;
  bool small_slope = false;
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;

  bool operator==(const RunConfig&) const = default;
};

/// Parses and validates config text. Throws ConfigError carrying the line
/// number (0 for whole-file problems such as a missing mode).
RunConfig validate_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Effective config as text; validate_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& config);

struct Check {
  std::string name;
  double value = 0.0;      // measured error or quantity
  double tolerance = 0.0;
  bool pass = false;
};

/// Profile, geometry and reduced-model oracles run by mode=verify.
std::vector<Check> oracle_suite(std::uint64_t seed);

struct RunOptions {
  bool quiet = false;
  std::ostream* log = nullptr;  // progress lines; std::cerr when null
};

struct RunResult {
  int exit_code = 0;       // 0 all assertions pass, 1 failure
  std::string report;      // JSON text, also written to report.json
  std::vector<std::filesystem::path> artifacts;
};

/// Executes the configured pipeline into config.out (created if missing).
/// Pipeline errors are caught and reported with exit code 1.
RunResult run(const RunConfig& config, const RunOptions& options = {});

}  // namespace twoend::cli
