#include <iostream>

#include <CLI11.hpp>

#include "twoend/cli_io.hpp"
#include "twoend/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Axisymmetric two-end Allen-Cahn solutions: solve, continue, reduced, probe, verify"};
  std::string config_path, out_dir;
  bool quiet = false;
  app.add_option("config", config_path, "flat key = value run configuration")->required();
  app.add_option("--out", out_dir, "output directory (overrides the config's out key)");
  app.add_flag("--quiet", quiet, "suppress progress output");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  twoend::cli::RunConfig config;
  try {
    config = twoend::cli::load_config(config_path);
  } catch (const twoend::ConfigError& e) {
    std::cerr << "two-end-lab: " << config_path << ": " << e.what() << "\n";
    return 2;
  }
  if (!out_dir.empty()) config.out = out_dir;

  twoend::cli::RunOptions options;
  options.quiet = quiet;
  const auto result = twoend::cli::run(config, options);
  if (!quiet) std::cerr << "[two-end-lab] report: " << (std::filesystem::path(config.out) / "report.json").string() << "\n";
  return result.exit_code;
}
