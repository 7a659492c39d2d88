#include <CLI11.hpp>
#include <iostream>

#include "gtdd/config.hpp"
#include "gtdd/errors.hpp"
#include "gtdd/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Global-in-time domain-decomposition solver for advection-diffusion "
               "transport in porous media"};
  app.require_subcommand(1);

  std::string config_path, outdir = "out", axis = "space";
  uint64_t seed = 1;

  auto* run = app.add_subcommand("run", "run a configuration");
  run->add_option("config", config_path, "configuration file")->required();
  run->add_option("--out", outdir, "output directory");
  run->add_option("--seed", seed, "seed for randomized initial guesses");

  auto* study = app.add_subcommand("study", "convergence study (space or time refinement)");
  study->add_option("config", config_path, "configuration file")->required();
  study->add_option("--axis", axis, "space|time")->required();
  study->add_option("--out", outdir, "output directory");

  auto* sweep = app.add_subcommand("sweep", "Robin parameter sweep (OSWR residual surface)");
  sweep->add_option("config", config_path, "configuration file")->required();
  sweep->add_option("--out", outdir, "output directory");
  sweep->add_option("--seed", seed, "seed for the interface initial guess");

  CLI11_PARSE(app, argc, argv);

  try {
    const gtdd::RunConfig cfg = gtdd::parse_config_file(config_path);
    if (run->parsed()) return gtdd::run_command(cfg, outdir, seed);
    if (study->parsed()) return gtdd::study_command(cfg, axis, outdir);
    if (sweep->parsed()) return gtdd::sweep_command(cfg, outdir, seed);
  } catch (const gtdd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
