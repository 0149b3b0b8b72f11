#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "infoloss/bh_thermo.hpp"
#include "infoloss/cli.hpp"

namespace cli = infoloss::cli;

int main(int argc, char** argv) {
  CLI::App app{"Open-system and black-hole information toy models"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output;
  bool timing = false;
  auto* run = app.add_subcommand("run", "Run one experiment config; writes <prefix>.csv and <prefix>.json");
  run->add_option("config", config_path, "Config JSON")->required();
  run->add_option("-o,--output", output, "Output prefix (overrides the config's output field)");
  run->add_flag("--timing", timing, "Record wall_time_s in the summary");

  std::string golden_dir;
  auto* verify = app.add_subcommand("verify", "Re-run golden configs and compare with stored outputs");
  verify->add_option("dir", golden_dir, "Golden directory holding configs/ and expected/")->required();

  std::optional<double> mass;
  std::optional<double> beta;
  std::optional<double> solar_masses;
  bool si = false;
  auto* thermo = app.add_subcommand("thermo", "Black-hole thermodynamics report as JSON (Planck units)");
  auto* mass_opt = thermo->add_option("--mass", mass, "Mass in Planck units");
  auto* beta_opt = thermo->add_option("--beta", beta, "Inverse temperature in Planck units");
  auto* solar_opt = thermo->add_option("--solar-masses", solar_masses, "Mass in solar masses");
  mass_opt->excludes(beta_opt)->excludes(solar_opt);
  beta_opt->excludes(solar_opt);
  thermo->add_flag("--si", si, "Add SI conversions and the constants used");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: validation: " << e.what() << '\n';
    return cli::kExitValidation;
  }

  if (*run) {
    cli::RunOptions options;
    if (!output.empty()) options.output = output;
    options.timing = timing;
    return cli::run_command(config_path, options, std::cerr);
  }
  if (*verify) return cli::verify_command(golden_dir, std::cout, std::cerr);

  double m = 0.0;
  if (mass) m = *mass;
  else if (beta) m = *beta / (8.0 * std::numbers::pi);
  else if (solar_masses) m = *solar_masses * infoloss::thermo::kSolarMass;
  else {
    std::cerr << "error: validation: one of --mass, --beta, --solar-masses is required\n";
    return cli::kExitValidation;
  }
  try {
    std::cout << cli::thermo_summary(m, si).dump(2) << '\n';
  } catch (const infoloss::ValidationError& e) {
    std::cerr << "error: validation: " << e.what() << '\n';
    return cli::kExitValidation;
  }
  return cli::kExitOk;
}
