#include <iostream>

#include <CLI11.hpp>

#include "hessflow/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"hessflow: fully nonlinear parabolic flows on grids"};
  app.require_subcommand(1);

  hessflow::io::Command cmd;
  std::uint64_t seed = 0;

  const std::pair<const char*, const char*> commands[] = {
      {"check-operator", "Sampled structure conditions of the operator"},
      {"certify-cones", "Concavity-gap and parabolic-gap certification records"},
      {"verify-subsolution", "Slack report of the configured subsolution"},
      {"solve", "Integrate to the horizon; writes monitor.csv and snapshots"},
      {"steady", "Pseudo-time march to a steady state; writes monitor.csv and snapshots"},
      {"report", "SVG line charts from a monitor CSV"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    auto* config = sub->add_option("--config", cmd.config_path, "Run configuration (INI)");
    if (std::string(name) != "report") config->required();
    config->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Override [run] seed");
    sub->add_option("--out", cmd.out_dir, "Output directory")->capture_default_str();
    sub->add_flag("--quiet", cmd.quiet, "Suppress normal output");
    sub->callback([&cmd, sub, &seed] {
      cmd.name = sub->get_name();
      if (sub->count("--seed")) cmd.seed = seed;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hessflow::io::kValidationError;
  }
  return hessflow::io::run_command(cmd, std::cout, std::cerr);
}
