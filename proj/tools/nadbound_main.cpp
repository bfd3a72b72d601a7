#include "nadbound/cli.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{
      "nadbound: simulate driven quantum systems and certify bounds on "
      "nonadiabatic transitions (hbar = 1, times in inverse energy)"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  double dt_max = 0.0;
  int grid = 0;

  const struct {
    const char* name;
    const char* help;
  } subs[] = {
      {"run", "run the task list from the config file"},
      {"simulate", "propagate and record transition rates"},
      {"bounds", "rates plus certified bound margins (exit 4 on violation)"},
      {"qsl", "quantum-speed-limit chain per level"},
      {"apt", "instantaneous perturbative rates"},
      {"optimize", "minimize the transition bound over parameter paths"},
      {"reduce2", "projected two-level reduction vs the full model"},
  };
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", config_path, "JSON run configuration")
        ->required();
    sub->add_option("--out", out, "output directory (overrides config)");
    sub->add_option("--seed", seed, "seed for randomized pieces");
    sub->add_option("--dt-max", dt_max, "integrator step cap");
    sub->add_option("--grid", grid, "grid steps K (>= 10)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (CLI::App* sub : app.get_subcommands()) {
    nadbound::CliOverrides overrides;
    if (sub->count("--out")) overrides.out = out;
    if (sub->count("--seed")) overrides.seed = seed;
    if (sub->count("--dt-max")) overrides.dt_max = dt_max;
    if (sub->count("--grid")) overrides.grid = grid;
    if (sub->get_name() != "run") overrides.task = sub->get_name();
    return nadbound::run_config_file(config_path, overrides);
  }
  return 2;
}
