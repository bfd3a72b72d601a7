#pragma once

#include "nadbound/schedule_opt.hpp"
#include "nadbound/twolevel.hpp"

#include <memory>
#include <optional>

namespace nadbound {

/// Parsed and validated run configuration. Paths inside the config resolve
/// relative to the config file's directory.
struct RunConfig {
  std::shared_ptr<HamiltonianModel> model;
  std::optional<ParameterSchedule> schedule;
  int grid_segments = 2000;
  double dt_max = -1.0;
  double delta_deg = -1.0;
  std::vector<int> levels;  // empty: every level of the initial frame
  int checkpoints = 0;      // > 0: this many evenly spaced report nodes
  std::vector<std::string> tasks;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  double epsilon_num = 1e-3;
  double apt_delta_t = 1e-3;

  int opt_level = 0;
  int opt_knots = 6;
  int opt_budget = 2000;
  int opt_restarts = 3;
  int opt_grid = 200;

  std::string model_echo;  // canonical dumps, used for run_id and run.log
  std::string config_echo;
};

struct CliOverrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt_max;
  std::optional<int> grid;
  std::optional<std::string> task;  // replaces config tasks with one task
};

RunConfig parse_run_config(const std::string& json_text,
                           const std::string& base_dir);
RunConfig load_run_config(const std::string& path);

/// Deterministic identifier: FNV-1a over the resolved configuration.
std::string run_id_for(const RunConfig& config);

/// Executes the configured tasks and writes report.json, timeseries.csv and
/// run.log into out_dir. Returns 0, or 4 when a bound certification fails
/// (margin below -epsilon_num). Throws ConfigError on invalid inputs and
/// GapClosureError when the spectrum defeats level tracking.
int run(const RunConfig& config);

/// Front-end entry: loads the config, applies overrides, maps errors to the
/// documented exit codes (2 config, 3 gap closure, 4 certification).
int run_config_file(const std::string& path, const CliOverrides& overrides = {});

}  // namespace nadbound
