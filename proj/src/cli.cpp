#include "nadbound/cli.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace nadbound {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

const std::set<std::string> kKnownTasks = {"simulate", "bounds", "qsl",
                                           "apt",      "optimize", "reduce2"};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  fs::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  return (fs::path(base_dir) / p).string();
}

std::shared_ptr<HamiltonianModel> build_model(const json& spec,
                                              const std::string& base_dir) {
  if (!spec.is_object() || !spec.contains("family")) {
    throw ConfigError("config field 'model': needs a 'family'");
  }
  const std::string family = spec["family"].get<std::string>();
  if (family == "two-level-field") {
    return std::make_shared<TwoLevelFieldModel>();
  }
  if (family == "landau-zener") {
    if (!spec.contains("delta") || !spec["delta"].is_number()) {
      throw ConfigError("config field 'model.delta': landau-zener needs a coupling");
    }
    return std::make_shared<LandauZenerModel>(spec["delta"].get<double>());
  }
  if (family == "transverse-field-ising") {
    if (!spec.contains("spins") || !spec["spins"].is_number_integer()) {
      throw ConfigError("config field 'model.spins': transverse-field-ising needs a spin count");
    }
    const bool longitudinal = spec.value("longitudinal", false);
    try {
      return std::make_shared<TransverseFieldIsingModel>(
          spec["spins"].get<int>(), longitudinal);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config field 'model.spins': ") + e.what());
    }
  }
  if (family == "dense-tabulated") {
    if (!spec.contains("file")) {
      throw ConfigError("config field 'model.file': dense-tabulated needs a model file");
    }
    const std::string path = resolve(base_dir, spec["file"].get<std::string>());
    return std::make_shared<DenseTabulatedModel>(
        DenseTabulatedModel::load_json(path));
  }
  throw ConfigError("config field 'model.family': unknown family " + family);
}

ParameterSchedule build_schedule(const json& spec, const std::string& base_dir) {
  if (!spec.is_object()) {
    throw ConfigError("config field 'schedule': expected an object");
  }
  if (spec.contains("file")) {
    return ParameterSchedule::load_json(
        resolve(base_dir, spec["file"].get<std::string>()));
  }
  if (spec.contains("preset")) {
    const std::string preset = spec["preset"].get<std::string>();
    if (preset != "annealing") {
      throw ConfigError("config field 'schedule.preset': unknown preset " + preset);
    }
    if (!spec.contains("T") || !spec["T"].is_number()) {
      throw ConfigError("config field 'schedule.T': annealing preset needs a duration");
    }
    try {
      return ParameterSchedule::annealing_preset(spec["T"].get<double>(),
                                                 spec.value("h0x", -1.0),
                                                 spec.value("hTz", -1.0));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config field 'schedule': ") + e.what());
    }
  }
  try {
    return ParameterSchedule::from_json_string(spec.dump());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config field 'schedule': ") + e.what());
  }
}

std::string fnv1a_hex(const std::string& blob) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : blob) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write output file: " + path.string());
  out << text;
}

std::vector<int> checkpoint_indices(int grid_nodes, int requested) {
  std::vector<int> idx;
  if (requested <= 0 || requested >= grid_nodes) {
    for (int k = 0; k < grid_nodes; ++k) idx.push_back(k);
    return idx;
  }
  for (int j = 0; j < requested; ++j) {
    const int k = requested == 1
                      ? grid_nodes - 1
                      : static_cast<int>(std::llround(
                            static_cast<double>(j) * (grid_nodes - 1) /
                            (requested - 1)));
    if (idx.empty() || k != idx.back()) idx.push_back(k);
  }
  return idx;
}

bool has_task(const RunConfig& config, const char* task) {
  return std::find(config.tasks.begin(), config.tasks.end(), task) !=
         config.tasks.end();
}

std::string describe(const RateRecord& r) {
  std::ostringstream out;
  out << "t=" << r.t << " n=" << r.n << " m=" << r.m << " p=" << r.p
      << " margin=" << r.margin;
  return out.str();
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text,
                           const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");

  RunConfig config;
  if (!doc.contains("model")) throw ConfigError("config field 'model' is required");
  if (!doc.contains("schedule")) throw ConfigError("config field 'schedule' is required");
  if (!doc.contains("tasks")) throw ConfigError("config field 'tasks' is required");

  config.model = build_model(doc["model"], base_dir);
  config.schedule = build_schedule(doc["schedule"], base_dir);
  if (config.schedule->param_count() != config.model->param_count()) {
    throw ConfigError("config: schedule parameter count does not match the model");
  }

  if (!doc["tasks"].is_array() || doc["tasks"].empty()) {
    throw ConfigError("config field 'tasks': need a non-empty list");
  }
  for (const auto& t : doc["tasks"]) {
    const std::string name = t.get<std::string>();
    if (!kKnownTasks.count(name)) {
      throw ConfigError("config field 'tasks': unknown task " + name);
    }
    config.tasks.push_back(name);
  }

  if (doc.contains("grid")) {
    const auto& grid = doc["grid"];
    if (grid.contains("K")) config.grid_segments = grid["K"].get<int>();
    if (grid.contains("dt_max")) config.dt_max = grid["dt_max"].get<double>();
  }
  if (config.grid_segments < 10) {
    throw ConfigError("config field 'grid.K': need at least 10 steps");
  }
  if (doc.contains("levels")) {
    for (const auto& v : doc["levels"]) {
      const int n = v.get<int>();
      if (n < 0) throw ConfigError("config field 'levels': indices must be >= 0");
      config.levels.push_back(n);
    }
  }
  config.checkpoints = doc.value("checkpoints", 0);
  config.out_dir = doc.value("out", std::string("."));
  config.seed = doc.value("seed", std::uint64_t{0});
  config.epsilon_num = doc.value("epsilon_num", 1e-3);
  config.delta_deg = doc.value("delta_deg", -1.0);
  config.apt_delta_t = doc.value("apt_delta_t", 1e-3);
  if (!(config.epsilon_num > 0.0) || !(config.apt_delta_t > 0.0)) {
    throw ConfigError("config: epsilon_num and apt_delta_t must be positive");
  }
  if (doc.contains("optimize")) {
    const auto& opt = doc["optimize"];
    config.opt_level = opt.value("m", 0);
    config.opt_knots = opt.value("n_knots", 6);
    config.opt_budget = opt.value("budget", 2000);
    config.opt_restarts = opt.value("restarts", 3);
    config.opt_grid = opt.value("grid_segments", 200);
  }

  config.model_echo = doc["model"].dump();
  json echo = doc;
  config.config_echo = echo.dump();
  return config;
}

RunConfig load_run_config(const std::string& path) {
  const std::string text = read_file(path);
  return parse_run_config(text, fs::path(path).parent_path().string());
}

std::string run_id_for(const RunConfig& config) {
  std::ostringstream blob;
  blob << kVersion << '|' << config.model_echo << '|'
       << config.schedule->to_json_string() << '|' << config.grid_segments
       << '|' << config.dt_max << '|' << config.delta_deg << '|'
       << config.checkpoints << '|' << config.seed << '|'
       << config.epsilon_num << '|' << config.apt_delta_t << '|';
  for (int n : config.levels) blob << n << ',';
  blob << '|';
  for (const auto& t : config.tasks) blob << t << ',';
  return fnv1a_hex(blob.str());
}

int run(const RunConfig& config) {
  if (!config.model || !config.schedule) {
    throw ConfigError("run: config is missing model or schedule");
  }
  const HamiltonianModel& model = *config.model;
  const ParameterSchedule& sched = *config.schedule;
  const std::string run_id = run_id_for(config);

  const fs::path out_dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory: " + out_dir.string());

  std::ostringstream log;
  log << "nadbound " << kVersion << " (hbar = 1)\n";
  log << "run_id " << run_id << "\n";
  log << "config " << config.config_echo << "\n";

  int status = 0;
  try {
    const std::vector<double> grid =
        uniform_grid(sched.duration(), config.grid_segments);
    const std::vector<SpectralFrame> frames =
        frames_on_grid(model, sched, grid, config.delta_deg);

    const int level_total = frames.front().level_count();
    for (int n : config.levels) {
      if (n >= level_total) {
        throw ConfigError("config field 'levels': index " + std::to_string(n) +
                          " exceeds the " + std::to_string(level_total) +
                          " levels at t = 0");
      }
    }

    ReportOptions ropts;
    ropts.levels = config.levels;
    ropts.checkpoints =
        checkpoint_indices(static_cast<int>(grid.size()), config.checkpoints);
    ropts.epsilon_num = config.epsilon_num;
    ropts.run_id = run_id;

    const bool needs_pair = has_task(config, "simulate") ||
                            has_task(config, "bounds") ||
                            has_task(config, "qsl");
    PropagateOptions popts;
    popts.dt_max = config.dt_max;
    popts.delta_deg = config.delta_deg;

    BoundReport report;
    report.run_id = run_id;
    report.epsilon_num = config.epsilon_num;
    std::optional<PropagatorPair> pair;
    if (needs_pair) {
      pair = make_propagator_pair(model, sched, grid, popts);
      report = assemble_report(frames, *pair, ropts);
    }

    std::vector<int> levels = config.levels;
    if (levels.empty()) {
      for (int n = 0; n < level_total; ++n) levels.push_back(n);
    }

    if (has_task(config, "apt")) {
      for (int k : ropts.checkpoints) {
        for (int n : levels) {
          for (int m : levels) {
            if (n == m) continue;
            const AptRates rates =
                apt_instantaneous_rates(frames[k], config.apt_delta_t, n, m);
            report.apt.push_back(
                {frames[k].t, n, m, rates.pair_rate, rates.level_rate});
          }
        }
      }
    }

    if (has_task(config, "qsl")) {
      for (int m : levels) {
        const SpectralLevel& level = frames.front().levels[m];
        const Matrix rho0 = level.projector / double(level.multiplicity);
        const QslChain chain = qsl_chain(frames, *pair, m, rho0);
        report.qsl.push_back(
            {m, chain.bures_angle, chain.cd_std_integral, chain.qgt_integral});
      }
    }

    json extra = json::object();
    if (has_task(config, "optimize")) {
      OptimizeOptions oopts;
      oopts.n_knots = config.opt_knots;
      oopts.budget = config.opt_budget;
      oopts.restarts = config.opt_restarts;
      oopts.seed = config.seed + 1;
      oopts.grid_segments = config.opt_grid;
      oopts.delta_deg = config.delta_deg;
      oopts.T = sched.duration();
      const PathCandidate cand = optimize_schedule(
          model, sched.value(0.0), sched.value(sched.duration()),
          config.opt_level, oopts);
      const ParameterSchedule geometric =
          path_schedule(cand.from, cand.to, cand.interior, cand.T);
      const ParameterSchedule timed = arc_length_reparameterize(
          model, geometric, config.opt_level, 2001, 401, config.delta_deg);
      timed.save_json((out_dir / "optimized_schedule.json").string());
      json trace = json::array();
      for (const auto& [it, value] : cand.trace) {
        trace.push_back(json::array({it, value}));
      }
      extra["optimize"] = json{{"m", config.opt_level},
                               {"objective", cand.objective},
                               {"bound", cand.objective * cand.objective},
                               {"trace", trace}};
      log << "optimize: objective " << cand.objective << " after "
          << (cand.trace.empty() ? 0 : cand.trace.back().first)
          << " improving evaluations\n";
    }

    if (has_task(config, "reduce2")) {
      const ReductionResult red =
          reduce_two_level_run(model, sched, grid, popts);
      const double rel =
          red.p01_full != 0.0
              ? std::abs(red.p01_reduced - red.p01_full) / red.p01_full
              : std::abs(red.p01_reduced);
      extra["reduce2"] = json{{"p01_reduced", red.p01_reduced},
                              {"p01_full", red.p01_full},
                              {"leakage", red.leakage},
                              {"rel_error", rel}};
      log << "reduce2: p01_reduced " << red.p01_reduced << " p01_full "
          << red.p01_full << " leakage " << red.leakage << "\n";
    }

    write_text(out_dir / "timeseries.csv", report_to_csv(report));

    json report_doc = json::parse(report_to_json(report));
    report_doc["version"] = kVersion;
    report_doc["tasks"] = config.tasks;
    for (auto& [key, value] : extra.items()) report_doc[key] = value;
    write_text(out_dir / "report.json", report_doc.dump(2) + "\n");

    for (const auto& w : report.warnings) {
      log << "warning t=" << w.t << " " << w.message << "\n";
    }

    if (has_task(config, "bounds")) {
      const std::vector<RateRecord> failed = failed_certifications(report);
      if (!failed.empty()) {
        status = 4;
        log << "certification FAILED on " << failed.size() << " record(s); first: "
            << describe(failed.front()) << "\n";
      }
    }
  } catch (const GapClosureError& e) {
    log << "gap closure at t=" << e.time() << ": " << e.what() << "\n";
    log << "status 3\n";
    write_text(out_dir / "run.log", log.str());
    throw;
  }

  log << "status " << status << "\n";
  write_text(out_dir / "run.log", log.str());
  return status;
}

int run_config_file(const std::string& path, const CliOverrides& overrides) {
  try {
    RunConfig config = load_run_config(path);
    if (overrides.out) config.out_dir = *overrides.out;
    if (overrides.seed) config.seed = *overrides.seed;
    if (overrides.dt_max) config.dt_max = *overrides.dt_max;
    if (overrides.grid) config.grid_segments = *overrides.grid;
    if (overrides.task) config.tasks = {*overrides.task};
    if (config.grid_segments < 10) {
      throw ConfigError("--grid: need at least 10 steps");
    }
    if (overrides.dt_max && !(config.dt_max > 0.0)) {
      throw ConfigError("--dt-max: must be positive");
    }
    return run(config);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const GapClosureError& e) {
    std::cerr << "gap closure at t=" << e.time() << ": " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace nadbound
