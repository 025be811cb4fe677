#include "spikekal/cli.hpp"

#include "spikekal/config.hpp"
#include "spikekal/errors.hpp"
#include "spikekal/report.hpp"
#include "spikekal/scenarios.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

namespace spikekal {

namespace {

namespace fs = std::filesystem;

struct CommonOptions {
  std::string config_path;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string uav_csv;
  std::optional<int> teacher_steps;
};

void add_common(CLI::App& sub, CommonOptions& opts, bool with_teacher) {
  sub.add_option("--config", opts.config_path, "Key-value configuration file");
  sub.add_option("--scenario", opts.scenario, "linear_motion | lorenz | uav_csv");
  sub.add_option("--seed", opts.seed, "Noise and weight seed (u64)");
  sub.add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
  sub.add_option("--uav-csv", opts.uav_csv, "UAV track CSV (uav_csv scenario)");
  if (with_teacher) {
    sub.add_option("--teacher-steps", opts.teacher_steps, "Steps guided by the teacher filter");
  }
}

RunConfig resolve(const CommonOptions& opts) {
  std::optional<ScenarioName> scenario;
  if (!opts.scenario.empty()) {
    scenario = parse_scenario_name(opts.scenario);
  }
  RunConfig config;
  if (opts.config_path.empty()) {
    std::istringstream empty;
    config = parse_config(empty, scenario);
  } else {
    config = load_config(opts.config_path, scenario);
  }
  if (opts.seed) {
    config.scenario.seed = *opts.seed;
  }
  config.spikekal.seed = config.scenario.seed;
  if (!opts.uav_csv.empty()) {
    config.scenario.csv_path = opts.uav_csv;
  }
  if (opts.teacher_steps) {
    config.spikekal.teacher_steps = *opts.teacher_steps;
  }
  validate(config);
  return config;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << text;
}

void write_json(const fs::path& path, const nlohmann::json& doc) { write_text(path, doc.dump(2) + "\n"); }

void write_manifest(const fs::path& dir, const std::string& command, const CommonOptions& opts,
                    const RunConfig& config, const nlohmann::json& extra) {
  std::ostringstream cfg;
  cfg << "# resolved configuration written by spikekal " << kToolVersion << '\n';
  write_config(cfg, config);
  write_text(dir / "resolved.cfg", cfg.str());

  nlohmann::json manifest;
  manifest["tool_version"] = kToolVersion;
  manifest["command"] = command;
  manifest["config_path"] = opts.config_path;
  manifest["seed"] = config.scenario.seed;
  manifest["out_dir"] = opts.out_dir;
  manifest["resolved_config_file"] = "resolved.cfg";
  manifest["config"] = config_json(config);
  for (const auto& [key, value] : extra.items()) {
    manifest[key] = value;
  }
  write_json(dir / "manifest.json", manifest);
}

fs::path prepare_out(const CommonOptions& opts) {
  fs::path dir(opts.out_dir);
  fs::create_directories(dir);
  return dir;
}

int finish_comparison(const fs::path& dir, const Scenario& scenario, const ComparisonReport& report,
                      std::ostream& out, std::ostream& err) {
  write_json(dir / "report.json", report_json(report));
  {
    std::ofstream trace(dir / "trace.csv", std::ios::binary);
    write_trace_csv(trace, scenario, report);
  }
  bool fault = false;
  for (const auto& m : report.methods) {
    if (!m.error.empty()) {
      out << m.name << " failed\n";
      err << "method " << m.name << " failed: " << m.error << '\n';
      fault = true;
      continue;
    }
    out << m.name;
    for (Eigen::Index i = 0; i < m.mae_full.size(); ++i) {
      out << ' ' << report.dim_labels[static_cast<std::size_t>(i)] << '=' << m.mae_full[i];
    }
    out << " neurons=" << m.neurons << " faults=" << m.faults << " wall_s=" << m.wall_time_s << '\n';
    if (m.faults > 0) {
      err << "method " << m.name << " had " << m.faults << " faulty steps\n";
      fault = true;
    }
  }
  return fault ? kExitRuntimeFault : kExitOk;
}

int cmd_simulate(const CommonOptions& opts, std::ostream& out) {
  const RunConfig config = resolve(opts);
  const Scenario scenario = build_scenario(config.scenario);
  const fs::path dir = prepare_out(opts);
  write_manifest(dir, "simulate", opts, config, nlohmann::json::object());
  std::ostringstream csv;
  write_trajectory_csv(csv, scenario.trajectory);
  write_text(dir / "trajectory.csv", csv.str());
  out << "wrote " << scenario.trajectory.size() << " steps to " << (dir / "trajectory.csv").string()
      << '\n';
  return kExitOk;
}

int cmd_run(const CommonOptions& opts, const std::string& method, bool matched,
            const std::string& checkpoint_path, bool compare, std::ostream& out, std::ostream& err) {
  const RunConfig config = resolve(opts);
  std::vector<MethodSpec> methods;
  if (compare) {
    methods = default_methods(config.scenario.name);
  } else {
    methods.push_back({parse_method_kind(method), matched});
    const MethodKind kind = methods.front().kind;
    const bool lorenz = config.scenario.name == ScenarioName::lorenz;
    if ((kind == MethodKind::kf && lorenz) || (kind == MethodKind::ekf && !lorenz)) {
      throw ConfigError(std::string("method ") + method_kind_name(kind) + " does not fit scenario " +
                        scenario_name(config.scenario.name));
    }
  }
  std::optional<SnnCheckpoint> start_from;
  if (!checkpoint_path.empty()) {
    std::ifstream in(checkpoint_path);
    if (!in) {
      throw ConfigError("cannot open checkpoint '" + checkpoint_path + "'");
    }
    start_from = load_checkpoint(in);
  }
  const Scenario scenario = build_scenario(config.scenario);
  const fs::path dir = prepare_out(opts);
  nlohmann::json extra = nlohmann::json::object();
  if (!compare) {
    extra["method"] = methods.front().label();
    extra["checkpoint"] = checkpoint_path;
  }
  write_manifest(dir, compare ? "compare" : "run", opts, config, extra);
  const ComparisonReport report =
      run_comparison(scenario, methods, config.spikekal, start_from ? &*start_from : nullptr);
  return finish_comparison(dir, scenario, report, out, err);
}

int cmd_checkpoint(const CommonOptions& opts, const std::string& load_path, std::ostream& out) {
  const fs::path dir = prepare_out(opts);
  SnnCheckpoint checkpoint;
  if (!load_path.empty()) {
    std::ifstream in(load_path);
    if (!in) {
      throw ConfigError("cannot open checkpoint '" + load_path + "'");
    }
    checkpoint = load_checkpoint(in);
  } else {
    const RunConfig config = resolve(opts);
    const Scenario scenario = build_scenario(config.scenario);
    write_manifest(dir, "checkpoint", opts, config, nlohmann::json::object());
    const MethodResult result = run_method(scenario, {MethodKind::spikekal, false}, config.spikekal);
    if (!result.error.empty() || !result.checkpoint) {
      throw std::runtime_error("training run failed: " + result.error);
    }
    checkpoint = *result.checkpoint;
  }
  std::ostringstream text;
  save_checkpoint(text, checkpoint);
  write_text(dir / "checkpoint.txt", text.str());
  out << "checkpoint n_in=" << checkpoint.topology.n_in << " n_out=" << checkpoint.topology.n_out
      << " -> " << (dir / "checkpoint.txt").string() << '\n';
  return kExitOk;
}

int cmd_uav_synth(const CommonOptions& opts, double dt, double duration, std::ostream& out) {
  if (!(dt > 0.0) || !(duration > 0.0)) {
    throw ConfigError("dt and duration must be positive");
  }
  const fs::path dir = prepare_out(opts);
  std::ostringstream csv;
  write_synthetic_uav_csv(csv, opts.seed.value_or(0), dt, duration);
  write_text(dir / "uav.csv", csv.str());
  out << "wrote " << (dir / "uav.csv").string() << '\n';
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spike-Kal: Kalman filtering with an SNN-computed gain", "spikekal"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  CommonOptions opts;
  std::string method;
  bool matched = false;
  std::string checkpoint_path;
  std::string load_path;
  double synth_dt = 0.033;
  double synth_duration = 100.0;

  auto* simulate = app.add_subcommand("simulate", "Write the scenario trajectory as CSV");
  add_common(*simulate, opts, false);

  auto* run = app.add_subcommand("run", "Run one method on a scenario");
  add_common(*run, opts, true);
  run->add_option("--method", method, "kf | ekf | snn_baseline | spikekal")->required();
  run->add_flag("--matched", matched, "Give kf/ekf the true Q and R instead of the scaled ones");
  run->add_option("--checkpoint", checkpoint_path, "Start Spike-Kal from a saved checkpoint");

  auto* compare = app.add_subcommand("compare", "Compare all methods and write report + trace");
  add_common(*compare, opts, true);

  auto* checkpoint = app.add_subcommand("checkpoint", "Train and save, or load and re-save, SNN weights");
  add_common(*checkpoint, opts, true);
  checkpoint->add_option("--load", load_path, "Checkpoint file to load");

  auto* synth = app.add_subcommand("uav-synth", "Write a synthetic UAV track CSV");
  synth->add_option("--seed", opts.seed, "Noise seed (u64)");
  synth->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
  synth->add_option("--dt", synth_dt, "Sample period in seconds")->capture_default_str();
  synth->add_option("--duration", synth_duration, "Track length in seconds")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* failed = &app;
    for (auto* sub : app.get_subcommands()) failed = sub;
    err << failed->help();
    return kExitConfigError;
  }

  // Configuration problems surface before any computation starts.
  try {
    if (simulate->parsed()) return cmd_simulate(opts, out);
    if (run->parsed()) return cmd_run(opts, method, matched, checkpoint_path, false, out, err);
    if (compare->parsed()) return cmd_run(opts, "", false, "", true, out, err);
    if (checkpoint->parsed()) return cmd_checkpoint(opts, load_path, out);
    if (synth->parsed()) return cmd_uav_synth(opts, synth_dt, synth_duration, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const ModelValidationError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "runtime fault: " << e.what() << '\n';
    return kExitRuntimeFault;
  }
  return kExitConfigError;
}

}  // namespace spikekal
