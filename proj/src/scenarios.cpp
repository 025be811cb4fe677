#include "spikekal/scenarios.hpp"

#include "spikekal/errors.hpp"
#include "spikekal/text_format.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace spikekal {

namespace {

Eigen::MatrixXd diag_matrix(const std::vector<double>& values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
  return v.asDiagonal();
}

Eigen::VectorXd to_vector(const std::vector<double>& values) {
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

StateSpaceModel scenario_model(const ScenarioConfig& c, double dt) {
  const Eigen::MatrixXd Q = diag_matrix(c.q_diag);
  const Eigen::MatrixXd R = diag_matrix(c.r_diag);
  if (c.name == ScenarioName::lorenz) {
    Eigen::MatrixXd H(1, 3);
    H << 1.0, 0.0, 0.0;
    return StateSpaceModel::lorenz(H, Q, R, dt);
  }
  return StateSpaceModel::linear(constant_velocity_transition(dt), position_observation(), Q, R, dt);
}

}  // namespace

const char* scenario_name(ScenarioName name) noexcept {
  switch (name) {
    case ScenarioName::linear_motion: return "linear_motion";
    case ScenarioName::lorenz: return "lorenz";
    case ScenarioName::uav_csv: return "uav_csv";
  }
  return "?";
}

ScenarioName parse_scenario_name(std::string_view text) {
  if (text == "linear_motion") return ScenarioName::linear_motion;
  if (text == "lorenz") return ScenarioName::lorenz;
  if (text == "uav_csv" || text == "uav") return ScenarioName::uav_csv;
  throw ConfigError("unknown scenario '" + std::string(text) + "'");
}

ScenarioConfig ScenarioConfig::defaults(ScenarioName name) {
  ScenarioConfig c;
  c.name = name;
  switch (name) {
    case ScenarioName::linear_motion:
      c.dt = 0.01;
      c.duration = 30.0;
      c.q_diag = {1e-4, 1e-4, 1e-2, 1e-2};
      c.r_diag = {0.25, 0.25};
      c.x0 = {0.0, 0.0, 1.0, 1.0};
      break;
    case ScenarioName::lorenz:
      c.dt = 0.01;
      c.duration = 30.0;
      c.q_diag = {0.1, 0.1, 0.1};
      c.r_diag = {1.0};
      c.x0 = {1.0, 1.0, 1.0};
      break;
    case ScenarioName::uav_csv:
      c.dt = 0.033;
      c.duration = 100.0;
      c.q_diag = {1e-3, 1e-3, 0.25, 0.25};
      c.r_diag = {16.0, 9.0};
      c.x0 = {320.0, 240.0, 20.0, -10.0};
      break;
  }
  return c;
}

Eigen::Index ScenarioConfig::state_dim() const noexcept { return name == ScenarioName::lorenz ? 3 : 4; }
Eigen::Index ScenarioConfig::obs_dim() const noexcept { return name == ScenarioName::lorenz ? 1 : 2; }

std::size_t ScenarioConfig::step_count() const {
  const double ratio = duration / dt;
  return static_cast<std::size_t>(std::llround(ratio));
}

void ScenarioConfig::validate() const {
  if (!(dt > 0.0) || !(duration > 0.0)) {
    throw ConfigError("dt and duration must be positive");
  }
  const double ratio = duration / dt;
  if (name != ScenarioName::uav_csv && std::abs(ratio - std::round(ratio)) > 1e-6 * ratio) {
    throw ConfigError("duration / dt must be an integer step count");
  }
  if (step_count() < 1) {
    throw ConfigError("scenario needs at least one step");
  }
  const auto n = static_cast<std::size_t>(state_dim());
  const auto m = static_cast<std::size_t>(obs_dim());
  if (q_diag.size() != n) {
    throw ConfigError("q_diag needs " + std::to_string(n) + " values for " + scenario_name(name));
  }
  if (r_diag.size() != m) {
    throw ConfigError("r_diag needs " + std::to_string(m) + " values for " + scenario_name(name));
  }
  if (x0.size() != n) {
    throw ConfigError("x0 needs " + std::to_string(n) + " values for " + scenario_name(name));
  }
  for (double q : q_diag) {
    if (!(q >= 0.0)) throw ConfigError("q_diag entries must be >= 0");
  }
  for (double r : r_diag) {
    if (!(r > 0.0)) throw ConfigError("r_diag entries must be > 0");
  }
  if (!(mismatch_q_scale > 0.0) || !(mismatch_r_scale > 0.0)) {
    throw ConfigError("mismatch scales must be positive");
  }
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) {
    throw ConfigError("warmup_fraction must be in [0, 1)");
  }
  if (name == ScenarioName::uav_csv && csv_path.empty()) {
    throw ConfigError("uav_csv scenario requires an input CSV path");
  }
}

Trajectory read_uav_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("empty UAV CSV", 1);
  }
  const auto header = split_csv_line(line);
  const std::vector<std::string> expected{"t", "x_obs", "y_obs", "x_true", "y_true"};
  if (header != expected) {
    throw ParseError("UAV CSV header must be t,x_obs,y_obs,x_true,y_true", 1);
  }
  Trajectory traj;
  traj.truth_labels = {"x", "y"};
  traj.obs_labels = {"x_obs", "y_obs"};
  std::vector<double> times;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 5) {
      throw ParseError("expected 5 columns, got " + std::to_string(fields.size()), line_no);
    }
    double v[5];
    for (std::size_t i = 0; i < 5; ++i) v[i] = parse_double(fields[i], line_no);
    if (!times.empty() && !(v[0] > times.back())) {
      throw ParseError("time column must increase", line_no);
    }
    times.push_back(v[0]);
    traj.observations.emplace_back(Eigen::Vector2d(v[1], v[2]));
    traj.truth.emplace_back(Eigen::Vector2d(v[3], v[4]));
  }
  if (times.empty()) {
    throw ParseError("UAV CSV has no data rows", line_no);
  }
  traj.t0 = times.front();
  traj.dt = times.size() > 1 ? (times.back() - times.front()) / static_cast<double>(times.size() - 1)
                             : 0.0;
  return traj;
}

void write_synthetic_uav_csv(std::ostream& out, std::uint64_t seed, double dt, double duration) {
  const ScenarioConfig c = ScenarioConfig::defaults(ScenarioName::uav_csv);
  const StateSpaceModel model = scenario_model(c, dt);
  NoiseGenerator noise(seed);
  const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
  const Trajectory traj = simulate(model, to_vector(c.x0), steps, noise);
  out << "t,x_obs,y_obs,x_true,y_true\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << format_fixed6(static_cast<double>(k) * dt) << ',' << format_double(traj.observations[k][0])
        << ',' << format_double(traj.observations[k][1]) << ',' << format_double(traj.truth[k][0])
        << ',' << format_double(traj.truth[k][1]) << '\n';
  }
}

Scenario build_scenario(const ScenarioConfig& config) {
  config.validate();
  if (config.name == ScenarioName::uav_csv) {
    std::ifstream in(config.csv_path);
    if (!in) {
      throw ConfigError("cannot open UAV CSV '" + config.csv_path + "'");
    }
    Trajectory traj = read_uav_csv(in);
    const double dt = traj.size() > 1 ? traj.dt : config.dt;
    StateSpaceModel model = scenario_model(config, dt);
    return {config, std::move(model), std::move(traj), {0, 1}, {"horizontal", "vertical"}};
  }
  StateSpaceModel model = scenario_model(config, config.dt);
  NoiseGenerator noise(config.seed);
  Trajectory traj = simulate(model, to_vector(config.x0), config.step_count(), noise);
  std::vector<std::string> labels;
  if (config.name == ScenarioName::lorenz) {
    labels = {"X1", "X2", "X3"};
    traj.obs_labels = {"X1_obs"};
  } else {
    labels = {"X", "Y", "Vx", "Vy"};
    traj.obs_labels = {"X_obs", "Y_obs"};
  }
  traj.truth_labels = labels;
  std::vector<Eigen::Index> dims;
  for (Eigen::Index i = 0; i < model.state_dim(); ++i) dims.push_back(i);
  return {config, std::move(model), std::move(traj), std::move(dims), std::move(labels)};
}

Eigen::VectorXd mae(const std::vector<Eigen::VectorXd>& truth, const std::vector<Eigen::VectorXd>& est) {
  if (truth.empty() || truth.size() != est.size()) {
    throw ContractViolation("mae: sequences must have equal length >= 1");
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(truth.front().size());
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (truth[k].size() != sum.size() || est[k].size() != sum.size()) {
      throw ContractViolation("mae: dimension mismatch");
    }
    sum += (truth[k] - est[k]).cwiseAbs();
  }
  return sum / static_cast<double>(truth.size());
}

Eigen::VectorXd mae_window(const std::vector<Eigen::VectorXd>& truth,
                           const std::vector<Eigen::VectorXd>& est,
                           const std::vector<Eigen::Index>& dims, std::size_t begin, std::size_t end) {
  if (truth.size() != est.size() || begin >= end || end > truth.size()) {
    throw ContractViolation("mae_window: bad window or length mismatch");
  }
  const auto d = static_cast<Eigen::Index>(dims.size());
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  for (std::size_t k = begin; k < end; ++k) {
    for (Eigen::Index i = 0; i < d; ++i) {
      sum[i] += std::abs(truth[k][i] - est[k][dims[static_cast<std::size_t>(i)]]);
    }
  }
  return sum / static_cast<double>(end - begin);
}

const char* method_kind_name(MethodKind kind) noexcept {
  switch (kind) {
    case MethodKind::kf: return "kf";
    case MethodKind::ekf: return "ekf";
    case MethodKind::snn_baseline: return "snn_baseline";
    case MethodKind::spikekal: return "spikekal";
  }
  return "?";
}

MethodKind parse_method_kind(std::string_view text) {
  if (text == "kf") return MethodKind::kf;
  if (text == "ekf") return MethodKind::ekf;
  if (text == "snn_baseline") return MethodKind::snn_baseline;
  if (text == "spikekal") return MethodKind::spikekal;
  throw ConfigError("unknown method '" + std::string(text) + "'");
}

std::string MethodSpec::label() const {
  std::string name = method_kind_name(kind);
  if (matched && (kind == MethodKind::kf || kind == MethodKind::ekf)) {
    name += "_matched";
  }
  return name;
}

std::vector<MethodSpec> default_methods(ScenarioName name) {
  const MethodKind classic = name == ScenarioName::lorenz ? MethodKind::ekf : MethodKind::kf;
  return {{classic, false}, {classic, true}, {MethodKind::snn_baseline, false},
          {MethodKind::spikekal, false}};
}

std::string observation_checksum(const std::vector<Eigen::VectorXd>& observations) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& y : observations) {
    for (double v : y) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof v);
      for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
      }
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

KalmanState initial_filter_state(const Scenario& scenario) {
  return lift_initial_state(scenario.model, scenario.trajectory.observations.front());
}

MethodResult run_method(const Scenario& scenario, const MethodSpec& method,
                        const SpikeKalConfig& config, const SnnCheckpoint* start_from) {
  MethodResult result;
  result.name = method.label();
  const auto& observations = scenario.trajectory.observations;
  result.input_checksum = observation_checksum(observations);
  const auto start = std::chrono::steady_clock::now();
  try {
    const KalmanState init = initial_filter_state(scenario);
    const ScenarioConfig& sc = scenario.config;
    switch (method.kind) {
      case MethodKind::kf:
      case MethodKind::ekf: {
        if ((method.kind == MethodKind::ekf) != (scenario.model.kind() == ModelKind::lorenz)) {
          throw ConfigError(std::string("method ") + method_kind_name(method.kind) +
                            " does not fit scenario " + scenario_name(sc.name));
        }
        const StateSpaceModel model =
            method.matched ? scenario.model
                           : scenario.model.with_noise(scenario.model.Q() * sc.mismatch_q_scale,
                                                       scenario.model.R_obs() * sc.mismatch_r_scale);
        FilterRun run = run_kalman(model, observations, init);
        result.estimates = std::move(run.estimates);
        result.gains = std::move(run.gains);
        break;
      }
      case MethodKind::snn_baseline:
      case MethodKind::spikekal: {
        SpikeKalConfig cfg = method.kind == MethodKind::spikekal ? config : snn_baseline_config(config);
        cfg.seed = sc.seed;
        SpikeKalRun run = run_spikekal(scenario.model, observations, cfg, init, start_from);
        result.estimates = std::move(run.estimates);
        result.gains = std::move(run.gains);
        result.phases = std::move(run.phases);
        result.transition_step = run.transition_step;
        result.faults = run.fault_count;
        result.neurons = spikekal_neuron_count(scenario.model.state_dim(), scenario.model.obs_dim());
        result.checkpoint = std::move(run.final_checkpoint);
        break;
      }
    }
  } catch (const std::exception& e) {
    result.error = e.what();
  }
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

MethodReport summarize(const Scenario& scenario, const MethodResult& result) {
  MethodReport report;
  report.name = result.name;
  report.neurons = result.neurons;
  report.faults = result.faults;
  report.wall_time_s = result.wall_time_s;
  report.input_checksum = result.input_checksum;
  report.error = result.error;
  if (!result.error.empty()) {
    return report;
  }
  const auto& truth = scenario.trajectory.truth;
  const std::size_t T = truth.size();
  const auto warmup = static_cast<std::size_t>(std::floor(scenario.config.warmup_fraction * T));
  report.mae_full = mae_window(truth, result.estimates, scenario.evaluated_dims, 0, T);
  report.mae_post_warmup =
      mae_window(truth, result.estimates, scenario.evaluated_dims, std::min(warmup, T - 1), T);
  if (result.transition_step && *result.transition_step < T) {
    report.mae_autonomous =
        mae_window(truth, result.estimates, scenario.evaluated_dims, *result.transition_step, T);
  }
  return report;
}

ComparisonReport run_comparison(const Scenario& scenario, const std::vector<MethodSpec>& methods,
                                const SpikeKalConfig& config, const SnnCheckpoint* start_from) {
  ComparisonReport report;
  report.scenario = scenario.config;
  report.spikekal = config;
  report.spikekal.seed = scenario.config.seed;
  report.steps = scenario.trajectory.size();
  report.warmup_steps =
      static_cast<std::size_t>(std::floor(scenario.config.warmup_fraction * report.steps));
  report.dim_labels = scenario.dim_labels;
  report.observation_checksum = observation_checksum(scenario.trajectory.observations);
  for (const auto& method : methods) {
    MethodResult result = run_method(scenario, method, config, start_from);
    report.methods.push_back(summarize(scenario, result));
    report.results.push_back(std::move(result));
  }
  return report;
}

}  // namespace spikekal
