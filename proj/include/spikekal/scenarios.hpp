#pragma once

#include "spikekal/classic_filters.hpp"
#include "spikekal/spikekal_filter.hpp"
#include "spikekal/statespace.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spikekal {

enum class ScenarioName { linear_motion, lorenz, uav_csv };

const char* scenario_name(ScenarioName name) noexcept;
/// Throws ConfigError for unknown names.
ScenarioName parse_scenario_name(std::string_view text);

struct ScenarioConfig {
  ScenarioName name = ScenarioName::linear_motion;
  double dt = 0.01;
  double duration = 30.0;
  std::vector<double> q_diag;
  std::vector<double> r_diag;
  std::vector<double> x0;
  std::uint64_t seed = 0;
  double mismatch_q_scale = 10.0;
  double mismatch_r_scale = 0.1;
  double warmup_fraction = 0.2;
  /// uav_csv only: input file.
  std::string csv_path;

  /// Harness defaults for a scenario. Noise levels are harness choices.
  static ScenarioConfig defaults(ScenarioName name);

  Eigen::Index state_dim() const noexcept;
  Eigen::Index obs_dim() const noexcept;
  /// duration / dt; must be an integer for simulated scenarios.
  std::size_t step_count() const;
  void validate() const;
};

struct Scenario {
  ScenarioConfig config;
  StateSpaceModel model;
  Trajectory trajectory;
  /// Estimate dimension compared against each truth column.
  std::vector<Eigen::Index> evaluated_dims;
  std::vector<std::string> dim_labels;
};

Scenario build_scenario(const ScenarioConfig& config);

/// Reads `t,x_obs,y_obs,x_true,y_true`. Truth holds the two positions.
Trajectory read_uav_csv(std::istream& in);
/// Constant-velocity pixel track with detector noise, in read_uav_csv format.
void write_synthetic_uav_csv(std::ostream& out, std::uint64_t seed, double dt, double duration);

/// Per-dimension mean absolute error over equal-length sequences.
Eigen::VectorXd mae(const std::vector<Eigen::VectorXd>& truth, const std::vector<Eigen::VectorXd>& est);

/// MAE of estimate dims `dims` against the truth columns on steps [begin, end).
Eigen::VectorXd mae_window(const std::vector<Eigen::VectorXd>& truth,
                           const std::vector<Eigen::VectorXd>& est,
                           const std::vector<Eigen::Index>& dims, std::size_t begin, std::size_t end);

enum class MethodKind { kf, ekf, snn_baseline, spikekal };

const char* method_kind_name(MethodKind kind) noexcept;
MethodKind parse_method_kind(std::string_view text);

struct MethodSpec {
  MethodKind kind = MethodKind::kf;
  /// Classic filters only: use the true Q and R instead of the scaled ones.
  bool matched = false;

  std::string label() const;
};

/// The four methods compared per scenario: mismatched classic filter,
/// matched classic filter (optimal reference), SNN baseline and Spike-Kal.
std::vector<MethodSpec> default_methods(ScenarioName name);

struct MethodResult {
  std::string name;
  std::vector<Eigen::VectorXd> estimates;
  std::vector<GainMatrix> gains;
  std::vector<Phase> phases;  // empty for classic filters
  std::optional<std::size_t> transition_step;
  std::size_t faults = 0;
  Eigen::Index neurons = 0;
  double wall_time_s = 0.0;
  std::string input_checksum;
  std::string error;  // non-empty if the method failed
  std::optional<SnnCheckpoint> checkpoint;
};

struct MethodReport {
  std::string name;
  Eigen::VectorXd mae_full;
  Eigen::VectorXd mae_post_warmup;
  std::optional<Eigen::VectorXd> mae_autonomous;
  Eigen::Index neurons = 0;
  std::size_t faults = 0;
  double wall_time_s = 0.0;
  std::string input_checksum;
  std::string error;
};

struct ComparisonReport {
  ScenarioConfig scenario;
  SpikeKalConfig spikekal;
  std::size_t steps = 0;
  std::size_t warmup_steps = 0;
  std::vector<std::string> dim_labels;
  std::string observation_checksum;
  std::vector<MethodReport> methods;
  std::vector<MethodResult> results;
};

/// Hex digest of the exact bytes of an observation sequence.
std::string observation_checksum(const std::vector<Eigen::VectorXd>& observations);

/// Initial filter state shared by every method (lifted first observation).
KalmanState initial_filter_state(const Scenario& scenario);

/// Runs one method on the scenario's observations. Exceptions are caught
/// and stored in `error`.
MethodResult run_method(const Scenario& scenario, const MethodSpec& method,
                        const SpikeKalConfig& config, const SnnCheckpoint* start_from = nullptr);

MethodReport summarize(const Scenario& scenario, const MethodResult& result);

/// `start_from`, when given, seeds every SNN-based method.
ComparisonReport run_comparison(const Scenario& scenario, const std::vector<MethodSpec>& methods,
                                const SpikeKalConfig& config,
                                const SnnCheckpoint* start_from = nullptr);

}  // namespace spikekal
