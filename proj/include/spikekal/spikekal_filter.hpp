#pragma once

#include "spikekal/classic_filters.hpp"
#include "spikekal/plasticity.hpp"
#include "spikekal/snn_core.hpp"
#include "spikekal/statespace.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace spikekal {

struct DecoderConfig {
  double tau_dec = 0.005;
  double lms_rate = 0.01;
  double initial_gain = 0.0;
  double initial_bias = 0.0;
};

struct SpikeKalConfig {
  int teacher_steps = 500;
  int snn_substeps = 20;
  double input_gain = 1000.0;
  /// lif.dt is ignored; the network always runs at model dt / snn_substeps.
  LifParams lif;
  PlasticityParams plasticity;
  double tau_elig = 0.050;
  double reward_scale = 10.0;
  bool global_reward = false;
  DecoderConfig decoder;
  double w_init_max = 0.5;
  /// Keep learning after the teacher phase from a background covariance
  /// recursion whose gain is never applied to the estimate.
  bool post_teacher_adapt = false;
  /// End the teacher phase early once the rolling mean decoder error over
  /// `early_stop_window` steps falls below this value. 0 disables.
  double early_stop_error = 0.0;
  int early_stop_window = 50;
  std::uint64_t seed = 0;

  void validate() const;
};

/// No teacher beyond the first step and a single shared reward: the
/// slow-converging SNN filter used as a comparison baseline.
SpikeKalConfig snn_baseline_config(SpikeKalConfig config);

enum class Phase { teacher, autonomous };

const char* phase_name(Phase phase) noexcept;

struct Features {
  Eigen::VectorXd delta_x;
  Eigen::VectorXd delta_y;
};

struct StepRecord {
  Eigen::VectorXd estimate;
  GainMatrix K_used;
  GainMatrix K_snn;
  Phase phase = Phase::teacher;
  bool fault = false;
  double decoder_error = 0.0;
};

/// Network weights and decoder readout, enough to resume a trained filter.
struct SnnCheckpoint {
  static constexpr int kFormatVersion = 1;

  LifParams lif;
  NetworkTopology topology;
  GainDecoder decoder;
};

void save_checkpoint(std::ostream& out, const SnnCheckpoint& checkpoint);
SnnCheckpoint load_checkpoint(std::istream& in);

/// Kalman filter whose gain comes from a two-layer spiking network.
///
/// Each step predicts x_prior from the previous posterior, feeds the
/// previous correction (posterior - prior) and the current innovation to
/// the network, and decodes one gain entry per output neuron. While the
/// teacher phase lasts the classic filter supplies the gain actually
/// applied, the decoder regression target and the R-STDP reward; after
/// it the decoded gain is used and no covariance is propagated.
class SpikeKalFilter {
 public:
  SpikeKalFilter(StateSpaceModel model, SpikeKalConfig config, const KalmanState& init);

  StepRecord step(const Eigen::VectorXd& y);

  /// Features for observation y given the prior mean of this step.
  Features features(const Eigen::VectorXd& x_prior, const Eigen::VectorXd& y) const;

  Phase phase() const noexcept { return phase_; }
  std::size_t step_index() const noexcept { return step_index_; }
  std::optional<std::size_t> transition_step() const noexcept { return transition_step_; }
  const KalmanState& kalman() const noexcept { return kalman_; }
  const NetworkTopology& topology() const noexcept { return net_; }
  const NetworkState& network_state() const noexcept { return net_state_; }
  const GainDecoder& decoder() const noexcept { return decoder_; }
  const EligibilityTrace& eligibility() const noexcept { return eligibility_; }
  const SpikeKalConfig& config() const noexcept { return config_; }
  const StateSpaceModel& model() const noexcept { return model_; }

  SnnCheckpoint checkpoint() const;
  /// Replaces weights and decoder readout; shapes must match the model.
  void restore(const SnnCheckpoint& checkpoint);

 private:
  void learn(const GainMatrix& K_teacher, const GainMatrix& K_snn, StepRecord& record);

  StateSpaceModel model_;
  SpikeKalConfig config_;
  LifParams lif_;
  KalmanState kalman_;
  Eigen::VectorXd prev_posterior_;
  Eigen::VectorXd prev_prior_;
  NetworkTopology net_;
  NetworkState net_state_;
  GainDecoder decoder_;
  EligibilityTrace eligibility_;
  std::size_t step_index_ = 0;
  Phase phase_ = Phase::teacher;
  std::optional<std::size_t> transition_step_;
  std::vector<double> recent_errors_;
};

struct SpikeKalRun {
  std::vector<Eigen::VectorXd> estimates;
  std::vector<GainMatrix> gains;
  std::vector<Phase> phases;
  std::vector<bool> faults;
  std::optional<std::size_t> transition_step;
  std::size_t fault_count = 0;
  SnnCheckpoint final_checkpoint;
};

/// Steps a fresh filter over every observation. Faulty steps fall back to
/// a zero gain and are flagged; the run never aborts.
SpikeKalRun run_spikekal(const StateSpaceModel& model,
                         const std::vector<Eigen::VectorXd>& observations,
                         const SpikeKalConfig& config, const KalmanState& init,
                         const SnnCheckpoint* start_from = nullptr);

}  // namespace spikekal
