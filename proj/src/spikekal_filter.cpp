#include "spikekal/spikekal_filter.hpp"

#include "spikekal/errors.hpp"

#include <numeric>

namespace spikekal {

void SpikeKalConfig::validate() const {
  if (teacher_steps < 1) {
    throw ConfigError("teacher_steps must be >= 1");
  }
  if (snn_substeps < 1) {
    throw ConfigError("snn_substeps must be >= 1");
  }
  if (!(reward_scale > 0.0)) {
    throw ConfigError("reward_scale must be positive");
  }
  if (!(decoder.tau_dec > 0.0) || !(decoder.lms_rate >= 0.0)) {
    throw ConfigError("decoder tau must be positive and lms rate non-negative");
  }
  if (!(tau_elig > 0.0)) {
    throw ConfigError("tau_elig must be positive");
  }
  if (!(w_init_max >= 0.0)) {
    throw ConfigError("w_init_max must be non-negative");
  }
  if (early_stop_error < 0.0 || early_stop_window < 1) {
    throw ConfigError("early stop needs a non-negative threshold and window >= 1");
  }
  plasticity.validate();
}

SpikeKalConfig snn_baseline_config(SpikeKalConfig config) {
  config.teacher_steps = 1;
  config.global_reward = true;
  config.early_stop_error = 0.0;
  return config;
}

const char* phase_name(Phase phase) noexcept {
  return phase == Phase::teacher ? "teacher" : "autonomous";
}

SpikeKalFilter::SpikeKalFilter(StateSpaceModel model, SpikeKalConfig config, const KalmanState& init)
    : model_(std::move(model)), config_(std::move(config)), kalman_(init) {
  config_.validate();
  lif_ = config_.lif;
  lif_.dt = model_.dt() / config_.snn_substeps;
  lif_.validate();
  const Eigen::Index n = model_.state_dim();
  const Eigen::Index m = model_.obs_dim();
  if (init.x.size() != n || init.P.rows() != n) {
    throw ContractViolation("SpikeKalFilter: initial state does not match the model");
  }
  NoiseStream weights = NoiseGenerator(config_.seed).split("snn-weights");
  net_ = NetworkTopology::for_model(n, m, config_.w_init_max, weights);
  net_state_ = NetworkState::at_rest(net_, lif_);
  decoder_ = GainDecoder::create(net_.n_out, config_.decoder.tau_dec, config_.decoder.lms_rate,
                                 config_.decoder.initial_gain, config_.decoder.initial_bias);
  eligibility_ = EligibilityTrace::zeros(net_.n_out, net_.n_in, config_.tau_elig);
  prev_posterior_ = Eigen::VectorXd::Zero(n);
  prev_prior_ = Eigen::VectorXd::Zero(n);
}

Features SpikeKalFilter::features(const Eigen::VectorXd& x_prior, const Eigen::VectorXd& y) const {
  // Before the first step there is no previous correction.
  Eigen::VectorXd delta_x = step_index_ == 0 ? Eigen::VectorXd::Zero(model_.state_dim())
                                             : Eigen::VectorXd(prev_posterior_ - prev_prior_);
  return {std::move(delta_x), y - model_.H() * x_prior};
}

StepRecord SpikeKalFilter::step(const Eigen::VectorXd& y) {
  if (y.size() != model_.obs_dim()) {
    throw ContractViolation("SpikeKalFilter::step: observation dimension mismatch");
  }
  const Eigen::Index n = model_.state_dim();
  const Eigen::Index m = model_.obs_dim();
  const bool teaching = phase_ == Phase::teacher;
  const bool learning = teaching || config_.post_teacher_adapt;

  // Teacher: the classic filter computes prior, gain and posterior.
  std::optional<std::pair<KalmanState, GainMatrix>> teacher;
  Eigen::VectorXd x_prior;
  if (learning) {
    teacher = kf_step(kalman_, model_, y);
    x_prior = teacher->first.x_prior;
  } else {
    x_prior = predict_mean(model_, kalman_.x);
  }

  const Features f = features(x_prior, y);
  const Eigen::VectorXd currents = encode_features(f.delta_x, f.delta_y, config_.input_gain);

  // The readout reflects this step's activity only, so trace <= substeps.
  decoder_.trace.setZero();
  SubstepHook hook;
  if (learning) {
    hook = [this](double now, const NetworkState& state, const Eigen::VectorXd& in_spikes,
                  const Eigen::VectorXd& out_spikes) {
      accumulate_eligibility(eligibility_, in_spikes, out_spikes, now, lif_.dt,
                             state.input.last_spike_time, state.output.last_spike_time,
                             config_.plasticity);
    };
  }
  network_forward(net_, net_state_, lif_, currents, config_.snn_substeps, decoder_, hook);
  const GainMatrix K_snn = decode_gain(decoder_, n, m);

  StepRecord record;
  record.phase = phase_;
  record.K_snn = K_snn;
  if (teaching) {
    record.K_used = teacher->second;
    kalman_ = teacher->first;
  } else {
    if (K_snn.is_finite()) {
      record.K_used = K_snn;
    } else {
      record.fault = true;
      record.K_used = GainMatrix::zero(n, m);
    }
    KalmanState next = kalman_;
    next.x_prior = x_prior;
    next.x = x_prior + record.K_used.matrix() * (y - model_.H() * x_prior);
    if (config_.post_teacher_adapt) {
      // Background covariance tracks the teacher's view of the estimate.
      next.P_prior = teacher->first.P_prior;
      next.P = teacher->first.P;
    } else {
      next.P.resize(0, 0);
      next.P_prior.resize(0, 0);
    }
    kalman_ = std::move(next);
  }
  if (learning) {
    learn(teacher->second, K_snn, record);
  }
  record.estimate = kalman_.x;

  prev_prior_ = x_prior;
  prev_posterior_ = kalman_.x;
  ++step_index_;

  if (phase_ == Phase::teacher) {
    bool stop = step_index_ >= static_cast<std::size_t>(config_.teacher_steps);
    if (!stop && config_.early_stop_error > 0.0) {
      recent_errors_.push_back(record.decoder_error);
      const auto window = static_cast<std::size_t>(config_.early_stop_window);
      if (recent_errors_.size() > window) {
        recent_errors_.erase(recent_errors_.begin());
      }
      if (recent_errors_.size() == window) {
        const double mean =
            std::accumulate(recent_errors_.begin(), recent_errors_.end(), 0.0) / window;
        stop = mean < config_.early_stop_error;
      }
    }
    if (stop) {
      phase_ = Phase::autonomous;
      transition_step_ = step_index_;
    }
  }
  return record;
}

void SpikeKalFilter::learn(const GainMatrix& K_teacher, const GainMatrix& K_snn,
                           StepRecord& record) {
  record.decoder_error = decoder_lms_update(decoder_, K_teacher);
  const Eigen::VectorXd reward =
      compute_reward(K_teacher, K_snn, config_.reward_scale, config_.global_reward);
  rstdp_apply(net_.W, eligibility_, reward, config_.plasticity);
}

SnnCheckpoint SpikeKalFilter::checkpoint() const { return {lif_, net_, decoder_}; }

void SpikeKalFilter::restore(const SnnCheckpoint& checkpoint) {
  if (checkpoint.topology.n_in != net_.n_in || checkpoint.topology.n_out != net_.n_out ||
      checkpoint.topology.W.rows() != net_.n_out || checkpoint.topology.W.cols() != net_.n_in ||
      checkpoint.decoder.gain.size() != net_.n_out || checkpoint.decoder.bias.size() != net_.n_out) {
    throw ContractViolation("checkpoint shape does not match the model");
  }
  net_.W = checkpoint.topology.W;
  decoder_.gain = checkpoint.decoder.gain;
  decoder_.bias = checkpoint.decoder.bias;
  decoder_.tau_dec = checkpoint.decoder.tau_dec;
  decoder_.lms_rate = checkpoint.decoder.lms_rate;
}

SpikeKalRun run_spikekal(const StateSpaceModel& model,
                         const std::vector<Eigen::VectorXd>& observations,
                         const SpikeKalConfig& config, const KalmanState& init,
                         const SnnCheckpoint* start_from) {
  SpikeKalFilter filter(model, config, init);
  if (start_from != nullptr) {
    filter.restore(*start_from);
  }
  SpikeKalRun run;
  run.estimates.reserve(observations.size());
  run.gains.reserve(observations.size());
  for (const auto& y : observations) {
    StepRecord record = filter.step(y);
    run.estimates.push_back(std::move(record.estimate));
    run.gains.push_back(std::move(record.K_used));
    run.phases.push_back(record.phase);
    run.faults.push_back(record.fault);
    run.fault_count += record.fault ? 1 : 0;
  }
  run.transition_step = filter.transition_step();
  run.final_checkpoint = filter.checkpoint();
  return run;
}

}  // namespace spikekal
