#pragma once

#include "spikekal/classic_filters.hpp"
#include "spikekal/noise.hpp"

#include <Eigen/Dense>

#include <functional>

namespace spikekal {

/// Leaky integrate-and-fire parameters.
///
///   dV/dt = -(V - v_rest) / tau_membrane + I / tau_input
///   dI/dt = -I / tau_current + sum_i W_i s_i + external
///
/// Spikes are Dirac impulses, so a presynaptic spike bumps I by W_i.
/// A neuron with V >= v_thresh fires and is reset to v_reset.
struct LifParams {
  double tau_membrane = 0.020;
  double tau_input = 0.020;
  double tau_current = 0.010;
  double v_rest = 0.0;
  double v_thresh = 0.3;
  double v_reset = 0.0;
  double dt = 0.0005;

  /// Throws ConfigError on non-positive constants, v_thresh <= v_rest, or
  /// dt > min(tau_membrane, tau_current) / 2.
  void validate() const;
};

struct NeuronState {
  Eigen::VectorXd v;
  Eigen::VectorXd i_syn;
  Eigen::VectorXd last_spike_time;  // -inf until the first spike

  static NeuronState at_rest(Eigen::Index size, const LifParams& params);
  Eigen::Index size() const noexcept { return v.size(); }
};

/// Fully connected input -> output layer. W is n_out x n_in.
struct NetworkTopology {
  Eigen::Index n_in = 0;
  Eigen::Index n_out = 0;
  Eigen::MatrixXd W;

  /// n + m inputs (features) and n*m outputs (one per gain entry),
  /// weights uniform in [0, w_init_max].
  static NetworkTopology for_model(Eigen::Index n, Eigen::Index m, double w_init_max,
                                   NoiseStream& stream);
  Eigen::Index neuron_count() const noexcept { return n_in + n_out; }
};

constexpr Eigen::Index spikekal_neuron_count(Eigen::Index n, Eigen::Index m) {
  return n + m + n * m;
}

struct NetworkState {
  NeuronState input;
  NeuronState output;
  double now = 0.0;

  static NetworkState at_rest(const NetworkTopology& net, const LifParams& params);
};

/// Per-output exponentially filtered spike trace with an affine readout
/// K_flat[j] = gain[j] * trace[j] + bias[j].
struct GainDecoder {
  Eigen::VectorXd trace;
  Eigen::VectorXd gain;
  Eigen::VectorXd bias;
  double tau_dec = 0.005;
  double lms_rate = 0.01;

  static GainDecoder create(Eigen::Index n_out, double tau_dec, double lms_rate,
                            double initial_gain = 0.0, double initial_bias = 0.0);

  /// trace <- trace * exp(-dt / tau_dec) + spikes
  void accumulate(const Eigen::VectorXd& spikes, double dt);
};

/// Concatenates (delta_x, delta_y) scaled by `input_gain`.
Eigen::VectorXd encode_features(const Eigen::VectorXd& delta_x, const Eigen::VectorXd& delta_y,
                                double input_gain);

/// One forward-Euler substep of a neuron population at time `now`.
/// `synaptic_input` is the instantaneous current jump (W s) delivered
/// this substep. Returns the 0/1 spike vector.
Eigen::VectorXd lif_step(NeuronState& state, const LifParams& params,
                         const Eigen::VectorXd& external_current,
                         const Eigen::VectorXd& synaptic_input, double now);

Eigen::VectorXd lif_step(NeuronState& state, const LifParams& params,
                         const Eigen::VectorXd& external_current, const Eigen::MatrixXd& W,
                         const Eigen::VectorXd& input_spikes, double now);

/// Called after every substep with the input and output spike vectors.
using SubstepHook = std::function<void(double now, const NetworkState& state,
                                       const Eigen::VectorXd& input_spikes,
                                       const Eigen::VectorXd& output_spikes)>;

struct ForwardResult {
  Eigen::VectorXd input_spike_counts;
  Eigen::VectorXd output_spike_counts;
};

/// Runs `substeps` LIF substeps. Input neurons get `input_currents`;
/// output neurons are driven through W by the same substep's input
/// spikes. Decoder traces are updated every substep.
ForwardResult network_forward(const NetworkTopology& net, NetworkState& state,
                              const LifParams& params, const Eigen::VectorXd& input_currents,
                              int substeps, GainDecoder& decoder, const SubstepHook& hook = {});

GainMatrix decode_gain(const GainDecoder& decoder, Eigen::Index n, Eigen::Index m);

/// One LMS step toward the teacher gain. Returns the mean absolute
/// readout error before the step.
double decoder_lms_update(GainDecoder& decoder, const GainMatrix& K_teacher);

}  // namespace spikekal
