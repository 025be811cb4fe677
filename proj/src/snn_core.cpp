#include "spikekal/snn_core.hpp"

#include "spikekal/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace spikekal {

void LifParams::validate() const {
  if (!(tau_membrane > 0.0 && tau_input > 0.0 && tau_current > 0.0 && dt > 0.0)) {
    throw ConfigError("LIF time constants and dt must be positive");
  }
  if (!(v_thresh > v_rest)) {
    throw ConfigError("LIF v_thresh must exceed v_rest");
  }
  const double limit = 0.5 * std::min(tau_membrane, tau_current);
  if (dt > limit) {
    throw ConfigError("LIF dt " + std::to_string(dt) + " exceeds stability limit " +
                      std::to_string(limit));
  }
}

NeuronState NeuronState::at_rest(Eigen::Index size, const LifParams& params) {
  NeuronState s;
  s.v = Eigen::VectorXd::Constant(size, params.v_rest);
  s.i_syn = Eigen::VectorXd::Zero(size);
  s.last_spike_time =
      Eigen::VectorXd::Constant(size, -std::numeric_limits<double>::infinity());
  return s;
}

NetworkTopology NetworkTopology::for_model(Eigen::Index n, Eigen::Index m, double w_init_max,
                                           NoiseStream& stream) {
  NetworkTopology net;
  net.n_in = n + m;
  net.n_out = n * m;
  net.W.resize(net.n_out, net.n_in);
  for (Eigen::Index j = 0; j < net.n_out; ++j) {
    for (Eigen::Index i = 0; i < net.n_in; ++i) {
      net.W(j, i) = w_init_max * stream.uniform();
    }
  }
  return net;
}

NetworkState NetworkState::at_rest(const NetworkTopology& net, const LifParams& params) {
  return {NeuronState::at_rest(net.n_in, params), NeuronState::at_rest(net.n_out, params), 0.0};
}

GainDecoder GainDecoder::create(Eigen::Index n_out, double tau_dec, double lms_rate,
                                double initial_gain, double initial_bias) {
  if (!(tau_dec > 0.0)) {
    throw ConfigError("decoder tau must be positive");
  }
  GainDecoder d;
  d.trace = Eigen::VectorXd::Zero(n_out);
  d.gain = Eigen::VectorXd::Constant(n_out, initial_gain);
  d.bias = Eigen::VectorXd::Constant(n_out, initial_bias);
  d.tau_dec = tau_dec;
  d.lms_rate = lms_rate;
  return d;
}

void GainDecoder::accumulate(const Eigen::VectorXd& spikes, double dt) {
  trace = trace * std::exp(-dt / tau_dec) + spikes;
}

Eigen::VectorXd encode_features(const Eigen::VectorXd& delta_x, const Eigen::VectorXd& delta_y,
                                double input_gain) {
  Eigen::VectorXd out(delta_x.size() + delta_y.size());
  out << delta_x, delta_y;
  return input_gain * out;
}

Eigen::VectorXd lif_step(NeuronState& state, const LifParams& params,
                         const Eigen::VectorXd& external_current,
                         const Eigen::VectorXd& synaptic_input, double now) {
  const Eigen::Index n = state.size();
  if (external_current.size() != n || synaptic_input.size() != n) {
    throw ContractViolation("lif_step: drive dimension mismatch");
  }
  const double dt = params.dt;
  state.i_syn += dt * (external_current - state.i_syn / params.tau_current) + synaptic_input;
  state.v += dt * (-(state.v.array() - params.v_rest) / params.tau_membrane +
                   state.i_syn.array() / params.tau_input)
                      .matrix();
  Eigen::VectorXd spikes = Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (state.v[k] >= params.v_thresh) {
      spikes[k] = 1.0;
      state.v[k] = params.v_reset;
      state.last_spike_time[k] = now;
    }
  }
  return spikes;
}

Eigen::VectorXd lif_step(NeuronState& state, const LifParams& params,
                         const Eigen::VectorXd& external_current, const Eigen::MatrixXd& W,
                         const Eigen::VectorXd& input_spikes, double now) {
  if (W.rows() != state.size() || W.cols() != input_spikes.size()) {
    throw ContractViolation("lif_step: weight shape mismatch");
  }
  return lif_step(state, params, external_current, W * input_spikes, now);
}

ForwardResult network_forward(const NetworkTopology& net, NetworkState& state,
                              const LifParams& params, const Eigen::VectorXd& input_currents,
                              int substeps, GainDecoder& decoder, const SubstepHook& hook) {
  if (substeps < 1) {
    throw ContractViolation("network_forward needs at least one substep");
  }
  if (input_currents.size() != net.n_in || decoder.trace.size() != net.n_out) {
    throw ContractViolation("network_forward: dimension mismatch");
  }
  ForwardResult result{Eigen::VectorXd::Zero(net.n_in), Eigen::VectorXd::Zero(net.n_out)};
  const Eigen::VectorXd no_input = Eigen::VectorXd::Zero(net.n_in);
  const Eigen::VectorXd no_external = Eigen::VectorXd::Zero(net.n_out);
  for (int k = 0; k < substeps; ++k) {
    state.now += params.dt;
    const Eigen::VectorXd in_spikes = lif_step(state.input, params, input_currents, no_input, state.now);
    const Eigen::VectorXd out_spikes =
        lif_step(state.output, params, no_external, net.W, in_spikes, state.now);
    decoder.accumulate(out_spikes, params.dt);
    result.input_spike_counts += in_spikes;
    result.output_spike_counts += out_spikes;
    if (hook) {
      hook(state.now, state, in_spikes, out_spikes);
    }
  }
  return result;
}

GainMatrix decode_gain(const GainDecoder& decoder, Eigen::Index n, Eigen::Index m) {
  if (decoder.trace.size() != n * m) {
    throw ContractViolation("decode_gain: decoder needs n*m outputs");
  }
  const Eigen::VectorXd flat =
      (decoder.gain.array() * decoder.trace.array() + decoder.bias.array()).matrix();
  return GainMatrix::from_flat(flat, n, m);
}

double decoder_lms_update(GainDecoder& decoder, const GainMatrix& K_teacher) {
  const Eigen::VectorXd target = K_teacher.flat();
  if (target.size() != decoder.trace.size()) {
    throw ContractViolation("decoder_lms_update: teacher shape mismatch");
  }
  const Eigen::VectorXd error =
      target - (decoder.gain.array() * decoder.trace.array() + decoder.bias.array()).matrix();
  decoder.gain += decoder.lms_rate * error.cwiseProduct(decoder.trace);
  decoder.bias += decoder.lms_rate * error;
  return error.cwiseAbs().mean();
}

}  // namespace spikekal
