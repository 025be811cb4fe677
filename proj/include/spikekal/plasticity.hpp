#pragma once

#include "spikekal/classic_filters.hpp"

#include <Eigen/Dense>

namespace spikekal {

struct PlasticityParams {
  double a_plus = 0.1;
  double a_minus = 0.12;
  double tau_plus = 0.020;
  double tau_minus = 0.020;
  double lr = 1.0;
  double w_min = 0.0;
  double w_max = 2.0;

  void validate() const;
};

/// Pairwise STDP terms accumulated over a filter step, forgotten with
/// time constant tau_elig.
struct EligibilityTrace {
  Eigen::MatrixXd e;  // n_out x n_in
  double tau_elig = 0.050;

  static EligibilityTrace zeros(Eigen::Index n_out, Eigen::Index n_in, double tau_elig);
};

/// A+ exp(-dt/tau+) for dt > 0, -A- exp(dt/tau-) for dt < 0, 0 at dt == 0.
/// delta_t = t_post - t_pre.
double stdp_eligibility(double delta_t, const PlasticityParams& params);

/// Decays the trace by one substep of length `dt`, then pairs every spike
/// at `now` with the most recent spike on the other side of each synapse
/// (nearest neighbour). `last_pre`/`last_post` hold the latest spike time
/// per neuron including spikes at `now`; -inf means never.
void accumulate_eligibility(EligibilityTrace& trace, const Eigen::VectorXd& pre_spikes,
                            const Eigen::VectorXd& post_spikes, double now, double dt,
                            const Eigen::VectorXd& last_pre, const Eigen::VectorXd& last_post,
                            const PlasticityParams& params);

/// W[j][i] += lr * reward[j] * e[j][i], clamped to [w_min, w_max].
void rstdp_apply(Eigen::MatrixXd& W, const EligibilityTrace& trace, const Eigen::VectorXd& reward,
                 const PlasticityParams& params);

/// Unmodulated STDP (reward 1 everywhere). Only used to exercise the rule
/// in isolation.
void stdp_apply(Eigen::MatrixXd& W, const EligibilityTrace& trace, const PlasticityParams& params);

/// r[j] = clamp(scale * (K_teacher[j] - K_decoded[j]), -1, 1) over the
/// row-major flattening. With `global` every entry gets the mean of r.
Eigen::VectorXd compute_reward(const GainMatrix& K_teacher, const GainMatrix& K_decoded, double scale,
                               bool global = false);

}  // namespace spikekal
