#include "spikekal/plasticity.hpp"

#include "spikekal/errors.hpp"

#include <cmath>

namespace spikekal {

void PlasticityParams::validate() const {
  if (!(a_plus > 0.0 && a_minus > 0.0 && tau_plus > 0.0 && tau_minus > 0.0)) {
    throw ConfigError("STDP amplitudes and time constants must be positive");
  }
  if (!(w_min < w_max)) {
    throw ConfigError("w_min must be below w_max");
  }
}

EligibilityTrace EligibilityTrace::zeros(Eigen::Index n_out, Eigen::Index n_in, double tau_elig) {
  if (!(tau_elig > 0.0)) {
    throw ConfigError("tau_elig must be positive");
  }
  return {Eigen::MatrixXd::Zero(n_out, n_in), tau_elig};
}

double stdp_eligibility(double delta_t, const PlasticityParams& params) {
  if (delta_t > 0.0) {
    return params.a_plus * std::exp(-delta_t / params.tau_plus);
  }
  if (delta_t < 0.0) {
    return -params.a_minus * std::exp(delta_t / params.tau_minus);
  }
  return 0.0;
}

void accumulate_eligibility(EligibilityTrace& trace, const Eigen::VectorXd& pre_spikes,
                            const Eigen::VectorXd& post_spikes, double now, double dt,
                            const Eigen::VectorXd& last_pre, const Eigen::VectorXd& last_post,
                            const PlasticityParams& params) {
  const Eigen::Index n_out = trace.e.rows();
  const Eigen::Index n_in = trace.e.cols();
  if (pre_spikes.size() != n_in || last_pre.size() != n_in || post_spikes.size() != n_out ||
      last_post.size() != n_out) {
    throw ContractViolation("accumulate_eligibility: dimension mismatch");
  }
  trace.e *= std::exp(-dt / trace.tau_elig);
  for (Eigen::Index j = 0; j < n_out; ++j) {
    for (Eigen::Index i = 0; i < n_in; ++i) {
      // exp(-inf) terms vanish, so neurons that never fired contribute 0.
      if (post_spikes[j] > 0.0 && std::isfinite(last_pre[i])) {
        trace.e(j, i) += stdp_eligibility(now - last_pre[i], params);
      }
      if (pre_spikes[i] > 0.0 && std::isfinite(last_post[j])) {
        trace.e(j, i) += stdp_eligibility(last_post[j] - now, params);
      }
    }
  }
}

void rstdp_apply(Eigen::MatrixXd& W, const EligibilityTrace& trace, const Eigen::VectorXd& reward,
                 const PlasticityParams& params) {
  if (W.rows() != trace.e.rows() || W.cols() != trace.e.cols() || reward.size() != W.rows()) {
    throw ContractViolation("rstdp_apply: shape mismatch");
  }
  W += params.lr * (reward.asDiagonal() * trace.e);
  W = W.cwiseMax(params.w_min).cwiseMin(params.w_max);
}

void stdp_apply(Eigen::MatrixXd& W, const EligibilityTrace& trace, const PlasticityParams& params) {
  rstdp_apply(W, trace, Eigen::VectorXd::Ones(W.rows()), params);
}

Eigen::VectorXd compute_reward(const GainMatrix& K_teacher, const GainMatrix& K_decoded, double scale,
                               bool global) {
  if (K_teacher.rows() != K_decoded.rows() || K_teacher.cols() != K_decoded.cols()) {
    throw ContractViolation("compute_reward: shape mismatch");
  }
  Eigen::VectorXd r = (scale * (K_teacher.flat() - K_decoded.flat())).cwiseMax(-1.0).cwiseMin(1.0);
  if (global) {
    r.setConstant(r.mean());
  }
  return r;
}

}  // namespace spikekal
