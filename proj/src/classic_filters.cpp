#include "spikekal/classic_filters.hpp"

#include "spikekal/errors.hpp"

#include <limits>
#include <string>

namespace spikekal {

namespace {

void require_square(const Eigen::MatrixXd& M, Eigen::Index n, const char* what) {
  if (M.rows() != n || M.cols() != n) {
    throw ContractViolation(std::string(what) + ": expected " + std::to_string(n) + "x" +
                            std::to_string(n));
  }
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& P) { return 0.5 * (P + P.transpose()); }

}  // namespace

KalmanState KalmanState::initial(Eigen::VectorXd x0, Eigen::MatrixXd P0) {
  KalmanState s;
  s.x_prior = x0;
  s.P_prior = P0;
  s.x = std::move(x0);
  s.P = std::move(P0);
  return s;
}

GainMatrix GainMatrix::from_flat(const Eigen::VectorXd& flat, Eigen::Index n, Eigen::Index m) {
  if (flat.size() != n * m) {
    throw ContractViolation("gain needs n*m entries");
  }
  Eigen::MatrixXd K(n, m);
  for (Eigen::Index j = 0; j < flat.size(); ++j) {
    K(j / m, j % m) = flat[j];
  }
  return GainMatrix(std::move(K));
}

Eigen::VectorXd GainMatrix::flat() const {
  Eigen::VectorXd out(K_.size());
  const Eigen::Index m = K_.cols();
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    out[j] = K_(j / m, j % m);
  }
  return out;
}

KalmanState kf_predict(const KalmanState& state, const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q) {
  const Eigen::Index n = state.x.size();
  require_square(A, n, "kf_predict A");
  require_square(Q, n, "kf_predict Q");
  require_square(state.P, n, "kf_predict P");
  KalmanState out = state;
  out.x_prior = A * state.x;
  out.P_prior = symmetrized(A * state.P * A.transpose() + Q);
  return out;
}

GainMatrix kf_gain(const Eigen::MatrixXd& P_prior, const Eigen::MatrixXd& H,
                   const Eigen::MatrixXd& R_obs) {
  const Eigen::Index n = P_prior.rows();
  const Eigen::Index m = H.rows();
  require_square(P_prior, n, "kf_gain P_prior");
  require_square(R_obs, m, "kf_gain R_obs");
  if (H.cols() != n) {
    throw ContractViolation("kf_gain: H must be m x n");
  }
  const Eigen::MatrixXd HP = H * P_prior;
  Eigen::MatrixXd S = symmetrized(HP * H.transpose() + R_obs);
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) {
    S += 1e-12 * S.trace() * Eigen::MatrixXd::Identity(m, m);
    llt.compute(S);
  }
  if (llt.info() != Eigen::Success) {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(S);
    const auto& sv = svd.singularValues();
    const double cond = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1]
                                                : std::numeric_limits<double>::infinity();
    throw NumericalError("innovation covariance is singular (condition " + std::to_string(cond) + ")",
                         cond);
  }
  // S is symmetric, so K^T = S^-1 H P_prior.
  GainMatrix K(llt.solve(HP).transpose());
  if (!K.is_finite()) {
    throw NumericalError("Kalman gain is not finite", std::numeric_limits<double>::infinity());
  }
  return K;
}

KalmanState kf_update(const KalmanState& state, const GainMatrix& K, const Eigen::VectorXd& y,
                      const Eigen::MatrixXd& H) {
  const Eigen::Index n = state.x_prior.size();
  const Eigen::Index m = H.rows();
  if (H.cols() != n || y.size() != m || K.rows() != n || K.cols() != m) {
    throw ContractViolation("kf_update: dimension mismatch");
  }
  KalmanState out = state;
  out.x = state.x_prior + K.matrix() * (y - H * state.x_prior);
  if (state.P_prior.size() > 0) {
    const Eigen::MatrixXd IKH = Eigen::MatrixXd::Identity(n, n) - K.matrix() * H;
    out.P = symmetrized(IKH * state.P_prior);
  }
  return out;
}

Eigen::Matrix3d lorenz_jacobian(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != 3) {
    throw ContractViolation("lorenz_jacobian: expected dimension 3");
  }
  Eigen::Matrix3d J;
  J << -10.0, 10.0, 0.0,
       28.0 - x[2], -1.0, -x[0],
       x[1], x[0], -8.0 / 3.0;
  return J;
}

Eigen::MatrixXd ekf_jacobian(const StateSpaceModel& model, const Eigen::VectorXd& x) {
  if (model.kind() != ModelKind::lorenz) {
    throw ContractViolation("ekf_jacobian requires a Lorenz model");
  }
  return Eigen::MatrixXd::Identity(3, 3) + model.dt() * Eigen::MatrixXd(lorenz_jacobian(x));
}

Eigen::VectorXd predict_mean(const StateSpaceModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.state_dim()) {
    throw ContractViolation("predict_mean: dimension mismatch");
  }
  if (model.kind() == ModelKind::linear) {
    return model.A() * x;
  }
  return x + model.dt() * Eigen::VectorXd(lorenz_derivative(x));
}

Eigen::MatrixXd transition_matrix(const StateSpaceModel& model, const Eigen::VectorXd& x) {
  return model.kind() == ModelKind::linear ? model.A() : ekf_jacobian(model, x);
}

std::pair<KalmanState, GainMatrix> kf_step(const KalmanState& state, const StateSpaceModel& model,
                                           const Eigen::VectorXd& y) {
  KalmanState predicted = kf_predict(state, transition_matrix(model, state.x), model.Q());
  if (model.kind() == ModelKind::lorenz) {
    predicted.x_prior = predict_mean(model, state.x);
  }
  GainMatrix K = kf_gain(predicted.P_prior, model.H(), model.R_obs());
  KalmanState updated = kf_update(predicted, K, y, model.H());
  return {std::move(updated), std::move(K)};
}

KalmanState lift_initial_state(const StateSpaceModel& model, const Eigen::VectorXd& y0) {
  if (y0.size() != model.obs_dim()) {
    throw ContractViolation("lift_initial_state: observation dimension mismatch");
  }
  const Eigen::MatrixXd pinv = model.H().completeOrthogonalDecomposition().pseudoInverse();
  return KalmanState::initial(pinv * y0,
                              Eigen::MatrixXd::Identity(model.state_dim(), model.state_dim()));
}

FilterRun run_kalman(const StateSpaceModel& model, const std::vector<Eigen::VectorXd>& observations,
                     const KalmanState& init) {
  FilterRun run;
  run.estimates.reserve(observations.size());
  run.gains.reserve(observations.size());
  KalmanState state = init;
  for (const auto& y : observations) {
    auto [next, K] = kf_step(state, model, y);
    state = std::move(next);
    run.estimates.push_back(state.x);
    run.gains.push_back(std::move(K));
  }
  return run;
}

}  // namespace spikekal
