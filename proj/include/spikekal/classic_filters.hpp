#pragma once

#include "spikekal/statespace.hpp"

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace spikekal {

/// Posterior (x, P) plus the most recent prior (x_prior, P_prior).
struct KalmanState {
  Eigen::VectorXd x;
  Eigen::MatrixXd P;
  Eigen::VectorXd x_prior;
  Eigen::MatrixXd P_prior;

  static KalmanState initial(Eigen::VectorXd x0, Eigen::MatrixXd P0);
};

/// n x m gain weighting the innovation. Flat index j maps row-major to
/// (j / m, j % m), which is also the output-neuron order of the SNN.
class GainMatrix {
 public:
  GainMatrix() = default;
  explicit GainMatrix(Eigen::MatrixXd K) : K_(std::move(K)) {}

  static GainMatrix zero(Eigen::Index n, Eigen::Index m) {
    return GainMatrix(Eigen::MatrixXd::Zero(n, m));
  }
  static GainMatrix from_flat(const Eigen::VectorXd& flat, Eigen::Index n, Eigen::Index m);

  const Eigen::MatrixXd& matrix() const noexcept { return K_; }
  Eigen::Index rows() const noexcept { return K_.rows(); }
  Eigen::Index cols() const noexcept { return K_.cols(); }
  Eigen::VectorXd flat() const;
  bool is_finite() const { return K_.allFinite(); }

 private:
  Eigen::MatrixXd K_;
};

KalmanState kf_predict(const KalmanState& state, const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q);

/// K = P_prior H^T (H P_prior H^T + R)^-1 by a Cholesky solve. If the
/// innovation covariance is not positive definite a ridge of
/// 1e-12 * trace is added once; if that also fails NumericalError is thrown.
GainMatrix kf_gain(const Eigen::MatrixXd& P_prior, const Eigen::MatrixXd& H,
                   const Eigen::MatrixXd& R_obs);

/// x = x_prior + K (y - H x_prior), P = (I - K H) P_prior symmetrized.
KalmanState kf_update(const KalmanState& state, const GainMatrix& K, const Eigen::VectorXd& y,
                      const Eigen::MatrixXd& H);

/// Analytic Jacobian of lorenz_derivative.
Eigen::Matrix3d lorenz_jacobian(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Discrete transition I + dt J(x) for the Lorenz kind.
Eigen::MatrixXd ekf_jacobian(const StateSpaceModel& model, const Eigen::VectorXd& x);

/// Filter-side mean propagation: A x for linear models, one forward-Euler
/// step x + dt f(x) for Lorenz.
Eigen::VectorXd predict_mean(const StateSpaceModel& model, const Eigen::VectorXd& x);

/// Covariance transition used at posterior x: A, or ekf_jacobian(x).
Eigen::MatrixXd transition_matrix(const StateSpaceModel& model, const Eigen::VectorXd& x);

/// predict -> gain -> update with the model's Q and R_obs. Lorenz models
/// run as an EKF linearized at the current posterior. Returns the gain used.
std::pair<KalmanState, GainMatrix> kf_step(const KalmanState& state, const StateSpaceModel& model,
                                           const Eigen::VectorXd& y);

/// H^+ y with zeros in unobserved directions; P0 = I.
KalmanState lift_initial_state(const StateSpaceModel& model, const Eigen::VectorXd& y0);

struct FilterRun {
  std::vector<Eigen::VectorXd> estimates;
  std::vector<GainMatrix> gains;
};

/// Runs kf_step over every observation starting from `init`.
FilterRun run_kalman(const StateSpaceModel& model, const std::vector<Eigen::VectorXd>& observations,
                     const KalmanState& init);

}  // namespace spikekal
