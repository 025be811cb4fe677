#pragma once

#include "spikekal/noise.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace spikekal {

enum class ModelKind { linear, lorenz };

/// Discrete-time state-space model x_t = f(x_{t-1}) + w, y_t = H x_t + v.
///
/// For the linear kind f(x) = A x. For the Lorenz kind the ground-truth
/// step is one RK4 step of the Lorenz flow over dt; filters use the
/// Euler linearization from classic_filters instead.
///
/// Noise square-root factors are computed once at construction, so an
/// invalid covariance is reported here and never during simulation.
class StateSpaceModel {
 public:
  static StateSpaceModel linear(Eigen::MatrixXd A, Eigen::MatrixXd H, Eigen::MatrixXd Q,
                                Eigen::MatrixXd R_obs, double dt);
  static StateSpaceModel lorenz(Eigen::MatrixXd H, Eigen::MatrixXd Q, Eigen::MatrixXd R_obs,
                                double dt);

  ModelKind kind() const noexcept { return kind_; }
  const Eigen::MatrixXd& A() const noexcept { return A_; }
  const Eigen::MatrixXd& H() const noexcept { return H_; }
  const Eigen::MatrixXd& Q() const noexcept { return Q_; }
  const Eigen::MatrixXd& R_obs() const noexcept { return R_; }
  double dt() const noexcept { return dt_; }
  Eigen::Index state_dim() const noexcept { return H_.cols(); }
  Eigen::Index obs_dim() const noexcept { return H_.rows(); }

  const Eigen::MatrixXd& process_noise_factor() const noexcept { return Q_sqrt_; }
  const Eigen::MatrixXd& observation_noise_factor() const noexcept { return R_sqrt_; }

  /// Same dynamics with different noise covariances (mismatched filters).
  StateSpaceModel with_noise(Eigen::MatrixXd Q, Eigen::MatrixXd R_obs) const;

 private:
  StateSpaceModel() = default;
  void validate_and_factor();

  ModelKind kind_ = ModelKind::linear;
  Eigen::MatrixXd A_;
  Eigen::MatrixXd H_;
  Eigen::MatrixXd Q_;
  Eigen::MatrixXd R_;
  double dt_ = 0.0;
  Eigen::MatrixXd Q_sqrt_;
  Eigen::MatrixXd R_sqrt_;
};

/// Time-indexed truth and observation sequences sharing one step size.
/// Sample k sits at time t0 + k*dt.
struct Trajectory {
  double dt = 0.0;
  double t0 = 0.0;
  std::vector<Eigen::VectorXd> truth;
  std::vector<Eigen::VectorXd> observations;
  std::vector<std::string> truth_labels;
  std::vector<std::string> obs_labels;

  std::size_t size() const noexcept { return observations.size(); }
  double time(std::size_t k) const noexcept { return t0 + static_cast<double>(k) * dt; }
  void validate() const;
};

/// Returns L with L L^T = cov. Falls back to an eigendecomposition with
/// negative eigenvalues clamped to zero when cov is only semidefinite.
/// Throws ModelValidationError if cov is asymmetric or clearly indefinite.
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov, const char* name);

/// Sample from N(0, L L^T).
Eigen::VectorXd sample_gaussian(const Eigen::MatrixXd& factor, NoiseStream& stream);

// Constant-velocity transition for state (X, Y, Vx, Vy).
Eigen::MatrixXd constant_velocity_transition(double dt);
// Selects (X, Y) from (X, Y, Vx, Vy).
Eigen::MatrixXd position_observation();

Eigen::Vector3d lorenz_derivative(const Eigen::Ref<const Eigen::VectorXd>& x);
/// One classical RK4 step of the Lorenz flow.
Eigen::VectorXd lorenz_rk4_step(const Eigen::Ref<const Eigen::VectorXd>& x, double dt);

Eigen::VectorXd evolve(const StateSpaceModel& model, const Eigen::VectorXd& x,
                       NoiseGenerator& noise);
Eigen::VectorXd observe(const StateSpaceModel& model, const Eigen::VectorXd& x,
                        NoiseGenerator& noise);

/// truth[0] is one evolve() of x0; observations[k] = observe(truth[k]).
Trajectory simulate(const StateSpaceModel& model, const Eigen::VectorXd& x0, std::size_t steps,
                    NoiseGenerator& noise);

/// Header `t,<truth labels>,<obs labels>`; time with 6 decimals, values
/// in shortest round-trip form.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);
Trajectory read_trajectory_csv(std::istream& in, Eigen::Index state_dim);

}  // namespace spikekal
