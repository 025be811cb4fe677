#include "spikekal/statespace.hpp"

#include "spikekal/errors.hpp"
#include "spikekal/text_format.hpp"

#include <Eigen/Eigenvalues>

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace spikekal {

namespace {

void require_dim(const Eigen::VectorXd& x, Eigen::Index n, const char* what) {
  if (x.size() != n) {
    throw ContractViolation(std::string(what) + ": expected dimension " + std::to_string(n) +
                            ", got " + std::to_string(x.size()));
  }
}

}  // namespace

Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov, const char* name) {
  if (cov.rows() != cov.cols()) {
    throw ModelValidationError(std::string(name) + " must be square");
  }
  if (!cov.allFinite()) {
    throw ModelValidationError(std::string(name) + " has non-finite entries");
  }
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ModelValidationError(std::string(name) + " is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) {
    return llt.matrixL();
  }
  // Semidefinite (e.g. Q = 0 or rank-deficient Q).
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd values = eig.eigenvalues();
  if (values.minCoeff() < -1e-9 * scale) {
    throw ModelValidationError(std::string(name) + " is not positive semidefinite (min eigenvalue " +
                               std::to_string(values.minCoeff()) + ")");
  }
  return eig.eigenvectors() * values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

Eigen::VectorXd sample_gaussian(const Eigen::MatrixXd& factor, NoiseStream& stream) {
  return factor * stream.standard_normal(factor.cols());
}

StateSpaceModel StateSpaceModel::linear(Eigen::MatrixXd A, Eigen::MatrixXd H, Eigen::MatrixXd Q,
                                        Eigen::MatrixXd R_obs, double dt) {
  StateSpaceModel m;
  m.kind_ = ModelKind::linear;
  m.A_ = std::move(A);
  m.H_ = std::move(H);
  m.Q_ = std::move(Q);
  m.R_ = std::move(R_obs);
  m.dt_ = dt;
  m.validate_and_factor();
  return m;
}

StateSpaceModel StateSpaceModel::lorenz(Eigen::MatrixXd H, Eigen::MatrixXd Q, Eigen::MatrixXd R_obs,
                                        double dt) {
  StateSpaceModel m;
  m.kind_ = ModelKind::lorenz;
  m.H_ = std::move(H);
  m.Q_ = std::move(Q);
  m.R_ = std::move(R_obs);
  m.dt_ = dt;
  m.validate_and_factor();
  return m;
}

StateSpaceModel StateSpaceModel::with_noise(Eigen::MatrixXd Q, Eigen::MatrixXd R_obs) const {
  StateSpaceModel m = *this;
  m.Q_ = std::move(Q);
  m.R_ = std::move(R_obs);
  m.validate_and_factor();
  return m;
}

void StateSpaceModel::validate_and_factor() {
  if (!(dt_ > 0.0)) {
    throw ModelValidationError("dt must be positive");
  }
  const Eigen::Index n = H_.cols();
  const Eigen::Index m = H_.rows();
  if (m < 1 || n < 1 || m > n) {
    throw ModelValidationError("H must be m x n with 1 <= m <= n");
  }
  if (kind_ == ModelKind::linear && (A_.rows() != n || A_.cols() != n)) {
    throw ModelValidationError("A must be n x n");
  }
  if (kind_ == ModelKind::lorenz && n != 3) {
    throw ModelValidationError("Lorenz model has state dimension 3");
  }
  if (Q_.rows() != n || R_.rows() != m) {
    throw ModelValidationError("Q must be n x n and R_obs m x m");
  }
  Q_sqrt_ = covariance_factor(Q_, "Q");
  R_sqrt_ = covariance_factor(R_, "R_obs");
}

void Trajectory::validate() const {
  if (observations.empty() || truth.size() != observations.size()) {
    throw ContractViolation("trajectory needs equal-length truth and observations, T >= 1");
  }
  for (const auto& v : truth) {
    require_dim(v, truth.front().size(), "trajectory truth");
  }
  for (const auto& v : observations) {
    require_dim(v, observations.front().size(), "trajectory observation");
  }
}

Eigen::MatrixXd constant_velocity_transition(double dt) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(4, 4);
  A(0, 2) = dt;
  A(1, 3) = dt;
  return A;
}

Eigen::MatrixXd position_observation() {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2, 4);
  H(0, 0) = 1.0;
  H(1, 1) = 1.0;
  return H;
}

Eigen::Vector3d lorenz_derivative(const Eigen::Ref<const Eigen::VectorXd>& x) {
  require_dim(x, 3, "lorenz_derivative");
  return {-10.0 * x[0] + 10.0 * x[1], 28.0 * x[0] - x[1] - x[0] * x[2],
          x[0] * x[1] - (8.0 / 3.0) * x[2]};
}

Eigen::VectorXd lorenz_rk4_step(const Eigen::Ref<const Eigen::VectorXd>& x, double dt) {
  const Eigen::VectorXd k1 = lorenz_derivative(x);
  const Eigen::VectorXd k2 = lorenz_derivative(x + 0.5 * dt * k1);
  const Eigen::VectorXd k3 = lorenz_derivative(x + 0.5 * dt * k2);
  const Eigen::VectorXd k4 = lorenz_derivative(x + dt * k3);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Eigen::VectorXd evolve(const StateSpaceModel& model, const Eigen::VectorXd& x,
                       NoiseGenerator& noise) {
  require_dim(x, model.state_dim(), "evolve");
  Eigen::VectorXd next = model.kind() == ModelKind::linear ? Eigen::VectorXd(model.A() * x)
                                                           : lorenz_rk4_step(x, model.dt());
  return next + sample_gaussian(model.process_noise_factor(), noise.process());
}

Eigen::VectorXd observe(const StateSpaceModel& model, const Eigen::VectorXd& x,
                        NoiseGenerator& noise) {
  require_dim(x, model.state_dim(), "observe");
  return model.H() * x + sample_gaussian(model.observation_noise_factor(), noise.observation());
}

Trajectory simulate(const StateSpaceModel& model, const Eigen::VectorXd& x0, std::size_t steps,
                    NoiseGenerator& noise) {
  if (steps < 1) {
    throw ContractViolation("simulate needs at least one step");
  }
  Trajectory traj;
  traj.dt = model.dt();
  traj.t0 = model.dt();
  traj.truth.reserve(steps);
  traj.observations.reserve(steps);
  Eigen::VectorXd x = x0;
  for (std::size_t k = 0; k < steps; ++k) {
    x = evolve(model, x, noise);
    traj.truth.push_back(x);
    traj.observations.push_back(observe(model, x, noise));
  }
  for (Eigen::Index i = 0; i < model.state_dim(); ++i) {
    traj.truth_labels.push_back("x" + std::to_string(i));
  }
  for (Eigen::Index i = 0; i < model.obs_dim(); ++i) {
    traj.obs_labels.push_back("y" + std::to_string(i));
  }
  return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  trajectory.validate();
  out << "t";
  for (const auto& label : trajectory.truth_labels) out << ',' << label;
  for (const auto& label : trajectory.obs_labels) out << ',' << label;
  out << '\n';
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    out << format_fixed6(trajectory.time(k));
    for (double v : trajectory.truth[k]) out << ',' << format_double(v);
    for (double v : trajectory.observations[k]) out << ',' << format_double(v);
    out << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& in, Eigen::Index state_dim) {
  Trajectory traj;
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("empty trajectory CSV", 1);
  }
  const auto header = split_csv_line(line);
  const auto cols = static_cast<Eigen::Index>(header.size());
  if (cols < state_dim + 2 || header[0] != "t") {
    throw ParseError("trajectory CSV header must be t,<truth...>,<obs...>", 1);
  }
  traj.truth_labels.assign(header.begin() + 1, header.begin() + 1 + state_dim);
  traj.obs_labels.assign(header.begin() + 1 + state_dim, header.end());
  std::vector<double> times;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<Eigen::Index>(fields.size()) != cols) {
      throw ParseError("expected " + std::to_string(cols) + " columns", line_no);
    }
    Eigen::VectorXd row(cols);
    for (Eigen::Index i = 0; i < cols; ++i) {
      row[i] = parse_double(fields[static_cast<std::size_t>(i)], line_no);
    }
    times.push_back(row[0]);
    traj.truth.emplace_back(row.segment(1, state_dim));
    traj.observations.emplace_back(row.tail(cols - 1 - state_dim));
  }
  if (times.empty()) {
    throw ParseError("trajectory CSV has no rows", line_no);
  }
  traj.t0 = times.front();
  traj.dt = times.size() > 1 ? (times.back() - times.front()) / static_cast<double>(times.size() - 1)
                             : 0.0;
  return traj;
}

}  // namespace spikekal
