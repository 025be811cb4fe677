#include <gtest/gtest.h>

#include "spikekal/errors.hpp"
#include "spikekal/statespace.hpp"
#include "support.hpp"

#include <cmath>
#include <sstream>

namespace spikekal {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd vec(std::initializer_list<double> values) {
  VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

StateSpaceModel noiseless_cv(double dt) {
  return StateSpaceModel::linear(constant_velocity_transition(dt), position_observation(),
                                 MatrixXd::Zero(4, 4), MatrixXd::Zero(2, 2), dt);
}

TEST(Evolve, ConstantVelocityNoiseFree) {
  NoiseGenerator noise(1);
  const VectorXd x = evolve(noiseless_cv(0.01), vec({0, 0, 1, 1}), noise);
  EXPECT_NEAR(x[0], 0.01, 1e-15);
  EXPECT_NEAR(x[1], 0.01, 1e-15);
  EXPECT_DOUBLE_EQ(x[2], 1.0);
  EXPECT_DOUBLE_EQ(x[3], 1.0);
}

TEST(Evolve, LorenzOriginIsFixed) {
  const auto model =
      StateSpaceModel::lorenz(MatrixXd{{1, 0, 0}}, MatrixXd::Zero(3, 3), MatrixXd::Identity(1, 1), 0.01);
  NoiseGenerator noise(2);
  EXPECT_EQ(evolve(model, VectorXd::Zero(3), noise), VectorXd::Zero(3));
}

TEST(Evolve, IdentityLeavesStateUnchanged) {
  testing::Gen gen(3);
  const auto model = StateSpaceModel::linear(MatrixXd::Identity(3, 3), MatrixXd::Identity(2, 3),
                                             MatrixXd::Zero(3, 3), MatrixXd::Identity(2, 2), 0.5);
  NoiseGenerator noise(3);
  for (int trial = 0; trial < 20; ++trial) {
    const VectorXd x = gen.vector(3, -100, 100);
    EXPECT_EQ(evolve(model, x, noise), x);
  }
}

TEST(Evolve, WrongDimensionIsContractViolation) {
  NoiseGenerator noise(4);
  EXPECT_THROW(evolve(noiseless_cv(0.01), VectorXd::Zero(3), noise), ContractViolation);
  EXPECT_THROW(observe(noiseless_cv(0.01), VectorXd::Zero(2), noise), ContractViolation);
}

TEST(Observe, PositionSelector) {
  NoiseGenerator noise(5);
  EXPECT_EQ(observe(noiseless_cv(0.01), vec({3, 4, 1, 1}), noise), vec({3, 4}));
}

TEST(Observe, LorenzFirstCoordinate) {
  const auto model =
      StateSpaceModel::lorenz(MatrixXd{{1, 0, 0}}, MatrixXd::Zero(3, 3), MatrixXd::Zero(1, 1), 0.01);
  NoiseGenerator noise(6);
  EXPECT_EQ(observe(model, vec({5, 7, 9}), noise), vec({5}));
}

TEST(Observe, IdentityNoiseFreeEqualsState) {
  const auto model = StateSpaceModel::linear(MatrixXd::Identity(3, 3), MatrixXd::Identity(3, 3),
                                             MatrixXd::Zero(3, 3), MatrixXd::Zero(3, 3), 1.0);
  NoiseGenerator noise(7);
  const VectorXd x = vec({-2.5, 0.0, 1e6});
  EXPECT_EQ(observe(model, x, noise), x);
}

TEST(LorenzDerivative, KnownPoints) {
  const Eigen::Vector3d d = lorenz_derivative(vec({1, 1, 1}));
  EXPECT_DOUBLE_EQ(d[0], 0.0);
  EXPECT_DOUBLE_EQ(d[1], 26.0);
  EXPECT_NEAR(d[2], -5.0 / 3.0, 1e-15);
  EXPECT_EQ(lorenz_derivative(VectorXd::Zero(3)), Eigen::Vector3d::Zero());
  const double r = std::sqrt(72.0);
  EXPECT_LT(lorenz_derivative(vec({r, r, 27})).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(lorenz_derivative(VectorXd::Zero(2)), ContractViolation);
}

TEST(LorenzDerivative, MatchesIndependentFormula) {
  testing::Gen gen(8);
  for (int trial = 0; trial < 50; ++trial) {
    const VectorXd x = gen.vector(3, -30, 30);
    EXPECT_LT((VectorXd(lorenz_derivative(x)) - testing::lorenz_rhs(x)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((lorenz_rk4_step(x, 0.01) - testing::lorenz_rk4(x, 0.01)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Simulate, ConstantVelocityPositions) {
  NoiseGenerator noise(9);
  const Trajectory traj = simulate(noiseless_cv(0.01), vec({0, 0, 1, 0}), 3, noise);
  ASSERT_EQ(traj.size(), 3u);
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(traj.truth[k][0], 0.01 * (k + 1), 1e-15);
    EXPECT_DOUBLE_EQ(traj.truth[k][1], 0.0);
    EXPECT_EQ(traj.observations[k], traj.truth[k].head(2));
  }
}

TEST(Simulate, ThirtySecondsAtTenMilliseconds) {
  NoiseGenerator noise(10);
  const Trajectory traj = simulate(noiseless_cv(0.01), vec({0, 0, 1, 1}), 3000, noise);
  EXPECT_EQ(traj.size(), 3000u);
  EXPECT_NEAR(traj.time(traj.size() - 1), 30.0, 1e-9);
}

TEST(Simulate, SameSeedSameBits) {
  const auto model = StateSpaceModel::linear(constant_velocity_transition(0.01), position_observation(),
                                             0.01 * MatrixXd::Identity(4, 4), MatrixXd::Identity(2, 2), 0.01);
  NoiseGenerator a(11), b(11), c(12);
  const Trajectory ta = simulate(model, vec({0, 0, 1, 1}), 200, a);
  const Trajectory tb = simulate(model, vec({0, 0, 1, 1}), 200, b);
  const Trajectory tc = simulate(model, vec({0, 0, 1, 1}), 200, c);
  EXPECT_EQ(ta.truth, tb.truth);
  EXPECT_EQ(ta.observations, tb.observations);
  EXPECT_NE(ta.observations, tc.observations);
}

TEST(Simulate, ZeroStepsRejected) {
  NoiseGenerator noise(13);
  EXPECT_THROW(simulate(noiseless_cv(0.01), VectorXd::Zero(4), 0, noise), ContractViolation);
}

TEST(SimulateProperty, NoiseFreeMatchesMatrixPower) {
  testing::Gen gen(14);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Index n = gen.integer(1, 5);
    const MatrixXd A = gen.stable(n, 1.0);
    const auto model = StateSpaceModel::linear(A, MatrixXd::Identity(1, n), MatrixXd::Zero(n, n),
                                               MatrixXd::Identity(1, 1), 0.1);
    const VectorXd x0 = gen.vector(n);
    NoiseGenerator noise(trial);
    const Trajectory traj = simulate(model, x0, 1000, noise);
    MatrixXd Ak = A;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      EXPECT_LT((traj.truth[k] - Ak * x0).cwiseAbs().maxCoeff(), 1e-10) << "k=" << k;
      Ak = A * Ak;
    }
  }
}

TEST(NoiseProperty, EmpiricalCovarianceMatchesQ) {
  MatrixXd Q(3, 3);
  Q << 0.04, 0.01, 0.0, 0.01, 0.09, -0.02, 0.0, -0.02, 0.01;
  const MatrixXd L = covariance_factor(Q, "Q");
  NoiseStream stream(NoiseGenerator(15).split("cov"));
  const int draws = 100000;
  MatrixXd sum = MatrixXd::Zero(3, 3);
  for (int i = 0; i < draws; ++i) {
    const VectorXd w = sample_gaussian(L, stream);
    sum += w * w.transpose();
  }
  const MatrixXd cov = sum / draws;
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(cov(i, i), Q(i, i), 0.05 * Q(i, i));
  }
}

TEST(NoiseProperty, SingularCovarianceFactor) {
  MatrixXd Q = MatrixXd::Zero(3, 3);
  Q(1, 1) = 2.0;
  const MatrixXd L = covariance_factor(Q, "Q");
  EXPECT_LT((L * L.transpose() - Q).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(covariance_factor(MatrixXd::Zero(2, 2), "Q"), MatrixXd::Zero(2, 2));
}

TEST(NoiseStreams, ProcessAndObservationIndependent) {
  NoiseGenerator a(16), b(16);
  (void)a.observation().standard_normal(10);
  EXPECT_EQ(a.process().standard_normal(5), b.process().standard_normal(5));
  EXPECT_EQ(a.split("x").next_u64(), b.split("x").next_u64());
  EXPECT_NE(a.split("x").next_u64(), a.split("y").next_u64());
}

TEST(NoiseStreams, UniformOpenInterval) {
  NoiseStream s(17);
  for (int i = 0; i < 10000; ++i) {
    const double u = s.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
  EXPECT_EQ(s.position(), 10000u);
}

TEST(LorenzProperty, NoiseFreeTrajectoryStaysBounded) {
  const auto model =
      StateSpaceModel::lorenz(MatrixXd{{1, 0, 0}}, MatrixXd::Zero(3, 3), MatrixXd::Identity(1, 1), 0.01);
  NoiseGenerator noise(18);
  const Trajectory traj = simulate(model, vec({1, 1, 1}), 3000, noise);
  for (const auto& x : traj.truth) ASSERT_LT(x.cwiseAbs().maxCoeff(), 100.0);
}

TEST(ModelValidation, RejectsBadModels) {
  const MatrixXd A = MatrixXd::Identity(2, 2);
  const MatrixXd H = MatrixXd::Identity(1, 2);
  const MatrixXd Q = MatrixXd::Identity(2, 2);
  const MatrixXd R = MatrixXd::Identity(1, 1);
  EXPECT_THROW(StateSpaceModel::linear(A, H, Q, R, 0.0), ModelValidationError);
  EXPECT_THROW(StateSpaceModel::linear(A, H, Q, R, -1.0), ModelValidationError);
  EXPECT_THROW(StateSpaceModel::linear(A, MatrixXd::Identity(3, 2), Q, MatrixXd::Identity(3, 3), 1.0),
               ModelValidationError);
  EXPECT_THROW(StateSpaceModel::linear(A, H, -Q, R, 1.0), ModelValidationError);
  MatrixXd asym = Q;
  asym(0, 1) = 0.5;
  EXPECT_THROW(StateSpaceModel::linear(A, H, asym, R, 1.0), ModelValidationError);
  EXPECT_THROW(StateSpaceModel::lorenz(H, Q, R, 0.01), ModelValidationError);
}

TEST(TrajectoryCsv, RoundTripIsExact) {
  const auto model = StateSpaceModel::linear(constant_velocity_transition(0.01), position_observation(),
                                             0.01 * MatrixXd::Identity(4, 4), MatrixXd::Identity(2, 2), 0.01);
  NoiseGenerator noise(19);
  const Trajectory traj = simulate(model, vec({0, 0, 1, 1}), 50, noise);
  std::stringstream io;
  write_trajectory_csv(io, traj);
  const std::string text = io.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "t,x0,x1,x2,x3,y0,y1");
  const Trajectory back = read_trajectory_csv(io, 4);
  EXPECT_EQ(back.truth, traj.truth);
  EXPECT_EQ(back.observations, traj.observations);
  EXPECT_NEAR(back.dt, traj.dt, 1e-9);
}

TEST(TrajectoryCsv, MalformedRowReportsLine) {
  std::istringstream in("t,x0,y0\n0.010000,1,2\n0.020000,abc,3\n");
  try {
    read_trajectory_csv(in, 1);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

}  // namespace
}  // namespace spikekal
