#pragma once

// Independent reference computations and random generators shared by the
// unit tests and the acceptance binary. Nothing here calls into the
// filter code under test.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace spikekal::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }

  Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols, double lo = -1.0, double hi = 1.0) {
    Eigen::MatrixXd out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = uniform(lo, hi);
    return out;
  }

  Eigen::VectorXd vector(Eigen::Index size, double lo = -1.0, double hi = 1.0) {
    return matrix(size, 1, lo, hi);
  }

  // B B^T + floor I
  Eigen::MatrixXd spd(Eigen::Index size, double floor = 0.1) {
    const Eigen::MatrixXd B = matrix(size, size);
    return B * B.transpose() + floor * Eigen::MatrixXd::Identity(size, size);
  }

  // Spectral radius below `radius`, so repeated products stay bounded.
  Eigen::MatrixXd stable(Eigen::Index size, double radius = 0.95) {
    Eigen::MatrixXd A = matrix(size, size);
    const double rho = A.eigenvalues().cwiseAbs().maxCoeff();
    return A * (radius / std::max(rho, 1e-12));
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// Textbook Kalman filter with an explicit inverse, written out line by line.
struct OracleKf {
  Eigen::MatrixXd A, H, Q, R;
  Eigen::VectorXd x;
  Eigen::MatrixXd P;
  Eigen::MatrixXd K;

  void step(const Eigen::VectorXd& y) {
    const Eigen::VectorXd xp = A * x;
    const Eigen::MatrixXd Pp = A * P * A.transpose() + Q;
    const Eigen::MatrixXd S = H * Pp * H.transpose() + R;
    K = Pp * H.transpose() * S.fullPivLu().inverse();
    x = xp + K * (y - H * xp);
    const Eigen::Index n = x.size();
    const Eigen::MatrixXd Pn = (Eigen::MatrixXd::Identity(n, n) - K * H) * Pp;
    P = 0.5 * (Pn + Pn.transpose());
  }
};

// Steady-state gain by iterating the Riccati recursion to a fixed point.
inline Eigen::MatrixXd riccati_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& H,
                                    const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                                    int max_iter = 100000) {
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, H.rows());
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::MatrixXd Pp = A * P * A.transpose() + Q;
    const Eigen::MatrixXd Kn = Pp * H.transpose() * (H * Pp * H.transpose() + R).fullPivLu().inverse();
    P = (Eigen::MatrixXd::Identity(n, n) - Kn * H) * Pp;
    P = 0.5 * (P + P.transpose());
    if ((Kn - K).cwiseAbs().maxCoeff() < 1e-15) return Kn;
    K = Kn;
  }
  return K;
}

// Central differences of f around x.
template <typename F>
Eigen::MatrixXd finite_difference_jacobian(F f, const Eigen::VectorXd& x, double h) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd J(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    J.col(j) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return J;
}

// Lorenz right-hand side written independently of the library.
inline Eigen::VectorXd lorenz_rhs(const Eigen::VectorXd& x) {
  Eigen::VectorXd d(3);
  d << 10.0 * (x[1] - x[0]), x[0] * (28.0 - x[2]) - x[1], x[0] * x[1] - 8.0 / 3.0 * x[2];
  return d;
}

inline Eigen::VectorXd lorenz_rk4(const Eigen::VectorXd& x, double dt) {
  const Eigen::VectorXd k1 = lorenz_rhs(x);
  const Eigen::VectorXd k2 = lorenz_rhs(x + 0.5 * dt * k1);
  const Eigen::VectorXd k3 = lorenz_rhs(x + 0.5 * dt * k2);
  const Eigen::VectorXd k4 = lorenz_rhs(x + dt * k3);
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline double relative_frobenius(const Eigen::MatrixXd& K, const Eigen::MatrixXd& ref) {
  return (K - ref).norm() / ref.norm();
}

}  // namespace spikekal::testing
