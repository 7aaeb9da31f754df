#pragma once

#include <Eigen/Dense>

namespace pwa_reach {

/// q(x) = x^T P x + 2 b^T x + e, stored with P symmetrized on construction.
struct QuadraticForm {
  Eigen::MatrixXd P;
  Eigen::VectorXd b;
  double e = 0.0;

  QuadraticForm() = default;
  QuadraticForm(const Eigen::MatrixXd& P_in, const Eigen::VectorXd& b_in, double e_in)
      : P(0.5 * (P_in + P_in.transpose())), b(b_in), e(e_in) {}

  int dim() const { return static_cast<int>(P.rows()); }

  double value(const Eigen::VectorXd& x) const {
    return x.dot(P * x) + 2.0 * b.dot(x) + e;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
    return 2.0 * (P * x + b);
  }

  /// The (n+1) x (n+1) block [[P, b], [b^T, e]].
  Eigen::MatrixXd lifted() const {
    const auto n = P.rows();
    Eigen::MatrixXd L(n + 1, n + 1);
    L.topLeftCorner(n, n) = P;
    L.topRightCorner(n, 1) = b;
    L.bottomLeftCorner(1, n) = b.transpose();
    L(n, n) = e;
    return L;
  }
};

}  // namespace pwa_reach
