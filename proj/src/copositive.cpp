#include "pwa_reach/copositive.hpp"

#include <Eigen/Eigenvalues>

#include "pwa_reach/rng.hpp"

namespace pwa_reach {

Eigen::MatrixXd halfspace_lifting(const SwitchGeometry& geom, HalfspaceSide side) {
  const int n = geom.n();
  const double s = side == HalfspaceSide::POS ? 1.0 : -1.0;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n + 1, 2 * n);
  T.block(0, 0, n, 1) = geom.r0;
  T(n, 0) = 1.0;
  T.block(0, 1, n, 1) = s * geom.c;
  T.block(0, 2, n, n - 1) = geom.Rhat;
  T.block(0, n + 1, n, n - 1) = -geom.Rhat;
  return T;
}

Eigen::MatrixXd halfspace_half_lifting(const SwitchGeometry& geom, HalfspaceSide side) {
  const int n = geom.n();
  const double s = side == HalfspaceSide::POS ? 1.0 : -1.0;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n + 1, n + 1);
  T.block(0, 0, n, 1) = geom.r0;
  T(n, 0) = 1.0;
  T.block(0, 1, n, 1) = s * geom.c;
  T.block(0, 2, n, n - 1) = geom.Rhat;
  return T;
}

Eigen::MatrixXd halfspace_positivity_matrix(const QuadraticForm& q,
                                            const SwitchGeometry& geom,
                                            HalfspaceSide side) {
  if (q.dim() != geom.n())
    throw Error(ErrorCode::DimensionMismatch,
                "halfspace_positivity_matrix: form and geometry dimensions differ");
  const Eigen::MatrixXd T = halfspace_lifting(geom, side);
  Eigen::MatrixXd M = T.transpose() * q.lifted() * T;
  return 0.5 * (M + M.transpose());
}

MatExpr halfspace_positivity_expr(const MatExpr& lifted_form,
                                  const SwitchGeometry& geom, HalfspaceSide side) {
  if (lifted_form.rows() != geom.n() + 1)
    throw Error(ErrorCode::DimensionMismatch,
                "halfspace_positivity_expr: lifted form and geometry dimensions differ");
  MatExpr M = lifted_form.congruence(halfspace_lifting(geom, side));
  M.symmetrize();
  return M;
}

double CopositiveCertificate::psd_deficit() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()),
                                                    Eigen::EigenvaluesOnly);
  return std::max(0.0, -es.eigenvalues().minCoeff());
}

double CopositiveCertificate::entry_deficit() const {
  return std::max(0.0, -N.minCoeff());
}

double CopositiveCertificate::split_residual() const {
  return (target - S - N).norm();
}

CopositiveFragment add_copositive_relaxation(SdpProblem& problem, const MatExpr& M,
                                             const std::string& tag) {
  const int k = M.rows();
  if (k < 1 || M.cols() != k)
    throw Error(ErrorCode::DimensionMismatch, "copositive relaxation needs a square target");

  CopositiveFragment frag;
  frag.S = problem.add_symmetric("S_" + tag, k);
  frag.N = problem.add_symmetric("N_" + tag, k);
  problem.require_psd(problem.symmetric_expr(frag.S), "S_" + tag + "_psd");
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j)
      problem.require_nonneg(problem.matrix_entry(frag.N, i, j),
                             "N_" + tag + "(" + std::to_string(i) + "," + std::to_string(j) + ")");
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) {
      LinExpr eq = M(i, j);
      eq -= problem.matrix_entry(frag.S, i, j);
      eq -= problem.matrix_entry(frag.N, i, j);
      problem.require_zero(eq, "split_" + tag + "(" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
    }
  return frag;
}

double verify_copositive_sampled(const Eigen::MatrixXd& M, int samples, std::uint64_t seed) {
  const int k = static_cast<int>(M.rows());
  Rng rng(seed);
  double min_value = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd x = rng.on_simplex(k);
    x /= x.norm();
    min_value = std::min(min_value, x.dot(M * x));
  }
  return min_value;
}

std::vector<LinExpr> hyperplane_equality_constraints(const MatExpr& delta_lifted,
                                                     const SwitchGeometry& geom) {
  const int n = geom.n();
  if (delta_lifted.rows() != n + 1)
    throw Error(ErrorCode::DimensionMismatch,
                "hyperplane_equality_constraints: lifted form and geometry dimensions differ");

  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n + 1, n);
  T.block(0, 0, n, 1) = geom.r0;
  T(n, 0) = 1.0;
  T.block(0, 1, n, n - 1) = geom.Rhat;

  MatExpr reduced = delta_lifted.congruence(T);
  reduced.symmetrize();
  std::vector<LinExpr> out;
  out.reserve(static_cast<std::size_t>(n) * (n + 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) out.push_back(reduced(i, j));
  return out;
}

}  // namespace pwa_reach
