#include "pwa_reach/model.hpp"

#include <Eigen/Eigenvalues>
#include <fstream>

namespace pwa_reach {

void BimodalSystem::validate(const Config& cfg) const {
  const int nn = n();
  const int mm = m();
  if (A1.rows() != nn || A1.cols() != nn || A2.rows() != nn || A2.cols() != nn)
    throw Error(ErrorCode::DimensionMismatch, "A1/A2 must be square of matching size");
  if (B.rows() != nn)
    throw Error(ErrorCode::DimensionMismatch, "B row count must match the state dimension");
  if (d1.size() != nn || d2.size() != nn)
    throw Error(ErrorCode::DimensionMismatch, "d1/d2 must be n-vectors");
  if (c.size() != nn)
    throw Error(ErrorCode::DimensionMismatch, "c must be an n-vector");
  if (Rw.rows() != mm || Rw.cols() != mm)
    throw Error(ErrorCode::DimensionMismatch, "Rw must be m x m");
  if ((Rw - Rw.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + Rw.cwiseAbs().maxCoeff()))
    throw Error(ErrorCode::ParseError, "Rw must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Rw + Rw.transpose()));
  if (es.eigenvalues().minCoeff() <= cfg.tol_pd)
    throw Error(ErrorCode::ParseError, "Rw must be positive definite");
  if (c.norm() == 0.0) throw Error(ErrorCode::ZeroNormal, "switching normal c must be nonzero");
}

BimodalSystem BimodalSystem::from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "system file must be a JSON object");
  for (const char* key : {"A1", "A2", "B", "c", "Rw"})
    if (!j.contains(key))
      throw Error(ErrorCode::ParseError, std::string("system file missing key '") + key + "'");

  BimodalSystem sys;
  sys.A1 = matrix_from_json(j.at("A1"), "A1");
  sys.A2 = matrix_from_json(j.at("A2"), "A2");
  sys.B = matrix_from_json(j.at("B"), "B");
  sys.c = vector_from_json(j.at("c"), "c");
  if (!j.contains("f") || !j.at("f").is_number())
    throw Error(ErrorCode::ParseError, "system file missing scalar 'f'");
  sys.f = j.at("f").get<double>();
  sys.Rw = matrix_from_json(j.at("Rw"), "Rw");
  const auto nn = sys.A1.rows();
  sys.d1 = j.contains("d1") ? vector_from_json(j.at("d1"), "d1")
                            : Eigen::VectorXd::Zero(nn).eval();
  sys.d2 = j.contains("d2") ? vector_from_json(j.at("d2"), "d2")
                            : Eigen::VectorXd::Zero(nn).eval();

  // Optional state feedback: close the loop as A_i <- A_i - B K^T.
  if (j.contains("K")) {
    const Eigen::VectorXd K = vector_from_json(j.at("K"), "K");
    if (K.size() != nn || sys.B.cols() != 1)
      throw Error(ErrorCode::ParseError, "'K' requires a single-input system and an n-vector gain");
    sys.A1 -= sys.B * K.transpose();
    sys.A2 -= sys.B * K.transpose();
  }
  sys.validate();
  return sys;
}

BimodalSystem BimodalSystem::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open system file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& ex) {
    throw Error(ErrorCode::ParseError, "invalid JSON in " + path + ": " + ex.what());
  }
  return from_json(j);
}

json BimodalSystem::to_json() const {
  json j;
  j["A1"] = matrix_to_json(A1);
  j["A2"] = matrix_to_json(A2);
  j["B"] = matrix_to_json(B);
  j["d1"] = vector_to_json(d1);
  j["d2"] = vector_to_json(d2);
  j["c"] = vector_to_json(c);
  j["f"] = f;
  j["Rw"] = matrix_to_json(Rw);
  return j;
}

ContinuityResult check_continuity(const BimodalSystem& sys, const Config& cfg) {
  const int n = sys.n();
  if (sys.A2.rows() != n || sys.A2.cols() != n || sys.d1.size() != n ||
      sys.d2.size() != n || sys.c.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "check_continuity: inconsistent dimensions");

  ContinuityResult res;
  const Eigen::MatrixXd dA = sys.A1 - sys.A2;
  const double c2 = sys.c.squaredNorm();
  if (c2 == 0.0) throw Error(ErrorCode::ZeroNormal, "check_continuity: c must be nonzero");
  res.h = dA * sys.c / c2;
  res.matrix_residual = (dA - res.h * sys.c.transpose()).norm();
  res.offset_residual = (sys.d1 - sys.d2 - res.h * sys.f).norm();
  res.continuous = res.matrix_residual <= cfg.tol_cont * (1.0 + sys.A1.norm()) &&
                   res.offset_residual <= cfg.tol_cont;
  return res;
}

SwitchGeometry build_geometry(const Eigen::VectorXd& c, double f) {
  const int n = static_cast<int>(c.size());
  if (n == 0 || c.norm() == 0.0)
    throw Error(ErrorCode::ZeroNormal, "build_geometry: c must be nonzero");

  // Pivot on the largest-magnitude entry of c so the ratios -c_j / c_1 stay
  // well conditioned; the permutation is undone before returning.
  int pivot = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(c[i]) > std::abs(c[pivot])) pivot = i;

  SwitchGeometry geom;
  geom.perm.resize(n);
  geom.perm[0] = pivot;
  for (int i = 0, k = 1; i < n; ++i)
    if (i != pivot) geom.perm[k++] = i;

  Eigen::VectorXd cp(n);
  for (int i = 0; i < n; ++i) cp[i] = c[geom.perm[i]];

  Eigen::MatrixXd rhat_p = Eigen::MatrixXd::Zero(n, n - 1);
  for (int j = 0; j < n - 1; ++j) {
    rhat_p(0, j) = -cp[j + 1] / cp[0];
    rhat_p(j + 1, j) = 1.0;
  }
  Eigen::VectorXd r0_p = Eigen::VectorXd::Zero(n);
  r0_p[0] = -f / cp[0];

  geom.Rhat = Eigen::MatrixXd::Zero(n, n - 1);
  geom.r0 = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    geom.Rhat.row(geom.perm[i]) = rhat_p.row(i);
    geom.r0[geom.perm[i]] = r0_p[i];
  }

  geom.origin_region = f < 0.0   ? OriginRegion::NEG
                       : f > 0.0 ? OriginRegion::POS
                                 : OriginRegion::ZERO;
  geom.c = c;
  geom.f = f;
  return geom;
}

SwitchGeometry build_geometry(const BimodalSystem& sys) {
  return build_geometry(sys.c, sys.f);
}

double hurwitz_check(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols())
    throw Error(ErrorCode::DimensionMismatch, "hurwitz_check: A must be square");
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff();
}

EtildeMode etilde_mode(const SwitchGeometry& geom) {
  EtildeMode mode;
  // The piece active at the origin must have zero constant so V(0) = 0; the
  // other piece's constant stays free.
  mode.e1_mode = geom.origin_region == OriginRegion::POS ? EtildeRule::FREE
                                                         : EtildeRule::FIXED_ZERO;
  mode.e2_mode = geom.origin_region == OriginRegion::NEG ? EtildeRule::FREE
                                                         : EtildeRule::FIXED_ZERO;
  return mode;
}

}  // namespace pwa_reach
