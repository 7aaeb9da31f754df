#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "pwa_reach/config.hpp"
#include "pwa_reach/errors.hpp"
#include "pwa_reach/json_io.hpp"

namespace pwa_reach {

/// Bimodal piecewise affine system
///
///   xdot = A1 x + B w + d1   if c^T x + f <  0
///   xdot = A2 x + B w + d2   if c^T x + f >= 0
///
/// with disturbances constrained to the ellipsoid { w : w^T Rw w <= 1 }.
/// Both modes share the input matrix B; well-posedness (continuity across the
/// switching hyperplane, Hurwitz modes) is checked by the free functions
/// below, not by the constructor.
struct BimodalSystem {
  Eigen::MatrixXd A1;
  Eigen::MatrixXd A2;
  Eigen::MatrixXd B;
  Eigen::VectorXd d1;
  Eigen::VectorXd d2;
  Eigen::VectorXd c;
  double f = 0.0;
  Eigen::MatrixXd Rw;

  int n() const { return static_cast<int>(A1.rows()); }
  int m() const { return static_cast<int>(B.cols()); }

  /// Active mode right-hand side at state x under disturbance w.
  Eigen::VectorXd rhs(const Eigen::VectorXd& x, const Eigen::VectorXd& w) const {
    if (c.dot(x) + f < 0.0) return A1 * x + B * w + d1;
    return A2 * x + B * w + d2;
  }

  /// Shape consistency + Rw symmetric positive definite + c != 0.
  void validate(const Config& cfg = {}) const;

  /// Parse the on-disk system schema. Optional key "K" stores a state
  /// feedback gain; when present the loop is closed as A_i <- A_i - B K^T.
  static BimodalSystem from_json(const json& j);
  static BimodalSystem load(const std::string& path);
  json to_json() const;
};

enum class OriginRegion { NEG, ZERO, POS };

/// Switching-surface geometry. Rhat's columns span ker(c^T); r0 is a point of
/// the hyperplane { x : c^T x + f = 0 }. Both are kept in the original
/// coordinates; `perm` records the pivot permutation that was applied
/// internally so the division by the leading entry of c is well conditioned.
struct SwitchGeometry {
  Eigen::MatrixXd Rhat;    // n x (n-1)
  Eigen::VectorXd r0;      // n
  std::vector<int> perm;   // perm[0] = index of the pivot entry of c
  OriginRegion origin_region = OriginRegion::ZERO;

  // convenience copies of the defining data
  Eigen::VectorXd c;
  double f = 0.0;

  int n() const { return static_cast<int>(r0.size()); }

  /// [Rhat, -Rhat], the signed span of the hyperplane directions.
  Eigen::MatrixXd R() const {
    Eigen::MatrixXd out(Rhat.rows(), 2 * Rhat.cols());
    out << Rhat, -Rhat;
    return out;
  }
};

struct ContinuityResult {
  bool continuous = false;
  Eigen::VectorXd h;        // best-fit jump direction, A1 - A2 ~ h c^T
  double matrix_residual = 0.0;  // ||A1 - A2 - h c^T||_F
  double offset_residual = 0.0;  // ||d1 - d2 - h f||
};

enum class EtildeRule { FIXED_ZERO, FREE };

/// Which constant terms of the two Lyapunov pieces are pinned to zero. The
/// piece whose region contains the origin must vanish there; the other
/// piece's constant stays free.
struct EtildeMode {
  EtildeRule e1_mode = EtildeRule::FIXED_ZERO;
  EtildeRule e2_mode = EtildeRule::FIXED_ZERO;
};

/// Least-squares h with residuals; `continuous` holds when both residuals
/// pass the relative tolerance test.
ContinuityResult check_continuity(const BimodalSystem& sys, const Config& cfg = {});

/// Build (Rhat, r0) from (c, f). Throws ZeroNormal when c == 0.
SwitchGeometry build_geometry(const BimodalSystem& sys);
SwitchGeometry build_geometry(const Eigen::VectorXd& c, double f);

/// Largest real part over the eigenvalues of A.
double hurwitz_check(const Eigen::MatrixXd& A);

EtildeMode etilde_mode(const SwitchGeometry& geom);

}  // namespace pwa_reach
