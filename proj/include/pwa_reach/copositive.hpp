#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "pwa_reach/model.hpp"
#include "pwa_reach/quadratic_form.hpp"
#include "pwa_reach/sdp.hpp"

namespace pwa_reach {

enum class HalfspaceSide { NEG, POS };

/// Lifting matrix T = [r0, s*c, Rhat, -Rhat; 1, 0, 0, 0] with s = +1 for the
/// side { c^T x + f >= 0 } and s = -1 for { c^T x + f <= 0 }. Columns of T
/// generate the half-space as conic combinations, so positivity of a lifted
/// quadratic form over the nonnegative orthant certifies positivity of the
/// form on the half-space.
Eigen::MatrixXd halfspace_lifting(const SwitchGeometry& geom, HalfspaceSide side);

/// Reduced lifting [r0, s*c, Rhat; 1, 0, 0] ((n+1) x (n+1)): the -Rhat
/// columns of the full lifting are exact negations of the Rhat ones and can
/// be collapsed without changing the relaxation.
Eigen::MatrixXd halfspace_half_lifting(const SwitchGeometry& geom, HalfspaceSide side);

/// T^T [[P, b], [b^T, e]] T, the 2n x 2n matrix whose copositivity over
/// R_+^{2n} certifies q > 0 on the chosen closed half-space minus the origin.
Eigen::MatrixXd halfspace_positivity_matrix(const QuadraticForm& q,
                                            const SwitchGeometry& geom,
                                            HalfspaceSide side);

/// Symbolic variant over decision variables: congruence of an affine lifted
/// form with the side's lifting matrix.
MatExpr halfspace_positivity_expr(const MatExpr& lifted_form,
                                  const SwitchGeometry& geom, HalfspaceSide side);

/// Decomposition certificate for the sufficient copositivity relaxation
/// M = S + N with S PSD and N entrywise nonnegative.
struct CopositiveCertificate {
  Eigen::MatrixXd S;
  Eigen::MatrixXd N;
  Eigen::MatrixXd target;

  double psd_deficit() const;    // max(0, -lambda_min(S))
  double entry_deficit() const;  // max(0, -min entry of N)
  double split_residual() const; // ||target - S - N||_F
};

struct CopositiveFragment {
  VarBlock S;
  VarBlock N;
};

/// Emit the relaxation fragment into `problem`: declares S (PSD cone, k x k)
/// and N (k(k+1)/2 nonnegative entries) and ties M = S + N entrywise.
CopositiveFragment add_copositive_relaxation(SdpProblem& problem, const MatExpr& M,
                                             const std::string& tag);

/// Min of x^T M x over `samples` random unit vectors of the nonnegative
/// orthant (simplex-uniform directions, unit 2-norm). A-posteriori audit of
/// strict copositivity after solving.
double verify_copositive_sampled(const Eigen::MatrixXd& M, int samples,
                                 std::uint64_t seed = 0x5eed);

/// Entrywise linear equalities forcing the difference form to vanish on the
/// switching hyperplane: T'^T Delta T' = 0 with T' = [r0, Rhat; 1, 0]. The
/// +-Rhat duplication of the full lifting produces redundant equalities, so
/// the reduced lifting is used. `delta_lifted` is the (n+1) x (n+1) affine
/// block of (P1 - P2, b1 - b2, e1 - e2).
std::vector<LinExpr> hyperplane_equality_constraints(const MatExpr& delta_lifted,
                                                     const SwitchGeometry& geom);

}  // namespace pwa_reach
