#pragma once

#include <optional>

#include "pwa_reach/certificate.hpp"
#include "pwa_reach/config.hpp"
#include "pwa_reach/copositive.hpp"
#include "pwa_reach/model.hpp"
#include "pwa_reach/sdp.hpp"
#include "pwa_reach/solver_interface.hpp"

namespace pwa_reach {

/// Half-space positivity fragment as actually emitted. The literal split
/// M = S + N over the full [r0, s*c, Rhat, -Rhat] lifting always sits on a
/// face of the cone (the +-Rhat duplication, a structurally-zero value at
/// r0, or a forced zero of the form at the origin when the origin lies
/// strictly inside the side's region), so the assembly emits a facially
/// reduced equivalent over the half lifting [r0, s*c, Rhat; 1, 0, 0]:
///  - regular case: a 2x2 nonnegative corner block N00 survives;
///  - origin on the hyperplane (f = 0, pinned constant): one scalar nu plus
///    sign/equality constraints on the first row;
///  - origin strictly inside the side: the affine part of the form must
///    vanish entirely, leaving plain equalities and a quadratic PSD block.
struct HalfspaceFragment {
  bool pinned = false;           // origin value structurally zero (f = 0)
  bool origin_interior = false;  // origin strictly inside the side's region
  std::optional<VarBlock> N00;   // 2x2 nonnegative block (regular case)
  std::optional<VarBlock> nu;    // scalar nonnegative entry (pinned case)
};

/// Assembled piecewise problem for a fixed decay rate alpha, with handles to
/// the decision variables for certificate extraction.
struct PiecewiseAssembly {
  SdpProblem sdp;
  double alpha = 0.0;
  VarBlock P1, P2, b1, b2;
  std::optional<VarBlock> e1, e2;  // present only when the constant is free
  VarBlock gamma1, gamma2, sigma1, sigma2;
  bool gamma1_pinned = false, gamma2_pinned = false;
  HalfspaceFragment frag_neg, frag_pos;
};

struct CommonAssembly {
  SdpProblem sdp;
  double alpha = 0.0;
  VarBlock P;
};

/// Emit the half-space positivity relaxation of an affine lifted form into
/// `problem`, using the facially-reduced formulation described on
/// HalfspaceFragment (equivalent to the literal split, with an interior).
HalfspaceFragment add_halfspace_fragment(SdpProblem& problem, const MatExpr& lifted,
                                         const SwitchGeometry& geom, HalfspaceSide side,
                                         const std::string& tag);

/// Full piecewise-quadratic program for fixed alpha: P_i >= eps_pd*I, the
/// hyperplane continuity equalities, the two half-space positivity
/// relaxations, the two (n+m+1) decrease LMIs with multipliers
/// gamma_i, sigma_i >= 0, and the trace objective.
PiecewiseAssembly assemble_piecewise_sdp(const BimodalSystem& sys,
                                         const SwitchGeometry& geom,
                                         const EtildeMode& emode, double alpha,
                                         const Config& cfg = {});

/// Single-quadratic baseline: one P for both modes and the two (n+m)
/// decrease LMIs, no affine terms. Exact only for d1 = d2 = 0, f = 0; a
/// warning is attached otherwise.
CommonAssembly assemble_common_sdp(const BimodalSystem& sys, double alpha,
                                   const Config& cfg = {});

// ---- dense block constructors (independent route, also used by audits) ----

/// Mode-i decrease block of the piecewise conditions, (n+m+1) x (n+m+1).
Eigen::MatrixXd mode_block_dense(const BimodalSystem& sys, int mode,
                                 const Eigen::MatrixXd& P, const Eigen::VectorXd& b,
                                 double e, double alpha, double gamma, double sigma);

/// Mode-i decrease block of the common baseline, (n+m) x (n+m).
Eigen::MatrixXd common_block_dense(const BimodalSystem& sys, int mode,
                                   const Eigen::MatrixXd& P, double alpha);

// ---- certificate-level audits ---------------------------------------------

struct RecoveredMultipliers {
  double gamma1 = 0.0, sigma1 = 0.0;
  double gamma2 = 0.0, sigma2 = 0.0;
};

/// Best-margin multipliers for fixed (P_i, b_i, e_i, alpha): per mode,
/// maximize t subject to -block(gamma, sigma) >= t*I, gamma, sigma >= 0.
RecoveredMultipliers recover_multipliers(const BimodalSystem& sys,
                                         const Certificate& cert,
                                         SolverInterface* solver = nullptr);

/// Best split M = S + N for a numeric target: S = M - N with N >= 0 chosen to
/// maximize lambda_min(S). Returns S = M, N = 0 directly when M is already
/// PSD. The certificate's psd_deficit() measures how far M is from the
/// relaxation cone.
CopositiveCertificate recover_copositive_split(const Eigen::MatrixXd& M,
                                               SolverInterface* solver = nullptr);

/// Per-constraint violations of the certificate against its problem family:
/// PSD deficits of the P margins and decrease blocks, hyperplane equality
/// residuals, multiplier nonnegativity, and the half-space copositivity
/// deficits (recovered by a small split solve when the lifted matrix is not
/// already PSD). Multipliers are recovered first when the certificate lacks
/// them.
ResidualReport certificate_residuals(const BimodalSystem& sys, const Certificate& cert,
                                     const Config& cfg = {},
                                     SolverInterface* solver = nullptr);

}  // namespace pwa_reach
