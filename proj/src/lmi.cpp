#include "pwa_reach/lmi.hpp"

#include <Eigen/Eigenvalues>

#include "pwa_reach/ipm.hpp"
#include "pwa_reach/quadratic_form.hpp"

namespace pwa_reach {
namespace {

MatExpr scaled_by_expr(const Eigen::MatrixXd& A, const LinExpr& x) {
  MatExpr out(static_cast<int>(A.rows()), static_cast<int>(A.cols()));
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < out.cols(); ++j)
      if (A(i, j) != 0.0) out(i, j) = A(i, j) * x;
  return out;
}

// Decrease block of mode i over decision variables (fixed alpha):
//   [ He(A^T P) + alpha P        *                *  ]
//   [ B^T P             -(gamma+alpha) Rw         *  ]
//   [ (P d + A^T b + alpha b + s*sigma*c)^T  b^T B   Delta ]
// with s = -1 for mode 1, +1 for mode 2 and
// Delta = alpha*e + 2 b^T d + gamma + 2*s*f*sigma.
MatExpr mode_block_expr(const SdpProblem& p, const BimodalSystem& sys, int mode,
                        const VarBlock& P, const VarBlock& b, const LinExpr& e,
                        const LinExpr& gamma, const LinExpr& sigma, double alpha,
                        bool zero_b = false) {
  const int n = sys.n();
  const int m = sys.m();
  const Eigen::MatrixXd& A = mode == 1 ? sys.A1 : sys.A2;
  const Eigen::VectorXd& d = mode == 1 ? sys.d1 : sys.d2;
  const double s = mode == 1 ? -1.0 : 1.0;

  MatExpr M(n + m + 1, n + m + 1);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      LinExpr entry;
      for (int k = 0; k < n; ++k) {
        if (A(k, r) != 0.0) entry += A(k, r) * p.matrix_entry(P, k, c);
        if (A(k, c) != 0.0) entry += A(k, c) * p.matrix_entry(P, r, k);
      }
      entry += alpha * p.matrix_entry(P, r, c);
      M(r, c) = entry;
    }
  }
  for (int q = 0; q < m; ++q) {
    for (int c = 0; c < n; ++c) {
      LinExpr entry;
      for (int k = 0; k < n; ++k)
        if (sys.B(k, q) != 0.0) entry += sys.B(k, q) * p.matrix_entry(P, k, c);
      M(n + q, c) = entry;
      M(c, n + q) = entry;
    }
    for (int q2 = 0; q2 < m; ++q2) {
      LinExpr entry = -sys.Rw(q, q2) * gamma;
      entry.add_constant(-alpha * sys.Rw(q, q2));
      M(n + q, n + q2) = entry;
    }
  }
  const int last = n + m;
  for (int c = 0; c < n; ++c) {
    LinExpr entry;
    for (int k = 0; k < n; ++k) {
      if (d[k] != 0.0) entry += d[k] * p.matrix_entry(P, c, k);
      if (!zero_b && A(k, c) != 0.0) entry += A(k, c) * p.vector_entry(b, k);
    }
    if (!zero_b) entry += alpha * p.vector_entry(b, c);
    if (sys.c[c] != 0.0) entry += (s * sys.c[c]) * sigma;
    M(last, c) = entry;
    M(c, last) = entry;
  }
  if (!zero_b) {
    for (int q = 0; q < m; ++q) {
      LinExpr entry;
      for (int k = 0; k < n; ++k)
        if (sys.B(k, q) != 0.0) entry += sys.B(k, q) * p.vector_entry(b, k);
      M(last, n + q) = entry;
      M(n + q, last) = entry;
    }
  }
  LinExpr delta = alpha * e + gamma + (2.0 * s * sys.f) * sigma;
  if (!zero_b)
    for (int k = 0; k < n; ++k)
      if (d[k] != 0.0) delta += (2.0 * d[k]) * p.vector_entry(b, k);
  M(last, last) = delta;
  return M;
}

bool structurally_zero(const LinExpr& e) {
  return e.constant() == 0.0 && e.compressed().empty();
}

}  // namespace

// Emit the half-space positivity relaxation of a lifted form. The split
// M = S + N over the full [r0, s*c, Rhat, -Rhat] lifting is equivalent to
//   [[M00 - N00, M01], [M01^T, M11]] >= 0,  N00 >= 0 (2x2)
// over the collapsed lifting [r0, s*c, Rhat]: the +-Rhat kernel directions
// force every other entry of N to vanish and tie S's columns pairwise. When
// the origin value M(0,0) is structurally zero (f = 0 with the constant
// pinned), the zero diagonal additionally forces row 0 of S to vanish, which
// turns the first row into sign/equality constraints and shrinks the PSD
// block once more. Both reductions are exact, and they restore a strict
// interior that the literal split lacks.
HalfspaceFragment add_halfspace_fragment(SdpProblem& p, const MatExpr& lifted,
                                         const SwitchGeometry& geom, HalfspaceSide side,
                                         const std::string& tag) {
  const int n = geom.n();
  MatExpr MH = lifted.congruence(halfspace_half_lifting(geom, side));
  MH.symmetrize();

  HalfspaceFragment frag;

  const bool origin_inside =
      (side == HalfspaceSide::NEG && geom.origin_region == OriginRegion::NEG) ||
      (side == HalfspaceSide::POS && geom.origin_region == OriginRegion::POS);
  if (origin_inside && structurally_zero(lifted(n, n))) {
    // q(0) = 0 at an interior point of the side: zero is a local minimum of
    // q, so the gradient 2b must vanish and only the quadratic part remains
    frag.origin_interior = true;
    for (int i = 0; i < n; ++i)
      p.require_zero(lifted(i, n), "halfspace_" + tag + "_origin(b" + std::to_string(i) + ")");
    MatExpr sub(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) sub(i, j) = MH(i + 1, j + 1);
    p.require_psd(std::move(sub), "halfspace_" + tag);
    return frag;
  }

  frag.pinned = structurally_zero(MH(0, 0));

  if (!frag.pinned) {
    frag.N00 = p.add_symmetric("N_" + tag, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j)
        p.require_nonneg(p.matrix_entry(*frag.N00, i, j),
                         "N_" + tag + "(" + std::to_string(i) + "," + std::to_string(j) + ")");
    MatExpr expr = MH;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) expr(i, j) -= p.matrix_entry(*frag.N00, i, j);
    p.require_psd(std::move(expr), "halfspace_" + tag);
    return frag;
  }

  // pinned origin: q(r0) == 0 identically, so the lifted matrix's first row
  // must be carried entirely by N, which its sign structure then restricts
  for (int j = 2; j <= n; ++j)
    p.require_zero(MH(0, j), "halfspace_" + tag + "_origin(" + std::to_string(j) + ")");
  p.require_nonneg(MH(0, 1), "halfspace_" + tag + "_slope");

  frag.nu = p.add_scalar("nu_" + tag);
  p.require_nonneg(p.scalar_expr(*frag.nu), "nu_" + tag);
  MatExpr sub(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sub(i, j) = MH(i + 1, j + 1);
  sub(0, 0) -= p.scalar_expr(*frag.nu);
  p.require_psd(std::move(sub), "halfspace_" + tag);
  return frag;
}

namespace {

void preflight(const BimodalSystem& sys, double alpha, const Config& cfg) {
  if (!(alpha > 0.0))
    throw Error(ErrorCode::InvalidAlpha, "alpha must be positive, got " + std::to_string(alpha));
  sys.validate(cfg);
  const ContinuityResult cont = check_continuity(sys, cfg);
  if (!cont.continuous)
    throw Error(ErrorCode::NotContinuous,
                "system is not continuous across the switching hyperplane (residuals " +
                    std::to_string(cont.matrix_residual) + ", " +
                    std::to_string(cont.offset_residual) + ")");
  for (int mode = 1; mode <= 2; ++mode) {
    const double re = hurwitz_check(mode == 1 ? sys.A1 : sys.A2);
    if (re >= -cfg.tol_hurwitz)
      throw Error(ErrorCode::NotHurwitz, "mode " + std::to_string(mode) +
                                             " is not Hurwitz (max Re eig = " +
                                             std::to_string(re) + ")");
  }
}

}  // namespace

PiecewiseAssembly assemble_piecewise_sdp(const BimodalSystem& sys,
                                         const SwitchGeometry& geom,
                                         const EtildeMode& emode, double alpha,
                                         const Config& cfg) {
  preflight(sys, alpha, cfg);
  const int n = sys.n();

  PiecewiseAssembly ap;
  ap.alpha = alpha;
  SdpProblem& p = ap.sdp;
  ap.P1 = p.add_symmetric("P1", n);
  ap.P2 = p.add_symmetric("P2", n);
  ap.b1 = p.add_vector("b1", n);
  ap.b2 = p.add_vector("b2", n);

  LinExpr e1_expr(0.0), e2_expr(0.0);
  if (emode.e1_mode == EtildeRule::FREE) {
    ap.e1 = p.add_scalar("e1");
    e1_expr = p.scalar_expr(*ap.e1);
  }
  if (emode.e2_mode == EtildeRule::FREE) {
    ap.e2 = p.add_scalar("e2");
    e2_expr = p.scalar_expr(*ap.e2);
  }

  ap.gamma1 = p.add_scalar("gamma1");
  ap.gamma2 = p.add_scalar("gamma2");
  ap.sigma1 = p.add_scalar("sigma1");
  ap.sigma2 = p.add_scalar("sigma2");
  for (const auto* v : {&ap.gamma1, &ap.gamma2, &ap.sigma1, &ap.sigma2})
    p.require_nonneg(p.scalar_expr(*v), v->name);

  const Eigen::MatrixXd eps_eye = cfg.eps_pd * Eigen::MatrixXd::Identity(n, n);
  p.require_psd(p.symmetric_expr(ap.P1) - MatExpr::constant(eps_eye), "P1_margin");
  p.require_psd(p.symmetric_expr(ap.P2) - MatExpr::constant(eps_eye), "P2_margin");

  const MatExpr lifted1 = p.lifted_form_expr(ap.P1, ap.b1, e1_expr);
  const MatExpr lifted2 = p.lifted_form_expr(ap.P2, ap.b2, e2_expr);

  // continuity of the two pieces on the switching hyperplane
  int eq_index = 0;
  for (auto& eq : hyperplane_equality_constraints(lifted1 - lifted2, geom))
    p.require_zero(std::move(eq), "hyperplane(" + std::to_string(eq_index++) + ")");

  // positivity of each piece on its closed half-space
  ap.frag_neg = add_halfspace_fragment(p, lifted1, geom, HalfspaceSide::NEG, "neg");
  ap.frag_pos = add_halfspace_fragment(p, lifted2, geom, HalfspaceSide::POS, "pos");

  // decrease inequality blocks. Whenever the corner entry Delta reduces to a
  // nonnegative combination of the nonnegative multipliers (f = 0 with d = 0
  // and a pinned constant gives gamma alone; an origin-interior mode, whose
  // affine part is already forced to zero, gives gamma + 2|f|*sigma), the
  // constraint -M >= 0 pins those multipliers to zero and forces the whole
  // last row to vanish; emitting that face directly keeps a strict interior.
  for (int mode = 1; mode <= 2; ++mode) {
    const VarBlock& P = mode == 1 ? ap.P1 : ap.P2;
    const VarBlock& b = mode == 1 ? ap.b1 : ap.b2;
    const LinExpr& e_expr = mode == 1 ? e1_expr : e2_expr;
    const VarBlock& gamma = mode == 1 ? ap.gamma1 : ap.gamma2;
    const VarBlock& sigma = mode == 1 ? ap.sigma1 : ap.sigma2;
    const std::string label = "mode" + std::to_string(mode) + "_decrease";
    const HalfspaceFragment& frag = mode == 1 ? ap.frag_neg : ap.frag_pos;

    // the fragment already pins this mode's affine part; build the block on
    // that variety so the corner structure is visible
    const bool zero_affine = frag.origin_interior;
    MatExpr block = mode_block_expr(p, sys, mode, P, b, zero_affine ? LinExpr(0.0) : e_expr,
                                    p.scalar_expr(gamma), p.scalar_expr(sigma), alpha,
                                    zero_affine);
    const int last = sys.n() + sys.m();

    const auto corner_terms = block(last, last).compressed();
    bool face = block(last, last).constant() == 0.0 && !corner_terms.empty();
    for (const auto& [var, coeff] : corner_terms)
      face = face && coeff > 0.0 && (var == gamma.offset || var == sigma.offset);

    if (face) {
      (mode == 1 ? ap.gamma1_pinned : ap.gamma2_pinned) = true;
      for (const auto& [var, coeff] : corner_terms) {
        const VarBlock& pinned = var == gamma.offset ? gamma : sigma;
        p.require_zero(LinExpr::term(var, 1.0), pinned.name + "_pinned");
      }
      for (int j = 0; j < last; ++j)
        p.require_zero(block(last, j), label + "_row(" + std::to_string(j) + ")");
      MatExpr leading(last, last);
      for (int i = 0; i < last; ++i)
        for (int j = 0; j < last; ++j) leading(i, j) = -1.0 * block(i, j);
      p.require_psd(std::move(leading), label);
    } else {
      p.require_psd(-block, label);
    }
  }

  p.maximize(cfg.trace_weight_1 * p.trace_expr(ap.P1) +
             cfg.trace_weight_2 * p.trace_expr(ap.P2));
  return ap;
}

CommonAssembly assemble_common_sdp(const BimodalSystem& sys, double alpha,
                                   const Config& cfg) {
  preflight(sys, alpha, cfg);
  const int n = sys.n();
  const int m = sys.m();

  CommonAssembly ap;
  ap.alpha = alpha;
  SdpProblem& p = ap.sdp;
  ap.P = p.add_symmetric("P", n);

  if (sys.d1.norm() != 0.0 || sys.d2.norm() != 0.0 || sys.f != 0.0)
    p.warnings.push_back(
        "affine terms present:1-level set of the common baseline ignores d1, d2, f");

  p.require_psd(p.symmetric_expr(ap.P) -
                    MatExpr::constant(cfg.eps_pd * Eigen::MatrixXd::Identity(n, n)),
                "P_margin");

  for (int mode = 1; mode <= 2; ++mode) {
    const Eigen::MatrixXd& A = mode == 1 ? sys.A1 : sys.A2;
    MatExpr M(n + m, n + m);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        LinExpr entry;
        for (int k = 0; k < n; ++k) {
          if (A(k, r) != 0.0) entry += A(k, r) * p.matrix_entry(ap.P, k, c);
          if (A(k, c) != 0.0) entry += A(k, c) * p.matrix_entry(ap.P, r, k);
        }
        entry += alpha * p.matrix_entry(ap.P, r, c);
        M(r, c) = entry;
      }
    for (int q = 0; q < m; ++q) {
      for (int c = 0; c < n; ++c) {
        LinExpr entry;
        for (int k = 0; k < n; ++k)
          if (sys.B(k, q) != 0.0) entry += sys.B(k, q) * p.matrix_entry(ap.P, k, c);
        M(n + q, c) = entry;
        M(c, n + q) = entry;
      }
      for (int q2 = 0; q2 < m; ++q2) M(n + q, n + q2) = LinExpr(-alpha * sys.Rw(q, q2));
    }
    MatExpr constraint = -M - MatExpr::constant(cfg.strict_margin *
                                                Eigen::MatrixXd::Identity(n + m, n + m));
    p.require_psd(std::move(constraint), "mode" + std::to_string(mode) + "_decrease");
  }

  p.maximize(p.trace_expr(ap.P));
  return ap;
}

Eigen::MatrixXd mode_block_dense(const BimodalSystem& sys, int mode,
                                 const Eigen::MatrixXd& P, const Eigen::VectorXd& b,
                                 double e, double alpha, double gamma, double sigma) {
  const int n = sys.n();
  const int m = sys.m();
  const Eigen::MatrixXd& A = mode == 1 ? sys.A1 : sys.A2;
  const Eigen::VectorXd& d = mode == 1 ? sys.d1 : sys.d2;
  const double s = mode == 1 ? -1.0 : 1.0;

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + m + 1, n + m + 1);
  M.topLeftCorner(n, n) = A.transpose() * P + P * A + alpha * P;
  M.block(n, 0, m, n) = sys.B.transpose() * P;
  M.block(0, n, n, m) = P * sys.B;
  M.block(n, n, m, m) = -(gamma + alpha) * sys.Rw;
  const Eigen::VectorXd row = P * d + A.transpose() * b + alpha * b + s * sigma * sys.c;
  M.block(n + m, 0, 1, n) = row.transpose();
  M.block(0, n + m, n, 1) = row;
  M.block(n + m, n, 1, m) = b.transpose() * sys.B;
  M.block(n, n + m, m, 1) = sys.B.transpose() * b;
  M(n + m, n + m) = alpha * e + 2.0 * b.dot(d) + gamma + 2.0 * s * sys.f * sigma;
  return M;
}

Eigen::MatrixXd common_block_dense(const BimodalSystem& sys, int mode,
                                   const Eigen::MatrixXd& P, double alpha) {
  const int n = sys.n();
  const int m = sys.m();
  const Eigen::MatrixXd& A = mode == 1 ? sys.A1 : sys.A2;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + m, n + m);
  M.topLeftCorner(n, n) = A.transpose() * P + P * A + alpha * P;
  M.block(n, 0, m, n) = sys.B.transpose() * P;
  M.block(0, n, n, m) = P * sys.B;
  M.block(n, n, m, m) = -alpha * sys.Rw;
  return M;
}

RecoveredMultipliers recover_multipliers(const BimodalSystem& sys, const Certificate& cert,
                                         SolverInterface* solver) {
  InteriorPointSolver fallback;
  SolverInterface* s = solver ? solver : &fallback;

  RecoveredMultipliers out;
  for (int mode = 1; mode <= 2; ++mode) {
    const Eigen::MatrixXd& P = mode == 1 ? cert.P1 : cert.P2;
    const Eigen::VectorXd& b = mode == 1 ? cert.b1 : cert.b2;
    const double e = mode == 1 ? cert.e1 : cert.e2;
    const double sgn = mode == 1 ? -1.0 : 1.0;
    const int dim = sys.n() + sys.m() + 1;

    const Eigen::MatrixXd base = mode_block_dense(sys, mode, P, b, e, cert.alpha, 0.0, 0.0);
    Eigen::MatrixXd Eg = Eigen::MatrixXd::Zero(dim, dim);
    Eg.block(sys.n(), sys.n(), sys.m(), sys.m()) = -sys.Rw;
    Eg(dim - 1, dim - 1) = 1.0;
    Eigen::MatrixXd Es = Eigen::MatrixXd::Zero(dim, dim);
    Es.block(0, dim - 1, sys.n(), 1) = sgn * sys.c;
    Es.block(dim - 1, 0, 1, sys.n()) = sgn * sys.c.transpose();
    Es(dim - 1, dim - 1) = 2.0 * sgn * sys.f;

    SdpProblem p;
    const VarBlock g = p.add_scalar("gamma");
    const VarBlock sg = p.add_scalar("sigma");
    const VarBlock t = p.add_scalar("t");
    p.require_nonneg(p.scalar_expr(g), "gamma");
    p.require_nonneg(p.scalar_expr(sg), "sigma");
    p.require_nonneg(LinExpr(1.0) - p.scalar_expr(t), "cap");
    MatExpr block = MatExpr::constant(-base) - scaled_by_expr(Eg, p.scalar_expr(g)) -
                    scaled_by_expr(Es, p.scalar_expr(sg)) -
                    scaled_by_expr(Eigen::MatrixXd::Identity(dim, dim), p.scalar_expr(t));
    p.require_psd(std::move(block), "margin");
    p.maximize(p.scalar_expr(t));

    const SolveResult r = s->solve(p);
    if (r.status != SolveStatus::Optimal)
      throw Error(ErrorCode::AuditFailed,
                  "multiplier recovery failed for mode " + std::to_string(mode) + ": " + r.info);
    const double gamma = std::max(0.0, p.value_scalar(g, r.assignment));
    const double sigma = std::max(0.0, p.value_scalar(sg, r.assignment));
    if (mode == 1) {
      out.gamma1 = gamma;
      out.sigma1 = sigma;
    } else {
      out.gamma2 = gamma;
      out.sigma2 = sigma;
    }
  }
  return out;
}

CopositiveCertificate recover_copositive_split(const Eigen::MatrixXd& M,
                                               SolverInterface* solver) {
  const int k = static_cast<int>(M.rows());
  CopositiveCertificate cert;
  cert.target = M;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()),
                                                    Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() >= 0.0) {
    cert.S = M;
    cert.N = Eigen::MatrixXd::Zero(k, k);
    return cert;
  }

  InteriorPointSolver fallback;
  SolverInterface* s = solver ? solver : &fallback;

  SdpProblem p;
  const VarBlock N = p.add_symmetric("N", k);
  const VarBlock t = p.add_scalar("t");
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j)
      p.require_nonneg(p.matrix_entry(N, i, j),
                       "N(" + std::to_string(i) + "," + std::to_string(j) + ")");
  p.require_nonneg(LinExpr(1.0) - p.scalar_expr(t), "cap");
  MatExpr rem = MatExpr::constant(M) - p.symmetric_expr(N) -
                scaled_by_expr(Eigen::MatrixXd::Identity(k, k), p.scalar_expr(t));
  p.require_psd(std::move(rem), "margin");
  p.maximize(p.scalar_expr(t));

  const SolveResult r = s->solve(p);
  if (r.status != SolveStatus::Optimal)
    throw Error(ErrorCode::AuditFailed, "copositive split recovery failed: " + r.info);
  cert.N = p.value_symmetric(N, r.assignment).cwiseMax(0.0);
  cert.S = M - cert.N;
  return cert;
}

namespace {

double min_eigenvalue(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Best scalar slack for the pinned half-space block: nu >= 0 maximizing
// lambda_min(sub - nu * e00 e00^T).
double recover_pinned_slack(const Eigen::MatrixXd& sub, SolverInterface* solver) {
  if (min_eigenvalue(sub) >= 0.0) return 0.0;
  InteriorPointSolver fallback;
  SolverInterface* s = solver ? solver : &fallback;

  const int k = static_cast<int>(sub.rows());
  SdpProblem p;
  const VarBlock nu = p.add_scalar("nu");
  const VarBlock t = p.add_scalar("t");
  p.require_nonneg(p.scalar_expr(nu), "nu");
  p.require_nonneg(LinExpr(1.0) - p.scalar_expr(t), "cap");
  MatExpr expr = MatExpr::constant(sub);
  expr(0, 0) -= p.scalar_expr(nu);
  for (int i = 0; i < k; ++i) expr(i, i) -= p.scalar_expr(t);
  p.require_psd(std::move(expr), "margin");
  p.maximize(p.scalar_expr(t));
  const SolveResult r = s->solve(p);
  if (r.status != SolveStatus::Optimal) return 0.0;
  return std::max(0.0, p.value_scalar(nu, r.assignment));
}

// Best 2x2 nonnegative corner block for the regular half-space fragment.
Eigen::MatrixXd recover_corner_block(const Eigen::MatrixXd& MH, SolverInterface* solver) {
  if (min_eigenvalue(MH) >= 0.0) return Eigen::MatrixXd::Zero(2, 2);
  InteriorPointSolver fallback;
  SolverInterface* s = solver ? solver : &fallback;

  const int k = static_cast<int>(MH.rows());
  SdpProblem p;
  const VarBlock N = p.add_symmetric("N00", 2);
  const VarBlock t = p.add_scalar("t");
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) p.require_nonneg(p.matrix_entry(N, i, j), "N00");
  p.require_nonneg(LinExpr(1.0) - p.scalar_expr(t), "cap");
  MatExpr expr = MatExpr::constant(MH);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) expr(i, j) -= p.matrix_entry(N, i, j);
  for (int i = 0; i < k; ++i) expr(i, i) -= p.scalar_expr(t);
  p.require_psd(std::move(expr), "margin");
  p.maximize(p.scalar_expr(t));
  const SolveResult r = s->solve(p);
  if (r.status != SolveStatus::Optimal) return Eigen::MatrixXd::Zero(2, 2);
  return p.value_symmetric(N, r.assignment).cwiseMax(0.0);
}

}  // namespace

ResidualReport certificate_residuals(const BimodalSystem& sys, const Certificate& cert,
                                     const Config& cfg, SolverInterface* solver) {
  if (cert.n() != sys.n())
    throw Error(ErrorCode::DimensionMismatch,
                "certificate dimension does not match the system");

  if (cert.kind == CertificateKind::Common) {
    // audit against the plain <= 0 blocks; the solve-time strict margin is
    // an interior device, not part of the certificate's contract
    Config audit_cfg = cfg;
    audit_cfg.strict_margin = 0.0;
    CommonAssembly ap = assemble_common_sdp(sys, cert.alpha, audit_cfg);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(ap.sdp.var_count());
    ap.sdp.assign_symmetric(ap.P, cert.P1, y);
    return evaluate_residuals(ap.sdp, y);
  }

  const SwitchGeometry geom = build_geometry(sys);
  const EtildeMode emode = etilde_mode(geom);

  Certificate full = cert;
  if (!cert.has_multipliers) {
    const RecoveredMultipliers rm = recover_multipliers(sys, cert, solver);
    full.gamma1 = rm.gamma1;
    full.sigma1 = rm.sigma1;
    full.gamma2 = rm.gamma2;
    full.sigma2 = rm.sigma2;
    full.has_multipliers = true;
  }

  PiecewiseAssembly ap = assemble_piecewise_sdp(sys, geom, emode, cert.alpha, cfg);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(ap.sdp.var_count());
  ap.sdp.assign_symmetric(ap.P1, full.P1, y);
  ap.sdp.assign_symmetric(ap.P2, full.P2, y);
  ap.sdp.assign_vector(ap.b1, full.b1, y);
  ap.sdp.assign_vector(ap.b2, full.b2, y);
  ap.sdp.assign_scalar(ap.gamma1, full.gamma1, y);
  ap.sdp.assign_scalar(ap.gamma2, full.gamma2, y);
  ap.sdp.assign_scalar(ap.sigma1, full.sigma1, y);
  ap.sdp.assign_scalar(ap.sigma2, full.sigma2, y);

  ResidualReport report;
  if (ap.e1)
    ap.sdp.assign_scalar(*ap.e1, full.e1, y);
  else if (full.e1 != 0.0)
    report.entries.push_back({"e1_fixed_zero", ResidualEntry::Kind::Equality, std::abs(full.e1)});
  if (ap.e2)
    ap.sdp.assign_scalar(*ap.e2, full.e2, y);
  else if (full.e2 != 0.0)
    report.entries.push_back({"e2_fixed_zero", ResidualEntry::Kind::Equality, std::abs(full.e2)});

  const QuadraticForm q1(full.P1, full.b1, full.e1);
  const QuadraticForm q2(full.P2, full.b2, full.e2);
  for (int side = 0; side < 2; ++side) {
    const QuadraticForm& q = side == 0 ? q1 : q2;
    const HalfspaceFragment& frag = side == 0 ? ap.frag_neg : ap.frag_pos;
    if (frag.origin_interior) continue;  // no split variables in that form
    const Eigen::MatrixXd TH = halfspace_half_lifting(
        geom, side == 0 ? HalfspaceSide::NEG : HalfspaceSide::POS);
    Eigen::MatrixXd MH = TH.transpose() * q.lifted() * TH;
    MH = 0.5 * (MH + MH.transpose()).eval();
    if (frag.pinned) {
      const Eigen::MatrixXd sub = MH.bottomRightCorner(sys.n(), sys.n());
      ap.sdp.assign_scalar(*frag.nu, recover_pinned_slack(sub, solver), y);
    } else {
      ap.sdp.assign_symmetric(*frag.N00, recover_corner_block(MH, solver), y);
    }
  }

  ResidualReport base = evaluate_residuals(ap.sdp, y);
  report.entries.insert(report.entries.end(), base.entries.begin(), base.entries.end());
  return report;
}

}  // namespace pwa_reach
