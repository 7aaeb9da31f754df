#include "pwa_reach/solve.hpp"

#include <algorithm>
#include <cmath>

#include "pwa_reach/ipm.hpp"

namespace pwa_reach {
namespace {

// Time-rescaled copy: x'(t) with t' = s*t has A/s, B/s, d/s and the same
// trajectories, so the Lyapunov matrices and the trace objective are
// unchanged while the block entries shrink to O(1).
BimodalSystem time_rescaled(const BimodalSystem& sys, double s) {
  BimodalSystem out = sys;
  out.A1 /= s;
  out.A2 /= s;
  out.B /= s;
  out.d1 /= s;
  out.d2 /= s;
  return out;
}

struct SolvedProblem {
  SolveResult result;
  std::optional<PiecewiseAssembly> pw;
  std::optional<CommonAssembly> common;
};

SolvedProblem solve_once(const BimodalSystem& sys, CertificateKind kind, double alpha,
                         const Config& cfg, SolverInterface& solver) {
  SolvedProblem out;
  if (kind == CertificateKind::Piecewise) {
    const SwitchGeometry geom = build_geometry(sys);
    out.pw = assemble_piecewise_sdp(sys, geom, etilde_mode(geom), alpha, cfg);
    out.result = solver.solve(out.pw->sdp);
  } else {
    out.common = assemble_common_sdp(sys, alpha, cfg);
    out.result = solver.solve(out.common->sdp);
  }
  return out;
}

Certificate clamp_and_fill(const BimodalSystem& sys, CertificateKind kind, double alpha,
                           const SdpProblem& sdp, const PiecewiseAssembly* pw,
                           const CommonAssembly* common, const SolveResult& result,
                           const Config& cfg) {
  Certificate cert;
  cert.kind = kind;
  cert.alpha = alpha;
  cert.objective = result.objective;

  const Eigen::VectorXd& y = result.assignment;
  auto clamp_multiplier = [&](double v) { return v < 0.0 && v >= -cfg.tol_solver ? 0.0 : v; };

  if (kind == CertificateKind::Common) {
    Eigen::MatrixXd P = sdp.value_symmetric(common->P, y);
    cert.P1 = 0.5 * (P + P.transpose());
    cert.P2 = cert.P1;
    cert.b1 = Eigen::VectorXd::Zero(sys.n());
    cert.b2 = cert.b1;
  } else {
    Eigen::MatrixXd P1 = sdp.value_symmetric(pw->P1, y);
    Eigen::MatrixXd P2 = sdp.value_symmetric(pw->P2, y);
    cert.P1 = 0.5 * (P1 + P1.transpose());
    cert.P2 = 0.5 * (P2 + P2.transpose());
    cert.b1 = sdp.value_vector(pw->b1, y);
    cert.b2 = sdp.value_vector(pw->b2, y);
    cert.e1 = pw->e1 ? sdp.value_scalar(*pw->e1, y) : 0.0;
    cert.e2 = pw->e2 ? sdp.value_scalar(*pw->e2, y) : 0.0;
    cert.gamma1 = clamp_multiplier(sdp.value_scalar(pw->gamma1, y));
    cert.gamma2 = clamp_multiplier(sdp.value_scalar(pw->gamma2, y));
    cert.sigma1 = clamp_multiplier(sdp.value_scalar(pw->sigma1, y));
    cert.sigma2 = clamp_multiplier(sdp.value_scalar(pw->sigma2, y));
  }

  cert.audit = certificate_residuals(sys, cert, cfg);
  if (!cert.audit.within(10.0 * cfg.tol_solver))
    throw Error(ErrorCode::AuditFailed,
                "certificate audit failed: worst residual " + std::to_string(cert.audit.worst()));
  return cert;
}

}  // namespace

double alpha_ceiling(const BimodalSystem& sys) {
  const double margin1 = -hurwitz_check(sys.A1);
  const double margin2 = -hurwitz_check(sys.A2);
  return 2.0 * std::min(margin1, margin2);
}

FixedAlphaOutcome solve_at_alpha(const BimodalSystem& sys, CertificateKind kind,
                                 double alpha, const Config& cfg, SolverInterface* solver) {
  InteriorPointSolver fallback;
  SolverInterface& s = solver ? *solver : fallback;

  SolvedProblem sp = solve_once(sys, kind, alpha, cfg, s);
  if (sp.result.status == SolveStatus::NumericalFailure) {
    // retry once on the time-rescaled system; gamma/sigma scale back by s
    double scale = std::max({sys.A1.cwiseAbs().maxCoeff(), sys.A2.cwiseAbs().maxCoeff(),
                             sys.B.cwiseAbs().maxCoeff()});
    if (scale > 0.0 && std::isfinite(scale) && scale != 1.0) {
      const BimodalSystem scaled = time_rescaled(sys, scale);
      SolvedProblem retry = solve_once(scaled, kind, alpha / scale, cfg, s);
      if (retry.result.status == SolveStatus::Optimal) {
        Certificate cert = clamp_and_fill(scaled, kind, alpha / scale,
                                          retry.pw ? retry.pw->sdp : retry.common->sdp,
                                          retry.pw ? &*retry.pw : nullptr,
                                          retry.common ? &*retry.common : nullptr,
                                          retry.result, cfg);
        cert.alpha = alpha;
        cert.gamma1 *= scale;
        cert.gamma2 *= scale;
        cert.sigma1 *= scale;
        cert.sigma2 *= scale;
        // re-audit against the original system
        cert.audit = certificate_residuals(sys, cert, cfg);
        if (!cert.audit.within(10.0 * cfg.tol_solver))
          throw Error(ErrorCode::AuditFailed, "rescaled certificate audit failed");
        FixedAlphaOutcome res;
        res.result = retry.result;
        res.result.info += " (solved after time rescaling)";
        res.certificate = std::move(cert);
        return res;
      }
      sp.result.info += "; rescaled retry: " + retry.result.info;
    }
    FixedAlphaOutcome out;
    out.result = sp.result;
    return out;
  }

  FixedAlphaOutcome out;
  out.result = sp.result;
  if (sp.result.status == SolveStatus::Optimal)
    out.certificate = clamp_and_fill(sys, kind, alpha,
                                     sp.pw ? sp.pw->sdp : sp.common->sdp,
                                     sp.pw ? &*sp.pw : nullptr,
                                     sp.common ? &*sp.common : nullptr, sp.result, cfg);
  return out;
}

AlphaSearchResult alpha_search(const BimodalSystem& sys, CertificateKind kind,
                               const Config& cfg,
                               const std::optional<std::vector<double>>& grid,
                               SolverInterface* solver) {
  const ContinuityResult cont = check_continuity(sys, cfg);
  if (!cont.continuous)
    throw Error(ErrorCode::NotContinuous, "alpha_search requires a continuous system");
  const double ceiling = alpha_ceiling(sys);
  if (!(ceiling > 0.0))
    throw Error(ErrorCode::NotHurwitz, "alpha_search requires both modes Hurwitz");

  std::vector<double> alphas;
  if (grid && !grid->empty()) {
    alphas = *grid;
    std::sort(alphas.begin(), alphas.end());
    for (double a : alphas)
      if (!(a > 0.0)) throw Error(ErrorCode::InvalidAlpha, "grid alphas must be positive");
  } else {
    const int points = 24;
    const double lo = std::log10(ceiling * 1e-3);
    const double hi = std::log10(ceiling);
    for (int i = 0; i < points; ++i)
      alphas.push_back(std::pow(10.0, lo + (hi - lo) * i / (points - 1)));
  }

  AlphaSearchResult out;
  std::optional<Certificate> best;
  double best_alpha = 0.0;
  double best_objective = -std::numeric_limits<double>::infinity();
  int best_index = -1;

  auto evaluate = [&](double a) -> double {
    FixedAlphaOutcome fo = solve_at_alpha(sys, kind, a, cfg, solver);
    AlphaSample sample{a, fo.result.status, fo.result.objective};
    out.trace_curve.push_back(sample);
    if (fo.result.status != SolveStatus::Optimal)
      return -std::numeric_limits<double>::infinity();
    // max objective; ties resolved toward the smaller alpha
    if (fo.result.objective > best_objective + 1e-15 ||
        (fo.result.objective >= best_objective - 1e-15 && a < best_alpha)) {
      best_objective = fo.result.objective;
      best_alpha = a;
      best = std::move(fo.certificate);
    }
    return fo.result.objective;
  };

  for (std::size_t i = 0; i < alphas.size(); ++i) {
    evaluate(alphas[i]);
    if (best && best_alpha == alphas[i]) best_index = static_cast<int>(i);
  }

  if (!best) throw AllInfeasibleError(out.trace_curve);

  // one golden-section refinement around the best grid point
  if (alphas.size() >= 2 && best_index >= 0) {
    const double invphi = 0.6180339887498949;
    double lo = best_index > 0 ? alphas[best_index - 1] : alphas[best_index] * 0.5;
    double hi = best_index + 1 < static_cast<int>(alphas.size()) ? alphas[best_index + 1]
                                                                 : alphas[best_index];
    double x1 = hi - invphi * (hi - lo);
    double x2 = lo + invphi * (hi - lo);
    double f1 = evaluate(x1);
    double f2 = evaluate(x2);
    for (int k = 0; k < 6; ++k) {
      if (f1 >= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - invphi * (hi - lo);
        f1 = evaluate(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + invphi * (hi - lo);
        f2 = evaluate(x2);
      }
    }
  }

  out.best_alpha = best_alpha;
  out.best_certificate = std::move(*best);
  return out;
}

Certificate extract_certificate(const BimodalSystem& sys, const PiecewiseAssembly& ap,
                                const SolveResult& result, const Config& cfg) {
  if (result.status != SolveStatus::Optimal)
    throw Error(ErrorCode::AuditFailed, "cannot extract a certificate from a non-optimal solve");
  return clamp_and_fill(sys, CertificateKind::Piecewise, ap.alpha, ap.sdp, &ap, nullptr,
                        result, cfg);
}

Certificate extract_certificate(const BimodalSystem& sys, const CommonAssembly& ap,
                                const SolveResult& result, const Config& cfg) {
  if (result.status != SolveStatus::Optimal)
    throw Error(ErrorCode::AuditFailed, "cannot extract a certificate from a non-optimal solve");
  return clamp_and_fill(sys, CertificateKind::Common, ap.alpha, ap.sdp, nullptr, &ap,
                        result, cfg);
}

}  // namespace pwa_reach
