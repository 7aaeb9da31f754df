#pragma once

#include <optional>
#include <vector>

#include "pwa_reach/certificate.hpp"
#include "pwa_reach/lmi.hpp"

namespace pwa_reach {

struct AlphaSample {
  double alpha = 0.0;
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = std::numeric_limits<double>::quiet_NaN();
};

struct AlphaSearchResult {
  double best_alpha = 0.0;
  Certificate best_certificate;
  std::vector<AlphaSample> trace_curve;
};

/// Thrown by alpha_search when no grid point is feasible; carries the curve.
class AllInfeasibleError : public Error {
 public:
  explicit AllInfeasibleError(std::vector<AlphaSample> curve)
      : Error(ErrorCode::AllInfeasible, "no feasible alpha in the search grid"),
        trace_curve(std::move(curve)) {}
  std::vector<AlphaSample> trace_curve;
};

/// Solve one fixed-alpha problem of the given kind. Numerical failures are
/// retried once on a time-rescaled copy of the system (rescaling by the
/// largest entry of [A1; A2; B] leaves P and the objective invariant while
/// conditioning the blocks). Returns the raw solver outcome plus the
/// assembled problem used, so certificates can be extracted.
struct FixedAlphaOutcome {
  SolveResult result;
  std::optional<Certificate> certificate;  // set when result is Optimal
};
FixedAlphaOutcome solve_at_alpha(const BimodalSystem& sys, CertificateKind kind,
                                 double alpha, const Config& cfg = {},
                                 SolverInterface* solver = nullptr);

/// Upper feasibility ceiling 2 * min_i(-max Re lambda(A_i)) for the decay
/// rate: beyond it the mode blocks admit no positive definite solution.
double alpha_ceiling(const BimodalSystem& sys);

/// One-dimensional search over the decay rate: a 24-point logarithmic grid
/// over (0, alpha_ceiling] followed by one golden-section refinement of 8
/// evaluations around the best grid point, maximizing the trace objective.
/// An explicit grid replaces the default one (a single-point grid skips the
/// refinement). Preconditions: system continuous, both modes Hurwitz.
AlphaSearchResult alpha_search(const BimodalSystem& sys, CertificateKind kind,
                               const Config& cfg = {},
                               const std::optional<std::vector<double>>& grid = std::nullopt,
                               SolverInterface* solver = nullptr);

/// Build a Certificate from a raw assignment: symmetrizes the P blocks,
/// clamps multiplier negatives within tol_solver to zero, evaluates the full
/// residual audit and embeds it. Throws AuditFailed when any residual
/// exceeds 10 * tol_solver.
Certificate extract_certificate(const BimodalSystem& sys, const PiecewiseAssembly& ap,
                                const SolveResult& result, const Config& cfg = {});
Certificate extract_certificate(const BimodalSystem& sys, const CommonAssembly& ap,
                                const SolveResult& result, const Config& cfg = {});

}  // namespace pwa_reach
