#pragma once

#include "pwa_reach/solver_interface.hpp"

namespace pwa_reach {

/// Dense primal-dual interior-point solver (Mehrotra predictor-corrector
/// with the HKM direction). Equality constraints are eliminated through an
/// orthonormal null-space basis before the barrier iteration; feasibility is
/// classified by a phase-1 margin maximization, so infeasible problems are
/// reported as such instead of failing to converge.
///
/// Built for the small dense blocks this project produces (state dimensions
/// in the single digits); no sparsity exploitation.
class InteriorPointSolver final : public SolverInterface {
 public:
  struct Options {
    double tol = 1e-9;             // relative gap + residual target
    double loose_tol = 1e-6;       // acceptance score for the best stalled iterate
    int max_iterations = 200;
    double step_fraction = 0.98;   // fraction of the max step to the boundary
    double infeasible_margin = 1e-8;  // phase-1 margin below which we declare infeasible
    double cap = 1.0;              // phase-1 margin cap
    bool verbose = false;
  };

  InteriorPointSolver() = default;
  explicit InteriorPointSolver(const Options& opts) : opts_(opts) {}

  SolveResult solve(const SdpProblem& problem) override;
  std::string name() const override { return "ipm"; }

  const Options& options() const { return opts_; }

 private:
  Options opts_;
};

}  // namespace pwa_reach
