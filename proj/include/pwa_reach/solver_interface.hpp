#pragma once

#include <Eigen/Dense>
#include <limits>
#include <memory>
#include <string>

#include "pwa_reach/sdp.hpp"

namespace pwa_reach {

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd assignment;  // full packed variables (valid when Optimal)
  double objective = std::numeric_limits<double>::quiet_NaN();
  double feasibility_margin = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  std::string info;
};

/// Conic solver backend contract. Returned assignments are audited by the
/// callers via evaluate_residuals(), never trusted.
class SolverInterface {
 public:
  virtual ~SolverInterface() = default;
  virtual SolveResult solve(const SdpProblem& problem) = 0;
  virtual std::string name() const = 0;
};

/// Instantiate a backend by name ("ipm" is the built-in default). The CLI
/// routes the PWA_REACH_SOLVER environment variable here.
std::unique_ptr<SolverInterface> make_solver(const std::string& name = "ipm");

}  // namespace pwa_reach
