#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pwa_reach/config.hpp"

namespace pwa_reach {

/// Parsed command-line invocation. `run` wires the pipeline: validate input,
/// estimate sets, simulate, audit, export plots and reports. Outputs land
/// under out_dir with stable names (certificate_{method}.json,
/// set_{method}.csv/svg, audit.json, trajectories.csv).
struct RunConfig {
  enum class Command { Check, Estimate, Simulate, Validate, Plot, Compare };
  enum class Method { Piecewise, Common, Both };

  Command command = Command::Check;
  std::string system_path;
  std::optional<double> alpha;
  std::optional<std::vector<double>> alpha_grid;
  Method method = Method::Both;
  std::uint64_t seed = 1;
  int trajectories = 1000;
  double t_end = 30.0;
  double dt = 1e-3;
  double hold_dt = 1e-2;
  std::optional<std::pair<int, int>> project;  // 1-based coordinate pair
  std::string out_dir = ".";
  std::string certificate_path;  // validate / plot
  std::string piecewise_path;    // compare
  std::string common_path;       // compare
  std::string solver = "ipm";
  int boundary_samples = 256;
  bool dump_problem = false;  // also write problem_{method}.json debug dumps
  Config tolerances;
};

/// Execute one command. Returns the process exit code; throws pwa_reach::Error
/// for failures the caller should render as machine-readable JSON.
int run(const RunConfig& config);

}  // namespace pwa_reach
