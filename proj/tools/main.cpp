#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <json.hpp>

#include "pwa_reach/cli.hpp"
#include "pwa_reach/errors.hpp"
#include "pwa_reach/solve.hpp"

namespace {

int exit_code_for(pwa_reach::ErrorCode code) {
  using pwa_reach::ErrorCode;
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::IoError:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::ZeroNormal:
    case ErrorCode::InvalidAlpha: return 2;
    case ErrorCode::NotContinuous: return 3;
    case ErrorCode::NotHurwitz: return 4;
    case ErrorCode::AllInfeasible: return 5;
    case ErrorCode::AuditFailed: return 6;
    default: return 1;
  }
}

void add_sim_flags(CLI::App* cmd, pwa_reach::RunConfig& cfg) {
  cmd->add_option("--seed", cfg.seed, "base RNG seed (trajectory i uses seed + i)");
  cmd->add_option("--trajectories", cfg.trajectories, "number of trajectories");
  cmd->add_option("--t-end", cfg.t_end, "simulation horizon");
  cmd->add_option("--dt", cfg.dt, "integration step");
  cmd->add_option("--hold-dt", cfg.hold_dt, "disturbance hold window");
}

void add_common_flags(CLI::App* cmd, pwa_reach::RunConfig& cfg,
                      std::vector<int>& project_pair) {
  cmd->add_option("--out", cfg.out_dir, "output directory");
  cmd->add_option("--project", project_pair, "coordinate pair for 2-D projection (1-based)")
      ->expected(2);
  cmd->add_option("--samples", cfg.boundary_samples, "boundary polyline samples");
  cmd->add_option("--tol-cont", cfg.tolerances.tol_cont, "continuity tolerance");
  cmd->add_option("--tol-pd", cfg.tolerances.tol_pd, "positive-definiteness tolerance");
  cmd->add_option("--tol-solver", cfg.tolerances.tol_solver, "certificate residual tolerance");
  cmd->add_option("--tol-mem", cfg.tolerances.tol_mem, "set-membership tolerance");
  cmd->add_option("--tol-audit", cfg.tolerances.tol_audit, "decrease-audit tolerance");
  cmd->add_option("--eps-pd", cfg.tolerances.eps_pd, "P definiteness margin");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Piecewise-ellipsoidal reachable set estimation for continuous bimodal "
               "piecewise affine systems"};
  app.require_subcommand(1);

  pwa_reach::RunConfig cfg;
  if (const char* env = std::getenv("PWA_REACH_SOLVER")) cfg.solver = env;

  std::vector<int> project_pair;
  std::vector<double> alpha_grid;
  double alpha = 0.0;
  std::string method = "both";

  auto* check = app.add_subcommand("check", "verify well-posedness and print diagnostics");
  check->add_option("system", cfg.system_path, "system JSON file")->required();

  auto* estimate = app.add_subcommand("estimate", "solve for reachable-set certificates");
  estimate->add_option("system", cfg.system_path, "system JSON file")->required();
  auto* alpha_opt = estimate->add_option("--alpha", alpha, "fixed decay rate");
  estimate->add_option("--alpha-grid", alpha_grid, "explicit decay-rate grid");
  estimate->add_option("--method", method, "piecewise | common | both")
      ->check(CLI::IsMember({"piecewise", "common", "both"}));
  estimate->add_flag("--dump-problem", cfg.dump_problem,
                     "also write the assembled problems as JSON");
  add_common_flags(estimate, cfg, project_pair);

  auto* simulate = app.add_subcommand("simulate", "integrate disturbed trajectories");
  simulate->add_option("system", cfg.system_path, "system JSON file")->required();
  add_sim_flags(simulate, cfg);
  add_common_flags(simulate, cfg, project_pair);

  auto* validate = app.add_subcommand("validate", "audit a certificate against simulations");
  validate->add_option("system", cfg.system_path, "system JSON file")->required();
  validate->add_option("--certificate", cfg.certificate_path, "certificate JSON file")
      ->required();
  add_sim_flags(validate, cfg);
  add_common_flags(validate, cfg, project_pair);

  auto* plot = app.add_subcommand("plot", "export boundary CSV/SVG for a certificate");
  plot->add_option("system", cfg.system_path, "system JSON file")->required();
  plot->add_option("--certificate", cfg.certificate_path, "certificate JSON file")->required();
  add_sim_flags(plot, cfg);
  add_common_flags(plot, cfg, project_pair);

  auto* compare = app.add_subcommand("compare", "dominance of a piecewise vs a common estimate");
  compare->add_option("system", cfg.system_path, "system JSON file")->required();
  compare->add_option("--piecewise", cfg.piecewise_path, "piecewise certificate")->required();
  compare->add_option("--common", cfg.common_path, "common certificate")->required();
  add_common_flags(compare, cfg, project_pair);

  CLI11_PARSE(app, argc, argv);

  if (check->parsed()) cfg.command = pwa_reach::RunConfig::Command::Check;
  if (estimate->parsed()) cfg.command = pwa_reach::RunConfig::Command::Estimate;
  if (simulate->parsed()) cfg.command = pwa_reach::RunConfig::Command::Simulate;
  if (validate->parsed()) cfg.command = pwa_reach::RunConfig::Command::Validate;
  if (plot->parsed()) cfg.command = pwa_reach::RunConfig::Command::Plot;
  if (compare->parsed()) cfg.command = pwa_reach::RunConfig::Command::Compare;

  if (alpha_opt->count() > 0) cfg.alpha = alpha;
  if (!alpha_grid.empty()) cfg.alpha_grid = alpha_grid;
  if (project_pair.size() == 2) cfg.project = {project_pair[0], project_pair[1]};
  if (method == "piecewise") cfg.method = pwa_reach::RunConfig::Method::Piecewise;
  if (method == "common") cfg.method = pwa_reach::RunConfig::Method::Common;
  // per-command trajectory-count defaults when the flag is absent
  if (simulate->parsed() && simulate->count("--trajectories") == 0) cfg.trajectories = 100;
  if (plot->parsed() && plot->count("--trajectories") == 0) cfg.trajectories = 0;

  try {
    return pwa_reach::run(cfg);
  } catch (const pwa_reach::AllInfeasibleError& err) {
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& s : err.trace_curve)
      curve.push_back({{"alpha", s.alpha}, {"status", pwa_reach::to_string(s.status)}});
    nlohmann::json j = {{"error",
                         {{"class", err.code_name()}, {"message", err.what()},
                          {"trace_curve", curve}}}};
    std::cerr << j.dump(2) << "\n";
    return exit_code_for(err.code());
  } catch (const pwa_reach::Error& err) {
    nlohmann::json j = {{"error", {{"class", err.code_name()}, {"message", err.what()}}}};
    std::cerr << j.dump(2) << "\n";
    return exit_code_for(err.code());
  } catch (const std::exception& ex) {
    nlohmann::json j = {{"error", {{"class", "internal"}, {"message", ex.what()}}}};
    std::cerr << j.dump(2) << "\n";
    return 1;
  }
}
