#include "pwa_reach/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "pwa_reach/ipm.hpp"
#include "pwa_reach/reachset.hpp"
#include "pwa_reach/sim.hpp"
#include "pwa_reach/solve.hpp"

namespace pwa_reach {
namespace {

namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string out_path(const RunConfig& cfg, const std::string& file) {
  fs::create_directories(cfg.out_dir);
  return (fs::path(cfg.out_dir) / file).string();
}

const char* method_name(CertificateKind kind) {
  return kind == CertificateKind::Piecewise ? "piecewise" : "common";
}

std::vector<CertificateKind> methods_of(const RunConfig& cfg) {
  switch (cfg.method) {
    case RunConfig::Method::Piecewise: return {CertificateKind::Piecewise};
    case RunConfig::Method::Common: return {CertificateKind::Common};
    case RunConfig::Method::Both:
      return {CertificateKind::Piecewise, CertificateKind::Common};
  }
  return {};
}

std::pair<int, int> projection_pair(const RunConfig& cfg, int n) {
  int i = 1, j = 2;
  if (cfg.project) {
    i = cfg.project->first;
    j = cfg.project->second;
  }
  if (i < 1 || j < 1 || i > n || j > n || i == j)
    throw Error(ErrorCode::ParseError, "--project needs two distinct 1-based coordinates");
  return {i - 1, j - 1};
}

/// Project an n-dimensional estimate to a coordinate pair. Exact piecewise
/// projection needs the switching normal supported on the kept coordinates;
/// otherwise the two full shadows are exported (a conservative overlay) and
/// a note is printed.
PiecewiseEllipsoid project_set(const PiecewiseEllipsoid& set, int i, int j, bool* exact) {
  const Ellipsoid2D neg = project_2d(set.neg_piece, i, j);
  const Ellipsoid2D pos = project_2d(set.pos_piece, i, j);

  double off_support = 0.0;
  for (int k = 0; k < set.n(); ++k)
    if (k != i && k != j) off_support = std::max(off_support, std::abs(set.c[k]));
  *exact = off_support <= 1e-12 * set.c.norm();

  PiecewiseEllipsoid out;
  out.neg_piece = neg.as_form();
  out.pos_piece = pos.as_form();
  if (*exact) {
    out.c = Eigen::Vector2d(set.c[i], set.c[j]);
    out.f = set.f;
  } else {
    // no meaningful 2-D switching line; keep each shadow whole by pushing
    // the split far away
    out.c = Eigen::Vector2d(1.0, 0.0);
    out.f = 0.0;
  }
  return out;
}

void export_set(const RunConfig& cfg, const BimodalSystem& sys, const Certificate& cert,
                const std::string& stem,
                const std::vector<std::vector<Eigen::Vector2d>>& overlays = {}) {
  const PiecewiseEllipsoid set = estimate_set(cert, sys);
  PiecewiseEllipsoid plot_set = set;
  if (sys.n() != 2) {
    auto [i, j] = projection_pair(cfg, sys.n());
    bool exact = false;
    plot_set = project_set(set, i, j, &exact);
    if (!exact)
      std::cout << "note: switching normal not supported on the projection pair; "
                   "exporting both full shadows\n";
  }
  write_boundary_csv(out_path(cfg, stem + ".csv"), plot_set, cfg.boundary_samples);
  write_boundary_svg(out_path(cfg, stem + ".svg"), plot_set, cfg.boundary_samples, overlays);
}

json sample_curve_json(const std::vector<AlphaSample>& curve) {
  json arr = json::array();
  for (const auto& s : curve)
    arr.push_back({{"alpha", s.alpha},
                   {"status", to_string(s.status)},
                   {"objective", std::isfinite(s.objective) ? json(s.objective) : json()}});
  return arr;
}

int run_check(const RunConfig& cfg, const BimodalSystem& sys) {
  const ContinuityResult cont = check_continuity(sys, cfg.tolerances);
  json report;
  report["continuous"] = cont.continuous;
  report["h"] = vector_to_json(cont.h);
  report["matrix_residual"] = cont.matrix_residual;
  report["offset_residual"] = cont.offset_residual;

  const double re1 = hurwitz_check(sys.A1);
  const double re2 = hurwitz_check(sys.A2);
  report["hurwitz"] = {{"mode1_max_re", re1}, {"mode2_max_re", re2}};
  json warnings = json::array();
  for (int mode = 1; mode <= 2; ++mode) {
    const double re = mode == 1 ? re1 : re2;
    if (re >= -cfg.tolerances.tol_hurwitz)
      warnings.push_back("mode " + std::to_string(mode) + " is not Hurwitz");
    else if (std::abs(re) < cfg.tolerances.hurwitz_warn_band)
      warnings.push_back("mode " + std::to_string(mode) + " is marginally Hurwitz");
  }

  const SwitchGeometry geom = build_geometry(sys);
  const EtildeMode emode = etilde_mode(geom);
  report["origin_region"] = geom.origin_region == OriginRegion::NEG    ? "neg"
                            : geom.origin_region == OriginRegion::ZERO ? "zero"
                                                                       : "pos";
  report["e1_mode"] = emode.e1_mode == EtildeRule::FREE ? "free" : "fixed-zero";
  report["e2_mode"] = emode.e2_mode == EtildeRule::FREE ? "free" : "fixed-zero";
  report["alpha_ceiling"] = alpha_ceiling(sys);
  if (!warnings.empty()) report["warnings"] = warnings;

  std::cout << report.dump(2) << "\n";
  if (!cont.continuous)
    throw Error(ErrorCode::NotContinuous, "system is not continuous across the hyperplane");
  return 0;
}

int run_estimate(const RunConfig& cfg, const BimodalSystem& sys) {
  const std::unique_ptr<SolverInterface> solver = make_solver(cfg.solver);

  std::optional<std::vector<double>> grid;
  if (cfg.alpha)
    grid = std::vector<double>{*cfg.alpha};
  else if (cfg.alpha_grid)
    grid = cfg.alpha_grid;

  json summary;
  std::optional<double> piecewise_trace, common_trace;
  for (CertificateKind kind : methods_of(cfg)) {
    const auto t0 = clock_type::now();
    AlphaSearchResult result = alpha_search(sys, kind, cfg.tolerances, grid, solver.get());
    const double elapsed = seconds_since(t0);

    Certificate& cert = result.best_certificate;
    json j = cert.to_json();
    j["search"] = {{"best_alpha", result.best_alpha},
                   {"curve", sample_curve_json(result.trace_curve)}};
    j["timing_seconds"] = elapsed;
    const std::string name = method_name(kind);
    {
      std::ofstream out(out_path(cfg, "certificate_" + name + ".json"));
      if (!out) throw Error(ErrorCode::IoError, "cannot write certificate file");
      out << j.dump(2) << "\n";
    }
    export_set(cfg, sys, cert, "set_" + name);

    if (cfg.dump_problem) {
      json dump;
      if (kind == CertificateKind::Piecewise) {
        const SwitchGeometry geom = build_geometry(sys);
        dump = assemble_piecewise_sdp(sys, geom, etilde_mode(geom), cert.alpha,
                                      cfg.tolerances)
                   .sdp.to_json();
      } else {
        dump = assemble_common_sdp(sys, cert.alpha, cfg.tolerances).sdp.to_json();
      }
      std::ofstream out(out_path(cfg, "problem_" + name + ".json"));
      if (!out) throw Error(ErrorCode::IoError, "cannot write problem dump");
      out << dump.dump(2) << "\n";
    }

    const double tr = cert.P1.trace() + (kind == CertificateKind::Piecewise ? cert.P2.trace() : 0.0);
    if (kind == CertificateKind::Piecewise)
      piecewise_trace = tr;
    else
      common_trace = cert.P1.trace();
    summary[name] = {{"alpha", cert.alpha},
                     {"objective", cert.objective},
                     {"trace", tr},
                     {"worst_residual", cert.audit.worst()},
                     {"timing_seconds", elapsed}};
  }
  if (piecewise_trace && common_trace)
    summary["trace_ratio_piecewise_over_common"] = *piecewise_trace / (2.0 * *common_trace);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int run_simulate(const RunConfig& cfg, const BimodalSystem& sys) {
  const double re = std::max(hurwitz_check(sys.A1), hurwitz_check(sys.A2));
  if (re >= 0.0)
    std::cout << "warning: a mode is not Hurwitz; trajectories may diverge\n";

  const auto t0 = clock_type::now();
  std::ofstream out(out_path(cfg, "trajectories.csv"));
  if (!out) throw Error(ErrorCode::IoError, "cannot write trajectories.csv");
  out.precision(10);

  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(sys.n());
  double max_norm = 0.0;
  for (int i = 0; i < cfg.trajectories; ++i) {
    const auto policy = DisturbancePolicy::piecewise_constant_random(cfg.seed + i, cfg.hold_dt);
    const Trajectory traj = integrate(sys, x0, policy, cfg.t_end, cfg.dt);
    if (i > 0) out << "\n";
    write_trajectory_csv(out, traj);
    for (const auto& x : traj.states) max_norm = std::max(max_norm, x.norm());
  }
  json summary = {{"trajectories", cfg.trajectories},
                  {"t_end", cfg.t_end},
                  {"dt", cfg.dt},
                  {"hold_dt", cfg.hold_dt},
                  {"max_state_norm", max_norm},
                  {"timing_seconds", seconds_since(t0)}};
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int run_validate(const RunConfig& cfg, const BimodalSystem& sys) {
  if (cfg.certificate_path.empty())
    throw Error(ErrorCode::ParseError, "validate needs --certificate");
  const Certificate cert = Certificate::load(cfg.certificate_path);

  const auto t0 = clock_type::now();
  const ResidualReport residuals = certificate_residuals(sys, cert, cfg.tolerances);
  const PiecewiseEllipsoid set = estimate_set(cert, sys);

  ContainmentStats stats;
  LyapunovAuditReport lyap;
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(sys.n());
  for (int i = 0; i < cfg.trajectories; ++i) {
    const auto policy = DisturbancePolicy::piecewise_constant_random(cfg.seed + i, cfg.hold_dt);
    const Trajectory traj = integrate(sys, x0, policy, cfg.t_end, cfg.dt);
    stats.add(set, traj, cfg.tolerances.tol_mem);
    const LyapunovAuditReport r = lyapunov_audit(traj, cert, sys, cfg.tolerances);
    lyap.points += r.points;
    lyap.violations += r.violations;
    lyap.worst_margin = std::max(lyap.worst_margin, r.worst_margin);
  }
  lyap.violation_fraction = lyap.points == 0 ? 0.0
                                             : static_cast<double>(lyap.violations) /
                                                   static_cast<double>(lyap.points);

  json audit;
  audit["certificate"] = cfg.certificate_path;
  audit["residuals"] = residuals.to_json();
  audit["inside_fraction"] = stats.inside_fraction();
  audit["worst_excess"] = stats.total > 0 ? json(stats.worst_excess) : json();
  audit["violation_fraction"] = lyap.violation_fraction;
  audit["worst_margin"] = lyap.points > 0 ? json(lyap.worst_margin) : json();
  audit["trajectories"] = cfg.trajectories;
  audit["timing_seconds"] = seconds_since(t0);
  {
    std::ofstream out(out_path(cfg, "audit.json"));
    if (!out) throw Error(ErrorCode::IoError, "cannot write audit.json");
    out << audit.dump(2) << "\n";
  }
  std::cout << audit.dump(2) << "\n";

  if (!residuals.within(10.0 * cfg.tolerances.tol_solver))
    throw Error(ErrorCode::AuditFailed, "certificate residuals exceed tolerance");
  if (stats.inside_fraction() < 1.0)
    throw Error(ErrorCode::AuditFailed, "simulated states escaped the estimate");
  if (lyap.violation_fraction > 0.0)
    throw Error(ErrorCode::AuditFailed, "decrease inequality violated along trajectories");
  return 0;
}

int run_plot(const RunConfig& cfg, const BimodalSystem& sys) {
  if (cfg.certificate_path.empty())
    throw Error(ErrorCode::ParseError, "plot needs --certificate");
  const Certificate cert = Certificate::load(cfg.certificate_path);

  std::vector<std::vector<Eigen::Vector2d>> overlays;
  if (cfg.trajectories > 0) {
    int ci = 0, cj = 1;
    if (sys.n() != 2) {
      auto [i, j] = projection_pair(cfg, sys.n());
      ci = i;
      cj = j;
    }
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(sys.n());
    const int count = std::min(cfg.trajectories, 64);
    for (int i = 0; i < count; ++i) {
      const auto policy = DisturbancePolicy::piecewise_constant_random(cfg.seed + i, cfg.hold_dt);
      const Trajectory traj = integrate(sys, x0, policy, cfg.t_end, cfg.dt);
      std::vector<Eigen::Vector2d> line;
      line.reserve(traj.states.size() / 10 + 1);
      for (std::size_t k = 0; k < traj.states.size(); k += 10)
        line.emplace_back(traj.states[k][ci], traj.states[k][cj]);
      overlays.push_back(std::move(line));
    }
  }
  const std::string stem =
      cert.kind == CertificateKind::Piecewise ? "set_piecewise" : "set_common";
  export_set(cfg, sys, cert, stem, overlays);
  std::cout << "wrote " << out_path(cfg, stem + ".csv") << " and " << stem << ".svg\n";
  return 0;
}

int run_compare(const RunConfig& cfg, const BimodalSystem& sys) {
  if (cfg.piecewise_path.empty() || cfg.common_path.empty())
    throw Error(ErrorCode::ParseError, "compare needs --piecewise and --common");
  const Certificate pw_cert = Certificate::load(cfg.piecewise_path);
  const Certificate common_cert = Certificate::load(cfg.common_path);
  if (pw_cert.kind != CertificateKind::Piecewise || common_cert.kind != CertificateKind::Common)
    throw Error(ErrorCode::ParseError, "compare expects a piecewise and a common certificate");

  const PiecewiseEllipsoid pw = estimate_set(pw_cert, sys);
  const QuadraticForm common(common_cert.P1, Eigen::VectorXd::Zero(sys.n()), 0.0);
  const DominanceReport rep = compare_dominance(pw, common);

  json j;
  j["trace_P1_plus_P2"] = pw_cert.P1.trace() + pw_cert.P2.trace();
  j["trace_2P"] = 2.0 * common_cert.P1.trace();
  j["min_eig_P1_minus_P"] = rep.min_eig_1;
  j["min_eig_P2_minus_P"] = rep.min_eig_2;
  j["subset_flag"] = rep.subset_flag;
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int run(const RunConfig& cfg) {
  make_solver(cfg.solver);  // validate the backend selection up front

  if (cfg.command == RunConfig::Command::Compare) {
    const BimodalSystem sys = BimodalSystem::load(cfg.system_path);
    return run_compare(cfg, sys);
  }

  const BimodalSystem sys = BimodalSystem::load(cfg.system_path);
  if (cfg.command == RunConfig::Command::Check) return run_check(cfg, sys);

  // every working command requires a well-posed (continuous) system
  const ContinuityResult cont = check_continuity(sys, cfg.tolerances);
  if (!cont.continuous)
    throw Error(ErrorCode::NotContinuous,
                "system is not continuous across the switching hyperplane");

  switch (cfg.command) {
    case RunConfig::Command::Estimate: return run_estimate(cfg, sys);
    case RunConfig::Command::Simulate: return run_simulate(cfg, sys);
    case RunConfig::Command::Validate: return run_validate(cfg, sys);
    case RunConfig::Command::Plot: return run_plot(cfg, sys);
    default: break;
  }
  throw Error(ErrorCode::ParseError, "unknown command");
}

}  // namespace pwa_reach
