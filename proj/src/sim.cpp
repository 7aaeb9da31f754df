#include "pwa_reach/sim.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>

#include "pwa_reach/rng.hpp"

namespace pwa_reach {
namespace {

Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& Rw) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Rw + Rw.transpose()));
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw Error(ErrorCode::ParseError, "Rw must be positive definite");
  return es.operatorInverseSqrt();
}

Eigen::VectorXd draw(const DisturbancePolicy& policy, const Eigen::MatrixXd& isqrt,
                     int m, Rng& rng) {
  switch (policy.kind) {
    case DisturbancePolicy::Kind::PiecewiseConstantRandom:
      return isqrt * rng.in_ball(m);
    case DisturbancePolicy::Kind::ExtremalRandomSign:
      return isqrt * rng.on_sphere(m);
    case DisturbancePolicy::Kind::Constant:
      return policy.w_const;
  }
  return Eigen::VectorXd::Zero(m);
}

}  // namespace

Eigen::VectorXd sample_disturbance(const DisturbancePolicy& policy,
                                   const Eigen::MatrixXd& Rw, Rng& rng) {
  const int m = static_cast<int>(Rw.rows());
  if (policy.kind == DisturbancePolicy::Kind::Constant) {
    if (policy.w_const.size() != m)
      throw Error(ErrorCode::DimensionMismatch, "constant disturbance has wrong dimension");
    if (policy.w_const.dot(Rw * policy.w_const) > 1.0 + 1e-12)
      throw Error(ErrorCode::ParseError, "constant disturbance violates the ellipsoid bound");
    return policy.w_const;
  }
  return draw(policy, inverse_sqrt(Rw), m, rng);
}

Trajectory integrate(const BimodalSystem& sys, const Eigen::VectorXd& x0,
                     const DisturbancePolicy& policy, double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end >= dt))
    throw Error(ErrorCode::ParseError, "integrate requires dt > 0 and t_end >= dt");
  if (x0.size() != sys.n())
    throw Error(ErrorCode::DimensionMismatch, "x0 has wrong dimension");

  const int m = sys.m();
  Rng rng(policy.seed);
  Eigen::MatrixXd isqrt;
  if (policy.kind != DisturbancePolicy::Kind::Constant) {
    isqrt = inverse_sqrt(sys.Rw);
  } else if (policy.w_const.size() != m ||
             policy.w_const.dot(sys.Rw * policy.w_const) > 1.0 + 1e-12) {
    throw Error(ErrorCode::ParseError, "constant disturbance is not admissible");
  }

  const std::size_t steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.w_values.reserve(steps);
  traj.mode_trace.reserve(steps);

  Eigen::VectorXd x = x0;
  double t = 0.0;
  traj.times.push_back(t);
  traj.states.push_back(x);

  Eigen::VectorXd w = draw(policy, isqrt, m, rng);
  double next_resample = policy.hold_dt;

  Eigen::VectorXd k1(sys.n()), k2(sys.n()), k3(sys.n()), k4(sys.n());
  while (t < t_end - 1e-12) {
    const double h = std::min(dt, t_end - t);
    traj.mode_trace.push_back(sys.c.dot(x) + sys.f < 0.0 ? Mode::NEG : Mode::POS);
    traj.w_values.push_back(w);

    k1 = sys.rhs(x, w);
    k2 = sys.rhs(x + 0.5 * h * k1, w);
    k3 = sys.rhs(x + 0.5 * h * k2, w);
    k4 = sys.rhs(x + h * k3, w);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += h;

    if (!x.allFinite())
      throw Error(ErrorCode::NonFiniteState,
                  "state became non-finite at t = " + std::to_string(t));
    traj.times.push_back(t);
    traj.states.push_back(x);

    if (policy.kind != DisturbancePolicy::Kind::Constant && t >= next_resample - 1e-12) {
      w = draw(policy, isqrt, m, rng);
      next_resample += policy.hold_dt;
    }
  }
  return traj;
}

LyapunovAuditReport lyapunov_audit(const Trajectory& traj, const Certificate& cert,
                                   const BimodalSystem& sys, const Config& cfg) {
  if (cert.n() != sys.n())
    throw Error(ErrorCode::DimensionMismatch, "certificate does not match the system");

  const double cnorm = sys.c.norm();
  LyapunovAuditReport rep;

  auto piece_excess = [&](int mode, const Eigen::VectorXd& x, const Eigen::VectorXd& w) {
    const Eigen::MatrixXd& P = mode == 1 ? cert.P1 : cert.P2;
    const Eigen::VectorXd& b = mode == 1 ? cert.b1 : cert.b2;
    const double e = mode == 1 ? cert.e1 : cert.e2;
    const Eigen::MatrixXd& A = mode == 1 ? sys.A1 : sys.A2;
    const Eigen::VectorXd& d = mode == 1 ? sys.d1 : sys.d2;
    const Eigen::VectorXd xdot = A * x + sys.B * w + d;
    const double V = x.dot(P * x) + 2.0 * b.dot(x) + e;
    const double expr =
        2.0 * (P * x + b).dot(xdot) + cert.alpha * V - cert.alpha * w.dot(sys.Rw * w);
    const double tol = cfg.tol_audit * (1.0 + std::abs(V));
    return std::make_pair(expr, expr - tol);
  };

  for (std::size_t k = 0; k < traj.steps(); ++k) {
    const Eigen::VectorXd xm = 0.5 * (traj.states[k] + traj.states[k + 1]);
    const Eigen::VectorXd& w = traj.w_values[k];
    const double h = traj.times[k + 1] - traj.times[k];
    const double side = sys.c.dot(xm) + sys.f;
    const double dist = std::abs(side) / cnorm;

    const int active_mode = side < 0.0 ? 1 : 2;
    auto [expr, excess] = piece_excess(active_mode, xm, w);

    // near the hyperplane V is only one-sidedly differentiable: accept the
    // point if either piece satisfies the bound
    const double speed = (active_mode == 1 ? sys.A1 * xm + sys.B * w + sys.d1
                                           : sys.A2 * xm + sys.B * w + sys.d2)
                             .norm();
    if (dist <= h * speed) {
      auto [expr2, excess2] = piece_excess(active_mode == 1 ? 2 : 1, xm, w);
      if (excess2 < excess) {
        expr = expr2;
        excess = excess2;
      }
    }

    ++rep.points;
    if (excess > 0.0) ++rep.violations;
    rep.worst_margin = std::max(rep.worst_margin, expr);
  }
  rep.violation_fraction =
      rep.points == 0 ? 0.0 : static_cast<double>(rep.violations) / static_cast<double>(rep.points);
  return rep;
}

void ContainmentStats::add(const PiecewiseEllipsoid& set, const Trajectory& traj,
                           double tol_mem) {
  for (const auto& x : traj.states) {
    ++total;
    if (contains(set, x, tol_mem)) ++inside;
    worst_excess = std::max(worst_excess, active_value(set, x) - 1.0);
  }
}

ContainmentStats containment_audit(const std::vector<Trajectory>& trajs,
                                   const PiecewiseEllipsoid& set, double tol_mem) {
  ContainmentStats stats;
  for (const auto& traj : trajs) stats.add(set, traj, tol_mem);
  return stats;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const std::size_t rows = traj.states.size();
  for (std::size_t k = 0; k < rows; ++k) {
    os << traj.times[k];
    for (Eigen::Index i = 0; i < traj.states[k].size(); ++i) os << "," << traj.states[k][i];
    const std::size_t wk = k < traj.w_values.size() ? k : traj.w_values.size() - 1;
    if (!traj.w_values.empty())
      for (Eigen::Index i = 0; i < traj.w_values[wk].size(); ++i)
        os << "," << traj.w_values[wk][i];
    const std::size_t mk = k < traj.mode_trace.size() ? k : traj.mode_trace.size() - 1;
    if (!traj.mode_trace.empty()) os << "," << (traj.mode_trace[mk] == Mode::NEG ? 1 : 2);
    os << "\n";
  }
}

void write_trajectory_csv(const std::string& path, const std::vector<Trajectory>& trajs) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out.precision(10);
  bool first = true;
  for (const auto& traj : trajs) {
    if (!first) out << "\n";
    first = false;
    write_trajectory_csv(out, traj);
  }
}

}  // namespace pwa_reach
