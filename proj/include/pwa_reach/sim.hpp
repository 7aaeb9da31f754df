#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pwa_reach/certificate.hpp"
#include "pwa_reach/config.hpp"
#include "pwa_reach/model.hpp"
#include "pwa_reach/reachset.hpp"
#include "pwa_reach/rng.hpp"

namespace pwa_reach {

/// Disturbance generation over the admissible ellipsoid { w^T Rw w <= 1 }.
/// PiecewiseConstantRandom holds ball-uniform samples over hold_dt windows;
/// ExtremalRandomSign holds boundary samples (random direction, unit shape
/// norm); Constant replays a fixed admissible w.
struct DisturbancePolicy {
  enum class Kind { PiecewiseConstantRandom, Constant, ExtremalRandomSign };

  Kind kind = Kind::PiecewiseConstantRandom;
  std::uint64_t seed = 1;
  double hold_dt = 1e-2;
  Eigen::VectorXd w_const;

  static DisturbancePolicy piecewise_constant_random(std::uint64_t seed, double hold_dt = 1e-2) {
    return {Kind::PiecewiseConstantRandom, seed, hold_dt, {}};
  }
  static DisturbancePolicy constant(const Eigen::VectorXd& w) {
    return {Kind::Constant, 0, std::numeric_limits<double>::infinity(), w};
  }
  static DisturbancePolicy extremal_random_sign(std::uint64_t seed, double hold_dt = 1e-2) {
    return {Kind::ExtremalRandomSign, seed, hold_dt, {}};
  }

  DisturbancePolicy with_seed(std::uint64_t s) const {
    DisturbancePolicy p = *this;
    p.seed = s;
    return p;
  }
};

/// One draw from the policy's sample distribution (admissible by
/// construction: w = Rw^{-1/2} u with u in, or on, the unit ball).
Eigen::VectorXd sample_disturbance(const DisturbancePolicy& policy,
                                   const Eigen::MatrixXd& Rw, Rng& rng);

enum class Mode { NEG, POS };

struct Trajectory {
  std::vector<double> times;                // N+1 sample instants
  std::vector<Eigen::VectorXd> states;      // N+1 states
  std::vector<Eigen::VectorXd> w_values;    // N per-step disturbances
  std::vector<Mode> mode_trace;             // N modes at step starts

  std::size_t steps() const { return w_values.size(); }
};

/// Fixed-step classical Runge-Kutta integration of the continuous
/// right-hand side; the active mode is chosen inside each stage by the sign
/// of c^T x + f (continuity across the hyperplane keeps the field smooth
/// enough for full order). The disturbance is held constant within each
/// hold window. Throws NonFiniteState if the state leaves the finite range.
Trajectory integrate(const BimodalSystem& sys, const Eigen::VectorXd& x0,
                     const DisturbancePolicy& policy, double t_end, double dt);

struct LyapunovAuditReport {
  double violation_fraction = 0.0;
  double worst_margin = -std::numeric_limits<double>::infinity();
  long points = 0;
  long violations = 0;
};

/// Check the decrease inequality Vdot + alpha V - alpha w^T Rw w <= tol
/// along the trajectory, with Vdot evaluated analytically (active-piece
/// gradient dotted with the known right-hand side at step midpoints).
/// Midpoints within dt * |xdot| of the hyperplane are tested against both
/// pieces and pass if either satisfies the bound.
LyapunovAuditReport lyapunov_audit(const Trajectory& traj, const Certificate& cert,
                                   const BimodalSystem& sys, const Config& cfg = {});

/// Streaming containment statistics over trajectory sample states.
struct ContainmentStats {
  long total = 0;
  long inside = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();

  void add(const PiecewiseEllipsoid& set, const Trajectory& traj, double tol_mem = 1e-9);
  double inside_fraction() const {
    return total == 0 ? 1.0 : static_cast<double>(inside) / static_cast<double>(total);
  }
};

ContainmentStats containment_audit(const std::vector<Trajectory>& trajs,
                                   const PiecewiseEllipsoid& set, double tol_mem = 1e-9);

/// CSV export (t, x1..xn, w1..wm, mode); multiple trajectories are separated
/// by a blank line.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_trajectory_csv(const std::string& path, const std::vector<Trajectory>& trajs);

}  // namespace pwa_reach
