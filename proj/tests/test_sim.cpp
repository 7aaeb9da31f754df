#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "pwa_reach/sim.hpp"
#include "pwa_reach/solve.hpp"

using namespace pwa_reach;

namespace {

BimodalSystem scalar_system() {
  BimodalSystem sys;
  sys.A1 = Eigen::MatrixXd::Constant(1, 1, -1.0);
  sys.A2 = sys.A1;
  sys.B = Eigen::MatrixXd::Constant(1, 1, 1.0);
  sys.d1 = Eigen::VectorXd::Zero(1);
  sys.d2 = Eigen::VectorXd::Zero(1);
  sys.c = Eigen::VectorXd::Constant(1, 1.0);
  sys.f = 0.0;
  sys.Rw = Eigen::MatrixXd::Constant(1, 1, 1.0);
  return sys;
}

BimodalSystem example1() {
  return BimodalSystem::load(std::string(PWA_DATA_DIR) + "/example1.json");
}

Certificate scalar_certificate() {
  Certificate cert;
  cert.kind = CertificateKind::Piecewise;
  cert.alpha = 1.0;
  cert.P1 = Eigen::MatrixXd::Constant(1, 1, 1.0);
  cert.P2 = cert.P1;
  cert.b1 = Eigen::VectorXd::Zero(1);
  cert.b2 = cert.b1;
  return cert;
}

}  // namespace

TEST_CASE("the origin is an equilibrium without disturbance") {
  const auto policy = DisturbancePolicy::constant(Eigen::VectorXd::Zero(1));
  const Trajectory traj = integrate(example1(), Eigen::VectorXd::Zero(2), policy, 1.0, 1e-2);
  for (const auto& x : traj.states) CHECK(x.norm() == 0.0);
}

TEST_CASE("scalar step response matches the closed form") {
  const auto policy = DisturbancePolicy::constant(Eigen::VectorXd::Constant(1, 1.0));
  const Trajectory traj = integrate(scalar_system(), Eigen::VectorXd::Zero(1), policy, 5.0, 1e-3);
  double sup = 0.0;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const double expected = 1.0 - std::exp(-traj.times[k]);
    CHECK(std::abs(traj.states[k][0] - expected) <= 1e-9);
    sup = std::max(sup, traj.states[k][0]);
  }
  CHECK(sup <= 1.0);
  CHECK(sup >= 0.99);
}

TEST_CASE("integrator converges at fourth order") {
  const auto policy = DisturbancePolicy::constant(Eigen::VectorXd::Constant(1, 1.0));
  auto error_at = [&](double dt) {
    const Trajectory traj = integrate(scalar_system(), Eigen::VectorXd::Zero(1), policy, 5.0, dt);
    return std::abs(traj.states.back()[0] - (1.0 - std::exp(-5.0)));
  };
  const double ratio = error_at(0.1) / error_at(0.05);
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("disturbance samples are admissible and scale with Rw") {
  Rng rng(5);
  Eigen::MatrixXd Rw1 = Eigen::MatrixXd::Constant(1, 1, 1.0);
  Eigen::MatrixXd Rw4 = Eigen::MatrixXd::Constant(1, 1, 4.0);
  const auto ball = DisturbancePolicy::piecewise_constant_random(1);
  const auto extremal = DisturbancePolicy::extremal_random_sign(1);

  double max_abs = 0.0;
  for (int s = 0; s < 2000; ++s) {
    const Eigen::VectorXd w = sample_disturbance(ball, Rw1, rng);
    CHECK(w.dot(Rw1 * w) <= 1.0 + 1e-12);
    max_abs = std::max(max_abs, std::abs(w[0]));
  }
  CHECK(max_abs > 0.9);  // stretches over [-1, 1]

  for (int s = 0; s < 500; ++s) {
    const Eigen::VectorXd w = sample_disturbance(ball, Rw4, rng);
    CHECK(std::abs(w[0]) <= 0.5 + 1e-12);
  }
  for (int s = 0; s < 500; ++s) {
    const Eigen::VectorXd w = sample_disturbance(extremal, Rw1, rng);
    CHECK(std::abs(std::abs(w[0]) - 1.0) <= 1e-12);
  }

  // multivariate admissibility
  Eigen::MatrixXd Rw2(2, 2);
  Rw2 << 2.0, 0.3, 0.3, 1.0;
  for (int s = 0; s < 500; ++s) {
    const Eigen::VectorXd w = sample_disturbance(ball, Rw2, rng);
    CHECK(w.dot(Rw2 * w) <= 1.0 + 1e-12);
  }
}

TEST_CASE("recorded modes agree with the switching function at step starts") {
  const auto policy = DisturbancePolicy::piecewise_constant_random(77, 1e-2);
  const BimodalSystem sys = example1();
  const Trajectory traj = integrate(sys, Eigen::VectorXd::Zero(2), policy, 5.0, 1e-3);
  for (std::size_t k = 0; k < traj.steps(); ++k) {
    const double s = sys.c.dot(traj.states[k]) + sys.f;
    if (std::abs(s) > 1e-12)
      CHECK((traj.mode_trace[k] == Mode::NEG) == (s < 0.0));
  }
}

TEST_CASE("identical seeds reproduce trajectories bit for bit") {
  const auto policy = DisturbancePolicy::piecewise_constant_random(123, 1e-2);
  const Trajectory a = integrate(example1(), Eigen::VectorXd::Zero(2), policy, 2.0, 1e-3);
  const Trajectory b = integrate(example1(), Eigen::VectorXd::Zero(2), policy, 2.0, 1e-3);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t k = 0; k < a.states.size(); ++k)
    CHECK((a.states[k] - b.states[k]).norm() == 0.0);

  const Trajectory c = integrate(example1(), Eigen::VectorXd::Zero(2),
                                 policy.with_seed(124), 2.0, 1e-3);
  CHECK((a.states.back() - c.states.back()).norm() > 0.0);
}

TEST_CASE("divergent dynamics raise a non-finite error") {
  BimodalSystem sys = scalar_system();
  sys.A1(0, 0) = 80.0;
  sys.A2 = sys.A1;
  const auto policy = DisturbancePolicy::constant(Eigen::VectorXd::Constant(1, 1.0));
  CHECK_THROWS_AS(integrate(sys, Eigen::VectorXd::Constant(1, 1.0), policy, 20.0, 1e-2),
                  Error);
}

TEST_CASE("decrease audit accepts the exact scalar certificate") {
  const Certificate cert = scalar_certificate();
  const auto policy = DisturbancePolicy::constant(Eigen::VectorXd::Constant(1, 1.0));
  const Trajectory traj = integrate(scalar_system(), Eigen::VectorXd::Zero(1), policy, 5.0, 1e-3);
  const LyapunovAuditReport rep = lyapunov_audit(traj, cert, scalar_system());
  CHECK(rep.violation_fraction == 0.0);
  CHECK(rep.worst_margin <= 0.0);
}

TEST_CASE("decrease audit flags an inflated certificate") {
  // scaling P1 up makes Vdot + alpha V outrun alpha w^T Rw w along driven
  // trajectories; the audit must notice
  Certificate corrupted = scalar_certificate();
  corrupted.P1 *= 10.0;
  corrupted.P2 *= 10.0;
  const auto policy = DisturbancePolicy::piecewise_constant_random(5, 1e-2);
  const Trajectory traj = integrate(scalar_system(), Eigen::VectorXd::Zero(1), policy, 10.0, 1e-3);
  const LyapunovAuditReport rep = lyapunov_audit(traj, corrupted, scalar_system());
  CHECK(rep.violation_fraction > 0.0);
  CHECK(rep.worst_margin > 0.0);
}

TEST_CASE("solved planar certificates pass the decrease audit along trajectories") {
  const BimodalSystem sys = example1();
  const FixedAlphaOutcome fo = solve_at_alpha(sys, CertificateKind::Piecewise, 0.4);
  REQUIRE(fo.result.status == SolveStatus::Optimal);
  for (int i = 0; i < 20; ++i) {
    const auto policy = DisturbancePolicy::piecewise_constant_random(900 + i, 1e-2);
    const Trajectory traj = integrate(sys, Eigen::VectorXd::Zero(2), policy, 10.0, 1e-3);
    const LyapunovAuditReport rep = lyapunov_audit(traj, *fo.certificate, sys);
    CHECK(rep.violation_fraction == 0.0);
  }
}

TEST_CASE("containment statistics and falsification control") {
  const BimodalSystem sys = example1();
  const FixedAlphaOutcome fo = solve_at_alpha(sys, CertificateKind::Piecewise, 0.4);
  REQUIRE(fo.result.status == SolveStatus::Optimal);
  const PiecewiseEllipsoid set = estimate_set(*fo.certificate, sys);

  // boundary disturbances with long dwell push the states deep enough into
  // the estimate that a fourfold shrink must lose them
  std::vector<Trajectory> trajs;
  for (int i = 0; i < 10; ++i)
    trajs.push_back(integrate(sys, Eigen::VectorXd::Zero(2),
                              DisturbancePolicy::extremal_random_sign(50 + i, 0.5),
                              10.0, 1e-3));
  const ContainmentStats stats = containment_audit(trajs, set);
  CHECK(stats.inside_fraction() == 1.0);
  CHECK(stats.worst_excess <= 0.0);

  // shrunken set: scale both pieces up fourfold
  PiecewiseEllipsoid shrunken = set;
  shrunken.neg_piece.P *= 4.0;
  shrunken.neg_piece.b *= 4.0;
  shrunken.neg_piece.e *= 4.0;
  shrunken.pos_piece.P *= 4.0;
  shrunken.pos_piece.b *= 4.0;
  shrunken.pos_piece.e *= 4.0;
  const ContainmentStats inner = containment_audit(trajs, shrunken);
  CHECK(inner.inside_fraction() < 1.0);
  CHECK(inner.worst_excess > 0.0);
}

TEST_CASE("empty trajectory lists are vacuously contained") {
  const PiecewiseEllipsoid set = [] {
    PiecewiseEllipsoid s;
    s.neg_piece = QuadraticForm(Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero(), 0.0);
    s.pos_piece = s.neg_piece;
    s.c = Eigen::Vector2d(1, 0);
    s.f = 0.0;
    return s;
  }();
  const ContainmentStats stats = containment_audit({}, set);
  CHECK(stats.inside_fraction() == 1.0);
  CHECK(stats.worst_excess == -std::numeric_limits<double>::infinity());
}

TEST_CASE("trajectory CSV rows carry time, state, disturbance and mode") {
  const auto policy = DisturbancePolicy::piecewise_constant_random(3, 1e-2);
  const Trajectory traj = integrate(example1(), Eigen::VectorXd::Zero(2), policy, 0.01, 1e-3);
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  std::istringstream is(os.str());
  std::string line;
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 4);  // t, x1, x2, w, mode
  }
  CHECK(rows == static_cast<int>(traj.states.size()));
}
