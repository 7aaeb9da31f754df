#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "pwa_reach/ipm.hpp"
#include "pwa_reach/lmi.hpp"
#include "pwa_reach/rng.hpp"
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

PiecewiseAssembly assemble(const BimodalSystem& sys, double alpha, const Config& cfg = {}) {
  const SwitchGeometry geom = build_geometry(sys);
  return assemble_piecewise_sdp(sys, geom, etilde_mode(geom), alpha, cfg);
}

Eigen::VectorXd random_assignment(const SdpProblem& p, Rng& rng) {
  return Eigen::VectorXd::NullaryExpr(p.var_count(),
                                      [&](Eigen::Index) { return rng.uniform(-2.0, 2.0); });
}

}  // namespace

TEST_CASE("scalar trace maximization matches the closed form p = alpha(2 - alpha)") {
  const BimodalSystem sys = scalar_system();
  InteriorPointSolver solver;
  for (double alpha : {0.5, 1.0, 1.5}) {
    const double expected = alpha * (2.0 - alpha);

    const CommonAssembly common = assemble_common_sdp(sys, alpha);
    const SolveResult rc = solver.solve(common.sdp);
    REQUIRE(rc.status == SolveStatus::Optimal);
    CHECK(rc.objective == doctest::Approx(expected).epsilon(1e-5));

    const PiecewiseAssembly pw = assemble(sys, alpha);
    const SolveResult rp = solver.solve(pw.sdp);
    REQUIRE(rp.status == SolveStatus::Optimal);
    CHECK(rp.objective == doctest::Approx(2.0 * expected).epsilon(1e-5));
  }
}

TEST_CASE("alpha must be positive and modes Hurwitz") {
  const BimodalSystem sys = scalar_system();
  CHECK_THROWS_AS(assemble_common_sdp(sys, 0.0), Error);
  CHECK_THROWS_AS(assemble(sys, -1.0), Error);

  BimodalSystem unstable = sys;
  unstable.A1(0, 0) = 0.5;
  unstable.A2 = unstable.A1;
  CHECK_THROWS_AS(assemble(unstable, 0.5), Error);

  BimodalSystem broken = example1();
  broken.A2 = broken.A1 + Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(assemble(broken, 0.4), Error);
}

TEST_CASE("every emitted constraint matrix is structurally symmetric") {
  Rng rng(3);
  const PiecewiseAssembly ap = assemble(example1(), 0.4);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd y = random_assignment(ap.sdp, rng);
    for (const auto& c : ap.sdp.psd_constraints()) {
      const Eigen::MatrixXd M = c.expr.eval(y);
      CHECK((M - M.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("expression blocks agree with the dense constructors") {
  // the assembled decrease blocks, instantiated at random variable values,
  // must match a direct dense construction entry by entry
  Rng rng(17);

  // common drift with f = 0 keeps both modes on the full (n+m+1) block
  BimodalSystem sys = example1();
  sys.d1 = Eigen::Vector2d(0.3, -0.2);
  sys.d2 = sys.d1;
  const double alpha = 0.3;
  const SwitchGeometry geom = build_geometry(sys);
  const PiecewiseAssembly ap = assemble_piecewise_sdp(sys, geom, etilde_mode(geom), alpha);

  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd y = random_assignment(ap.sdp, rng);
    const Eigen::MatrixXd M1 = mode_block_dense(
        sys, 1, ap.sdp.value_symmetric(ap.P1, y), ap.sdp.value_vector(ap.b1, y), 0.0, alpha,
        ap.sdp.value_scalar(ap.gamma1, y), ap.sdp.value_scalar(ap.sigma1, y));
    const Eigen::MatrixXd M2 = mode_block_dense(
        sys, 2, ap.sdp.value_symmetric(ap.P2, y), ap.sdp.value_vector(ap.b2, y), 0.0, alpha,
        ap.sdp.value_scalar(ap.gamma2, y), ap.sdp.value_scalar(ap.sigma2, y));
    int matched = 0;
    for (const auto& c : ap.sdp.psd_constraints()) {
      if (c.label == "mode1_decrease") {
        CHECK((c.expr.eval(y) + M1).cwiseAbs().maxCoeff() <= 1e-12);
        ++matched;
      }
      if (c.label == "mode2_decrease") {
        CHECK((c.expr.eval(y) + M2).cwiseAbs().maxCoeff() <= 1e-12);
        ++matched;
      }
    }
    CHECK(matched == 2);
  }

  // with an offset hyperplane the origin-exterior mode keeps the full block,
  // now with a free constant term
  BimodalSystem off = example1();
  off.f = 0.25;
  const SwitchGeometry geom_off = build_geometry(off);
  const PiecewiseAssembly ap_off =
      assemble_piecewise_sdp(off, geom_off, etilde_mode(geom_off), alpha);
  REQUIRE(ap_off.e1.has_value());  // origin sits in the positive region

  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd y = random_assignment(ap_off.sdp, rng);
    const Eigen::MatrixXd M1 = mode_block_dense(
        off, 1, ap_off.sdp.value_symmetric(ap_off.P1, y), ap_off.sdp.value_vector(ap_off.b1, y),
        ap_off.sdp.value_scalar(*ap_off.e1, y), alpha,
        ap_off.sdp.value_scalar(ap_off.gamma1, y), ap_off.sdp.value_scalar(ap_off.sigma1, y));
    for (const auto& c : ap_off.sdp.psd_constraints())
      if (c.label == "mode1_decrease")
        CHECK((c.expr.eval(y) + M1).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("shrinking the disturbance set can only improve the objective") {
  InteriorPointSolver solver;
  BimodalSystem sys = example1();
  const SolveResult base = solver.solve(assemble(sys, 0.4).sdp);
  REQUIRE(base.status == SolveStatus::Optimal);

  sys.Rw = Eigen::MatrixXd::Constant(1, 1, 4.0);  // |w| <= 1/2
  const SolveResult tighter = solver.solve(assemble(sys, 0.4).sdp);
  REQUIRE(tighter.status == SolveStatus::Optimal);
  CHECK(tighter.objective >= base.objective - 1e-9);
}

TEST_CASE("a feasible common matrix embeds into the piecewise family") {
  InteriorPointSolver solver;
  const BimodalSystem sys = example1();
  const CommonAssembly common = assemble_common_sdp(sys, 0.4);
  const SolveResult rc = solver.solve(common.sdp);
  REQUIRE(rc.status == SolveStatus::Optimal);

  Certificate embedded;
  embedded.kind = CertificateKind::Piecewise;
  embedded.alpha = 0.4;
  embedded.P1 = common.sdp.value_symmetric(common.P, rc.assignment);
  embedded.P2 = embedded.P1;
  embedded.b1 = Eigen::VectorXd::Zero(2);
  embedded.b2 = embedded.b1;
  const ResidualReport rep = certificate_residuals(sys, embedded);
  CHECK(rep.worst() <= 1e-6);

  const SolveResult rp = solver.solve(assemble(sys, 0.4).sdp);
  REQUIRE(rp.status == SolveStatus::Optimal);
  CHECK(rp.objective >= 2.0 * rc.objective - 1e-6);
}

TEST_CASE("residuals of the exact scalar certificate are at machine precision") {
  const BimodalSystem sys = scalar_system();
  Certificate cert;
  cert.kind = CertificateKind::Piecewise;
  cert.alpha = 1.0;
  cert.P1 = Eigen::MatrixXd::Constant(1, 1, 1.0);
  cert.P2 = cert.P1;
  cert.b1 = Eigen::VectorXd::Zero(1);
  cert.b2 = cert.b1;
  const ResidualReport rep = certificate_residuals(sys, cert);
  CHECK(rep.worst() <= 1e-12);

  Certificate common = cert;
  common.kind = CertificateKind::Common;
  const ResidualReport repc = certificate_residuals(sys, common);
  CHECK(repc.worst() <= 1e-12);
}

TEST_CASE("the zero certificate misses the definiteness margin by eps_pd") {
  Config cfg;
  const BimodalSystem sys = scalar_system();
  Certificate cert;
  cert.kind = CertificateKind::Common;
  cert.alpha = 1.0;
  cert.P1 = Eigen::MatrixXd::Zero(1, 1);
  cert.P2 = cert.P1;
  cert.b1 = Eigen::VectorXd::Zero(1);
  cert.b2 = cert.b1;
  const ResidualReport rep = certificate_residuals(sys, cert, cfg);
  double margin_deficit = 0.0;
  for (const auto& e : rep.entries)
    if (e.name == "P_margin") margin_deficit = e.violation;
  CHECK(margin_deficit == doctest::Approx(cfg.eps_pd));
}

TEST_CASE("affine terms trigger the common-baseline warning") {
  BimodalSystem sys = example1();
  CHECK(assemble_common_sdp(sys, 0.4).sdp.warnings.empty());
  // shift the switching offset, keeping the system continuous
  const Eigen::VectorXd h = (sys.A1 - sys.A2) * sys.c / sys.c.squaredNorm();
  sys.f = 0.2;
  sys.d1 = h * sys.f;
  CHECK_FALSE(assemble_common_sdp(sys, 0.4).sdp.warnings.empty());
}

TEST_CASE("problem dump is self-describing JSON") {
  const PiecewiseAssembly ap = assemble(example1(), 0.4);
  const json j = ap.sdp.to_json();
  CHECK(j.contains("variables"));
  CHECK(j.contains("psd_constraints"));
  CHECK(j.contains("objective"));
  CHECK(j.at("variables").size() >= 8);
  // round trip through text to make sure it serializes cleanly
  const json back = json::parse(j.dump());
  CHECK(back.at("psd_constraints").size() == j.at("psd_constraints").size());
}

TEST_CASE("multiplier recovery reproduces known-good margins") {
  const BimodalSystem sys = scalar_system();
  Certificate cert;
  cert.kind = CertificateKind::Piecewise;
  cert.alpha = 1.0;
  cert.P1 = Eigen::MatrixXd::Constant(1, 1, 1.0);
  cert.P2 = cert.P1;
  cert.b1 = Eigen::VectorXd::Zero(1);
  cert.b2 = cert.b1;
  const RecoveredMultipliers rm = recover_multipliers(sys, cert);
  // the exact scalar optimum needs no S-procedure help
  CHECK(rm.gamma1 <= 1e-6);
  CHECK(rm.sigma1 <= 1e-6);
  const Eigen::MatrixXd M1 =
      mode_block_dense(sys, 1, cert.P1, cert.b1, 0.0, 1.0, rm.gamma1, rm.sigma1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M1, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().maxCoeff() <= 1e-6);
}
