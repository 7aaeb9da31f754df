#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "pwa_reach/ipm.hpp"
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

BimodalSystem example2() {
  return BimodalSystem::load(std::string(PWA_DATA_DIR) + "/example2.json");
}

}  // namespace

TEST_CASE("alpha ceiling is twice the smallest stability margin") {
  CHECK(alpha_ceiling(scalar_system()) == doctest::Approx(2.0));
  CHECK(alpha_ceiling(example1()) == doctest::Approx(0.845).epsilon(1e-3));
}

TEST_CASE("the scalar search lands on the analytic optimum") {
  const AlphaSearchResult res = alpha_search(scalar_system(), CertificateKind::Common);
  CHECK(res.best_alpha >= 0.8);
  CHECK(res.best_alpha <= 1.2);
  const double p = res.best_certificate.P1(0, 0);
  CHECK(p >= 0.95);
  CHECK(p <= 1.0 + 1e-6);
  CHECK(res.trace_curve.size() >= 24);
}

TEST_CASE("a single-point grid reproduces a fixed-alpha solve") {
  const AlphaSearchResult res =
      alpha_search(example1(), CertificateKind::Piecewise, {}, std::vector<double>{0.4});
  CHECK(res.best_alpha == 0.4);
  CHECK(res.trace_curve.size() == 1);
  CHECK(res.best_certificate.audit.within(1e-5));

  const AlphaSearchResult common =
      alpha_search(example1(), CertificateKind::Common, {}, std::vector<double>{0.4});
  CHECK(common.best_certificate.objective > 0.0);
  CHECK(res.best_certificate.objective > common.best_certificate.objective);
}

TEST_CASE("non-Hurwitz systems are rejected before any solve") {
  BimodalSystem sys = scalar_system();
  sys.A1(0, 0) = 0.1;
  CHECK_THROWS_AS(alpha_search(sys, CertificateKind::Common), Error);
}

TEST_CASE("discontinuous systems are rejected before any solve") {
  BimodalSystem sys = example1();
  sys.A2 = sys.A1 + Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(alpha_search(sys, CertificateKind::Piecewise), Error);
}

TEST_CASE("rates beyond the ceiling are infeasible") {
  const BimodalSystem sys = example1();
  const double above = 1.1 * alpha_ceiling(sys);
  const FixedAlphaOutcome fo = solve_at_alpha(sys, CertificateKind::Piecewise, above);
  CHECK(fo.result.status == SolveStatus::Infeasible);
  CHECK_FALSE(fo.certificate.has_value());

  CHECK_THROWS_AS(
      alpha_search(sys, CertificateKind::Piecewise, {}, std::vector<double>{above, 1.2 * above}),
      AllInfeasibleError);
}

TEST_CASE("the infeasibility error carries the trace curve") {
  const BimodalSystem sys = example1();
  const double above = 1.1 * alpha_ceiling(sys);
  try {
    alpha_search(sys, CertificateKind::Piecewise, {}, std::vector<double>{above});
    FAIL("expected AllInfeasibleError");
  } catch (const AllInfeasibleError& err) {
    REQUIRE(err.trace_curve.size() == 1);
    CHECK(err.trace_curve[0].status == SolveStatus::Infeasible);
    CHECK(err.trace_curve[0].alpha == above);
  }
}

TEST_CASE("searches with identical grids are deterministic") {
  const std::vector<double> grid{0.2, 0.4, 0.6};
  const AlphaSearchResult a = alpha_search(example1(), CertificateKind::Piecewise, {}, grid);
  const AlphaSearchResult b = alpha_search(example1(), CertificateKind::Piecewise, {}, grid);
  REQUIRE(a.trace_curve.size() == b.trace_curve.size());
  for (std::size_t i = 0; i < a.trace_curve.size(); ++i) {
    CHECK(a.trace_curve[i].status == b.trace_curve[i].status);
    CHECK(a.trace_curve[i].objective == b.trace_curve[i].objective);
  }
  CHECK(a.best_alpha == b.best_alpha);
  CHECK((a.best_certificate.P1 - b.best_certificate.P1).norm() == 0.0);
}

TEST_CASE("extracted certificates embed a passing audit") {
  const FixedAlphaOutcome fo = solve_at_alpha(example1(), CertificateKind::Piecewise, 0.4);
  REQUIRE(fo.result.status == SolveStatus::Optimal);
  REQUIRE(fo.certificate.has_value());
  const Certificate& cert = *fo.certificate;
  CHECK(cert.audit.within(1e-5));
  CHECK(cert.gamma1 >= 0.0);
  CHECK(cert.gamma2 >= 0.0);
  CHECK(cert.sigma1 >= 0.0);
  CHECK(cert.sigma2 >= 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cert.P1, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() >= 1e-6 - 1e-7);
  CHECK((cert.P1 - cert.P1.transpose()).norm() == 0.0);
}

TEST_CASE("audit failure raises instead of returning a bad certificate") {
  const BimodalSystem sys = example1();
  const SwitchGeometry geom = build_geometry(sys);
  const PiecewiseAssembly ap = assemble_piecewise_sdp(sys, geom, etilde_mode(geom), 0.4);
  InteriorPointSolver solver;
  SolveResult r = solver.solve(ap.sdp);
  REQUIRE(r.status == SolveStatus::Optimal);
  r.assignment[0] += 10.0;  // corrupt P1(0,0)
  CHECK_THROWS_AS(extract_certificate(sys, ap, r), Error);
}

TEST_CASE("printed reference certificates dominate the printed common matrix") {
  const Certificate pw =
      Certificate::load(std::string(PWA_DATA_DIR) + "/example2_printed_piecewise.json");
  const Certificate common =
      Certificate::load(std::string(PWA_DATA_DIR) + "/example2_printed_common.json");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> d1(pw.P1 - common.P1, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> d2(pw.P2 - common.P1, Eigen::EigenvaluesOnly);
  CHECK(d1.eigenvalues().minCoeff() > 0.0);
  CHECK(d2.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("the four-state benchmark solves at the published rate") {
  const BimodalSystem sys = example2();
  const FixedAlphaOutcome common = solve_at_alpha(sys, CertificateKind::Common, 0.1);
  REQUIRE(common.result.status == SolveStatus::Optimal);
  // the solved common matrix reproduces the published one to print precision
  const Certificate printed =
      Certificate::load(std::string(PWA_DATA_DIR) + "/example2_printed_common.json");
  CHECK((common.certificate->P1 - printed.P1).cwiseAbs().maxCoeff() <= 5e-4);

  const FixedAlphaOutcome pw = solve_at_alpha(sys, CertificateKind::Piecewise, 0.1);
  REQUIRE(pw.result.status == SolveStatus::Optimal);
  CHECK(pw.result.objective >= 2.0 * common.result.objective - 1e-6);
}
