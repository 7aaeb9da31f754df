#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "pwa_reach/copositive.hpp"
#include "pwa_reach/ipm.hpp"
#include "pwa_reach/lmi.hpp"
#include "pwa_reach/rng.hpp"

using namespace pwa_reach;

namespace {

SwitchGeometry planar_geometry(double c1 = 1.0, double c2 = 0.0, double f = 0.0) {
  Eigen::VectorXd c(2);
  c << c1, c2;
  return build_geometry(c, f);
}

Eigen::MatrixXd random_psd(int n, Rng& rng, double shift = 0.0) {
  Eigen::MatrixXd A = Eigen::MatrixXd::NullaryExpr(
      n, n, [&](Eigen::Index, Eigen::Index) { return rng.uniform(-1.0, 1.0); });
  return (A * A.transpose() + shift * Eigen::MatrixXd::Identity(n, n)).eval();
}

}  // namespace

TEST_CASE("lifted half-space matrix of the unit form") {
  const SwitchGeometry geom = planar_geometry();
  const QuadraticForm q(Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero(), 0.0);
  const Eigen::MatrixXd M = halfspace_positivity_matrix(q, geom, HalfspaceSide::POS);

  Eigen::MatrixXd expected(4, 4);
  expected << 0, 0, 0, 0,
              0, 1, 0, 0,
              0, 0, 1, -1,
              0, 0, -1, 1;
  CHECK((M - expected).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("lifted matrix of a constant form has a single corner entry") {
  const SwitchGeometry geom = planar_geometry();
  const QuadraticForm q(Eigen::Matrix2d::Zero(), Eigen::Vector2d::Zero(), 1.0);
  const Eigen::MatrixXd M = halfspace_positivity_matrix(q, geom, HalfspaceSide::POS);
  CHECK(M(0, 0) == doctest::Approx(1.0));
  CHECK(M.cwiseAbs().sum() == doctest::Approx(1.0));
}

TEST_CASE("the squared switching function lifts with dead hyperplane columns") {
  Eigen::VectorXd c(3);
  c << 1.0, -0.5, 0.25;
  const double f = 0.7;
  const SwitchGeometry geom = build_geometry(c, f);
  const QuadraticForm q(c * c.transpose(), f * c, f * f);
  const Eigen::MatrixXd M = halfspace_positivity_matrix(q, geom, HalfspaceSide::POS);
  // columns lifted from the hyperplane directions annihilate the form
  const int n = 3;
  CHECK(M.block(0, 2, 2 * n, n - 1).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(M.block(0, n + 1, 2 * n, n - 1).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(M(0, 0) == doctest::Approx(0.0));  // c^T r0 + f = 0 kills the corner
  CHECK(M(1, 1) == doctest::Approx(std::pow(c.squaredNorm(), 2)));
}

TEST_CASE("scalar fragment reduces to plain nonnegativity") {
  SdpProblem p;
  const VarBlock x = p.add_scalar("x");
  MatExpr M(1, 1);
  M(0, 0) = p.scalar_expr(x);
  add_copositive_relaxation(p, M, "t");
  // S >= 0, N >= 0, x = S + N: feasible exactly when x >= 0
  p.maximize(-1.0 * p.scalar_expr(x));
  InteriorPointSolver solver;
  const SolveResult r = solver.solve(p);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(p.value_scalar(x, r.assignment) >= -1e-7);
  CHECK(p.value_scalar(x, r.assignment) <= 1e-6);
}

TEST_CASE("non-copositive target makes the split infeasible") {
  Eigen::MatrixXd M(2, 2);
  M << 1, -2, -2, 1;
  SdpProblem p;
  add_copositive_relaxation(p, MatExpr::constant(M), "t");
  InteriorPointSolver solver;
  const SolveResult r = solver.solve(p);
  CHECK(r.status == SolveStatus::Infeasible);

  const CopositiveCertificate split = recover_copositive_split(M);
  CHECK(split.psd_deficit() == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("PSD targets split with N = 0") {
  Eigen::MatrixXd M(2, 2);
  M << 1, 1, 1, 1;
  SdpProblem p;
  add_copositive_relaxation(p, MatExpr::constant(M), "t");
  InteriorPointSolver solver;
  const SolveResult r = solver.solve(p);
  CHECK(r.status == SolveStatus::Optimal);

  const CopositiveCertificate split = recover_copositive_split(M);
  CHECK(split.psd_deficit() == 0.0);
  CHECK(split.N.norm() == 0.0);
  CHECK(split.split_residual() == 0.0);
}

TEST_CASE("sampled orthant minimum") {
  CHECK(verify_copositive_sampled(Eigen::MatrixXd::Identity(2, 2), 2000) >=
        doctest::Approx(0.5));
  CHECK(verify_copositive_sampled(Eigen::MatrixXd::Zero(3, 3), 100) == 0.0);
  Eigen::MatrixXd M(2, 2);
  M << 1, -2, -2, 1;
  CHECK(verify_copositive_sampled(M, 2000) < 0.0);
}

TEST_CASE("relaxation soundness: any split certifies a nonnegative orthant minimum") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform() * 4.0);
    Eigen::MatrixXd S = random_psd(k, rng);
    Eigen::MatrixXd N = Eigen::MatrixXd::NullaryExpr(
        k, k, [&](Eigen::Index, Eigen::Index) { return rng.uniform(0.0, 1.0); });
    N = 0.5 * (N + N.transpose()).eval();
    const Eigen::MatrixXd M = S + N;
    CHECK(verify_copositive_sampled(M, 2000, 100 + trial) >= -1e-9);
  }
}

TEST_CASE("half-space positivity transfers from the lifted certificate") {
  // random positive definite forms whose lifted matrix is PSD stay
  // nonnegative on the half-space
  Rng rng(11);
  int verified = 0;
  for (int trial = 0; trial < 200 && verified < 25; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 3.0);
    Eigen::VectorXd c =
        Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return rng.uniform(-1.0, 1.0); });
    if (c.cwiseAbs().maxCoeff() < 1e-2) c[0] = 1.0;
    const double f = rng.uniform(-1.0, 1.0);
    const SwitchGeometry geom = build_geometry(c, f);

    Eigen::MatrixXd P = random_psd(n, rng, 0.3);
    Eigen::VectorXd b =
        Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return rng.uniform(-0.2, 0.2); });
    const QuadraticForm q(P, b, rng.uniform(0.0, 1.0));

    const Eigen::MatrixXd M = halfspace_positivity_matrix(q, geom, HalfspaceSide::POS);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < 0.0) continue;  // no certificate, skip
    ++verified;

    for (int s = 0; s < 500; ++s) {
      Eigen::VectorXd x =
          Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return rng.uniform(-4.0, 4.0); });
      if (c.dot(x) + f < 0.0) x -= 2.0 * (c.dot(x) + f) / c.squaredNorm() * c;
      CHECK(q.value(x) >= -1e-9);
    }
  }
  CHECK(verified >= 25);
}

TEST_CASE("hyperplane equalities for the planar axis-aligned normal") {
  const SwitchGeometry geom = planar_geometry();
  SdpProblem p;
  const VarBlock P1 = p.add_symmetric("P1", 2);
  const VarBlock P2 = p.add_symmetric("P2", 2);
  const VarBlock b1 = p.add_vector("b1", 2);
  const VarBlock b2 = p.add_vector("b2", 2);
  const VarBlock e1 = p.add_scalar("e1");
  const VarBlock e2 = p.add_scalar("e2");
  const MatExpr delta = p.lifted_form_expr(P1, b1, p.scalar_expr(e1)) -
                        p.lifted_form_expr(P2, b2, p.scalar_expr(e2));
  const auto eqs = hyperplane_equality_constraints(delta, geom);
  REQUIRE(eqs.size() == 3);  // n(n+1)/2 for n = 2

  // directed probes: each equality pins exactly the expected differences
  Eigen::VectorXd y = Eigen::VectorXd::Zero(p.var_count());
  auto residuals = [&]() {
    Eigen::Vector3d r;
    for (int i = 0; i < 3; ++i) r[i] = eqs[static_cast<std::size_t>(i)].eval(y);
    return r;
  };
  CHECK(residuals().norm() == 0.0);

  Eigen::MatrixXd dP = Eigen::MatrixXd::Zero(2, 2);
  dP(1, 1) = 1.0;  // (Delta P)_22 must be pinned
  p.assign_symmetric(P1, dP, y);
  CHECK(residuals().cwiseAbs().maxCoeff() == doctest::Approx(1.0));

  y.setZero();
  Eigen::VectorXd db(2);
  db << 0.0, 1.0;  // (Delta b)_2 must be pinned
  p.assign_vector(b1, db, y);
  CHECK(residuals().cwiseAbs().maxCoeff() == doctest::Approx(1.0));

  y.setZero();
  p.assign_scalar(e1, 1.0, y);  // Delta e must be pinned
  CHECK(residuals().cwiseAbs().maxCoeff() == doctest::Approx(1.0));

  // differences proportional to the squared switching function vanish on the
  // hyperplane and satisfy every equality
  y.setZero();
  const Eigen::VectorXd c = geom.c;
  p.assign_symmetric(P1, (c * c.transpose()).eval(), y);
  p.assign_vector(b1, (geom.f * c).eval(), y);
  p.assign_scalar(e1, geom.f * geom.f, y);
  CHECK(residuals().cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("forms differing by a switching-function multiple agree on the hyperplane") {
  Rng rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 4.0);
    Eigen::VectorXd c =
        Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return rng.uniform(-1.5, 1.5); });
    if (c.cwiseAbs().maxCoeff() < 1e-2) c[0] = 1.0;
    const double f = rng.uniform(-1.0, 1.0);
    const SwitchGeometry geom = build_geometry(c, f);

    const QuadraticForm q2(random_psd(n, rng), Eigen::VectorXd::Random(n), rng.uniform(-1, 1));
    // q1 = q2 + (c^T x + f)(2 g^T x + eta)
    Eigen::VectorXd g =
        Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return rng.uniform(-1.0, 1.0); });
    const double eta = rng.uniform(-1.0, 1.0);
    const QuadraticForm q1(q2.P + c * g.transpose() + g * c.transpose(),
                           q2.b + 0.5 * (eta * c + 2.0 * f * g), q2.e + f * eta);

    // such pairs satisfy the emitted equalities...
    SdpProblem p;
    const VarBlock P1 = p.add_symmetric("P1", n);
    const VarBlock P2 = p.add_symmetric("P2", n);
    const VarBlock b1 = p.add_vector("b1", n);
    const VarBlock b2 = p.add_vector("b2", n);
    const VarBlock e1 = p.add_scalar("e1");
    const VarBlock e2 = p.add_scalar("e2");
    const auto eqs = hyperplane_equality_constraints(
        p.lifted_form_expr(P1, b1, p.scalar_expr(e1)) -
            p.lifted_form_expr(P2, b2, p.scalar_expr(e2)),
        geom);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(p.var_count());
    p.assign_symmetric(P1, q1.P, y);
    p.assign_symmetric(P2, q2.P, y);
    p.assign_vector(b1, q1.b, y);
    p.assign_vector(b2, q2.b, y);
    p.assign_scalar(e1, q1.e, y);
    p.assign_scalar(e2, q2.e, y);
    for (const auto& eq : eqs) CHECK(std::abs(eq.eval(y)) <= 1e-10);

    // ...and the two values coincide on sampled hyperplane points
    for (int s = 0; s < 200; ++s) {
      Eigen::VectorXd theta = Eigen::VectorXd::NullaryExpr(
          n - 1, [&](Eigen::Index) { return rng.uniform(-5.0, 5.0); });
      const Eigen::VectorXd x = geom.r0 + geom.Rhat * theta;
      CHECK(std::abs(q1.value(x) - q2.value(x)) <= 1e-9 * (1.0 + x.squaredNorm()));
    }
  }
}

TEST_CASE("the assembled fragment agrees with the literal split") {
  // two routes to the same verdict: the max-margin split of the full lifted
  // matrix, and feasibility of the reduced fragment emitted by the assembly
  Rng rng(71);
  InteriorPointSolver solver;
  int agreements = 0;
  for (int trial = 0; trial < 400 && agreements < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 2.0);
    Eigen::VectorXd c =
        Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return rng.uniform(-1.0, 1.0); });
    if (c.cwiseAbs().maxCoeff() < 1e-2) c[0] = 1.0;
    const bool pinned_case = trial % 2 == 0;
    const double f = pinned_case ? 0.0 : rng.uniform(0.2, 1.0);
    const SwitchGeometry geom = build_geometry(c, f);
    const HalfspaceSide side = trial % 4 < 2 ? HalfspaceSide::POS : HalfspaceSide::NEG;

    Eigen::MatrixXd A = Eigen::MatrixXd::NullaryExpr(
        n, n, [&](Eigen::Index, Eigen::Index) { return rng.uniform(-1.0, 1.0); });
    Eigen::MatrixXd P = 0.5 * (A + A.transpose());
    P += (0.4 - rng.uniform(0.0, 0.8)) * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd b =
        Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return rng.uniform(-0.5, 0.5); });
    const double e = pinned_case ? 0.0 : rng.uniform(-0.5, 1.0);
    const QuadraticForm q(P, b, e);

    const Eigen::MatrixXd M = halfspace_positivity_matrix(q, geom, side);
    const CopositiveCertificate split = recover_copositive_split(M, &solver);
    const double deficit = split.psd_deficit();
    if (deficit > 0.0 && deficit < 1e-4) continue;  // too marginal to classify
    const bool literal_feasible = deficit == 0.0;

    SdpProblem frag_problem;
    add_halfspace_fragment(frag_problem, MatExpr::constant(q.lifted()), geom, side, "t");
    const SolveResult r = solver.solve(frag_problem);
    REQUIRE(r.status != SolveStatus::NumericalFailure);
    CHECK(literal_feasible == (r.status == SolveStatus::Optimal));
    ++agreements;
  }
  CHECK(agreements >= 60);
}

TEST_CASE("symbolic and numeric half-space liftings coincide") {
  Rng rng(72);
  const SwitchGeometry geom = planar_geometry(0.8, -0.6, 0.4);
  SdpProblem p;
  const VarBlock P = p.add_symmetric("P", 2);
  const VarBlock b = p.add_vector("b", 2);
  const VarBlock e = p.add_scalar("e");
  const MatExpr sym =
      halfspace_positivity_expr(p.lifted_form_expr(P, b, p.scalar_expr(e)), geom,
                                HalfspaceSide::NEG);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd y = Eigen::VectorXd::NullaryExpr(
        p.var_count(), [&](Eigen::Index) { return rng.uniform(-2.0, 2.0); });
    const QuadraticForm q(p.value_symmetric(P, y), p.value_vector(b, y),
                          p.value_scalar(e, y));
    const Eigen::MatrixXd direct = halfspace_positivity_matrix(q, geom, HalfspaceSide::NEG);
    CHECK((sym.eval(y) - direct).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("scalar-state geometry reduces the lifted matrix to 2 x 2") {
  Eigen::VectorXd c(1);
  c << 1.0;
  const SwitchGeometry geom = build_geometry(c, 0.0);
  Eigen::MatrixXd P(1, 1);
  P << 1.0;
  const QuadraticForm q(P, Eigen::VectorXd::Zero(1), 0.0);
  const Eigen::MatrixXd M = halfspace_positivity_matrix(q, geom, HalfspaceSide::POS);
  REQUIRE(M.rows() == 2);
  CHECK(M(0, 0) == doctest::Approx(0.0));
  CHECK(M(1, 1) == doctest::Approx(1.0));
}
