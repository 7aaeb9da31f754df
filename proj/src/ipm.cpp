#include "pwa_reach/ipm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <cstdio>

namespace pwa_reach {
namespace {

// Affine block G(u) = g0 + sum_l u_l * g[l] over the reduced coordinates.
struct Block {
  std::string label;
  int size = 0;
  Eigen::MatrixXd g0;
  std::vector<Eigen::MatrixXd> g;

  Eigen::MatrixXd at(const Eigen::VectorXd& u) const {
    Eigen::MatrixXd M = g0;
    for (int l = 0; l < u.size(); ++l)
      if (u[l] != 0.0) M.noalias() += u[l] * g[l];
    return M;
  }
};

struct Flat {
  std::vector<Block> blocks;
  Eigen::VectorXd c;  // maximize c'u + c0
  double c0 = 0.0;
  Eigen::MatrixXd kernel;      // nvar x nfree; empty when no equalities
  Eigen::VectorXd particular;  // nvar
  bool eq_consistent = true;
  double eq_residual = 0.0;
  int nvar = 0;
  int nfree = 0;
  // worst violation among constraints that became constant after the
  // equality elimination (they are dropped from the barrier)
  double constant_deficit = 0.0;
  std::string constant_violator;

  Eigen::VectorXd lift(const Eigen::VectorXd& u) const {
    if (kernel.size() == 0) return u;
    return particular + kernel * u;
  }
};

double min_eig(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Flat flatten(const SdpProblem& p) {
  Flat f;
  f.nvar = p.var_count();

  const auto& eqs = p.eq_constraints();
  if (eqs.empty()) {
    f.particular = Eigen::VectorXd::Zero(f.nvar);
    f.nfree = f.nvar;
  } else {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(eqs.size()), f.nvar);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(eqs.size()));
    for (std::size_t r = 0; r < eqs.size(); ++r) {
      for (const auto& [var, coeff] : eqs[r].expr.compressed()) A(static_cast<Eigen::Index>(r), var) = coeff;
      rhs[static_cast<Eigen::Index>(r)] = -eqs[r].expr.constant();
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    f.particular = cod.solve(rhs);
    f.eq_residual = (A * f.particular - rhs).norm();
    f.eq_consistent = f.eq_residual <= 1e-8 * (1.0 + rhs.norm());

    Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double thresh =
        sv.size() == 0 ? 0.0
                       : sv[0] * 1e-12 * static_cast<double>(std::max(A.rows(), A.cols()));
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv[i] > thresh) ++rank;
    f.nfree = f.nvar - rank;
    f.kernel = svd.matrixV().rightCols(f.nfree);
  }

  // objective over the reduced coordinates
  f.c = Eigen::VectorXd::Zero(f.nfree);
  f.c0 = p.objective().constant();
  for (const auto& [var, coeff] : p.objective().compressed()) {
    f.c0 += coeff * f.particular[var];
    if (f.kernel.size() == 0)
      f.c[var] += coeff;
    else
      f.c += coeff * f.kernel.row(var).transpose();
  }

  auto add_block = [&](const std::string& label, int size) -> Block& {
    Block b;
    b.label = label;
    b.size = size;
    b.g0 = Eigen::MatrixXd::Zero(size, size);
    b.g.assign(static_cast<std::size_t>(f.nfree), Eigen::MatrixXd::Zero(size, size));
    f.blocks.push_back(std::move(b));
    return f.blocks.back();
  };
  auto accumulate = [&](Block& b, int i, int j, const LinExpr& e) {
    double v = e.constant();
    for (const auto& [var, coeff] : e.compressed()) {
      v += coeff * f.particular[var];
      if (f.kernel.size() == 0) {
        b.g[static_cast<std::size_t>(var)](i, j) += coeff;
      } else {
        for (int l = 0; l < f.nfree; ++l) {
          const double k = f.kernel(var, l);
          if (k != 0.0) b.g[static_cast<std::size_t>(l)](i, j) += coeff * k;
        }
      }
    }
    b.g0(i, j) += v;
  };

  for (const auto& c : p.psd_constraints()) {
    Block& b = add_block(c.label, c.expr.rows());
    for (int i = 0; i < c.expr.rows(); ++i)
      for (int j = 0; j < c.expr.cols(); ++j) accumulate(b, i, j, c.expr(i, j));
    b.g0 = 0.5 * (b.g0 + b.g0.transpose()).eval();
    for (auto& g : b.g) g = 0.5 * (g + g.transpose()).eval();
  }
  for (const auto& c : p.nonneg_constraints()) {
    Block& b = add_block(c.label, 1);
    accumulate(b, 0, 0, c.expr);
  }

  // Constraints whose coefficients vanished under the equality elimination
  // (variables pinned by the affine variety) would sit exactly on the cone
  // boundary and destroy the interior; they are checked once and dropped.
  std::vector<Block> kept;
  kept.reserve(f.blocks.size());
  for (auto& b : f.blocks) {
    double coeff_norm = 0.0;
    for (const auto& g : b.g) coeff_norm = std::max(coeff_norm, g.cwiseAbs().maxCoeff());
    const double scale = std::max(1.0, b.g0.cwiseAbs().maxCoeff());
    if (coeff_norm <= 1e-11 * scale) {
      const double lam = min_eig(b.g0);
      if (-lam > f.constant_deficit) {
        f.constant_deficit = -lam;
        f.constant_violator = b.label;
      }
      continue;
    }
    kept.push_back(std::move(b));
  }
  f.blocks = std::move(kept);
  return f;
}

// Largest alpha with S + alpha * dS >= 0 (S > 0 assumed).
double max_step(const Eigen::MatrixXd& S, const Eigen::MatrixXd& dS) {
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) {
    Eigen::MatrixXd S2 = S + 1e-14 * (1.0 + S.norm()) * Eigen::MatrixXd::Identity(S.rows(), S.cols());
    llt.compute(S2);
    if (llt.info() != Eigen::Success) return 0.0;
  }
  const Eigen::MatrixXd& L = llt.matrixL();
  Eigen::MatrixXd W = L.triangularView<Eigen::Lower>().solve(dS);
  W = L.triangularView<Eigen::Lower>().solve(W.transpose()).transpose();
  const double lam = min_eig(W);
  if (lam >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lam;
}

struct CoreResult {
  bool converged = false;
  Eigen::VectorXd u;
  double objective = 0.0;
  int iterations = 0;
  std::string info;
  // normalized primal ray data at exit; a ray with ray_feas ~ 0 and
  // ray_obj < 0 certifies infeasibility of the constraint system
  double ray_obj = 0.0;
  double ray_feas = std::numeric_limits<double>::infinity();
};

// Mehrotra predictor-corrector with the HKM direction on
//   maximize c'u  s.t.  G_j(u) >= 0 for all blocks j.
CoreResult run_core(const std::vector<Block>& blocks, const Eigen::VectorXd& c,
                    const Eigen::VectorXd& u0, const InteriorPointSolver::Options& opts) {
  const int m = static_cast<int>(c.size());
  const std::size_t nb = blocks.size();
  int K = 0;
  double gscale = 0.0;
  for (const auto& b : blocks) {
    K += b.size;
    gscale = std::max(gscale, b.g0.cwiseAbs().maxCoeff());
  }
  const double cscale = m > 0 ? c.cwiseAbs().maxCoeff() : 0.0;

  CoreResult res;
  res.u = u0;
  if (m == 0 || K == 0) {
    res.converged = cscale == 0.0;
    res.objective = 0.0;
    if (!res.converged) res.info = "objective is unconstrained";
    return res;
  }

  std::vector<Eigen::MatrixXd> X(nb), Z(nb);
  const double xscale = std::max(1.0, cscale);
  for (std::size_t j = 0; j < nb; ++j) {
    X[j] = xscale * Eigen::MatrixXd::Identity(blocks[j].size, blocks[j].size);
    Z[j] = blocks[j].at(res.u);
    const double lam = min_eig(Z[j]);
    const double floor = 1e-8 * (1.0 + Z[j].cwiseAbs().maxCoeff());
    if (lam < floor)
      Z[j] += (floor - lam) * Eigen::MatrixXd::Identity(blocks[j].size, blocks[j].size);
  }

  std::vector<Eigen::MatrixXd> Rd(nb), Zinv(nb), W(nb);  // W: scratch
  std::vector<std::vector<Eigen::MatrixXd>> XGZ(nb);     // X G_l Zinv per block
  std::vector<Eigen::MatrixXd> dXa(nb), dZa(nb), dX(nb), dZ(nb);

  // best iterate seen, scored by the worst of the three optimality measures
  double best_score = std::numeric_limits<double>::infinity();
  Eigen::VectorXd u_best = res.u;
  double obj_best = 0.0;
  int no_improve = 0;

  auto finish = [&](const char* why) {
    if (best_score <= opts.loose_tol) {
      res.converged = true;
      res.u = u_best;
      res.objective = obj_best;
      res.info = std::string("accepted at score ") + std::to_string(best_score);
      return;
    }
    double xnorm = 0.0;
    for (const auto& Xj : X) xnorm += Xj.norm();
    if (xnorm > 0.0 && std::isfinite(xnorm)) {
      double obj = 0.0;
      for (std::size_t j = 0; j < nb; ++j) obj += blocks[j].g0.cwiseProduct(X[j]).sum();
      double feas = 0.0;
      for (int l = 0; l < m; ++l) {
        double vl = 0.0;
        for (std::size_t j = 0; j < nb; ++j)
          vl += blocks[j].g[static_cast<std::size_t>(l)].cwiseProduct(X[j]).sum();
        feas = std::max(feas, std::abs(vl));
      }
      res.ray_obj = obj / xnorm;
      res.ray_feas = feas / xnorm;
    }
    res.info = why;
  };

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    res.iterations = iter;

    // residuals
    double mu = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
      Rd[j] = blocks[j].at(res.u) - Z[j];
      mu += X[j].cwiseProduct(Z[j]).sum();
    }
    mu /= K;
    Eigen::VectorXd rp = c;
    for (std::size_t j = 0; j < nb; ++j)
      for (int l = 0; l < m; ++l) rp[l] += blocks[j].g[static_cast<std::size_t>(l)].cwiseProduct(X[j]).sum();

    double pobj = 0.0;
    for (std::size_t j = 0; j < nb; ++j) pobj += blocks[j].g0.cwiseProduct(X[j]).sum();
    const double dobj = c.dot(res.u);

    double rd_norm = 0.0;
    for (std::size_t j = 0; j < nb; ++j) rd_norm = std::max(rd_norm, Rd[j].cwiseAbs().maxCoeff());
    const double rd_rel = rd_norm / (1.0 + gscale);
    const double rp_rel = rp.cwiseAbs().maxCoeff() / (1.0 + cscale);
    const double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

    if (opts.verbose)
      std::fprintf(stderr, "it %3d mu=%9.2e rp=%9.2e rd=%9.2e gap=%9.2e obj=%12.6g\n",
                   iter, mu, rp_rel, rd_rel, relgap, dobj);

    if (!std::isfinite(mu) || !std::isfinite(rp_rel) || !std::isfinite(dobj)) {
      finish("non-finite iterate");
      return res;
    }

    const double score = std::max({rp_rel, rd_rel, relgap});
    if (score < 0.9 * best_score) {
      best_score = score;
      u_best = res.u;
      obj_best = dobj;
      no_improve = 0;
    } else {
      ++no_improve;
    }

    if (rd_rel <= opts.tol && rp_rel <= opts.tol && (relgap <= opts.tol || mu <= opts.tol)) {
      res.converged = true;
      res.objective = dobj;
      return res;
    }
    if (res.u.cwiseAbs().maxCoeff() > 1e12 || std::abs(dobj) > 1e14) {
      finish("iterates diverged (problem may be unbounded)");
      return res;
    }
    if (no_improve > 25 || mu <= 1e-14 * (1.0 + std::abs(dobj))) {
      finish("progress stalled");
      return res;
    }

    // factorizations and Schur complement
    bool fact_ok = true;
    for (std::size_t j = 0; j < nb; ++j) {
      Eigen::LLT<Eigen::MatrixXd> llt(Z[j]);
      if (llt.info() != Eigen::Success) {
        Z[j] += 1e-13 * (1.0 + Z[j].norm()) *
                Eigen::MatrixXd::Identity(blocks[j].size, blocks[j].size);
        llt.compute(Z[j]);
        if (llt.info() != Eigen::Success) {
          fact_ok = false;
          break;
        }
      }
      Zinv[j] = llt.solve(Eigen::MatrixXd::Identity(blocks[j].size, blocks[j].size));
    }
    if (!fact_ok) {
      res.info = "dual block factorization failed";
      return res;
    }

    Eigen::MatrixXd Schur = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t j = 0; j < nb; ++j) {
      auto& cache = XGZ[j];
      cache.resize(static_cast<std::size_t>(m));
      for (int l = 0; l < m; ++l)
        cache[static_cast<std::size_t>(l)].noalias() =
            X[j] * blocks[j].g[static_cast<std::size_t>(l)] * Zinv[j];
      for (int l = 0; l < m; ++l)
        for (int q = 0; q <= l; ++q)
          Schur(l, q) += cache[static_cast<std::size_t>(l)]
                             .cwiseProduct(blocks[j].g[static_cast<std::size_t>(q)])
                             .sum();
    }
    Schur = Schur.selfadjointView<Eigen::Lower>();
    Schur.diagonal().array() += 1e-13 * (1.0 + Schur.trace() / m);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Schur);
    if (ldlt.info() != Eigen::Success) {
      res.info = "Schur factorization failed";
      return res;
    }

    Eigen::VectorXd gvec = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd kvec = Eigen::VectorXd::Zero(m);
    for (std::size_t j = 0; j < nb; ++j) {
      W[j].noalias() = X[j] * Rd[j] * Zinv[j];
      for (int l = 0; l < m; ++l) {
        gvec[l] += blocks[j].g[static_cast<std::size_t>(l)].cwiseProduct(Zinv[j]).sum();
        kvec[l] += blocks[j].g[static_cast<std::size_t>(l)].cwiseProduct(W[j]).sum();
      }
    }

    // predictor (affine scaling)
    Eigen::VectorXd dy = ldlt.solve(c - kvec);
    for (std::size_t j = 0; j < nb; ++j) {
      dZa[j] = Rd[j];
      for (int l = 0; l < m; ++l)
        if (dy[l] != 0.0) dZa[j].noalias() += dy[l] * blocks[j].g[static_cast<std::size_t>(l)];
      Eigen::MatrixXd D = -X[j] - X[j] * dZa[j] * Zinv[j];
      dXa[j] = 0.5 * (D + D.transpose());
    }
    double ap = 1.0, ad = 1.0;
    for (std::size_t j = 0; j < nb; ++j) {
      ap = std::min(ap, max_step(X[j], dXa[j]));
      ad = std::min(ad, max_step(Z[j], dZa[j]));
    }
    double mu_aff = 0.0;
    for (std::size_t j = 0; j < nb; ++j)
      mu_aff += (X[j] + ap * dXa[j]).cwiseProduct(Z[j] + ad * dZa[j]).sum();
    mu_aff = std::max(0.0, mu_aff / K);
    double sigma = std::pow(mu_aff / mu, 3);
    sigma = std::clamp(sigma, 0.0, 1.0);

    // corrector
    Eigen::VectorXd evec = Eigen::VectorXd::Zero(m);
    for (std::size_t j = 0; j < nb; ++j) {
      W[j].noalias() = dXa[j] * dZa[j] * Zinv[j];
      for (int l = 0; l < m; ++l)
        evec[l] += blocks[j].g[static_cast<std::size_t>(l)].cwiseProduct(W[j]).sum();
    }
    dy = ldlt.solve(c + sigma * mu * gvec - kvec - evec);
    for (std::size_t j = 0; j < nb; ++j) {
      dZ[j] = Rd[j];
      for (int l = 0; l < m; ++l)
        if (dy[l] != 0.0) dZ[j].noalias() += dy[l] * blocks[j].g[static_cast<std::size_t>(l)];
      Eigen::MatrixXd D = sigma * mu * Zinv[j] - X[j] - X[j] * dZ[j] * Zinv[j] - W[j];
      dX[j] = 0.5 * (D + D.transpose());
    }

    ap = std::numeric_limits<double>::infinity();
    ad = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nb; ++j) {
      ap = std::min(ap, max_step(X[j], dX[j]));
      ad = std::min(ad, max_step(Z[j], dZ[j]));
    }
    ap = std::min(1.0, opts.step_fraction * ap);
    ad = std::min(1.0, opts.step_fraction * ad);

    for (std::size_t j = 0; j < nb; ++j) {
      X[j] += ap * dX[j];
      Z[j] += ad * dZ[j];
    }
    res.u += ad * dy;
  }

  finish("iteration limit reached");
  return res;
}

// Margin-maximization copy of the program: maximize t subject to
// G_j(u) - t I >= 0 for all blocks and t <= cap. Always strictly feasible.
std::vector<Block> phase1_blocks(const std::vector<Block>& blocks, double cap, int nfree) {
  std::vector<Block> out = blocks;
  for (auto& b : out) {
    b.g.push_back(-Eigen::MatrixXd::Identity(b.size, b.size));
  }
  Block capb;
  capb.label = "phase1_cap";
  capb.size = 1;
  capb.g0 = Eigen::MatrixXd::Constant(1, 1, cap);
  capb.g.assign(static_cast<std::size_t>(nfree) + 1, Eigen::MatrixXd::Zero(1, 1));
  capb.g.back() = Eigen::MatrixXd::Constant(1, 1, -1.0);
  out.push_back(std::move(capb));
  return out;
}

}  // namespace

SolveResult InteriorPointSolver::solve(const SdpProblem& problem) {
  SolveResult out;
  Flat flat = flatten(problem);

  if (!flat.eq_consistent) {
    out.status = SolveStatus::Infeasible;
    out.feasibility_margin = -flat.eq_residual;
    out.info = "equality constraints are inconsistent";
    return out;
  }

  if (flat.constant_deficit > opts_.infeasible_margin) {
    out.status = SolveStatus::Infeasible;
    out.feasibility_margin = -flat.constant_deficit;
    out.info = "constraint '" + flat.constant_violator +
               "' is violated on the equality variety";
    return out;
  }

  if (flat.nfree == 0) {
    // fully pinned by equalities; just check the blocks
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& b : flat.blocks) margin = std::min(margin, min_eig(b.g0));
    out.feasibility_margin = margin;
    if (margin >= -opts_.infeasible_margin) {
      out.status = SolveStatus::Optimal;
      out.assignment = flat.particular;
      out.objective = flat.c0;
    } else {
      out.status = SolveStatus::Infeasible;
      out.info = "constraints violated by the unique equality solution";
    }
    return out;
  }

  // phase 1: strict-feasibility margin
  const auto p1 = phase1_blocks(flat.blocks, opts_.cap, flat.nfree);
  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(flat.nfree + 1);
  double t0 = opts_.cap / 2.0;
  for (const auto& b : flat.blocks) t0 = std::min(t0, min_eig(b.g0) - 1.0);
  u0[flat.nfree] = t0;
  Eigen::VectorXd c1 = Eigen::VectorXd::Zero(flat.nfree + 1);
  c1[flat.nfree] = 1.0;
  CoreResult r1 = run_core(p1, c1, u0, opts_);
  if (!r1.converged) {
    out.status = SolveStatus::NumericalFailure;
    out.info = "phase-1: " + r1.info;
    out.iterations = r1.iterations;
    return out;
  }
  const double margin = r1.objective;
  out.feasibility_margin = margin;
  if (margin < -opts_.infeasible_margin) {
    out.status = SolveStatus::Infeasible;
    out.iterations = r1.iterations;
    out.info = "phase-1 margin " + std::to_string(margin);
    return out;
  }

  // phase 2: the real objective from the interior point found above
  CoreResult r2 = run_core(flat.blocks, flat.c, r1.u.head(flat.nfree), opts_);
  out.iterations = r1.iterations + r2.iterations;
  if (!r2.converged) {
    if (r2.ray_obj < -1e-6 && r2.ray_feas <= 1e-6 * (1.0 + std::abs(r2.ray_obj))) {
      // Farkas-type improving ray: every feasible point would violate it
      out.status = SolveStatus::Infeasible;
      out.info = "improving-ray infeasibility certificate (phase-1 margin " +
                 std::to_string(margin) + ")";
      return out;
    }
    out.status = SolveStatus::NumericalFailure;
    out.info = "phase-2: " + r2.info;
    return out;
  }
  out.status = SolveStatus::Optimal;
  out.assignment = flat.lift(r2.u);
  out.objective = r2.objective + flat.c0;
  return out;
}

std::unique_ptr<SolverInterface> make_solver(const std::string& name) {
  if (name.empty() || name == "ipm" || name == "interior-point")
    return std::make_unique<InteriorPointSolver>();
  throw Error(ErrorCode::ParseError, "unknown solver backend: " + name);
}

}  // namespace pwa_reach
