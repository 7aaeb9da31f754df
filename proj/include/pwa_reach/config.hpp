#pragma once

namespace pwa_reach {

/// Numerical tolerances and solver knobs. Every CLI `--tol-*` override lands
/// here; library defaults are double-precision appropriate.
struct Config {
  // model checks
  double tol_cont = 1e-8;          // relative Frobenius continuity test
  double tol_pd = 1e-10;           // positive-definiteness of Rw
  double tol_hurwitz = 0.0;        // strict sign check on max Re(eig)
  double hurwitz_warn_band = 1e-9; // |max Re| below this flags a marginal mode

  // LMI assembly
  double eps_pd = 1e-6;       // margin P_i >= eps_pd * I
  double strict_margin = 1e-9; // margin on the common-Lyapunov blocks
  double trace_weight_1 = 1.0;
  double trace_weight_2 = 1.0;

  // solver / certificates
  double tol_solver = 1e-6;   // accepted residual on returned certificates
  double tol_mem = 1e-9;      // set-membership tolerance
  double tol_audit = 1e-6;    // relative decrease-inequality tolerance

  // copositivity certificates
  double tol_psd = 1e-9;
  double tol_entry = 1e-9;
  double tol_split = 1e-9;
};

}  // namespace pwa_reach
