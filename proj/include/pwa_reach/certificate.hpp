#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>

#include "pwa_reach/json_io.hpp"
#include "pwa_reach/sdp.hpp"

namespace pwa_reach {

enum class CertificateKind { Piecewise, Common };

/// Solved Lyapunov data. For Common certificates P1 == P2 == P and the
/// affine/multiplier fields are zero. Printed reference certificates may
/// lack multipliers (has_multipliers == false); audits recover them with a
/// small feasibility solve.
struct Certificate {
  CertificateKind kind = CertificateKind::Piecewise;
  double alpha = 0.0;
  Eigen::MatrixXd P1, P2;
  Eigen::VectorXd b1, b2;
  double e1 = 0.0, e2 = 0.0;
  double gamma1 = 0.0, gamma2 = 0.0, sigma1 = 0.0, sigma2 = 0.0;
  bool has_multipliers = true;
  double objective = std::numeric_limits<double>::quiet_NaN();
  ResidualReport audit;

  int n() const { return static_cast<int>(P1.rows()); }

  json to_json() const;
  static Certificate from_json(const json& j);
  void save(const std::string& path) const;
  static Certificate load(const std::string& path);
};

}  // namespace pwa_reach
