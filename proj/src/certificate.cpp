#include "pwa_reach/certificate.hpp"

#include <fstream>

namespace pwa_reach {

json Certificate::to_json() const {
  json j;
  j["kind"] = kind == CertificateKind::Piecewise ? "piecewise" : "common";
  j["alpha"] = alpha;
  if (kind == CertificateKind::Common) {
    j["P"] = matrix_to_json(P1);
  } else {
    j["P1"] = matrix_to_json(P1);
    j["P2"] = matrix_to_json(P2);
    j["b1"] = vector_to_json(b1);
    j["b2"] = vector_to_json(b2);
    j["e1"] = e1;
    j["e2"] = e2;
    if (has_multipliers) {
      j["gamma1"] = gamma1;
      j["gamma2"] = gamma2;
      j["sigma1"] = sigma1;
      j["sigma2"] = sigma2;
    }
  }
  if (std::isfinite(objective)) j["objective"] = objective;
  if (!audit.entries.empty()) j["audit"] = audit.to_json();
  return j;
}

Certificate Certificate::from_json(const json& j) {
  Certificate cert;
  const std::string kind = j.value("kind", "piecewise");
  cert.kind = kind == "common" ? CertificateKind::Common : CertificateKind::Piecewise;
  if (!j.contains("alpha") || !j.at("alpha").is_number())
    throw Error(ErrorCode::ParseError, "certificate missing scalar 'alpha'");
  cert.alpha = j.at("alpha").get<double>();

  if (cert.kind == CertificateKind::Common) {
    if (!j.contains("P")) throw Error(ErrorCode::ParseError, "common certificate missing 'P'");
    cert.P1 = matrix_from_json(j.at("P"), "P");
    cert.P2 = cert.P1;
    cert.b1 = Eigen::VectorXd::Zero(cert.P1.rows());
    cert.b2 = cert.b1;
  } else {
    if (!j.contains("P1") || !j.contains("P2"))
      throw Error(ErrorCode::ParseError, "piecewise certificate missing 'P1'/'P2'");
    cert.P1 = matrix_from_json(j.at("P1"), "P1");
    cert.P2 = matrix_from_json(j.at("P2"), "P2");
    const auto n = cert.P1.rows();
    cert.b1 = j.contains("b1") ? vector_from_json(j.at("b1"), "b1")
                               : Eigen::VectorXd::Zero(n).eval();
    cert.b2 = j.contains("b2") ? vector_from_json(j.at("b2"), "b2")
                               : Eigen::VectorXd::Zero(n).eval();
    cert.e1 = j.value("e1", 0.0);
    cert.e2 = j.value("e2", 0.0);
    if (j.contains("gamma1")) {
      cert.gamma1 = j.at("gamma1").get<double>();
      cert.gamma2 = j.value("gamma2", 0.0);
      cert.sigma1 = j.value("sigma1", 0.0);
      cert.sigma2 = j.value("sigma2", 0.0);
      cert.has_multipliers = true;
    } else {
      cert.has_multipliers = false;
    }
  }
  if (j.contains("objective")) cert.objective = j.at("objective").get<double>();
  if (j.contains("audit")) cert.audit = ResidualReport::from_json(j.at("audit"));

  if (cert.P1.rows() != cert.P1.cols() || cert.P2.rows() != cert.P2.cols() ||
      cert.P1.rows() != cert.P2.rows() || cert.b1.size() != cert.P1.rows() ||
      cert.b2.size() != cert.P1.rows())
    throw Error(ErrorCode::DimensionMismatch, "certificate blocks have inconsistent shapes");
  return cert;
}

void Certificate::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write certificate file: " + path);
  out << to_json().dump(2) << "\n";
}

Certificate Certificate::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open certificate file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& ex) {
    throw Error(ErrorCode::ParseError, "invalid JSON in " + path + ": " + ex.what());
  }
  return from_json(j);
}

}  // namespace pwa_reach
