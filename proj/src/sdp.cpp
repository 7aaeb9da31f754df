#include "pwa_reach/sdp.hpp"

#include <Eigen/Eigenvalues>

namespace pwa_reach {

nlohmann::json SdpProblem::to_json() const {
  nlohmann::json j;
  j["variables"] = nlohmann::json::array();
  for (const auto& v : vars_) {
    const char* kind = v.kind == VarKind::Scalar ? "scalar"
                       : v.kind == VarKind::Vector ? "vector"
                                                   : "symmetric";
    j["variables"].push_back({{"name", v.name},
                              {"kind", kind},
                              {"dim", v.dim},
                              {"offset", v.offset},
                              {"count", v.count}});
  }

  auto expr_json = [](const LinExpr& e) {
    nlohmann::json out;
    out["constant"] = e.constant();
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [var, coeff] : e.compressed()) terms.push_back({{"var", var}, {"coeff", coeff}});
    out["terms"] = terms;
    return out;
  };

  j["psd_constraints"] = nlohmann::json::array();
  for (const auto& c : psd_) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < c.expr.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int jj = 0; jj < c.expr.cols(); ++jj) row.push_back(expr_json(c.expr(i, jj)));
      rows.push_back(row);
    }
    j["psd_constraints"].push_back({{"label", c.label}, {"size", c.expr.rows()}, {"entries", rows}});
  }
  j["nonneg_constraints"] = nlohmann::json::array();
  for (const auto& c : nonneg_)
    j["nonneg_constraints"].push_back({{"label", c.label}, {"expr", expr_json(c.expr)}});
  j["eq_constraints"] = nlohmann::json::array();
  for (const auto& c : eq_)
    j["eq_constraints"].push_back({{"label", c.label}, {"expr", expr_json(c.expr)}});
  j["objective"] = expr_json(objective_);
  if (!warnings.empty()) j["warnings"] = warnings;
  return j;
}

nlohmann::json ResidualReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : entries) {
    const char* kind = e.kind == ResidualEntry::Kind::PsdDeficit ? "psd"
                       : e.kind == ResidualEntry::Kind::Equality ? "eq"
                                                                 : "nonneg";
    arr.push_back({{"name", e.name}, {"kind", kind}, {"violation", e.violation}});
  }
  nlohmann::json j;
  j["entries"] = arr;
  j["max_psd_deficit"] = max_psd_deficit();
  j["max_equality_residual"] = max_equality_residual();
  j["max_nonneg_violation"] = max_nonneg_violation();
  return j;
}

ResidualReport ResidualReport::from_json(const nlohmann::json& j) {
  ResidualReport r;
  if (!j.contains("entries")) return r;
  for (const auto& e : j.at("entries")) {
    ResidualEntry entry;
    entry.name = e.at("name").get<std::string>();
    const std::string kind = e.at("kind").get<std::string>();
    entry.kind = kind == "psd"  ? ResidualEntry::Kind::PsdDeficit
                 : kind == "eq" ? ResidualEntry::Kind::Equality
                                : ResidualEntry::Kind::Nonneg;
    entry.violation = e.at("violation").get<double>();
    r.entries.push_back(entry);
  }
  return r;
}

ResidualReport evaluate_residuals(const SdpProblem& problem, const Eigen::VectorXd& y) {
  ResidualReport report;
  for (const auto& c : problem.psd_constraints()) {
    const Eigen::MatrixXd M = c.expr.eval(y);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()),
                                                      Eigen::EigenvaluesOnly);
    report.entries.push_back({c.label, ResidualEntry::Kind::PsdDeficit,
                              std::max(0.0, -es.eigenvalues().minCoeff())});
  }
  for (const auto& c : problem.eq_constraints())
    report.entries.push_back({c.label, ResidualEntry::Kind::Equality,
                              std::abs(c.expr.eval(y))});
  for (const auto& c : problem.nonneg_constraints())
    report.entries.push_back({c.label, ResidualEntry::Kind::Nonneg,
                              std::max(0.0, -c.expr.eval(y))});
  return report;
}

}  // namespace pwa_reach
