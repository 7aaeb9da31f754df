#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <string>

#include "pwa_reach/errors.hpp"

namespace pwa_reach {

using nlohmann::json;

inline json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}

inline json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

inline Eigen::MatrixXd matrix_from_json(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty() || !j.front().is_array())
    throw Error(ErrorCode::ParseError, "'" + key + "' must be a nested array (row-major matrix)");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw Error(ErrorCode::ParseError, "'" + key + "' has ragged rows");
    for (Eigen::Index jj = 0; jj < cols; ++jj) {
      const auto& cell = row[static_cast<std::size_t>(jj)];
      if (!cell.is_number())
        throw Error(ErrorCode::ParseError, "'" + key + "' has a non-numeric entry");
      M(i, jj) = cell.get<double>();
    }
  }
  return M;
}

inline Eigen::VectorXd vector_from_json(const json& j, const std::string& key) {
  if (!j.is_array())
    throw Error(ErrorCode::ParseError, "'" + key + "' must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const auto& cell = j[static_cast<std::size_t>(i)];
    if (!cell.is_number())
      throw Error(ErrorCode::ParseError, "'" + key + "' has a non-numeric entry");
    v[i] = cell.get<double>();
  }
  return v;
}

}  // namespace pwa_reach
