#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "pwa_reach/errors.hpp"

namespace pwa_reach {

/// Affine scalar expression over the problem's packed scalar variables.
class LinExpr {
 public:
  LinExpr() = default;
  explicit LinExpr(double constant) : constant_(constant) {}

  static LinExpr term(int var, double coeff) {
    LinExpr e;
    e.add(var, coeff);
    return e;
  }

  void add(int var, double coeff) {
    if (coeff != 0.0) terms_.emplace_back(var, coeff);
  }
  void add_constant(double v) { constant_ += v; }

  LinExpr& operator+=(const LinExpr& o) {
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    constant_ += o.constant_;
    return *this;
  }
  LinExpr& operator-=(const LinExpr& o) {
    for (const auto& [v, c] : o.terms_) terms_.emplace_back(v, -c);
    constant_ -= o.constant_;
    return *this;
  }
  LinExpr& operator*=(double s) {
    for (auto& [v, c] : terms_) c *= s;
    constant_ *= s;
    return *this;
  }
  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
  friend LinExpr operator*(double s, LinExpr a) { return a *= s; }
  friend LinExpr operator*(LinExpr a, double s) { return a *= s; }
  friend LinExpr operator-(LinExpr a) { return a *= -1.0; }

  double eval(const Eigen::VectorXd& y) const {
    double v = constant_;
    for (const auto& [var, coeff] : terms_) v += coeff * y[var];
    return v;
  }

  /// Sorted, duplicate-merged terms with zeros dropped.
  std::vector<std::pair<int, double>> compressed() const {
    auto t = terms_;
    std::sort(t.begin(), t.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<int, double>> out;
    for (const auto& [v, c] : t) {
      if (!out.empty() && out.back().first == v)
        out.back().second += c;
      else
        out.emplace_back(v, c);
    }
    std::erase_if(out, [](const auto& p) { return p.second == 0.0; });
    return out;
  }

  double constant() const { return constant_; }
  bool is_constant() const { return compressed().empty(); }

 private:
  std::vector<std::pair<int, double>> terms_;
  double constant_ = 0.0;
};

/// Dense matrix of affine expressions.
class MatExpr {
 public:
  MatExpr() = default;
  MatExpr(int rows, int cols)
      : rows_(rows), cols_(cols), entries_(static_cast<std::size_t>(rows) * cols) {}

  static MatExpr constant(const Eigen::MatrixXd& M) {
    MatExpr e(static_cast<int>(M.rows()), static_cast<int>(M.cols()));
    for (int i = 0; i < e.rows_; ++i)
      for (int j = 0; j < e.cols_; ++j) e(i, j).add_constant(M(i, j));
    return e;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  LinExpr& operator()(int i, int j) { return entries_[idx(i, j)]; }
  const LinExpr& operator()(int i, int j) const { return entries_[idx(i, j)]; }

  MatExpr& operator+=(const MatExpr& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] += o.entries_[k];
    return *this;
  }
  MatExpr& operator-=(const MatExpr& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] -= o.entries_[k];
    return *this;
  }
  MatExpr& operator*=(double s) {
    for (auto& e : entries_) e *= s;
    return *this;
  }
  friend MatExpr operator+(MatExpr a, const MatExpr& b) { return a += b; }
  friend MatExpr operator-(MatExpr a, const MatExpr& b) { return a -= b; }
  friend MatExpr operator*(double s, MatExpr a) { return a *= s; }
  friend MatExpr operator-(MatExpr a) { return a *= -1.0; }

  Eigen::MatrixXd eval(const Eigen::VectorXd& y) const {
    Eigen::MatrixXd M(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) M(i, j) = (*this)(i, j).eval(y);
    return M;
  }

  /// T^T (*this) T for a constant T.
  MatExpr congruence(const Eigen::MatrixXd& T) const {
    if (T.rows() != rows_)
      throw Error(ErrorCode::DimensionMismatch, "congruence: T row count mismatch");
    const int k = static_cast<int>(T.cols());
    MatExpr out(k, k);
    for (int a = 0; a < rows_; ++a) {
      for (int b = 0; b < cols_; ++b) {
        const LinExpr& entry = (*this)(a, b);
        if (entry.is_constant() && entry.constant() == 0.0) continue;
        for (int i = 0; i < k; ++i) {
          const double ta = T(a, i);
          if (ta == 0.0) continue;
          for (int j = 0; j < k; ++j) {
            const double tb = T(b, j);
            if (tb == 0.0) continue;
            out(i, j) += (ta * tb) * entry;
          }
        }
      }
    }
    return out;
  }

  void symmetrize() {
    for (int i = 0; i < rows_; ++i) {
      for (int j = i + 1; j < cols_; ++j) {
        LinExpr avg = 0.5 * ((*this)(i, j) + (*this)(j, i));
        (*this)(i, j) = avg;
        (*this)(j, i) = avg;
      }
    }
  }

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * cols_ + j;
  }
  void check_same_shape(const MatExpr& o) const {
    if (o.rows_ != rows_ || o.cols_ != cols_)
      throw Error(ErrorCode::DimensionMismatch, "matrix expression shape mismatch");
  }

  int rows_ = 0, cols_ = 0;
  std::vector<LinExpr> entries_;
};

enum class VarKind { Scalar, Vector, SymmetricMatrix };

struct VarBlock {
  std::string name;
  VarKind kind = VarKind::Scalar;
  int dim = 1;     // n for vectors and symmetric matrices
  int offset = 0;  // first packed scalar index
  int count = 1;   // number of packed scalars
};

/// Conic program container: named decision variables (symmetric matrices are
/// packed by upper triangle), affine PSD constraints, scalar nonnegativity
/// constraints, linear equalities, and an affine objective to maximize.
class SdpProblem {
 public:
  struct PsdConstraint { std::string label; MatExpr expr; };
  struct ScalarConstraint { std::string label; LinExpr expr; };

  VarBlock add_scalar(const std::string& name) {
    return add_block(name, VarKind::Scalar, 1, 1);
  }
  VarBlock add_vector(const std::string& name, int n) {
    return add_block(name, VarKind::Vector, n, n);
  }
  VarBlock add_symmetric(const std::string& name, int n) {
    return add_block(name, VarKind::SymmetricMatrix, n, n * (n + 1) / 2);
  }

  // ---- expression accessors -------------------------------------------

  LinExpr scalar_expr(const VarBlock& v) const {
    return LinExpr::term(v.offset, 1.0);
  }
  LinExpr vector_entry(const VarBlock& v, int i) const {
    return LinExpr::term(v.offset + i, 1.0);
  }
  LinExpr matrix_entry(const VarBlock& v, int i, int j) const {
    return LinExpr::term(sym_index(v, i, j), 1.0);
  }
  MatExpr symmetric_expr(const VarBlock& v) const {
    MatExpr M(v.dim, v.dim);
    for (int i = 0; i < v.dim; ++i)
      for (int j = 0; j < v.dim; ++j) M(i, j) = matrix_entry(v, i, j);
    return M;
  }
  LinExpr trace_expr(const VarBlock& v) const {
    LinExpr t;
    for (int i = 0; i < v.dim; ++i) t += matrix_entry(v, i, i);
    return t;
  }

  /// [[P, b], [b^T, e]] over variable blocks P (symmetric) and b (vector).
  MatExpr lifted_form_expr(const VarBlock& P, const VarBlock& b, const LinExpr& e) const {
    const int n = P.dim;
    MatExpr M(n + 1, n + 1);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) M(i, j) = matrix_entry(P, i, j);
      M(i, n) = vector_entry(b, i);
      M(n, i) = vector_entry(b, i);
    }
    M(n, n) = e;
    return M;
  }

  // ---- constraints ------------------------------------------------------

  void require_psd(MatExpr expr, const std::string& label) {
    if (expr.rows() != expr.cols())
      throw Error(ErrorCode::DimensionMismatch, "PSD constraint must be square: " + label);
    expr.symmetrize();
    psd_.push_back({label, std::move(expr)});
  }
  void require_nonneg(LinExpr expr, const std::string& label) {
    nonneg_.push_back({label, std::move(expr)});
  }
  void require_zero(LinExpr expr, const std::string& label) {
    eq_.push_back({label, std::move(expr)});
  }
  void maximize(LinExpr objective) { objective_ = std::move(objective); }

  // ---- introspection ------------------------------------------------------

  int var_count() const { return next_offset_; }
  const std::vector<VarBlock>& variables() const { return vars_; }
  const std::vector<PsdConstraint>& psd_constraints() const { return psd_; }
  const std::vector<ScalarConstraint>& nonneg_constraints() const { return nonneg_; }
  const std::vector<ScalarConstraint>& eq_constraints() const { return eq_; }
  const LinExpr& objective() const { return objective_; }

  std::vector<std::string> warnings;

  // ---- assignment packing -------------------------------------------------

  double value_scalar(const VarBlock& v, const Eigen::VectorXd& y) const {
    return y[v.offset];
  }
  Eigen::VectorXd value_vector(const VarBlock& v, const Eigen::VectorXd& y) const {
    return y.segment(v.offset, v.dim);
  }
  Eigen::MatrixXd value_symmetric(const VarBlock& v, const Eigen::VectorXd& y) const {
    Eigen::MatrixXd M(v.dim, v.dim);
    for (int i = 0; i < v.dim; ++i)
      for (int j = i; j < v.dim; ++j) M(i, j) = M(j, i) = y[sym_index(v, i, j)];
    return M;
  }
  void assign_scalar(const VarBlock& v, double x, Eigen::VectorXd& y) const {
    y[v.offset] = x;
  }
  void assign_vector(const VarBlock& v, const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
    y.segment(v.offset, v.dim) = x;
  }
  void assign_symmetric(const VarBlock& v, const Eigen::MatrixXd& M, Eigen::VectorXd& y) const {
    for (int i = 0; i < v.dim; ++i)
      for (int j = i; j < v.dim; ++j) y[sym_index(v, i, j)] = 0.5 * (M(i, j) + M(j, i));
  }

  /// Self-describing dump (variables + dense constraint coefficients) for
  /// cross-checking against other modeling tools.
  nlohmann::json to_json() const;

 private:
  VarBlock add_block(const std::string& name, VarKind kind, int dim, int count) {
    VarBlock v{name, kind, dim, next_offset_, count};
    next_offset_ += count;
    vars_.push_back(v);
    return v;
  }

  int sym_index(const VarBlock& v, int i, int j) const {
    if (i > j) std::swap(i, j);
    return v.offset + j * (j + 1) / 2 + i;
  }

  std::vector<VarBlock> vars_;
  std::vector<PsdConstraint> psd_;
  std::vector<ScalarConstraint> nonneg_;
  std::vector<ScalarConstraint> eq_;
  LinExpr objective_;
  int next_offset_ = 0;
};

// ---- residual evaluation ----------------------------------------------------

struct ResidualEntry {
  enum class Kind { PsdDeficit, Equality, Nonneg };
  std::string name;
  Kind kind = Kind::PsdDeficit;
  double violation = 0.0;  // >= 0; 0 means satisfied
};

struct ResidualReport {
  std::vector<ResidualEntry> entries;

  double max_psd_deficit() const { return max_of(ResidualEntry::Kind::PsdDeficit); }
  double max_equality_residual() const { return max_of(ResidualEntry::Kind::Equality); }
  double max_nonneg_violation() const { return max_of(ResidualEntry::Kind::Nonneg); }
  double worst() const {
    double w = 0.0;
    for (const auto& e : entries) w = std::max(w, e.violation);
    return w;
  }
  bool within(double tol) const { return worst() <= tol; }

  nlohmann::json to_json() const;
  static ResidualReport from_json(const nlohmann::json& j);

 private:
  double max_of(ResidualEntry::Kind k) const {
    double w = 0.0;
    for (const auto& e : entries)
      if (e.kind == k) w = std::max(w, e.violation);
    return w;
  }
};

/// Exact per-constraint violations of `problem` at a full assignment:
/// PSD deficits are max(0, -lambda_min), equalities report |value|,
/// nonnegativity constraints report max(0, -value).
ResidualReport evaluate_residuals(const SdpProblem& problem, const Eigen::VectorXd& y);

}  // namespace pwa_reach
