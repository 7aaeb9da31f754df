#pragma once

#include <string>
#include <vector>

#include "pwa_reach/certificate.hpp"
#include "pwa_reach/config.hpp"
#include "pwa_reach/model.hpp"
#include "pwa_reach/quadratic_form.hpp"

namespace pwa_reach {

enum class Piece { NEG, POS };

/// Union of two half-space-restricted quadratic sublevel sets glued
/// continuously on the switching hyperplane.
struct PiecewiseEllipsoid {
  QuadraticForm neg_piece;  // active where c^T x + f <= 0
  QuadraticForm pos_piece;  // active where c^T x + f >= 0
  Eigen::VectorXd c;
  double f = 0.0;

  int n() const { return neg_piece.dim(); }
  const QuadraticForm& piece(Piece p) const {
    return p == Piece::NEG ? neg_piece : pos_piece;
  }
};

/// Estimate set of a certificate (Common certificates use the same quadratic
/// on both sides).
PiecewiseEllipsoid estimate_set(const Certificate& cert, const BimodalSystem& sys);

/// Membership: x lies in the set when its side's piece value is in [0, 1]
/// (side tested with tol_mem slack, upper level with 1 + tol_mem).
bool contains(const PiecewiseEllipsoid& set, const Eigen::VectorXd& x,
              double tol_mem = 1e-9);

/// Value of the active piece at x (lower of the two values inside the
/// tol-band around the hyperplane).
double active_value(const PiecewiseEllipsoid& set, const Eigen::VectorXd& x);

/// Boundary arc { q = 1 } of one piece clipped to its half-plane, as an
/// ordered polyline including the two hyperplane intersection points.
/// Only n == 2 sets can be exported directly; project first otherwise.
std::vector<Eigen::Vector2d> boundary_polyline(const PiecewiseEllipsoid& set,
                                               Piece piece, int samples,
                                               double tol_mem = 1e-9);

/// 2-D shadow { y : (y - center)^T Q (y - center) <= level }.
struct Ellipsoid2D {
  Eigen::Matrix2d Q;
  Eigen::Vector2d center;
  double level = 1.0;

  bool contains(const Eigen::Vector2d& y, double tol = 0.0) const {
    const Eigen::Vector2d d = y - center;
    return d.dot(Q * d) <= level + tol;
  }
  QuadraticForm as_form() const;  // {q <= 1} normalization of the same set
};

/// Exact orthogonal projection of { q <= 1 } onto coordinates (i, j)
/// (0-based): the Schur-complement shadow of the ellipsoid. Throws
/// EmptyLevelSet when the level set is empty.
Ellipsoid2D project_2d(const QuadraticForm& q, int i, int j);

struct DominanceReport {
  double min_eig_1 = 0.0;  // lambda_min(P1 - P)
  double min_eig_2 = 0.0;  // lambda_min(P2 - P)
  bool subset_flag = false;
};

/// Eigenvalue dominance of the piecewise estimate against a centered common
/// quadratic (b = 0, e = 0). When the piecewise set carries nonzero affine
/// terms the subset flag falls back to a Monte-Carlo containment check of
/// the piecewise boundary inside the common set.
DominanceReport compare_dominance(const PiecewiseEllipsoid& pw, const QuadraticForm& common,
                                  int mc_samples = 100000, std::uint64_t seed = 2024);

// ---- exports -----------------------------------------------------------

/// CSV boundary export: x,y rows, the two pieces separated by a blank line.
void write_boundary_csv(const std::string& path, const PiecewiseEllipsoid& set,
                        int samples = 256);

/// Minimal standalone SVG: the two boundary pieces stroked in distinct
/// colors, light axes, optional trajectory overlays.
void write_boundary_svg(const std::string& path, const PiecewiseEllipsoid& set,
                        int samples = 256,
                        const std::vector<std::vector<Eigen::Vector2d>>& overlays = {});

}  // namespace pwa_reach
