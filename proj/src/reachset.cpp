#include "pwa_reach/reachset.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>

#include "pwa_reach/rng.hpp"

namespace pwa_reach {
namespace {

constexpr double kTwoPi = 6.283185307179586476925;

double side_sign(Piece p) { return p == Piece::NEG ? -1.0 : 1.0; }

struct CenteredPiece {
  Eigen::VectorXd center;
  double rho = 0.0;  // level radius^2: (x - center)^T P (x - center) <= rho
};

CenteredPiece center_form(const QuadraticForm& q) {
  CenteredPiece out;
  Eigen::LLT<Eigen::MatrixXd> llt(q.P);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::DimensionMismatch, "piece matrix must be positive definite");
  out.center = -llt.solve(q.b);
  out.rho = 1.0 - q.e + q.b.dot(-out.center);  // 1 - e + b^T P^{-1} b
  return out;
}

}  // namespace

PiecewiseEllipsoid estimate_set(const Certificate& cert, const BimodalSystem& sys) {
  PiecewiseEllipsoid set;
  set.neg_piece = QuadraticForm(cert.P1, cert.b1, cert.e1);
  set.pos_piece = QuadraticForm(cert.P2, cert.b2, cert.e2);
  set.c = sys.c;
  set.f = sys.f;

  for (const auto* q : {&set.neg_piece, &set.pos_piece}) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q->P, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw Error(ErrorCode::AuditFailed, "estimate pieces must be positive definite");
  }

  // spot-check continuity of the two pieces on the switching hyperplane
  if (cert.kind == CertificateKind::Piecewise && set.n() > 1) {
    const SwitchGeometry geom = build_geometry(sys.c, sys.f);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(set.neg_piece.P, Eigen::EigenvaluesOnly);
    const double radius = 3.0 / std::sqrt(es.eigenvalues().minCoeff());
    Rng rng(0xc0411);
    for (int s = 0; s < 64; ++s) {
      Eigen::VectorXd theta(set.n() - 1);
      for (int i = 0; i < theta.size(); ++i) theta[i] = rng.uniform(-radius, radius);
      const Eigen::VectorXd x = geom.r0 + geom.Rhat * theta;
      const double gap = std::abs(set.neg_piece.value(x) - set.pos_piece.value(x));
      if (gap > 1e-6 * (1.0 + x.squaredNorm()))
        throw Error(ErrorCode::AuditFailed,
                    "estimate pieces are discontinuous on the switching hyperplane");
    }
  }
  return set;
}

bool contains(const PiecewiseEllipsoid& set, const Eigen::VectorXd& x, double tol_mem) {
  const double s = set.c.dot(x) + set.f;
  if (s <= tol_mem) {
    const double q = set.neg_piece.value(x);
    if (q >= 0.0 && q <= 1.0 + tol_mem) return true;
  }
  if (s >= -tol_mem) {
    const double q = set.pos_piece.value(x);
    if (q >= 0.0 && q <= 1.0 + tol_mem) return true;
  }
  return false;
}

double active_value(const PiecewiseEllipsoid& set, const Eigen::VectorXd& x) {
  const double s = set.c.dot(x) + set.f;
  if (s < 0.0) return set.neg_piece.value(x);
  if (s > 0.0) return set.pos_piece.value(x);
  return std::min(set.neg_piece.value(x), set.pos_piece.value(x));
}

std::vector<Eigen::Vector2d> boundary_polyline(const PiecewiseEllipsoid& set, Piece piece,
                                               int samples, double tol_mem) {
  if (set.n() != 2)
    throw Error(ErrorCode::DimensionUnsupported,
                "direct boundary export needs n == 2; project first");
  if (samples < 2) samples = 2;

  const QuadraticForm& q = set.piece(piece);
  const double s = side_sign(piece);
  const CenteredPiece cp = center_form(q);
  std::vector<Eigen::Vector2d> out;
  if (cp.rho < 0.0) return out;  // empty level set

  auto radial_point = [&](double phi) {
    Eigen::Vector2d u(std::cos(phi), std::sin(phi));
    const double r = std::sqrt(cp.rho / u.dot(q.P * u));
    return Eigen::Vector2d(cp.center + r * u);
  };
  auto on_side = [&](const Eigen::Vector2d& x) {
    return s * (set.c.dot(x) + set.f) >= -tol_mem;
  };

  // boundary / hyperplane crossings: q(r0 + t v) = 1 along the hyperplane
  const SwitchGeometry geom = build_geometry(set.c, set.f);
  const Eigen::Vector2d v = geom.Rhat.col(0);
  const Eigen::Vector2d r0 = geom.r0;
  const double a = v.dot(q.P * v);
  const double bq = v.dot(q.P * r0 + q.b);
  const double cq = q.value(r0) - 1.0;
  const double disc = bq * bq - a * cq;

  if (disc <= 0.0) {
    // the hyperplane misses the ellipse: all or nothing
    if (!on_side(cp.center)) return out;
    out.reserve(static_cast<std::size_t>(samples) + 1);
    for (int k = 0; k < samples; ++k) out.push_back(radial_point(kTwoPi * k / samples));
    out.push_back(out.front());
    return out;
  }

  const double sq = std::sqrt(disc);
  const Eigen::Vector2d pa = r0 + ((-bq - sq) / a) * v;
  const Eigen::Vector2d pb = r0 + ((-bq + sq) / a) * v;
  double phi_a = std::atan2(pa.y() - cp.center.y(), pa.x() - cp.center.x());
  double phi_b = std::atan2(pb.y() - cp.center.y(), pb.x() - cp.center.x());
  double delta = phi_b - phi_a;
  while (delta < 0.0) delta += kTwoPi;
  // pick the sweep direction whose midpoint lies on the requested side
  if (!on_side(radial_point(phi_a + 0.5 * delta))) delta -= kTwoPi;
  if (delta == 0.0) return out;

  out.reserve(static_cast<std::size_t>(samples));
  out.push_back(pa);
  for (int k = 1; k + 1 < samples; ++k)
    out.push_back(radial_point(phi_a + delta * k / (samples - 1)));
  out.push_back(pb);
  return out;
}

QuadraticForm Ellipsoid2D::as_form() const {
  const Eigen::Matrix2d P = Q / level;
  const Eigen::Vector2d b = -P * center;
  const double e = center.dot(P * center);
  return QuadraticForm(P, b, e);
}

Ellipsoid2D project_2d(const QuadraticForm& q, int i, int j) {
  const int n = q.dim();
  if (i < 0 || j < 0 || i >= n || j >= n || i == j)
    throw Error(ErrorCode::DimensionMismatch, "project_2d: invalid coordinate pair");
  Eigen::LLT<Eigen::MatrixXd> llt(q.P);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::DimensionMismatch, "project_2d: P must be positive definite");

  const Eigen::VectorXd center = -llt.solve(q.b);
  const double rho = 1.0 - q.e + q.b.dot(-center);
  if (rho < 0.0)
    throw Error(ErrorCode::EmptyLevelSet, "project_2d: the level set is empty");

  const Eigen::MatrixXd Pinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::Matrix2d shadow;
  shadow << Pinv(i, i), Pinv(i, j), Pinv(j, i), Pinv(j, j);

  Ellipsoid2D out;
  out.Q = shadow.inverse();
  out.Q = 0.5 * (out.Q + out.Q.transpose()).eval();
  out.center = Eigen::Vector2d(center[i], center[j]);
  out.level = rho;
  return out;
}

DominanceReport compare_dominance(const PiecewiseEllipsoid& pw, const QuadraticForm& common,
                                  int mc_samples, std::uint64_t seed) {
  if (common.dim() != pw.n())
    throw Error(ErrorCode::DimensionMismatch, "compare_dominance: dimension mismatch");
  if (common.b.norm() > 1e-12 || std::abs(common.e) > 1e-12)
    throw Error(ErrorCode::DimensionMismatch,
                "compare_dominance: the common form must be centered (b = 0, e = 0)");

  DominanceReport rep;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e1(pw.neg_piece.P - common.P,
                                                    Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e2(pw.pos_piece.P - common.P,
                                                    Eigen::EigenvaluesOnly);
  rep.min_eig_1 = e1.eigenvalues().minCoeff();
  rep.min_eig_2 = e2.eigenvalues().minCoeff();

  const double affine = std::max({pw.neg_piece.b.norm(), pw.pos_piece.b.norm(),
                                  std::abs(pw.neg_piece.e), std::abs(pw.pos_piece.e)});
  if (affine <= 1e-8) {
    rep.subset_flag = rep.min_eig_1 > 0.0 && rep.min_eig_2 > 0.0;
    return rep;
  }

  // affine terms: eigenvalue dominance no longer decides containment, so
  // sample the piecewise boundary and test it against the common set
  Rng rng(seed);
  bool all_inside = true;
  for (int s = 0; s < mc_samples && all_inside; ++s) {
    const Piece piece = (s % 2 == 0) ? Piece::NEG : Piece::POS;
    const QuadraticForm& q = pw.piece(piece);
    Eigen::LLT<Eigen::MatrixXd> llt(q.P);
    const Eigen::VectorXd center = -llt.solve(q.b);
    const double rho = 1.0 - q.e + q.b.dot(-center);
    if (rho < 0.0) continue;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q.P);
    const Eigen::MatrixXd isqrt = es.operatorInverseSqrt();
    const Eigen::VectorXd x = center + std::sqrt(rho) * (isqrt * rng.on_sphere(pw.n()));
    if (side_sign(piece) * (pw.c.dot(x) + pw.f) < 0.0) continue;
    if (common.value(x) > 1.0 + 1e-9) all_inside = false;
  }
  rep.subset_flag = all_inside;
  return rep;
}

void write_boundary_csv(const std::string& path, const PiecewiseEllipsoid& set, int samples) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out.precision(12);
  bool first = true;
  for (Piece piece : {Piece::NEG, Piece::POS}) {
    if (!first) out << "\n";
    first = false;
    for (const auto& p : boundary_polyline(set, piece, samples))
      out << p.x() << "," << p.y() << "\n";
  }
}

namespace {

struct SvgMapper {
  double xmin, xmax, ymin, ymax;
  double width = 640.0, height = 480.0, pad = 40.0;

  double mx(double x) const {
    return pad + (x - xmin) / (xmax - xmin) * (width - 2 * pad);
  }
  double my(double y) const {
    return height - pad - (y - ymin) / (ymax - ymin) * (height - 2 * pad);
  }
};

void svg_path(std::ostream& os, const std::vector<Eigen::Vector2d>& pts,
              const SvgMapper& map, const char* color, double stroke_width) {
  if (pts.size() < 2) return;
  os << "  <path fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << stroke_width
     << "\" d=\"";
  for (std::size_t k = 0; k < pts.size(); ++k)
    os << (k == 0 ? "M" : " L") << map.mx(pts[k].x()) << " " << map.my(pts[k].y());
  os << "\"/>\n";
}

}  // namespace

void write_boundary_svg(const std::string& path, const PiecewiseEllipsoid& set, int samples,
                        const std::vector<std::vector<Eigen::Vector2d>>& overlays) {
  const auto neg = boundary_polyline(set, Piece::NEG, samples);
  const auto pos = boundary_polyline(set, Piece::POS, samples);

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  auto grow = [&](const std::vector<Eigen::Vector2d>& pts) {
    for (const auto& p : pts) {
      xmin = std::min(xmin, p.x());
      xmax = std::max(xmax, p.x());
      ymin = std::min(ymin, p.y());
      ymax = std::max(ymax, p.y());
    }
  };
  grow(neg);
  grow(pos);
  for (const auto& o : overlays) grow(o);
  if (xmin > xmax) {
    xmin = ymin = -1.0;
    xmax = ymax = 1.0;
  }
  const double mx = 0.05 * std::max(xmax - xmin, 1e-9);
  const double my = 0.05 * std::max(ymax - ymin, 1e-9);
  SvgMapper map{xmin - mx, xmax + mx, ymin - my, ymax + my};

  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out.precision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << map.width << "\" height=\""
      << map.height << "\" viewBox=\"0 0 " << map.width << " " << map.height << "\">\n";
  out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // axes through the origin when visible
  if (map.xmin < 0.0 && map.xmax > 0.0)
    out << "  <line x1=\"" << map.mx(0) << "\" y1=\"" << map.my(map.ymin) << "\" x2=\""
        << map.mx(0) << "\" y2=\"" << map.my(map.ymax)
        << "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
  if (map.ymin < 0.0 && map.ymax > 0.0)
    out << "  <line x1=\"" << map.mx(map.xmin) << "\" y1=\"" << map.my(0) << "\" x2=\""
        << map.mx(map.xmax) << "\" y2=\"" << map.my(0)
        << "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
  for (const auto& o : overlays) svg_path(out, o, map, "#999999", 0.6);
  svg_path(out, neg, map, "#d62728", 2.0);
  svg_path(out, pos, map, "#1f77b4", 2.0);
  out << "</svg>\n";
}

}  // namespace pwa_reach
