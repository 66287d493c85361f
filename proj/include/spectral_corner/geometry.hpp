#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "spectral_corner/field.hpp"
#include "spectral_corner/special.hpp"

namespace spectral {

using Polyline = std::vector<Point>;

enum class DomainKind { kRectangle, kDisk, kSector, kPolygon };

std::string to_string(DomainKind kind);

/// Oriented boundary arc; the domain lies to its left, so the outward normal
/// is the right-hand normal of the tangent. Each side of a slit is a separate
/// piece traversed in the opposite direction.
struct BoundaryPiece {
  enum class Shape { kSegment, kArc };

  Shape shape = Shape::kSegment;
  Point start = Point::Zero();
  Point end = Point::Zero();
  // Arcs: center, radius, start angle and signed sweep (ccw positive).
  Point center = Point::Zero();
  double radius = 0.0;
  double theta0 = 0.0;
  double sweep = 0.0;
  bool slit_side = false;

  double length() const;
  /// Point at arclength s in [0, length()].
  Point at(double s) const;
  Eigen::Vector2d tangent(double s) const;
  Eigen::Vector2d outward_normal(double s) const;
  /// Flat geodesic curvature k0 (1/R on a ccw arc bounding a disk).
  double curvature() const;
};

struct Corner {
  enum class Kind { kVertex, kSlitTip, kSlitMouth, kSlitBend, kJunction };

  Point location = Point::Zero();
  double alpha = 1.0;  // interior angle / pi
  Kind kind = Kind::kVertex;
  /// Boundary pieces forming the two arms, in ccw order around the corner.
  std::array<int, 2> pieces{-1, -1};
  /// Unit directions of the arms, in the same order.
  std::array<Eigen::Vector2d, 2> arms{Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
};

struct BoundarySample {
  Point point;
  Eigen::Vector2d normal;  // outward unit normal
  double curvature = 0.0;  // flat geodesic curvature
  int piece = -1;
};

class Domain {
 public:
  /// [0,a] x [0,b], optionally with slits.
  static Domain rectangle(double a, double b, std::vector<Polyline> slits = {});
  /// Disk of radius R centred at the origin.
  static Domain disk(double R);
  /// Sector of opening alpha*pi and radius R with tip at the origin and first
  /// edge along the positive x axis. alpha > 2 describes a cone sector; it is
  /// handled in polar coordinates and has no planar embedding.
  static Domain sector(double alpha, double R);
  /// Simple polygon (either orientation) with optional slits. Slits are
  /// polylines inside the closed polygon; they may touch the boundary at their
  /// ends.
  static Domain polygon(std::vector<Point> vertices, std::vector<Polyline> slits = {});

  DomainKind kind() const { return kind_; }
  const std::vector<Corner>& corners() const { return corners_; }
  const std::vector<BoundaryPiece>& pieces() const { return pieces_; }
  /// Polygon vertices in ccw order (rectangles included); empty otherwise.
  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Polyline>& slits() const { return slits_; }

  double area() const { return area_; }
  /// Boundary length in the prime-end sense: slits are counted on both sides.
  double perimeter() const;

  // Shape parameters of the analytic kinds.
  double width() const { return a_; }
  double height() const { return b_; }
  double radius() const { return R_; }
  double sector_alpha() const { return alpha_; }

  bool has_slits() const { return !slits_.empty(); }
  /// True when the domain embeds in the plane (everything except cone
  /// sectors with alpha > 2).
  bool planar() const;
  /// Interior test for planar domains; slit points count as outside.
  bool contains(const Point& p) const;
  /// Domain dilated by r about the origin.
  Domain scaled(double r) const;

  /// Integral of f over the interior against dx dy.
  Integral integrate_interior(const std::function<double(const Point&)>& f,
                              double tol = 1e-10) const;
  /// Sum over boundary pieces of the arclength integral of f.
  Integral integrate_boundary(const std::function<double(const BoundarySample&)>& f,
                              double tol = 1e-10) const;

  std::string description() const;

 private:
  Domain() = default;
  void finish_polygon();

  DomainKind kind_ = DomainKind::kPolygon;
  double a_ = 0.0, b_ = 0.0, R_ = 0.0, alpha_ = 0.0;
  std::vector<Point> vertices_;
  std::vector<Polyline> slits_;
  std::vector<BoundaryPiece> pieces_;
  std::vector<Corner> corners_;
  std::vector<std::array<Point, 3>> triangles_;
  double area_ = 0.0;
};

/// Conformal factor sigma defining g_u = exp(2 u sigma) g0 over a flat base.
struct MetricSpec {
  ScalarField sigma;
  double u = 0.0;
};

/// Quantities of g_u expressed against the flat base measures:
///   dVol_u = e^{2u sigma} dVol_0,  K_u dVol_u = u Delta_0 sigma dVol_0,
///   k_u dl_u = (k_0 + u d_n sigma) dl_0,  d_{n_u} f dl_u = d_{n_0} f dl_0.
class ConformalMetric {
 public:
  ConformalMetric(const Domain& domain, MetricSpec metric);

  double u() const { return u_; }
  double area_density(const Point& p) const;       // e^{2 u sigma}
  double length_density(const Point& p) const;     // e^{u sigma}
  double curvature_density(const Point& p) const;  // K_u dVol_u / dVol_0
  double boundary_curvature_density(const BoundarySample& b) const;  // k_u dl_u / dl_0
  double gaussian_curvature(const Point& p) const;                   // K_u
  double geodesic_curvature(const BoundarySample& b) const;          // k_u

  double volume() const { return volume_; }
  double length() const { return length_; }
  double total_curvature() const { return total_curvature_; }
  double total_boundary_curvature() const { return total_boundary_curvature_; }
  /// Largest quadrature error estimate among the totals.
  double error() const { return error_; }

  const ScalarField& sigma() const { return sigma_; }

 private:
  ScalarField sigma_;
  double u_;
  double volume_ = 0.0, length_ = 0.0, total_curvature_ = 0.0, total_boundary_curvature_ = 0.0;
  double error_ = 0.0;
};

/// Derived quantities of g_u; throws InvalidInput if sigma lacks derivatives.
ConformalMetric conformal_transform(const Domain& domain, const MetricSpec& metric, double u);

struct ExpansionCoefficients {
  double a_m1 = 0.0;     // coefficient of 1/t
  double a_mhalf = 0.0;  // coefficient of 1/sqrt(t)
  double a0 = 0.0;       // constant term

  struct Breakdown {
    double area = 0.0;
    double perimeter = 0.0;
    double interior_curvature = 0.0;
    double boundary_curvature = 0.0;
    double normal_derivative = 0.0;
    std::vector<double> corners;
  } breakdown;

  double error = 0.0;  // quadrature error estimate
};

/// Heat-trace coefficients of psi-weighted traces on (domain, g_u).
ExpansionCoefficients geometric_coefficients(const Domain& domain, const MetricSpec& metric,
                                             const ScalarField& psi = ScalarField::constant(1.0),
                                             double tol = 1e-10);

/// Coefficients from the bare geometry of a flat domain (psi = 1, sigma = 0).
ExpansionCoefficients flat_coefficients(const Domain& domain);

}  // namespace spectral
