#include "spectral_corner/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "spectral_corner/error.hpp"

namespace spectral {

namespace {

constexpr double kPi = std::numbers::pi;

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// ccw angle from a to b in [0, 2 pi).
double ccw_angle(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  double t = std::atan2(cross(a, b), a.dot(b));
  if (t < 0) t += 2 * kPi;
  return t;
}

double signed_area(const std::vector<Point>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += cross(v[i], v[(i + 1) % v.size()]);
  return 0.5 * s;
}

double distance_to_segment(const Point& p, const Point& a, const Point& b) {
  const Eigen::Vector2d d = b - a;
  const double len2 = d.squaredNorm();
  double s = len2 > 0 ? (p - a).dot(d) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (a + s * d - p).norm();
}

// Segments [a,b] and [c,d] share at least one point.
bool segments_touch(const Point& a, const Point& b, const Point& c, const Point& d, double tol) {
  const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  const double sa = (b - a).norm(), sc = (d - c).norm();
  if (((d1 > tol * sa && d2 < -tol * sa) || (d1 < -tol * sa && d2 > tol * sa)) &&
      ((d3 > tol * sc && d4 < -tol * sc) || (d3 < -tol * sc && d4 > tol * sc))) {
    return true;
  }
  return distance_to_segment(c, a, b) < tol || distance_to_segment(d, a, b) < tol ||
         distance_to_segment(a, c, d) < tol || distance_to_segment(b, c, d) < tol;
}

bool inside_polygon(const std::vector<Point>& v, const Point& p) {
  bool in = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y() > p.y()) != (v[j].y() > p.y())) {
      const double x = v[j].x() + (p.y() - v[j].y()) * (v[i].x() - v[j].x()) / (v[i].y() - v[j].y());
      if (p.x() < x) in = !in;
    }
  }
  return in;
}

bool same_point(const Point& a, const Point& b, double tol) { return (a - b).norm() < tol; }

// Ear clipping of a simple ccw polygon.
std::vector<std::array<Point, 3>> triangulate(std::vector<Point> v) {
  std::vector<std::array<Point, 3>> out;
  auto in_triangle = [](const Point& p, const Point& a, const Point& b, const Point& c) {
    return cross(b - a, p - a) >= 0 && cross(c - b, p - b) >= 0 && cross(a - c, p - c) >= 0;
  };
  while (v.size() > 3) {
    const std::size_t n = v.size();
    bool clipped = false;
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = v[(i + n - 1) % n];
      const Point& b = v[i];
      const Point& c = v[(i + 1) % n];
      if (cross(b - a, c - b) <= 0) continue;
      bool ear = true;
      for (std::size_t k = 0; k < n && ear; ++k) {
        if (k == i || k == (i + 1) % n || k == (i + n - 1) % n) continue;
        if (in_triangle(v[k], a, b, c)) ear = false;
      }
      if (!ear) continue;
      out.push_back({a, b, c});
      v.erase(v.begin() + static_cast<std::ptrdiff_t>(i));
      clipped = true;
      break;
    }
    if (!clipped) throw InvalidInput("geometry.build_domain", "polygon triangulation failed");
  }
  out.push_back({v[0], v[1], v[2]});
  return out;
}

BoundaryPiece segment(const Point& a, const Point& b, bool slit = false) {
  BoundaryPiece p;
  p.shape = BoundaryPiece::Shape::kSegment;
  p.start = a;
  p.end = b;
  p.slit_side = slit;
  return p;
}

BoundaryPiece arc(const Point& center, double R, double theta0, double sweep) {
  BoundaryPiece p;
  p.shape = BoundaryPiece::Shape::kArc;
  p.center = center;
  p.radius = R;
  p.theta0 = theta0;
  p.sweep = sweep;
  p.start = center + R * Point(std::cos(theta0), std::sin(theta0));
  p.end = center + R * Point(std::cos(theta0 + sweep), std::sin(theta0 + sweep));
  return p;
}

void require_positive(double v, const char* name) {
  if (!(v > 0) || !std::isfinite(v)) {
    throw InvalidInput("geometry.build_domain", std::string(name) + " must be positive and finite");
  }
}

// Nested adaptive integral of g(x, y) over x in [x0, x1], y in [y0(x), y1(x)].
Integral nested(const std::function<double(double, double)>& g, double x0, double x1,
                const std::function<double(double)>& y0, const std::function<double(double)>& y1,
                double tol) {
  double inner_err = 0.0;
  const double inner_tol = 0.1 * tol / std::max(1.0, x1 - x0);
  auto outer = [&](double x) {
    const double lo = y0(x), hi = y1(x);
    if (!(hi > lo)) return 0.0;
    const Integral in = integrate_adaptive([&](double y) { return g(x, y); }, lo, hi, inner_tol);
    inner_err = std::max(inner_err, in.error);
    return in.value;
  };
  Integral r = integrate_adaptive(outer, x0, x1, 0.9 * tol);
  r.error += inner_err * (x1 - x0);
  return r;
}

}  // namespace

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::kRectangle: return "rectangle";
    case DomainKind::kDisk: return "disk";
    case DomainKind::kSector: return "sector";
    case DomainKind::kPolygon: return "polygon";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// BoundaryPiece

double BoundaryPiece::length() const {
  if (shape == Shape::kSegment) return (end - start).norm();
  return radius * std::abs(sweep);
}

Point BoundaryPiece::at(double s) const {
  if (shape == Shape::kSegment) {
    const double L = length();
    return L > 0 ? Point(start + (end - start) * (s / L)) : start;
  }
  const double th = theta0 + std::copysign(s / radius, sweep);
  return center + radius * Point(std::cos(th), std::sin(th));
}

Eigen::Vector2d BoundaryPiece::tangent(double s) const {
  if (shape == Shape::kSegment) return (end - start).normalized();
  const double th = theta0 + std::copysign(s / radius, sweep);
  return std::copysign(1.0, sweep) * Eigen::Vector2d(-std::sin(th), std::cos(th));
}

Eigen::Vector2d BoundaryPiece::outward_normal(double s) const {
  const Eigen::Vector2d t = tangent(s);
  return {t.y(), -t.x()};
}

double BoundaryPiece::curvature() const {
  if (shape == Shape::kSegment) return 0.0;
  return std::copysign(1.0, sweep) / radius;
}

// ---------------------------------------------------------------------------
// Domain

Domain Domain::rectangle(double a, double b, std::vector<Polyline> slits) {
  require_positive(a, "rectangle side a");
  require_positive(b, "rectangle side b");
  Domain d;
  d.kind_ = DomainKind::kRectangle;
  d.a_ = a;
  d.b_ = b;
  d.vertices_ = {Point(0, 0), Point(a, 0), Point(a, b), Point(0, b)};
  d.slits_ = std::move(slits);
  d.finish_polygon();
  return d;
}

Domain Domain::disk(double R) {
  require_positive(R, "disk radius");
  Domain d;
  d.kind_ = DomainKind::kDisk;
  d.R_ = R;
  d.pieces_.push_back(arc(Point::Zero(), R, 0.0, 2 * kPi));
  d.area_ = kPi * R * R;
  return d;
}

Domain Domain::sector(double alpha, double R) {
  if (!(alpha > 0) || !std::isfinite(alpha)) {
    throw InvalidInput("geometry.build_domain", "sector alpha must be positive (angle / pi)");
  }
  require_positive(R, "sector radius");
  Domain d;
  d.kind_ = DomainKind::kSector;
  d.alpha_ = alpha;
  d.R_ = R;
  const double phi = alpha * kPi;
  d.pieces_.push_back(segment(Point::Zero(), Point(R, 0)));
  d.pieces_.push_back(arc(Point::Zero(), R, 0.0, phi));
  d.pieces_.push_back(segment(d.pieces_[1].end, Point::Zero()));
  const Eigen::Vector2d e0(1, 0), e1(std::cos(phi), std::sin(phi));
  Corner tip;
  tip.location = Point::Zero();
  tip.alpha = alpha;
  tip.kind = Corner::Kind::kVertex;
  tip.pieces = {0, 2};
  tip.arms = {e0, e1};
  Corner j0;
  j0.location = Point(R, 0);
  j0.alpha = 0.5;
  j0.kind = Corner::Kind::kJunction;
  j0.pieces = {1, 0};
  j0.arms = {Eigen::Vector2d(0, 1), -e0};
  Corner j1;
  j1.location = d.pieces_[1].end;
  j1.alpha = 0.5;
  j1.kind = Corner::Kind::kJunction;
  j1.pieces = {2, 1};
  j1.arms = {-e1, d.pieces_[1].tangent(d.pieces_[1].length()) * -1.0};
  d.corners_ = {tip, j0, j1};
  d.area_ = 0.5 * phi * R * R;
  return d;
}

Domain Domain::polygon(std::vector<Point> vertices, std::vector<Polyline> slits) {
  Domain d;
  d.kind_ = DomainKind::kPolygon;
  d.vertices_ = std::move(vertices);
  d.slits_ = std::move(slits);
  d.finish_polygon();
  return d;
}

void Domain::finish_polygon() {
  const char* stage = "geometry.build_domain";
  auto& v = vertices_;
  for (const Point& p : v) {
    if (!p.allFinite()) throw InvalidInput(stage, "non-finite vertex");
  }
  double scale = 0.0;
  for (const Point& p : v) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double tol = 1e-10 * std::max(scale, 1e-300);
  // Drop repeated vertices (including a closing duplicate).
  std::vector<Point> clean;
  for (const Point& p : v) {
    if (clean.empty() || !same_point(clean.back(), p, tol)) clean.push_back(p);
  }
  while (clean.size() > 1 && same_point(clean.front(), clean.back(), tol)) clean.pop_back();
  v = std::move(clean);
  if (v.size() < 3) throw InvalidInput(stage, "polygon needs at least 3 distinct vertices");
  double A = signed_area(v);
  if (A < 0) {
    std::reverse(v.begin(), v.end());
    A = -A;
  }
  if (!(A > tol * scale)) throw InvalidInput(stage, "polygon has zero area");
  area_ = A;

  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = v[i];
    const Point& b = v[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      const Point& c = v[j];
      const Point& e = v[(j + 1) % n];
      if (adjacent) {
        // Folding back onto the previous edge is a zero-angle corner.
        const Point& shared = (j == i + 1) ? b : a;
        const Point& p = (j == i + 1) ? a : b;
        const Point& q = (j == i + 1) ? e : c;
        const Eigen::Vector2d u1 = (p - shared).normalized(), u2 = (q - shared).normalized();
        if (std::abs(cross(u1, u2)) < 1e-12 && u1.dot(u2) > 0) {
          throw InvalidInput(stage, "polygon edges fold back (corner with alpha = 0)");
        }
        continue;
      }
      if (segments_touch(a, b, c, e, tol)) {
        std::ostringstream msg;
        msg << "polygon is self-intersecting (edges " << i << " and " << j
            << "); model cuts as slits instead";
        throw InvalidInput(stage, msg.str());
      }
    }
  }

  pieces_.clear();
  for (std::size_t i = 0; i < n; ++i) pieces_.push_back(segment(v[i], v[(i + 1) % n]));

  // Slit segments: validation and two boundary pieces each.
  struct SlitSegment {
    Point a, b;
    int fwd, bwd;
  };
  std::vector<SlitSegment> segs;
  for (auto& line : slits_) {
    Polyline clean_line;
    for (const Point& p : line) {
      if (!p.allFinite()) throw InvalidInput(stage, "non-finite slit point");
      if (clean_line.empty() || !same_point(clean_line.back(), p, tol)) clean_line.push_back(p);
    }
    if (clean_line.size() < 2) throw InvalidInput(stage, "slit needs two distinct points");
    line = clean_line;
    for (std::size_t k = 0; k + 1 < line.size(); ++k) {
      const Point &a = line[k], &b = line[k + 1];
      if (!inside_polygon(v, 0.5 * (a + b))) {
        throw InvalidInput(stage, "slit segment leaves the polygon");
      }
      for (std::size_t i = 0; i < n; ++i) {
        const Point &c = v[i], &e = v[(i + 1) % n];
        const bool a_on = distance_to_segment(a, c, e) < tol;
        const bool b_on = distance_to_segment(b, c, e) < tol;
        const bool end_a = k == 0, end_b = k + 2 == line.size();
        if ((a_on && !end_a) || (b_on && !end_b)) {
          throw InvalidInput(stage, "slit touches the boundary away from its ends");
        }
        // A proper crossing, or contact other than at an allowed end.
        Point a2 = a, b2 = b;
        const Eigen::Vector2d dir = (b - a).normalized();
        if (a_on) a2 = a + dir * (10 * tol);
        if (b_on) b2 = b - dir * (10 * tol);
        if (segments_touch(a2, b2, c, e, tol)) {
          throw InvalidInput(stage, "slit crosses or runs along the boundary");
        }
      }
      const int fwd = static_cast<int>(pieces_.size());
      pieces_.push_back(segment(a, b, true));
      pieces_.push_back(segment(b, a, true));
      segs.push_back({a, b, fwd, fwd + 1});
    }
  }
  for (std::size_t i = 0; i < segs.size(); ++i) {
    for (std::size_t j = i + 1; j < segs.size(); ++j) {
      const auto &s = segs[i], &r = segs[j];
      const bool share = same_point(s.a, r.a, tol) || same_point(s.a, r.b, tol) ||
                         same_point(s.b, r.a, tol) || same_point(s.b, r.b, tol);
      if (share) {
        // Collinear overlap through a shared end.
        const Point p = same_point(s.a, r.a, tol) || same_point(s.a, r.b, tol) ? s.a : s.b;
        const Point ps = same_point(p, s.a, tol) ? s.b : s.a;
        const Point pr = same_point(p, r.a, tol) ? r.b : r.a;
        const Eigen::Vector2d u1 = (ps - p).normalized(), u2 = (pr - p).normalized();
        if (std::abs(cross(u1, u2)) < 1e-12 && u1.dot(u2) > 0) {
          throw InvalidInput(stage, "slit segments overlap");
        }
        continue;
      }
      if (segments_touch(s.a, s.b, r.a, r.b, tol)) {
        throw InvalidInput(stage, "slits intersect away from their vertices");
      }
    }
  }

  // Corners: at every polygon vertex and slit vertex, collect the rays that
  // leave the point and split the available angle into sectors.
  struct Ray {
    Eigen::Vector2d dir;
    int left_piece;   // piece whose left side faces the sector starting at this ray
    int right_piece;  // piece whose left side faces the sector ending at this ray
  };
  std::vector<Point> points(v.begin(), v.end());
  for (const auto& s : segs) {
    for (const Point& p : {s.a, s.b}) {
      if (std::none_of(points.begin(), points.end(), [&](const Point& q) { return same_point(p, q, tol); })) {
        points.push_back(p);
      }
    }
  }
  corners_.clear();
  for (const Point& P : points) {
    std::vector<Ray> slit_rays;
    int slit_ends = 0;
    for (const auto& s : segs) {
      if (same_point(P, s.a, tol)) slit_rays.push_back({(s.b - s.a).normalized(), s.fwd, s.bwd});
      else if (same_point(P, s.b, tol)) slit_rays.push_back({(s.a - s.b).normalized(), s.bwd, s.fwd});
      else continue;
      ++slit_ends;
    }
    // Boundary context.
    int vertex = -1, edge = -1;
    for (std::size_t i = 0; i < n; ++i) {
      if (same_point(P, v[i], tol)) vertex = static_cast<int>(i);
    }
    if (vertex < 0) {
      for (std::size_t i = 0; i < n; ++i) {
        if (distance_to_segment(P, v[i], v[(i + 1) % n]) < tol) edge = static_cast<int>(i);
      }
    }
    std::vector<Ray> rays;
    double total = 2 * kPi;
    bool on_boundary = false;
    Ray closing{};
    if (vertex >= 0 || edge >= 0) {
      on_boundary = true;
      const int iout = vertex >= 0 ? vertex : edge;
      const int iin = vertex >= 0 ? static_cast<int>((vertex + n - 1) % n) : edge;
      const Point next = v[(iout + 1) % n];
      const Point prev = vertex >= 0 ? v[iin] : v[edge];
      const Eigen::Vector2d dout = (next - P).normalized(), dprev = (prev - P).normalized();
      total = vertex >= 0 ? ccw_angle(dout, dprev) : kPi;
      rays.push_back({dout, iout, -1});
      closing = {dprev, -1, iin};
    }
    if (!on_boundary && slit_rays.empty()) continue;
    const Eigen::Vector2d ref = on_boundary ? rays.front().dir : slit_rays.front().dir;
    std::sort(slit_rays.begin(), slit_rays.end(), [&](const Ray& x, const Ray& y) {
      return ccw_angle(ref, x.dir) < ccw_angle(ref, y.dir);
    });
    rays.insert(rays.end(), slit_rays.begin(), slit_rays.end());
    std::vector<double> offsets;
    for (const Ray& r : rays) offsets.push_back(ccw_angle(ref, r.dir));
    if (on_boundary) {
      for (std::size_t k = 1; k < offsets.size(); ++k) {
        if (!(offsets[k] > 0 && offsets[k] < total)) {
          throw InvalidInput(stage, "slit leaves the domain at a boundary point");
        }
      }
      rays.push_back(closing);
      offsets.push_back(total);
    } else {
      rays.push_back(rays.front());
      offsets.push_back(2 * kPi);
    }
    const bool has_slit = !slit_rays.empty();
    for (std::size_t k = 0; k + 1 < rays.size(); ++k) {
      Corner c;
      c.location = P;
      c.alpha = (offsets[k + 1] - offsets[k]) / kPi;
      if (slit_rays.size() == 1 && !on_boundary) c.alpha = 2.0;
      if (!(c.alpha > 1e-12)) throw InvalidInput(stage, "corner with alpha <= 0");
      if (std::abs(c.alpha - 1.0) < 1e-12) continue;  // smooth boundary point
      if (on_boundary) c.kind = has_slit ? Corner::Kind::kSlitMouth : Corner::Kind::kVertex;
      else if (slit_ends == 1) c.kind = Corner::Kind::kSlitTip;
      else if (slit_ends == 2) c.kind = Corner::Kind::kSlitBend;
      else c.kind = Corner::Kind::kJunction;
      c.pieces = {rays[k].left_piece, rays[k + 1].right_piece};
      c.arms = {rays[k].dir, rays[k + 1].dir};
      corners_.push_back(c);
    }
  }
  triangles_ = triangulate(v);
}

double Domain::perimeter() const {
  double s = 0.0;
  for (const auto& p : pieces_) s += p.length();
  return s;
}

bool Domain::planar() const { return !(kind_ == DomainKind::kSector && alpha_ > 2.0); }

bool Domain::contains(const Point& p) const {
  switch (kind_) {
    case DomainKind::kDisk: return p.norm() < R_;
    case DomainKind::kSector: {
      if (!planar()) {
        throw InvalidInput("geometry.contains", "cone sector with alpha > 2 has no planar embedding");
      }
      double th = std::atan2(p.y(), p.x());
      if (th < 0) th += 2 * kPi;
      return p.norm() < R_ && th > 0 && th < alpha_ * kPi;
    }
    default: break;
  }
  if (!inside_polygon(vertices_, p)) return false;
  double scale = 0.0;
  for (const Point& q : vertices_) scale = std::max(scale, q.cwiseAbs().maxCoeff());
  const double tol = 1e-12 * scale;
  for (const auto& piece : pieces_) {
    if (distance_to_segment(p, piece.start, piece.end) < tol) return false;
  }
  return true;
}

Domain Domain::scaled(double r) const {
  require_positive(r, "scale factor");
  auto scale_lines = [r](std::vector<Polyline> lines) {
    for (auto& l : lines)
      for (auto& p : l) p *= r;
    return lines;
  };
  switch (kind_) {
    case DomainKind::kRectangle: return rectangle(r * a_, r * b_, scale_lines(slits_));
    case DomainKind::kDisk: return disk(r * R_);
    case DomainKind::kSector: return sector(alpha_, r * R_);
    case DomainKind::kPolygon: {
      std::vector<Point> v = vertices_;
      for (auto& p : v) p *= r;
      return polygon(std::move(v), scale_lines(slits_));
    }
  }
  return *this;
}

Integral Domain::integrate_interior(const std::function<double(const Point&)>& f,
                                    double tol) const {
  switch (kind_) {
    case DomainKind::kRectangle:
      return nested([&](double x, double y) { return f(Point(x, y)); }, 0.0, a_,
                    [](double) { return 0.0; }, [this](double) { return b_; }, tol);
    case DomainKind::kDisk:
    case DomainKind::kSector: {
      const double phi = kind_ == DomainKind::kDisk ? 2 * kPi : alpha_ * kPi;
      return nested(
          [&](double r, double th) { return r * f(Point(r * std::cos(th), r * std::sin(th))); },
          0.0, R_, [](double) { return 0.0; }, [phi](double) { return phi; }, tol);
    }
    case DomainKind::kPolygon: break;
  }
  Integral total;
  const double share = tol / static_cast<double>(triangles_.size());
  for (const auto& tri : triangles_) {
    const Point &A = tri[0], &B = tri[1], &C = tri[2];
    const double twice = std::abs(cross(B - A, C - A));
    // (s, w) in [0,1]^2 -> A + s(B - A) + s w (C - B), Jacobian s * twice.
    const Integral part = nested(
        [&](double s, double w) {
          return s * twice * f(Point(A + s * (B - A) + s * w * (C - B)));
        },
        0.0, 1.0, [](double) { return 0.0; }, [](double) { return 1.0; }, share);
    total.value += part.value;
    total.error += part.error;
  }
  return total;
}

Integral Domain::integrate_boundary(const std::function<double(const BoundarySample&)>& f,
                                    double tol) const {
  Integral total;
  const double share = tol / static_cast<double>(pieces_.size());
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const auto& piece = pieces_[i];
    const double k = piece.curvature();
    const Integral part = integrate_adaptive(
        [&](double s) {
          BoundarySample b{piece.at(s), piece.outward_normal(s), k, static_cast<int>(i)};
          return f(b);
        },
        0.0, piece.length(), share);
    total.value += part.value;
    total.error += part.error;
  }
  return total;
}

std::string Domain::description() const {
  std::ostringstream out;
  out << to_string(kind_) << '(';
  switch (kind_) {
    case DomainKind::kRectangle: out << "a=" << a_ << ", b=" << b_; break;
    case DomainKind::kDisk: out << "R=" << R_; break;
    case DomainKind::kSector: out << "alpha=" << alpha_ << ", R=" << R_; break;
    case DomainKind::kPolygon: out << vertices_.size() << " vertices"; break;
  }
  if (!slits_.empty()) out << ", slits=" << slits_.size();
  out << ')';
  return out.str();
}

// ---------------------------------------------------------------------------
// Conformal data

ConformalMetric::ConformalMetric(const Domain& domain, MetricSpec metric)
    : sigma_(std::move(metric.sigma)), u_(metric.u) {
  if (u_ != 0.0 && !sigma_.is_constant()) sigma_.require_derivatives();
  const Integral vol = domain.integrate_interior([&](const Point& p) { return area_density(p); });
  const Integral len =
      domain.integrate_boundary([&](const BoundarySample& b) { return length_density(b.point); });
  const Integral K =
      domain.integrate_interior([&](const Point& p) { return curvature_density(p); });
  const Integral k = domain.integrate_boundary(
      [&](const BoundarySample& b) { return boundary_curvature_density(b); });
  volume_ = vol.value;
  length_ = len.value;
  total_curvature_ = K.value;
  total_boundary_curvature_ = k.value;
  error_ = std::max({vol.error, len.error, K.error, k.error});
}

double ConformalMetric::area_density(const Point& p) const {
  return u_ == 0.0 ? 1.0 : std::exp(2 * u_ * sigma_(p));
}

double ConformalMetric::length_density(const Point& p) const {
  return u_ == 0.0 ? 1.0 : std::exp(u_ * sigma_(p));
}

double ConformalMetric::curvature_density(const Point& p) const {
  if (u_ == 0.0 || sigma_.is_constant()) return 0.0;
  return u_ * sigma_.positive_laplacian(p);
}

double ConformalMetric::boundary_curvature_density(const BoundarySample& b) const {
  if (u_ == 0.0 || sigma_.is_constant()) return b.curvature;
  return b.curvature + u_ * sigma_.gradient(b.point).dot(b.normal);
}

double ConformalMetric::gaussian_curvature(const Point& p) const {
  return curvature_density(p) / area_density(p);
}

double ConformalMetric::geodesic_curvature(const BoundarySample& b) const {
  return boundary_curvature_density(b) / length_density(b.point);
}

ConformalMetric conformal_transform(const Domain& domain, const MetricSpec& metric, double u) {
  MetricSpec m = metric;
  m.u = u;
  return ConformalMetric(domain, std::move(m));
}

ExpansionCoefficients geometric_coefficients(const Domain& domain, const MetricSpec& metric,
                                             const ScalarField& psi, double tol) {
  const ConformalMetric g(domain, metric);
  const bool flat_psi = psi.is_constant();
  if (!flat_psi) psi.require_derivatives();

  ExpansionCoefficients c;
  auto& br = c.breakdown;
  double err = 0.0;
  auto take = [&err](const Integral& r) {
    err = std::max(err, r.error);
    return r.value;
  };
  const double vol = take(domain.integrate_interior(
      [&](const Point& p) { return psi(p) * g.area_density(p); }, tol));
  const double len = take(domain.integrate_boundary(
      [&](const BoundarySample& b) { return psi(b.point) * g.length_density(b.point); }, tol));
  br.area = vol / (4 * kPi);
  br.perimeter = -len / (8 * std::sqrt(kPi));
  const bool curved_sigma = metric.u != 0.0 && !g.sigma().is_constant();
  if (curved_sigma) {
    br.interior_curvature = take(domain.integrate_interior(
                                [&](const Point& p) { return psi(p) * g.curvature_density(p); }, tol)) /
                            (12 * kPi);
  }
  br.boundary_curvature = take(domain.integrate_boundary(
                              [&](const BoundarySample& b) {
                                return psi(b.point) * g.boundary_curvature_density(b);
                              },
                              tol)) /
                          (12 * kPi);
  if (!flat_psi) {
    br.normal_derivative = take(domain.integrate_boundary(
                               [&](const BoundarySample& b) {
                                 return psi.gradient(b.point).dot(b.normal);
                               },
                               tol)) /
                           (8 * kPi);
  }
  for (const Corner& k : domain.corners()) {
    br.corners.push_back(psi(k.location) * corner_term(k.alpha));
  }
  c.a_m1 = br.area;
  c.a_mhalf = br.perimeter;
  c.a0 = br.interior_curvature + br.boundary_curvature + br.normal_derivative;
  for (double t : br.corners) c.a0 += t;
  c.error = err;
  return c;
}

ExpansionCoefficients flat_coefficients(const Domain& domain) {
  ExpansionCoefficients c;
  auto& br = c.breakdown;
  br.area = domain.area() / (4 * kPi);
  br.perimeter = -domain.perimeter() / (8 * std::sqrt(kPi));
  double turning = 0.0;
  for (const auto& p : domain.pieces()) turning += p.curvature() * p.length();
  br.boundary_curvature = turning / (12 * kPi);
  for (const Corner& k : domain.corners()) br.corners.push_back(corner_term(k.alpha));
  c.a_m1 = br.area;
  c.a_mhalf = br.perimeter;
  c.a0 = br.boundary_curvature;
  for (double t : br.corners) c.a0 += t;
  return c;
}

}  // namespace spectral
