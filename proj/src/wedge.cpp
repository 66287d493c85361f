#include "spectral_corner/wedge.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include <boost/math/special_functions/bessel.hpp>

#include "spectral_corner/error.hpp"
#include "spectral_corner/special.hpp"

namespace spectral {

namespace {

constexpr double kPi = std::numbers::pi;

void validate(const WedgeBallQuery& q) {
  if (!(q.alpha > 0) || !(q.eps > 0) || !(q.t > 0)) {
    throw InvalidInput("wedge.query", "alpha, eps and t must be positive");
  }
}

// Laplace inverse of int_0^inf dx sinh(a x)/sinh(g x) int_eps^inf K_{ix}^2(r sqrt s) r dr
// for |a| < g, with x = eps^2 / t.
double reduced_integral(double a, double g, double x) {
  const double m = kPi / g;
  const double b = kPi * a / g;
  const double c2 = std::pow(std::cos(b / 2), 2);
  const auto f = [=](double q) {
    const double sh = std::sinh(q / 2), ch = std::cosh(q / 2), sm = std::sinh(m * q / 2);
    return std::exp(-x * sh * sh) / (4 * ch * ch * (sm * sm + c2));
  };
  // exp(-x sinh^2(q/2)) < 1e-30 beyond Q; the 1/cosh^2 factor caps Q for tiny x.
  const double Q = std::min(2 * std::asinh(std::sqrt(69.1 / x)), 160.0);
  QuadratureOptions o;
  o.tol = 1e-16;
  o.rel_tol = 1e-14;
  o.max_depth = 60;
  // Near |a| = g the integrand peaks at q = 0 with width ~ 2 |cos(b/2)| / m.
  const double w = std::min(Q, 2 * std::sqrt(c2) / m * 50);
  double value = 0.0;
  if (w > 0 && w < Q) value += integrate_adaptive(f, 0.0, w, o).value;
  value += integrate_adaptive(f, w > 0 && w < Q ? w : 0.0, Q, o).value;
  return kPi / (4 * g) * std::sin(b) * std::exp(-x) * value;
}

}  // namespace

double a_remainder(const WedgeBallQuery& q) {
  validate(q);
  const double x = q.eps * q.eps / q.t;
  const double g = q.alpha * kPi;
  double a = (1 - q.alpha) * kPi;
  double bracket = 0.0;
  // sinh(a x)/sinh(g x) = sinh((a - 2g) x)/sinh(g x) + 2 cosh((a - g) x); each cosh
  // term is an image contributing (pi/8) e^{-x k^2}/k^2 with k = cos((a - g)/2).
  constexpr double kEdge = 1e-12;
  while (std::abs(a) > g * (1 + kEdge)) {
    const double k = std::cos((a - g) / 2);
    bracket += 2 * kPi / 8 * std::exp(-x * k * k) / (k * k);
    a -= 2 * g;
  }
  if (std::abs(a) >= g * (1 - kEdge)) {
    bracket += (a > 0 ? 1.0 : -1.0) * kPi / 8 * std::exp(-x);
  } else {
    bracket += reduced_integral(a, g, x);
  }
  return -q.alpha / kPi * bracket;
}

double a_remainder_bound(const WedgeBallQuery& q) {
  validate(q);
  const double x = q.eps * q.eps / q.t;
  if (q.alpha <= 0.5) {
    const double s = q.eps * std::sin(q.alpha * kPi);
    return 3 / (64 * q.alpha) * std::exp(-s * s / q.t);
  }
  if (q.alpha <= 2) return q.alpha / 8 * std::exp(-x);
  return q.alpha / 2 * std::exp(-x);
}

double ball_profile(double x) {
  if (x < 0) throw InvalidInput("wedge.ball_profile", "x must be non-negative");
  if (x <= 1400) {
    const double y = x / 2;
    return kPi / 4 * std::exp(-y) *
           (boost::math::cyl_bessel_i(0, y) + boost::math::cyl_bessel_i(1, y));
  }
  QuadratureOptions o;
  o.tol = 1e-17;
  o.rel_tol = 1e-14;
  return integrate_adaptive(
             [x](double u) { return std::exp(-x * u * u) * std::sqrt(1 - u * u); }, 0.0,
             std::min(1.0, 9 / std::sqrt(x)), o)
      .value;
}

double wedge_ball_trace(const WedgeBallQuery& q) {
  validate(q);
  const double e2 = q.eps * q.eps;
  return q.alpha * e2 / (8 * q.t) - e2 / (2 * kPi * q.t) * ball_profile(e2 / q.t) +
         corner_term(q.alpha) + a_remainder(q);
}

double halfplane_sliver_trace(const SliverShape& shape, double t, SliverMode mode) {
  if (!(shape.h > 0) || !(shape.h < shape.eps) || !(shape.b >= 0)) {
    throw InvalidInput("wedge.sliver", "need 0 < h < eps and b >= 0");
  }
  if (!(t > 0)) throw InvalidInput("wedge.sliver", "t must be positive");
  const double e = shape.eps, h = shape.h, b = shape.b;
  QuadratureOptions o;
  o.tol = 1e-15;
  o.rel_tol = 1e-13;
  if (mode == SliverMode::kExact) {
    const auto f = [&](double x2) {
      return -std::expm1(-x2 * x2 / t) * (b + std::sqrt(e * e - x2 * x2));
    };
    return integrate_adaptive(f, 0.0, h, o).value / (4 * kPi * t);
  }
  const auto g = [&](double u) {
    return -std::expm1(-u * u * e * e / t) * std::sqrt(1 - u * u);
  };
  return h * b / (4 * kPi * t) - (b + e) / (8 * std::sqrt(kPi * t)) +
         e * e / (4 * kPi * t) * integrate_adaptive(g, 0.0, h / e, o).value;
}

WedgeRow wedge_row(const WedgeBallQuery& q) {
  WedgeRow r;
  r.query = q;
  r.remainder = a_remainder(q);
  r.trace = wedge_ball_trace(q);
  r.bound = a_remainder_bound(q);
  r.pass = std::abs(r.remainder) <= r.bound;
  return r;
}

std::vector<WedgeRow> wedge_table(const std::vector<WedgeBallQuery>& queries) {
  std::vector<WedgeRow> rows;
  rows.reserve(queries.size());
  for (const auto& q : queries) rows.push_back(wedge_row(q));
  return rows;
}

void write_wedge_csv(std::ostream& out, const std::vector<WedgeRow>& rows) {
  const auto old = out.precision(17);
  out << "alpha,eps,t,trace,A,bound,pass\n";
  for (const auto& r : rows) {
    out << r.query.alpha << ',' << r.query.eps << ',' << r.query.t << ',' << r.trace << ','
        << r.remainder << ',' << r.bound << ',' << (r.pass ? "true" : "false") << '\n';
  }
  out.precision(old);
}

}  // namespace spectral
