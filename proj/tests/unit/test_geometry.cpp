#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "spectral_corner/error.hpp"
#include "spectral_corner/geometry.hpp"

using namespace spectral;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

Domain slit_square() { return Domain::polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{{0.5, 0}, {0.5, 0.5}}}); }

double sector_a0(double alpha) { return alpha / 12 + 1.0 / 8 + corner_term(alpha); }

}  // namespace

TEST_CASE("expressions parse, evaluate and differentiate") {
  const Expression e = Expression::parse("0.2*x*y + sin(pi*x)^2 - exp(-y)/2");
  const double x = 0.3, y = 0.7;
  CHECK(e.evaluate(x, y) == Approx(0.2 * x * y + std::pow(std::sin(kPi * x), 2) - std::exp(-y) / 2));
  CHECK(e.derivative('x').evaluate(x, y) ==
        Approx(0.2 * y + 2 * kPi * std::sin(kPi * x) * std::cos(kPi * x)));
  CHECK(e.derivative('y').evaluate(x, y) == Approx(0.2 * x + std::exp(-y) / 2));
  CHECK(Expression::parse("2^3^2").evaluate(0, 0) == Approx(512));
  CHECK(Expression::parse("-x^2").evaluate(3, 0) == Approx(-9));
  CHECK(Expression::parse("3*e - e*3").is_constant());
  CHECK_THROWS_AS(Expression::parse("x +* y"), InvalidInput);
  CHECK_THROWS_AS(Expression::parse("foo(x)"), InvalidInput);
  CHECK_THROWS_AS(Expression::parse("abs(x)").derivative('x'), InvalidInput);
  const Expression r = Expression::parse(e.to_string());
  CHECK(r.evaluate(x, y) == Approx(e.evaluate(x, y)).epsilon(1e-14));
}

TEST_CASE("scalar fields: analytic and gridded derivatives") {
  const ScalarField f = ScalarField::parse("x^2*y + cos(y)");
  const Point p(0.4, 0.9);
  CHECK(f.gradient(p).x() == Approx(2 * 0.4 * 0.9));
  CHECK(f.laplacian(p) == Approx(2 * 0.9 - std::cos(0.9)));
  CHECK(ScalarField::constant(0.3).is_constant());
  CHECK(ScalarField::constant(0.3).constant_value() == 0.3);

  const int n = 41;
  Eigen::MatrixXd s(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s(i, j) = f(Point(i * 0.025, j * 0.025));
  const ScalarField g = ScalarField::from_grid(s, 0, 0, 0.025, 0.025);
  CHECK(g(p) == Approx(f(p)).epsilon(1e-7));
  CHECK(g.gradient(p).y() == Approx(f.gradient(p).y()).epsilon(1e-6));
  CHECK(g.laplacian(p) == Approx(f.laplacian(p)).epsilon(1e-4));
}

TEST_CASE("domain construction and validation") {
  const Domain sq = Domain::rectangle(1, 1);
  CHECK(sq.area() == Approx(1));
  CHECK(sq.perimeter() == Approx(4));
  CHECK(sq.corners().size() == 4);
  CHECK(sq.contains(Point(0.5, 0.5)));
  CHECK_FALSE(sq.contains(Point(1.5, 0.5)));

  const Domain disk = Domain::disk(2);
  CHECK(disk.area() == Approx(4 * kPi));
  CHECK(disk.perimeter() == Approx(4 * kPi));
  CHECK(disk.corners().empty());

  const Domain cone = Domain::sector(3, 1);
  CHECK_FALSE(cone.planar());
  CHECK(cone.area() == Approx(1.5 * kPi));

  CHECK_THROWS_AS(Domain::rectangle(-1, 1), InvalidInput);
  CHECK_THROWS_AS(Domain::disk(0), InvalidInput);
  CHECK_THROWS_AS(Domain::sector(0, 1), InvalidInput);
  CHECK_THROWS_AS(Domain::polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), InvalidInput);  // self-intersecting
  CHECK_THROWS_AS(Domain::polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{{0.5, 0.5}, {1.5, 0.5}}}),
                  InvalidInput);  // slit leaves the polygon
}

TEST_CASE("slit square corners") {
  const Domain d = slit_square();
  CHECK(d.perimeter() == Approx(5));
  CHECK_FALSE(d.contains(Point(0.5, 0.25)));
  int tips = 0, mouths = 0;
  double mouth_sum = 0;
  for (const Corner& c : d.corners()) {
    if (c.kind == Corner::Kind::kSlitTip) {
      ++tips;
      CHECK(c.alpha == Approx(2));
    }
    if (c.kind == Corner::Kind::kSlitMouth) {
      ++mouths;
      mouth_sum += c.alpha;
    }
  }
  CHECK(tips == 1);
  CHECK(mouths == 2);
  CHECK(mouth_sum == Approx(1).epsilon(1e-14));
  CHECK(flat_coefficients(d).a0 == Approx(5.0 / 16).epsilon(1e-14));
}

TEST_CASE("flat coefficients of the standard domains") {
  const auto sq = flat_coefficients(Domain::rectangle(1, 1));
  CHECK(sq.a_m1 == Approx(1 / (4 * kPi)).epsilon(1e-14));
  CHECK(sq.a_mhalf == Approx(-4 / (8 * std::sqrt(kPi))).epsilon(1e-14));
  CHECK(sq.a0 == Approx(0.25).epsilon(1e-14));
  CHECK(flat_coefficients(Domain::disk(1)).a0 == Approx(1.0 / 6).epsilon(1e-12));
  for (double alpha : {0.5, 1.5, 3.0}) {
    CHECK(flat_coefficients(Domain::sector(alpha, 1)).a0 == Approx(sector_a0(alpha)).epsilon(1e-12));
  }
  CHECK(sector_a0(3) == Approx(0.2638889).epsilon(1e-7));
}

TEST_SUITE("properties") {
  TEST_CASE("mouth angles of slits meeting a straight edge sum to one") {
    for (double x : {0.2, 0.5, 0.8}) {
      for (double angle : {0.3, 0.9, 1.6, 2.5}) {
        const Point a(x, 0), b(x + 0.15 * std::cos(angle), 0.15 * std::sin(angle));
        const Domain d = Domain::polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{a, b}});
        double sum = 0;
        for (const Corner& c : d.corners())
          if (c.kind == Corner::Kind::kSlitMouth) sum += c.alpha;
        CHECK(sum == Approx(1).epsilon(1e-13));
      }
    }
  }

  TEST_CASE("dilation scales area and perimeter terms, keeps a0") {
    for (const Domain& d : {Domain::rectangle(1, 2), Domain::disk(1), Domain::sector(1.5, 1), slit_square()}) {
      const auto c = flat_coefficients(d);
      for (double r : {0.5, 3.0}) {
        const auto s = flat_coefficients(d.scaled(r));
        CHECK(s.a_m1 == Approx(r * r * c.a_m1).epsilon(1e-12));
        CHECK(s.a_mhalf == Approx(r * c.a_mhalf).epsilon(1e-12));
        CHECK(s.a0 == Approx(c.a0).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("geometric coefficients with psi = 1 reproduce volume and length") {
    const ScalarField sigma = ScalarField::parse("0.3*x - 0.2*y^2");
    const double u = 0.7;
    auto density = [&](double x, double y) { return std::exp(u * sigma(Point(x, y))); };
    // Independent tensor quadrature on the unit square and the unit disk.
    const double sq_vol = oracle::integrate([&](double x) {
      return oracle::integrate([&](double y) { return std::pow(density(x, y), 2); }, 0, 1, 8);
    }, 0, 1, 8);
    double sq_len = 0;
    sq_len += oracle::integrate([&](double s) { return density(s, 0) + density(s, 1); }, 0, 1, 8);
    sq_len += oracle::integrate([&](double s) { return density(0, s) + density(1, s); }, 0, 1, 8);
    const double disk_vol = oracle::integrate([&](double r) {
      return r * oracle::integrate([&](double th) {
        return std::pow(density(r * std::cos(th), r * std::sin(th)), 2);
      }, 0, 2 * kPi, 16);
    }, 0, 1, 8);
    const double disk_len =
        oracle::integrate([&](double th) { return density(std::cos(th), std::sin(th)); }, 0, 2 * kPi, 16);

    const auto sq = geometric_coefficients(Domain::rectangle(1, 1), {sigma, u});
    CHECK(sq.a_m1 == Approx(sq_vol / (4 * kPi)).epsilon(1e-10));
    CHECK(sq.a_mhalf == Approx(-sq_len / (8 * std::sqrt(kPi))).epsilon(1e-10));
    const auto disk = geometric_coefficients(Domain::disk(1), {sigma, u});
    CHECK(disk.a_m1 == Approx(disk_vol / (4 * kPi)).epsilon(1e-10));
    CHECK(disk.a_mhalf == Approx(-disk_len / (8 * std::sqrt(kPi))).epsilon(1e-10));
  }

  TEST_CASE("Gauss-Bonnet for the conformal metric on the disk") {
    // int K dA + int k ds = 2 pi for any conformal factor on a disk
    const Domain d = Domain::disk(1);
    const ConformalMetric g = conformal_transform(d, {ScalarField::parse("0.4*x*y + 0.1*x^2"), 1.0}, 1.0);
    CHECK(g.total_curvature() + g.total_boundary_curvature() == Approx(2 * kPi).epsilon(1e-9));
  }
}
