#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "spectral_corner/anomaly.hpp"
#include "spectral_corner/error.hpp"

using namespace spectral;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

double differentiated_at(const Domain& d, const ScalarField& sigma, double u) {
  return pa_rhs(d, sigma, AnomalyForm::kDifferentiated, u).total();
}

}  // namespace

TEST_CASE("geometric side for constant sigma is the corner sum") {
  const double c = 0.3;
  const auto sq = pa_rhs(Domain::rectangle(1, 1), ScalarField::constant(c), AnomalyForm::kIntegrated);
  CHECK(sq.dirichlet == 0.0);
  CHECK(sq.normal_derivative == 0.0);
  CHECK(std::abs(sq.boundary_curvature) < 1e-14);
  REQUIRE(sq.corners.size() == 4);
  CHECK(sq.total() == Approx(c / 12 * 4 * (1 - 0.25) / 0.5).epsilon(1e-13));

  // Smooth disk: only the boundary curvature term, (1/6 pi) c 2 pi = c/3.
  const auto disk = pa_rhs(Domain::disk(1), ScalarField::constant(c), AnomalyForm::kIntegrated);
  CHECK(disk.total() == Approx(c / 3).epsilon(1e-10));
}

TEST_CASE("Dirichlet energy and normal flux against independent quadrature") {
  const ScalarField sigma = ScalarField::parse("0.2*x*y + 0.1*x^2");
  const auto b = pa_rhs(Domain::rectangle(1, 1), sigma, AnomalyForm::kIntegrated);
  const double energy = oracle::integrate([](double x) {
    return oracle::integrate([x](double y) {
      const double gx = 0.2 * y + 0.2 * x, gy = 0.2 * x;
      return gx * gx + gy * gy;
    }, 0, 1, 4);
  }, 0, 1, 4);
  CHECK(b.dirichlet == Approx(energy / (12 * kPi)).epsilon(1e-10));
  // Flux of grad sigma through the boundary equals int Laplacian sigma = 0.2.
  CHECK(b.normal_derivative == Approx(0.2 / (4 * kPi)).epsilon(1e-10));
}

TEST_CASE("constant sigma: exact rescaling route") {
  AnomalyConfig cfg;
  cfg.lemma = false;
  const auto r = pa_verify(Domain::rectangle(1, 1), ScalarField::constant(0.4), cfg);
  CHECK(r.integrated.route == "analytic");
  // Spectral side: 2 c zeta(0) = 2 * 0.4 * 1/4.
  CHECK(r.integrated.lhs == Approx(0.2).epsilon(1e-8));
  CHECK(r.integrated.rhs == Approx(0.2).epsilon(1e-12));
  CHECK(r.integrated.gap < 1e-6);
  REQUIRE(r.differentiated);
  CHECK(r.differentiated->gap < 1e-4);
  CHECK(r.pass);

  const auto zero = pa_verify(Domain::rectangle(1, 1), ScalarField::constant(0), cfg);
  CHECK(zero.integrated.route == "identity");
  CHECK(zero.integrated.gap == 0.0);
  CHECK(zero.pass);

  const auto disk = pa_verify(Domain::disk(1), ScalarField::constant(-0.25), cfg);
  CHECK(disk.integrated.gap < 1e-4);
  CHECK(disk.pass);
}

TEST_CASE("non-constant sigma needs a polygon") {
  CHECK_THROWS_AS(pa_verify(Domain::disk(1), ScalarField::parse("x")), InvalidInput);
}

TEST_CASE("report table lists every term") {
  AnomalyConfig cfg;
  cfg.lemma = false;
  std::ostringstream out;
  print_table(out, pa_verify(Domain::rectangle(1, 1), ScalarField::constant(0.1), cfg));
  const std::string s = out.str();
  CHECK(s.find("corner") != std::string::npos);
  CHECK(s.find("normal derivative") != std::string::npos);
}

TEST_SUITE("properties") {
  TEST_CASE("integrated form is minus the u-integral of the differentiated form") {
    const Domain sq = Domain::rectangle(1, 1);
    const Domain tri = Domain::polygon({{0, 0}, {1, 0}, {0.3, 0.8}});
    for (const Domain& d : {sq, tri}) {
      for (const char* s : {"0.2*x*y", "0.3*x - 0.1*y^2", "0.1*sin(x)*cos(y)"}) {
        const ScalarField sigma = ScalarField::parse(s);
        const double integrated = pa_rhs(d, sigma, AnomalyForm::kIntegrated).total();
        const double path = oracle::integrate([&](double u) { return differentiated_at(d, sigma, u); }, 0, 1, 2, 16);
        CHECK(integrated == Approx(-path).epsilon(1e-7));
      }
    }
  }

  TEST_CASE("Stokes consistency of the Dirichlet energy") {
    // int |grad s|^2 = -int s Lap s + int s d_n s
    const ScalarField sigma = ScalarField::parse("0.3*x*y - 0.2*y^2 + 0.1*sin(x)");
    for (const Domain& d : {Domain::rectangle(1, 2), Domain::disk(1),
                            Domain::polygon({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}})}) {
      const double energy = d.integrate_interior([&](const Point& p) { return sigma.gradient(p).squaredNorm(); }).value;
      const double bulk = d.integrate_interior([&](const Point& p) { return sigma(p) * sigma.laplacian(p); }).value;
      const double flux =
          d.integrate_boundary([&](const BoundarySample& s) { return sigma(s.point) * sigma.gradient(s.point).dot(s.normal); })
              .value;
      CHECK(energy == Approx(flux - bulk).epsilon(1e-9));
    }
  }

  TEST_CASE("cocycle:the path 0 -> 1 -> 2 equals the direct path for 2 sigma") {
    const Domain d = Domain::polygon({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}});
    const ScalarField sigma = ScalarField::parse("0.15*x*y - 0.05*x");
    const double first = pa_rhs(d, sigma, AnomalyForm::kIntegrated).total();
    const double second =
        -oracle::integrate([&](double u) { return differentiated_at(d, sigma, u); }, 1, 2, 2, 16);
    const double direct = pa_rhs(d, ScalarField::parse("0.3*x*y - 0.1*x"), AnomalyForm::kIntegrated).total();
    CHECK(first + second == Approx(direct).epsilon(1e-7));
  }

  TEST_CASE("constant sigma: both sides agree on rectangles, disks and cones") {
    AnomalyConfig cfg;
    cfg.lemma = false;
    for (const Domain& d : {Domain::rectangle(1, 2), Domain::disk(1), Domain::sector(1.5, 1)}) {
      for (double c : {-0.3, 0.5}) {
        const auto r = pa_verify(d, ScalarField::constant(c), cfg);
        CHECK(r.integrated.gap < cfg.tol_constant);
        CHECK(r.pass);
      }
    }
  }
}
