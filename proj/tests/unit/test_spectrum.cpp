#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "spectral_corner/error.hpp"
#include "spectral_corner/spectrum.hpp"

using namespace spectral;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

// Closed-form five-point eigenvalues of [0,a] x [0,b] with n x m cells.
std::vector<double> five_point_rectangle(double a, double b, int n, int m) {
  const double hx = a / n, hy = b / m;
  std::vector<double> ev;
  for (int i = 1; i < n; ++i)
    for (int j = 1; j < m; ++j)
      ev.push_back(4 / (hx * hx) * std::pow(std::sin(i * kPi / (2 * n)), 2) +
                   4 / (hy * hy) * std::pow(std::sin(j * kPi / (2 * m)), 2));
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace

TEST_CASE("analytic rectangle, disk and sector spectra") {
  const Spectrum sq = analytic_spectrum(Domain::rectangle(1, 2), 50);
  CHECK(sq.size() == 50);
  CHECK(sq.eigenvalues[0] == Approx(kPi * kPi * (1 + 0.25)).epsilon(1e-14));
  CHECK(std::is_sorted(sq.eigenvalues.begin(), sq.eigenvalues.end()));

  const Spectrum disk = analytic_spectrum(Domain::disk(1), 10);
  CHECK(disk.eigenvalues[0] == Approx(std::pow(2.404825557695773, 2)).epsilon(1e-13));
  CHECK(disk.eigenvalues[1] == Approx(std::pow(3.831705970207512, 2)).epsilon(1e-13));
  CHECK(disk.eigenvalues[2] == Approx(disk.eigenvalues[1]).epsilon(1e-14));  // cos and sin modes

  // Half disk: orders k, all simple.
  const Spectrum half = analytic_spectrum(Domain::sector(1, 1), 5);
  CHECK(half.eigenvalues[0] == Approx(std::pow(3.831705970207512, 2)).epsilon(1e-13));

  const Spectrum cone = analytic_spectrum_below(Domain::sector(3, 1), 400);
  const auto ref = oracle::bessel_zeros(1.0 / 3, 20);
  CHECK(cone.eigenvalues[0] == Approx(ref[0] * ref[0]).epsilon(1e-12));
  CHECK(cone.completeness == 400);
  CHECK(cone.eigenvalues.back() <= 400);

  CHECK_THROWS_AS(analytic_spectrum(Domain::polygon({{0, 0}, {1, 0}, {0, 1}}), 5), InvalidInput);
}

TEST_CASE("finite differences reproduce the five-point rectangle spectrum") {
  const Domain d = Domain::rectangle(1, 1);
  const DiscreteOperator op = assemble_fdm(d, {}, 0.0, 1.0 / 16);
  CHECK(op.size() == 15 * 15);
  const auto exact = five_point_rectangle(1, 1, 16, 16);
  const auto ev = solve_eigenvalues(op, 40);
  for (std::size_t i = 0; i < ev.size(); ++i) CHECK(ev[i] == Approx(exact[i]).epsilon(1e-10));
  std::size_t k = 39;
  while (exact[k + 1] - exact[k] < 1e-6) --k;  // stop below a degenerate cluster
  CHECK(eigenvalue_count_below(op, 0.5 * (exact[k] + exact[k + 1])) == k + 1);

  const auto pairs = solve_eigs(op, 6);
  for (const auto& p : pairs) CHECK(weighted_dot(op, p.phi, p.phi) == Approx(1).epsilon(1e-10));
  CHECK(std::abs(weighted_dot(op, pairs[0].phi, pairs[3].phi)) < 1e-9);
}

TEST_CASE("eigenvalue convergence on a triangle and the L-shape") {
  // Right isosceles triangle with legs 1: lambda_1 = 5 pi^2.
  const Domain tri = Domain::polygon({{0, 0}, {1, 0}, {0, 1}});
  const double exact = 5 * kPi * kPi;
  const double e1 = solve_eigenvalues(assemble_fdm(tri, {}, 0.0, 1.0 / 16), 1)[0] - exact;
  const double e2 = solve_eigenvalues(assemble_fdm(tri, {}, 0.0, 1.0 / 32), 1)[0] - exact;
  CHECK(std::abs(e2) < std::abs(e1));
  CHECK(std::abs(e2) < 0.05 * exact);
  CHECK_THROWS_AS(assemble_fdm(Domain::disk(1), {}, 0.0, 1.0 / 16), InvalidInput);
  const Domain ell = Domain::polygon({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}});
  // Reference value for the L-shaped membrane made of three unit squares.
  const double ell_exact = 9.6397238440219;
  CHECK(solve_eigenvalues(assemble_fdm(ell, {}, 0.0, 1.0 / 32), 1)[0] == Approx(ell_exact).epsilon(5e-3));
}

TEST_CASE("spectrum CSV") {
  Spectrum s;
  s.eigenvalues = {1.0, 2.0, 2.0, 5.0};
  std::ostringstream out;
  write_csv(s, out);
  CHECK(out.str() == "index,eigenvalue,multiplicity\n1,1,1\n2,2,2\n4,5,1\n");
}

TEST_SUITE("properties") {
  TEST_CASE("dilation scales eigenvalues by r^-2") {
    for (const Domain& d : {Domain::rectangle(1, 2), Domain::disk(1), Domain::sector(1.5, 1)}) {
      const Spectrum s = analytic_spectrum(d, 30);
      const Spectrum r = analytic_spectrum(d.scaled(2.5), 30);
      for (std::size_t i = 0; i < 30; ++i)
        CHECK(r.eigenvalues[i] == Approx(s.eigenvalues[i] / 6.25).epsilon(1e-12));
    }
    const Domain tri = Domain::polygon({{0, 0}, {1, 0}, {0, 1}});
    const auto a = solve_eigenvalues(assemble_fdm(tri, {}, 0.0, 1.0 / 32), 5);
    const auto b = solve_eigenvalues(assemble_fdm(tri.scaled(2), {}, 0.0, 1.0 / 16), 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(b[i] == Approx(a[i] / 4).epsilon(1e-10));
  }

  TEST_CASE("first eigenvalue decreases as the domain grows") {
    double prev = INFINITY;
    for (double side : {1.0, 1.125, 1.25, 1.5}) {
      const double l1 = solve_eigenvalues(assemble_fdm(Domain::rectangle(side, side), {}, 0.0, 1.0 / 32), 1)[0];
      CHECK(l1 < prev);
      prev = l1;
    }
    const double sq = solve_eigenvalues(assemble_fdm(Domain::rectangle(1, 1), {}, 0.0, 1.0 / 32), 1)[0];
    const double slit = solve_eigenvalues(
        assemble_fdm(Domain::polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{{0.5, 0}, {0.5, 0.5}}}), {}, 0.0,
                     1.0 / 32),
        1)[0];
    CHECK(slit > sq);  // the slit removes room
  }

  TEST_CASE("constant conformal factor rescales the discrete spectrum exactly") {
    const Domain d = Domain::polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{{0.5, 0}, {0.5, 0.5}}});
    const double c = 0.35, u = 0.8;
    const auto flat = solve_eigenvalues(assemble_fdm(d, {}, 0.0, 1.0 / 32), 12);
    const MetricSpec metric{ScalarField::constant(c), u};
    const auto shifted = solve_eigenvalues(assemble_fdm(d, metric, u, 1.0 / 32), 12);
    for (std::size_t i = 0; i < 12; ++i)
      CHECK(shifted[i] == Approx(flat[i] * std::exp(-2 * u * c)).epsilon(1e-10));
  }

  TEST_CASE("Weyl ratio tends to one") {
    const Spectrum disk = analytic_spectrum(Domain::disk(1), 20000);
    CHECK(std::abs(weyl_ratio(disk, 20000) - 1) < std::abs(weyl_ratio(disk, 200) - 1));
    CHECK(weyl_ratio(disk, 20000) == Approx(1).epsilon(1e-2));
    const Spectrum cone = analytic_spectrum(Domain::sector(3, 1), 20000);
    CHECK(weyl_ratio(cone, 20000) == Approx(1).epsilon(1e-2));
  }
}
