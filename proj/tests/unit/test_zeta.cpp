#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "spectral_corner/error.hpp"
#include "spectral_corner/zeta.hpp"

using namespace spectral;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

double zeta_at(const TraceProvider& trace, const ExpansionCoefficients& c, double s) {
  return zeta_continued(trace, c, s).value;
}

}  // namespace

TEST_CASE("unit square determinant matches the Kronecker limit formula") {
  const RectangleTrace sq(1, 1);
  const ZetaEvaluation e = zeta_prime_at_zero(sq, sq.coefficients());
  CHECK(std::abs(e.zeta_prime0 - oracle::rectangle_zeta_prime(1, 1)) < 1e-10);
  CHECK(e.zeta_prime0 == Approx(0.610245660528891).epsilon(1e-12));
  CHECK(e.zdet == Approx(std::exp(-e.zeta_prime0)).epsilon(1e-15));
  CHECK(e.zeta0 == Approx(0.25));
  CHECK(e.budget.total() < 1e-10);
  for (auto [a, b] : {std::pair{1.0, 2.0}, {3.0, 0.5}}) {
    const RectangleTrace r(a, b);
    CHECK(std::abs(zeta_prime_at_zero(r, r.coefficients()).zeta_prime0 - oracle::rectangle_zeta_prime(a, b)) < 1e-9);
  }
}

TEST_CASE("toy spectrum n^2") {
  const IntervalTrace toy(kPi);
  const ZetaEvaluation e = zeta_prime_at_zero(toy, toy.coefficients());
  CHECK(e.zeta_prime0 == Approx(-std::log(2 * kPi)).epsilon(1e-10));
  CHECK(e.zeta0 == Approx(-0.5));
  for (double s : {0.75, 1.5, 2.0, 3.0}) CHECK(zeta_at(toy, toy.coefficients(), s) == Approx(std::riemann_zeta(2 * s)).epsilon(1e-9));
}

TEST_CASE("Dirichlet series with its Weyl tail") {
  const Spectrum sq = analytic_spectrum_below(Domain::rectangle(1, 1), 1e6);
  const ZetaSample z = zeta_series(sq, 2.0);
  CHECK(z.error < 1e-8);
  CHECK_THROWS_AS(zeta_series(sq, 1.5, 1e-14), NumericalError);
  CHECK_THROWS_AS(zeta_series(sq, 1.0), InvalidInput);
}

TEST_CASE("continuation rejects poles and the half plane beyond -1/2") {
  const RectangleTrace sq(1, 1);
  CHECK_THROWS_AS(zeta_continued(sq, sq.coefficients(), 1.0), InvalidInput);
  CHECK_THROWS_AS(zeta_continued(sq, sq.coefficients(), 0.5), InvalidInput);
  CHECK_THROWS_AS(zeta_continued(sq, sq.coefficients(), -0.7), InvalidInput);
}

TEST_CASE("truncated spectra: disk determinant through the remainder model") {
  const Domain disk = Domain::disk(1);
  const SpectrumTrace coarse(analytic_spectrum_below(disk, 2e5));
  const SpectrumTrace fine(analytic_spectrum_below(disk, 1e6));
  CHECK(coarse.floor() == Approx(kTailThreshold / 2e5));
  const auto a = zeta_prime_at_zero(coarse, flat_coefficients(disk), {1e-5});
  const auto b = zeta_prime_at_zero(fine, flat_coefficients(disk));
  CHECK(std::abs(a.zeta_prime0 - b.zeta_prime0) < a.budget.total() + b.budget.total());
  ZetaOptions strict;
  strict.tol = 1e-12;
  CHECK_THROWS_AS(zeta_prime_at_zero(coarse, flat_coefficients(disk), strict), NumericalError);
}

TEST_SUITE("properties") {
  TEST_CASE("continuation agrees with the Dirichlet series") {
    const RectangleTrace sq(1, 1);
    const Spectrum spec = analytic_spectrum_below(Domain::rectangle(1, 1), 1e7);
    for (double s : {1.5, 2.0, 3.0, 5.0}) {
      const ZetaSample series = zeta_series(spec, s, 1e-7);
      const ZetaSample cont = zeta_continued(sq, sq.coefficients(), s);
      CHECK(std::abs(series.value - cont.value) <= series.error + cont.error + 1e-12);
      CHECK(std::abs(series.value - cont.value) < 1e-6);
    }
  }

  TEST_CASE("residues at s = 1 and s = 1/2") {
    const RectangleTrace sq(1, 1);
    const auto c = sq.coefficients();
    const double d = 1e-4;
    auto residue = [&](double pole) {
      return 0.5 * d * (zeta_at(sq, c, pole + d) - zeta_at(sq, c, pole - d));
    };
    CHECK(residue(1.0) == Approx(c.a_m1).epsilon(1e-4));
    CHECK(residue(0.5) == Approx(c.a_mhalf / std::tgamma(0.5)).epsilon(1e-4));
  }

  TEST_CASE("zeta(0) equals a0") {
    const RectangleTrace sq(1, 1);
    const auto c = sq.coefficients();
    for (double s : {-1e-7, 1e-7}) CHECK(std::abs(zeta_at(sq, c, s) - c.a0) < 1e-6);
    const IntervalTrace toy(kPi);
    CHECK(std::abs(zeta_at(toy, toy.coefficients(), 1e-7) + 0.5) < 1e-6);
  }

  TEST_CASE("constant conformal shift: zeta'(0) moves by 2 c zeta(0)") {
    const double base = zeta_prime_at_zero(RectangleTrace(1, 1), RectangleTrace(1, 1).coefficients()).zeta_prime0;
    for (double c : {-0.4, 0.25, 1.0}) {
      const RectangleTrace r(std::exp(c), std::exp(c));
      CHECK(zeta_prime_at_zero(r, r.coefficients()).zeta_prime0 == Approx(base + 2 * c * 0.25).epsilon(1e-10));
    }
    const Domain disk = Domain::disk(1);
    const Spectrum s = analytic_spectrum_below(disk, 1e6);
    const double d0 = zeta_prime_at_zero(SpectrumTrace(s), flat_coefficients(disk)).zeta_prime0;
    const double c = 0.3;
    const double d1 =
        zeta_prime_at_zero(SpectrumTrace(rescaled(s, std::exp(-2 * c))), flat_coefficients(disk.scaled(std::exp(c))))
            .zeta_prime0;
    CHECK(d1 - d0 == Approx(2 * c / 6).epsilon(1e-6));
  }
}
