#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "oracles.hpp"
#include "spectral_corner/error.hpp"
#include "spectral_corner/special.hpp"

using namespace spectral;
using doctest::Approx;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_SUITE("properties") {
  TEST_CASE("corner term: fixed values and strict decrease") {
    CHECK(corner_term(1.0) == 0.0);
    CHECK(corner_term(0.5) == Approx(1.0 / 16).epsilon(1e-15));
    CHECK(corner_term(2.0) == Approx(-1.0 / 16).epsilon(1e-15));
    double prev = corner_term(0.01);
    for (int i = 2; i <= 1000; ++i) {
      const double c = corner_term(0.01 * i);
      CHECK(c < prev);
      prev = c;
    }
  }

  TEST_CASE("theta factor: modular and direct branches agree") {
    for (int i = 0; i <= 90; ++i) {
      const double t = 0.05 + i * 0.005;
      CHECK(std::abs(rect_theta_direct(t) - rect_theta_modular(t)) < 1e-12);
    }
    // long double keeps the identity at a tighter level
    CHECK(std::abs(static_cast<double>(rect_theta_direct(0.2L) - rect_theta_modular(0.2L))) < 1e-15);
  }

  TEST_CASE("Bessel three-term recurrence") {
    for (double nu : {1.0, 4.0 / 3, 1.5, 5.0 / 3, 2.0, 4.5, 12.25, 40.0}) {
      for (double x : {0.3, 1.0, 2.7, 7.5, 15.0, 33.0, 80.0}) {
        const double lhs = bessel_j(nu + 1, x) + bessel_j(nu - 1, x);
        CHECK(std::abs(lhs - 2 * nu / x * bessel_j(nu, x)) < 1e-10);
      }
    }
  }

  TEST_CASE("Bessel zeros are zeros") {
    for (double nu : {0.0, 1.0 / 3, 2.0 / 3, 2.0, 10.0 / 3, 25.5, 100.0}) {
      for (int k : {1, 2, 5, 20, 60}) {
        const double j = bessel_zero(nu, k);
        CHECK(std::abs(bessel_j(nu, j)) < 1e-10);
      }
    }
  }
}

TEST_CASE("bessel_j against its power series") {
  for (double nu : {0.0, 1.0 / 3, 0.5, 1.5, 2.0 / 3, 3.0, 7.25}) {
    for (double x : {1e-3, 0.1, 1.0, 4.0, 9.5, 14.0}) {
      CHECK(bessel_j(nu, x) == Approx(oracle::bessel_j_series(nu, x)).epsilon(1e-11).scale(1e-12));
    }
  }
  CHECK(bessel_j(0.5, 2.0) == Approx(std::sqrt(2 / (kPi * 2.0)) * std::sin(2.0)).epsilon(1e-13));
}

TEST_CASE("bessel zeros: known values and interlacing") {
  CHECK(bessel_zero(0.0, 1) == Approx(2.404825557695773).epsilon(1e-13));
  CHECK(bessel_zero(1.0, 1) == Approx(3.831705970207512).epsilon(1e-13));
  CHECK(bessel_zero(0.5, 3) == Approx(3 * kPi).epsilon(1e-13));
  for (double nu : {0.25, 2.0 / 3, 5.0}) {
    for (int k = 1; k < 10; ++k) {
      CHECK(bessel_zero(nu, k) < bessel_zero(nu + 1, k));
      CHECK(bessel_zero(nu + 1, k) < bessel_zero(nu, k + 1));
    }
  }
  const auto zs = bessel_zeros_below(2.0 / 3, 50.0);
  const auto ref = oracle::bessel_zeros(2.0 / 3, 50.0);
  REQUIRE(zs.size() == ref.size());
  for (std::size_t i = 0; i < zs.size(); ++i) CHECK(zs[i] == Approx(ref[i]).epsilon(1e-12));
  CHECK_THROWS_AS(bessel_zero(1.0, 0), InvalidInput);
}

TEST_CASE("exponential integral and reciprocal gamma") {
  for (double x : {1e-4, 0.1, 1.0, 5.0, 30.0}) {
    const double ref = integrate_adaptive([x](double s) { return std::exp(-x / s) / s; }, 0, 1, 1e-15).value;
    CHECK(expint_e1(x) == Approx(ref).epsilon(1e-11));
  }
  CHECK(reciprocal_gamma(0.0) == 0.0);
  CHECK(reciprocal_gamma(-2.0) == 0.0);
  CHECK(reciprocal_gamma(0.5) == Approx(1 / std::sqrt(kPi)).epsilon(1e-14));
  CHECK(reciprocal_gamma(4.0) == Approx(1.0 / 6).epsilon(1e-14));
  CHECK(reciprocal_gamma(-0.5) == Approx(-1 / (2 * std::sqrt(kPi))).epsilon(1e-14));
}

TEST_CASE("theta factor values") {
  CHECK(rect_theta_factor(0.1) == Approx(0.3921431).epsilon(1e-7));
  CHECK(rect_theta_factor(0.001) == Approx(8.420621).epsilon(1e-7));
  CHECK(rect_theta_factor(0.1) * rect_theta_factor(0.1) == Approx(oracle::square_trace(0.1)).epsilon(1e-13));
}

TEST_CASE("adaptive quadrature") {
  CHECK(integrate_adaptive([](double x) { return std::sin(x); }, 0, kPi).value == Approx(2.0).epsilon(1e-13));
  const Integral g = integrate_adaptive([](double x) { return std::exp(-x * x); }, 0,
                                        std::numeric_limits<double>::infinity(), 1e-13);
  CHECK(g.value == Approx(std::sqrt(kPi) / 2).epsilon(1e-12));
  QuadratureOptions singular;
  singular.endpoints = Endpoint::kSingular;
  singular.tol = 1e-12;
  CHECK(integrate_adaptive([](double x) { return 1 / std::sqrt(x); }, 0, 1, singular).value ==
        Approx(2.0).epsilon(1e-10));
  QuadratureOptions strict;
  strict.tol = 1e-15;
  strict.max_depth = 2;
  CHECK_THROWS_AS(integrate_adaptive([](double x) { return std::sin(1 / (x + 1e-3)); }, 0, 1, strict),
                  NumericalError);
}
