#pragma once

// Reference values computed without the library: closed forms, series in
// long double and plain tensor Gauss-Legendre quadrature.

#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

constexpr double kPi = std::numbers::pi;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton on P_n.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    long double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    long double dp = 0;
    for (int it = 0; it < 100; ++it) {
      long double p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const long double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
      const long double dz = p1 / dp;
      z -= dz;
      if (std::fabs(static_cast<double>(dz)) < 1e-19) break;
    }
    x[i] = static_cast<double>(z);
    w[i] = static_cast<double>(2 / ((1 - z * z) * dp * dp));
  }
  return {x, w};
}

/// Composite Gauss-Legendre over [a, b] with `panels` equal panels.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        int panels = 40, int order = 20) {
  static const auto rule = gauss_legendre(20);
  const auto& [x, w] = order == 20 ? rule : gauss_legendre(order);
  const double h = (b - a) / panels;
  double sum = 0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (std::size_t i = 0; i < x.size(); ++i) sum += w[i] * f(mid + 0.5 * h * x[i]);
  }
  return 0.5 * h * sum;
}

/// J_nu(x) by its power series in long double; good to ~1e-13 for x <= 15.
inline double bessel_j_series(double nu, double x) {
  const long double h = x / 2.0L;
  const long double n = nu;
  long double term = std::pow(h, n) / std::tgamma(n + 1);
  long double sum = term;
  for (int k = 1; k < 400; ++k) {
    term *= -h * h / (k * (k + n));
    sum += term;
    if (std::fabs(term) < 1e-22L * std::fabs(sum)) break;
  }
  return static_cast<double>(sum);
}

/// zeta'(0) of the Dirichlet Laplacian on an a x b rectangle from the
/// Kronecker limit formula (Chowla-Selberg in the ratio c = a/b).
inline double rectangle_zeta_prime(double a, double b) {
  const long double c = a / b;
  const long double pi = std::numbers::pi_v<long double>;
  long double eta = 0;
  for (int n = 1; n < 200; ++n) {
    const long double q = std::exp(-2 * pi * c * n);
    eta += std::log1p(-q);
    if (q < 1e-22L) break;
  }
  return static_cast<double>(-0.5L * std::log(pi / a) + 0.5L * std::log(2 * pi / c) +
                             pi * c / 12 - eta);
}

/// Unit-square heat trace as a plain double sum of exponentials.
inline double square_trace(double t) {
  double s = 0;
  for (int m = 1; m < 400; ++m) {
    const double e = std::exp(-kPi * kPi * m * m * t);
    if (e < 1e-300) break;
    s += e;
  }
  return s * s;
}

/// int over the quarter disk of radius eps of the quarter-plane Dirichlet
/// heat kernel diagonal (1/4 pi t)(1 - e^{-x^2/t})(1 - e^{-y^2/t}).
inline double quarter_plane_ball(double eps, double t) {
  auto radial = [&](double r) {
    return r * integrate(
                   [&](double th) {
                     const double x = r * std::cos(th), y = r * std::sin(th);
                     return -std::expm1(-x * x / t) * -std::expm1(-y * y / t);
                   },
                   0, kPi / 2, 8);
  };
  return integrate(radial, 0, eps, 40) / (4 * kPi * t);
}

/// Same over the half disk for the half-plane kernel (1/4 pi t)(1 - e^{-y^2/t}).
inline double half_plane_ball(double eps, double t) {
  auto radial = [&](double r) {
    return r * integrate([&](double th) { return -std::expm1(-std::pow(r * std::sin(th), 2) / t); },
                         0, kPi, 16);
  };
  return integrate(radial, 0, eps, 40) / (4 * kPi * t);
}

/// Positive zeros of J_nu below x_max by scanning and bisection.
inline std::vector<double> bessel_zeros(double nu, double x_max) {
  std::vector<double> z;
  const double step = 0.05;
  double a = std::max(nu, 1e-3), fa = std::cyl_bessel_j(nu, a);
  for (double b = a + step; b <= x_max + step; b += step) {
    const double fb = std::cyl_bessel_j(nu, b);
    if (fa * fb < 0) {
      double lo = a, hi = b, flo = fa;
      for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi), fm = std::cyl_bessel_j(nu, mid);
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      const double root = 0.5 * (lo + hi);
      if (root <= x_max) z.push_back(root);
    }
    a = b;
    fa = fb;
  }
  return z;
}

/// int_{B_eps} H(t; x, x) dx on a Dirichlet sector of opening alpha*pi and
/// radius R (cone sector for alpha > 2) from its Bessel eigenfunctions:
/// each mode contributes e^{-t kappa^2} times the share of its radial mass
/// inside r < eps,
///   [eps^2 (J'(kappa eps)^2 + (1 - nu^2/(kappa eps)^2) J(kappa eps)^2)] / [R^2 J'(j)^2].
/// For R well beyond eps this is the infinite-wedge ball trace.
inline double sector_ball_trace(double alpha, double eps, double t, double R) {
  const double kmax = R * std::sqrt(50 / t);
  double sum = 0;
  for (int k = 1;; ++k) {
    const double nu = k / alpha;
    if (nu > kmax) break;
    auto dj = [nu](double x) { return nu / x * std::cyl_bessel_j(nu, x) - std::cyl_bessel_j(nu + 1, x); };
    for (double j : bessel_zeros(nu, kmax)) {
      const double kappa = j / R, x = kappa * eps;
      const double jx = std::cyl_bessel_j(nu, x), djx = dj(x);
      const double inner = eps * eps * (djx * djx + (1 - nu * nu / (x * x)) * jx * jx);
      sum += std::exp(-t * kappa * kappa) * inner / (R * R * std::pow(dj(j), 2));
    }
  }
  return sum;
}

}  // namespace oracle
