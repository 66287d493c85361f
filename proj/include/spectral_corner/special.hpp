#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace spectral {

/// Euler-Mascheroni constant to 30 significant digits.
inline constexpr long double kEulerGamma = 0.577215664901532860606512090082L;

/// Constant-term contribution of a corner of interior angle alpha*pi:
/// (1 - alpha^2) / (24 alpha). Angles are always in units of pi.
template <typename Scalar>
constexpr Scalar corner_term(Scalar alpha) {
  return (Scalar(1) - alpha * alpha) / (Scalar(24) * alpha);
}

/// J_nu(x) for nu >= 0, x >= 0. Throws NumericalError instead of returning
/// an inaccurate value in overflow regimes.
double bessel_j(double nu, double x);

/// k-th positive zero j_{nu,k}, k >= 1. The result is verified to be bracketed
/// by a sign change of J_nu before it is returned.
double bessel_zero(double nu, int k);

/// All positive zeros of J_nu that are <= x_max, ascending.
std::vector<double> bessel_zeros_below(double nu, double x_max);

/// E_1(x) = int_x^inf e^{-s}/s ds for x > 0.
double expint_e1(double x);

/// 1/Gamma(s), entire; exact zero at s = 0, -1, -2, ...
double reciprocal_gamma(double s);

/// Switch point between direct and modular summation of the theta factor.
inline constexpr double kThetaSwitch = 0.15;

/// S(t) = sum_{m>=1} exp(-pi^2 m^2 t), summed directly for t >= kThetaSwitch
/// and through the modular transform
///   S(t) = -1/2 + 1/(2 sqrt(pi t)) + (1/sqrt(pi t)) sum_{m>=1} exp(-m^2/t)
/// below it.
template <typename Scalar>
Scalar rect_theta_factor(Scalar t);

/// The two branches separately; exposed for the modular-identity check.
template <typename Scalar>
Scalar rect_theta_direct(Scalar t);
template <typename Scalar>
Scalar rect_theta_modular(Scalar t);

/// Modular tail (1/sqrt(pi t)) sum_{m>=1} exp(-m^2/t): the part of S(t) not
/// captured by -1/2 + 1/(2 sqrt(pi t)). Accurate for all t > 0.
template <typename Scalar>
Scalar rect_theta_modular_tail(Scalar t);

struct Integral {
  double value = 0.0;
  double error = 0.0;
};

enum class Endpoint { kRegular, kSingular };

struct QuadratureOptions {
  double tol = 1e-12;  // absolute
  double rel_tol = 0.0;
  int max_depth = 30;
  /// When either endpoint carries an integrable singularity the double
  /// exponential rule is used instead of Gauss-Kronrod.
  Endpoint endpoints = Endpoint::kRegular;
};

/// Adaptive integration of f over [a, b]; b may be +infinity (handled by an
/// exponential change of variables). Throws NumericalError carrying the best
/// estimate when the tolerance is not reached.
Integral integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                            const QuadratureOptions& options = {});

inline Integral integrate_adaptive(const std::function<double(double)>& f, double a,
                                   double b, double tol) {
  QuadratureOptions o;
  o.tol = tol;
  return integrate_adaptive(f, a, b, o);
}

// ---------------------------------------------------------------------------

template <typename Scalar>
Scalar rect_theta_direct(Scalar t) {
  using std::exp;
  const Scalar pi2 = std::numbers::pi_v<Scalar> * std::numbers::pi_v<Scalar>;
  Scalar sum(0);
  for (int m = 1;; ++m) {
    const Scalar term = exp(-pi2 * Scalar(m) * Scalar(m) * t);
    sum += term;
    if (term < Scalar(1e-18) * sum || term == Scalar(0)) break;
  }
  return sum;
}

template <typename Scalar>
Scalar rect_theta_modular_tail(Scalar t) {
  using std::exp;
  using std::sqrt;
  Scalar sum(0);
  for (int m = 1;; ++m) {
    const Scalar term = exp(-Scalar(m) * Scalar(m) / t);
    sum += term;
    if (term == Scalar(0) || term < Scalar(1e-18) * sum) break;
  }
  return sum / sqrt(std::numbers::pi_v<Scalar> * t);
}

template <typename Scalar>
Scalar rect_theta_modular(Scalar t) {
  using std::sqrt;
  const Scalar root = sqrt(std::numbers::pi_v<Scalar> * t);
  return Scalar(-0.5) + Scalar(0.5) / root + rect_theta_modular_tail(t);
}

template <typename Scalar>
Scalar rect_theta_factor(Scalar t) {
  return t < Scalar(kThetaSwitch) ? rect_theta_modular(t) : rect_theta_direct(t);
}

}  // namespace spectral
