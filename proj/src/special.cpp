#include "spectral_corner/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "spectral_corner/error.hpp"

namespace spectral {
namespace {

// 7-point Gauss / 15-point Kronrod pair (QUADPACK qk15 tables).
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  int depth;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel kronrod_panel(const std::function<double(double)>& f, double a, double b, int depth) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half), depth};
}

Integral adaptive_kronrod(const std::function<double(double)>& f, double a, double b,
                          const QuadratureOptions& o) {
  std::priority_queue<Panel> heap;
  Panel first = kronrod_panel(f, a, b, 0);
  double value = first.value;
  double error = first.error;
  heap.push(first);
  constexpr int kMaxPanels = 20000;
  int panels = 1;
  auto done = [&] {
    return error <= std::max(o.tol, o.rel_tol * std::abs(value)) || !std::isfinite(value);
  };
  while (!done()) {
    Panel worst = heap.top();
    if (worst.depth >= o.max_depth * 2 || panels >= kMaxPanels) {
      std::ostringstream msg;
      msg << "adaptive quadrature on [" << a << ", " << b << "] stalled at error " << error
          << " (requested " << o.tol << ")";
      throw NumericalError("special.integrate_adaptive", msg.str(), value, error);
    }
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Panel left = kronrod_panel(f, worst.a, mid, worst.depth + 1);
    Panel right = kronrod_panel(f, mid, worst.b, worst.depth + 1);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++panels;
  }
  if (!std::isfinite(value)) {
    throw NumericalError("special.integrate_adaptive", "integrand produced a non-finite value",
                         value, error);
  }
  // Re-sum to shed accumulated cancellation in the running totals.
  double sum = 0.0, err = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  return {sum, err};
}

Integral tanh_sinh_rule(const std::function<double(double)>& f, double a, double b,
                        const QuadratureOptions& o) {
  boost::math::quadrature::tanh_sinh<double> rule(15);
  double error = 0.0, l1 = 0.0;
  std::size_t levels = 0;
  const double value = rule.integrate(f, a, b, 1e-14, &error, &l1, &levels);
  const double achieved = error * std::max(l1, 1e-300);
  if (!(achieved <= std::max(o.tol, o.rel_tol * std::abs(value))) || !std::isfinite(value)) {
    // Fall back on bisection-driven Kronrod, which copes with most integrable
    // endpoint singularities given enough depth.
    return adaptive_kronrod(f, a, b, o);
  }
  return {value, achieved};
}

}  // namespace

double bessel_j(double nu, double x) {
  if (!(nu >= 0.0) || !(x >= 0.0) || !std::isfinite(nu) || !std::isfinite(x)) {
    throw InvalidInput("special.bessel_j", "bessel_j requires finite nu >= 0 and x >= 0");
  }
  try {
    return boost::math::cyl_bessel_j(nu, x);
  } catch (const std::exception& e) {
    std::ostringstream msg;
    msg << "J_" << nu << "(" << x << ") not representable: " << e.what();
    throw NumericalError("special.bessel_j", msg.str());
  }
}

double bessel_zero(double nu, int k) {
  if (!(nu >= 0.0) || !std::isfinite(nu) || k < 1) {
    throw InvalidInput("special.bessel_zero", "bessel_zero requires nu >= 0 and k >= 1");
  }
  double z = 0.0;
  try {
    z = boost::math::cyl_bessel_j_zero(nu, k);
  } catch (const std::exception& e) {
    throw NumericalError("special.bessel_zero", std::string("zero estimate failed: ") + e.what());
  }
  // Verify the root is bracketed by a sign change; widen and bisect if the
  // estimate is not tight.
  for (double rel : {1e-12, 1e-10, 1e-8, 1e-6}) {
    const double delta = rel * std::max(z, 1.0);
    double lo = z - delta, hi = z + delta;
    double flo = bessel_j(nu, lo), fhi = bessel_j(nu, hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo < 0.0) != (fhi < 0.0)) {
      if (rel == 1e-12) return z;
      while (hi - lo > 1e-13 * hi) {
        const double mid = 0.5 * (lo + hi);
        const double fm = bessel_j(nu, mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
  }
  std::ostringstream msg;
  msg.precision(17);
  msg << "no sign change of J_" << nu << " around zero #" << k << " in ["
      << z * (1 - 1e-6) << ", " << z * (1 + 1e-6) << "]";
  throw NumericalError("special.bessel_zero", msg.str(), z);
}

std::vector<double> bessel_zeros_below(double nu, double x_max) {
  std::vector<double> zeros;
  if (x_max <= nu) return zeros;  // j_{nu,1} > nu
  for (int k = 1;; ++k) {
    const double z = bessel_zero(nu, k);
    if (z > x_max) break;
    zeros.push_back(z);
  }
  return zeros;
}

double expint_e1(double x) {
  if (!(x > 0.0)) throw InvalidInput("special.expint_e1", "E_1 requires x > 0");
  if (x > 700.0) return 0.0;
  return boost::math::expint(1, x);
}

double reciprocal_gamma(double s) {
  if (s <= 0.0 && s == std::floor(s)) return 0.0;
  if (std::abs(s) < 1e-3) {
    // 1/Gamma(s) = s / Gamma(1 + s) keeps full precision near the zero at s = 0.
    return s / boost::math::tgamma(1.0 + s);
  }
  return 1.0 / boost::math::tgamma(s);
}

Integral integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                            const QuadratureOptions& options) {
  if (!(options.tol > 0.0) && !(options.rel_tol > 0.0)) {
    throw InvalidInput("special.integrate_adaptive", "tolerance must be positive");
  }
  if (a == b) return {0.0, 0.0};
  if (std::isinf(b) && b > 0.0) {
    // t = a + x / (1 - x) maps [0, 1) onto [a, inf); Kronrod nodes never touch x = 1.
    auto g = [&](double x) {
      const double w = 1.0 - x;
      const double value = f(a + x / w);
      return value == 0.0 ? 0.0 : value / (w * w);
    };
    return options.endpoints == Endpoint::kSingular ? tanh_sinh_rule(g, 0.0, 1.0, options)
                                                    : adaptive_kronrod(g, 0.0, 1.0, options);
  }
  if (!std::isfinite(a) || !std::isfinite(b) || b < a) {
    throw InvalidInput("special.integrate_adaptive", "interval must satisfy a < b, b may be +inf");
  }
  return options.endpoints == Endpoint::kSingular ? tanh_sinh_rule(f, a, b, options)
                                                  : adaptive_kronrod(f, a, b, options);
}

}  // namespace spectral
