#include "spectral_corner/zeta.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "spectral_corner/error.hpp"
#include "spectral_corner/special.hpp"

namespace spectral {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGamma = static_cast<double>(kEulerGamma);

struct RemainderModel {
  std::array<double, 3> c{0.0, 0.0, 0.0};  // sqrt t, sqrt t log t, t
  std::array<double, 3> reduced{0.0, 0.0, 0.0};  // same without the log term
};

// int_0^tau t^{s-1} (c0 sqrt t + c1 sqrt t log t + c2 t) dt
double model_mellin(const std::array<double, 3>& c, double s, double tau) {
  const double p = s + 0.5;
  const double tp = std::pow(tau, p);
  return c[0] * tp / p + c[1] * tp * (std::log(tau) / p - 1 / (p * p)) +
         c[2] * std::pow(tau, s + 1) / (s + 1);
}

// Least-squares fit of Tr - expansion on [tau, span tau].
RemainderModel fit_model(const TraceProvider& trace, const ExpansionCoefficients& coeffs,
                         double tau, const ZetaOptions& options) {
  const auto ts = log_spaced(tau, options.model_span * tau, options.model_points);
  const auto m = static_cast<Eigen::Index>(ts.size());
  Eigen::MatrixXd X(m, 3);
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double t = ts[static_cast<std::size_t>(i)];
    X.row(i) << std::sqrt(t), std::sqrt(t) * std::log(t), t;
    y[i] = trace.trace(t) - coeffs.a_m1 / t - coeffs.a_mhalf / std::sqrt(t) - coeffs.a0;
  }
  auto solve = [](const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    const Eigen::VectorXd n = A.colwise().norm();
    const Eigen::MatrixXd As = A * n.cwiseInverse().asDiagonal();
    return Eigen::VectorXd(As.colPivHouseholderQr().solve(b).cwiseQuotient(n));
  };
  RemainderModel r;
  const Eigen::VectorXd full = solve(X, y);
  r.c = {full[0], full[1], full[2]};
  Eigen::MatrixXd X2(m, 2);
  X2 << X.col(0), X.col(2);
  const Eigen::VectorXd red = solve(X2, y);
  r.reduced = {red[0], 0.0, red[1]};
  return r;
}

void check_s(double s, const char* stage) {
  if (!(s > -0.5)) throw InvalidInput(stage, "continuation is only valid for Re s > -1/2");
  if (std::abs(s - 1) < 1e-12 || std::abs(s - 0.5) < 1e-12) {
    throw InvalidInput(stage, "s is at a pole (s = 1 or s = 1/2)");
  }
}

}  // namespace

double TraceProvider::remainder(double t, const ExpansionCoefficients& c) const {
  return trace(t) - c.a_m1 / t - c.a_mhalf / std::sqrt(t) - c.a0;
}

Integral TraceProvider::log_tail(double tau) const {
  QuadratureOptions o;
  o.tol = 1e-13;
  return integrate_adaptive([this](double t) { return trace(t) / t; }, tau,
                            std::numeric_limits<double>::infinity(), o);
}

// ---------------------------------------------------------------------------

SpectrumTrace::SpectrumTrace(Spectrum spectrum, double floor)
    : spectrum_(std::move(spectrum)), floor_(floor) {
  if (spectrum_.eigenvalues.empty()) throw InvalidInput("zeta.trace", "empty spectrum");
  // Sums the listed eigenvalues even when a theta shortcut exists.
  if (!spectrum_.complete()) floor_ = std::max(floor_, kTailThreshold / spectrum_.completeness);
}

double SpectrumTrace::trace(double t) const {
  if (t < floor_) {
    std::ostringstream msg;
    msg << "trace requested at t = " << t << " below the provider floor " << floor_;
    throw InvalidInput("zeta.trace", msg.str());
  }
  double sum = 0.0;
  for (double l : spectrum_.eigenvalues) {
    if (t * l > 745) break;
    sum += std::exp(-t * l);
  }
  return sum;
}

Integral SpectrumTrace::log_tail(double tau) const {
  if (tau < floor_) throw InvalidInput("zeta.trace", "log tail requested below the floor");
  Integral r;
  const auto& ev = spectrum_.eigenvalues;
  for (auto it = ev.rbegin(); it != ev.rend(); ++it) r.value += expint_e1(tau * *it);
  if (!spectrum_.complete()) {
    // Weyl estimate of the missing sum of E1(tau lambda), lambda > completeness.
    const double L = spectrum_.completeness;
    r.error = spectrum_.volume / (4 * kPi) * std::exp(-tau * L) / (tau * tau * L);
  }
  return r;
}

RichardsonTrace::RichardsonTrace(Spectrum coarse, Spectrum fine, double floor)
    : coarse_(std::move(coarse), floor), fine_(std::move(fine), floor),
      floor_(std::max(coarse_.floor(), fine_.floor())) {}

double RichardsonTrace::trace(double t) const {
  return (4 * fine_.trace(t) - coarse_.trace(t)) / 3;
}

Integral RichardsonTrace::log_tail(double tau) const {
  const Integral c = coarse_.log_tail(tau), f = fine_.log_tail(tau);
  return {(4 * f.value - c.value) / 3, (4 * f.error + c.error) / 3};
}

std::string RichardsonTrace::label() const {
  return "richardson(" + coarse_.label() + ", " + fine_.label() + ")";
}

RectangleTrace::RectangleTrace(double a, double b) : a_(a), b_(b) {
  if (!(a > 0) || !(b > 0)) throw InvalidInput("zeta.trace", "rectangle sides must be positive");
}

double RectangleTrace::trace(double t) const {
  return rect_theta_factor(t / (a_ * a_)) * rect_theta_factor(t / (b_ * b_));
}

double RectangleTrace::remainder(double t, const ExpansionCoefficients& c) const {
  const double rt = std::sqrt(kPi * t);
  const double pa = -0.5 + a_ / (2 * rt), pb = -0.5 + b_ / (2 * rt);
  const double ea = rect_theta_modular_tail(t / (a_ * a_));
  const double eb = rect_theta_modular_tail(t / (b_ * b_));
  const ExpansionCoefficients exact = coefficients();
  return (exact.a_m1 - c.a_m1) / t + (exact.a_mhalf - c.a_mhalf) / std::sqrt(t) +
         (exact.a0 - c.a0) + pa * eb + ea * pb + ea * eb;
}

ExpansionCoefficients RectangleTrace::coefficients() const {
  ExpansionCoefficients c;
  c.a_m1 = a_ * b_ / (4 * kPi);
  c.a_mhalf = -(a_ + b_) / (4 * std::sqrt(kPi));
  c.a0 = 0.25;
  c.breakdown.area = c.a_m1;
  c.breakdown.perimeter = c.a_mhalf;
  c.breakdown.corners.assign(4, 1.0 / 16);
  return c;
}

std::string RectangleTrace::label() const {
  std::ostringstream out;
  out << "rectangle(" << a_ << "x" << b_ << ", theta)";
  return out.str();
}

IntervalTrace::IntervalTrace(double L) : L_(L) {
  if (!(L > 0)) throw InvalidInput("zeta.trace", "interval length must be positive");
}

double IntervalTrace::trace(double t) const { return rect_theta_factor(t / (L_ * L_)); }

double IntervalTrace::remainder(double t, const ExpansionCoefficients& c) const {
  const ExpansionCoefficients exact = coefficients();
  return (exact.a_m1 - c.a_m1) / t + (exact.a_mhalf - c.a_mhalf) / std::sqrt(t) +
         (exact.a0 - c.a0) + rect_theta_modular_tail(t / (L_ * L_));
}

ExpansionCoefficients IntervalTrace::coefficients() const {
  ExpansionCoefficients c;
  c.a_m1 = 0.0;
  c.a_mhalf = L_ / (2 * std::sqrt(kPi));
  c.a0 = -0.5;
  return c;
}

std::string IntervalTrace::label() const {
  std::ostringstream out;
  out << "interval(L=" << L_ << ")";
  return out.str();
}

// ---------------------------------------------------------------------------

ZetaSample zeta_series(const Spectrum& spectrum, double s, double tol) {
  const char* stage = "zeta.series";
  if (!(s > 1)) throw InvalidInput(stage, "the Dirichlet series needs s > 1");
  if (spectrum.eigenvalues.empty()) throw InvalidInput(stage, "empty spectrum");
  const double lam = spectrum.completeness;
  ZetaSample r;
  r.s = s;
  const auto& ev = spectrum.eigenvalues;
  for (auto it = ev.rbegin(); it != ev.rend(); ++it) {
    if (*it <= lam) r.value += std::pow(*it, -s);
  }
  if (std::isfinite(lam)) {
    const double A = spectrum.volume, L = spectrum.boundary_length;
    r.value += A / (4 * kPi) * std::pow(lam, 1 - s) / (s - 1) -
               L / (8 * kPi) * std::pow(lam, 0.5 - s) / (s - 0.5);
    // Lattice-point fluctuations of the counting function are O(sqrt lambda).
    const double C = std::max(1.0, L / (4 * kPi));
    r.error = C * std::pow(lam, 0.5 - s);
    if (r.error > tol) {
      const double needed = std::pow(tol / C, 1.0 / (0.5 - s));
      std::ostringstream msg;
      msg << "Weyl tail uncertainty " << r.error << " exceeds tol " << tol << " at s = " << s
          << "; about " << std::ceil(A * needed / (4 * kPi)) << " eigenvalues (up to lambda = "
          << needed << ") are needed";
      throw NumericalError(stage, msg.str(), r.value, r.error);
    }
  }
  return r;
}

ZetaSample zeta_continued(const TraceProvider& trace, const ExpansionCoefficients& coeffs,
                          double s, const ZetaOptions& options) {
  const char* stage = "zeta.continued";
  check_s(s, stage);
  const double tau = trace.floor();
  if (tau >= 1.0) throw InvalidInput(stage, "provider floor must lie below t = 1");
  QuadratureOptions q;
  q.tol = 1e-13;
  double head = 0.0, err = 0.0;
  if (tau > 0) {
    const RemainderModel model = fit_model(trace, coeffs, tau, options);
    head = model_mellin(model.c, s, tau);
    err += std::abs(head - model_mellin(model.reduced, s, tau));
  }
  const double lo = tau > 0 ? tau : 0.0;
  const Integral mid = integrate_adaptive(
      [&](double t) { return std::pow(t, s - 1) * trace.remainder(t, coeffs); }, lo, 1.0, q);
  const Integral tail = integrate_adaptive(
      [&](double t) { return std::pow(t, s - 1) * trace.trace(t); }, 1.0,
      std::numeric_limits<double>::infinity(), q);
  const double bracket = coeffs.a_m1 / (s - 1) + coeffs.a_mhalf / (s - 0.5) + head + mid.value +
                         tail.value;
  const double rg = reciprocal_gamma(s);
  ZetaSample r;
  r.s = s;
  r.value = rg * bracket + coeffs.a0 * reciprocal_gamma(s + 1);
  r.error = std::abs(rg) * (err + mid.error + tail.error);
  return r;
}

ZetaEvaluation zeta_prime_at_zero(const TraceProvider& trace, const ExpansionCoefficients& coeffs,
                                  const ZetaOptions& options) {
  const char* stage = "zeta.prime_at_zero";
  ZetaEvaluation ev;
  const double floor = trace.floor();
  const double tau = floor > 0 ? floor : 1.0;
  ev.floor = floor;
  double head = 0.0;
  if (floor > 0) {
    const RemainderModel model = fit_model(trace, coeffs, tau, options);
    head = model_mellin(model.c, 0.0, tau);
    ev.model = model.c;
    ev.budget.model = std::abs(head - model_mellin(model.reduced, 0.0, tau));
  } else {
    QuadratureOptions q;
    q.tol = 1e-13;
    const Integral h = integrate_adaptive(
        [&](double t) { return trace.remainder(t, coeffs) / t; }, 0.0, tau, q);
    head = h.value;
    ev.budget.quadrature += h.error;
  }
  const Integral tail = trace.log_tail(tau);
  if (floor > 0) ev.budget.trace += tail.error;
  else ev.budget.quadrature += tail.error;
  ev.budget.coefficient =
      coeffs.error * (1 / tau + 2 / std::sqrt(tau) + std::abs(std::log(tau) + kGamma));

  ev.zeta0 = coeffs.a0;
  ev.zeta_prime0 = head + tail.value - coeffs.a_m1 / tau - 2 * coeffs.a_mhalf / std::sqrt(tau) +
                   coeffs.a0 * (std::log(tau) + kGamma);
  ev.zdet = std::exp(-ev.zeta_prime0);
  if (ev.budget.total() > options.tol) {
    std::ostringstream msg;
    msg << "error budget " << ev.budget.total() << " exceeds tol " << options.tol
        << " (trace " << ev.budget.trace << ", quadrature " << ev.budget.quadrature << ", model "
        << ev.budget.model << ", coefficients " << ev.budget.coefficient << ")";
    throw NumericalError(stage, msg.str(), ev.zeta_prime0, ev.budget.total());
  }
  return ev;
}

}  // namespace spectral
