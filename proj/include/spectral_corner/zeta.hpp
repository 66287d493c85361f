#pragma once

#include <memory>
#include <string>
#include <vector>

#include "spectral_corner/geometry.hpp"
#include "spectral_corner/heattrace.hpp"
#include "spectral_corner/spectrum.hpp"

namespace spectral {

/// Source of Tr e^{-t Delta} for the Mellin-transform formulas.
class TraceProvider {
 public:
  virtual ~TraceProvider() = default;

  virtual double trace(double t) const = 0;
  /// Tr - a_-1/t - a_-1/2/sqrt(t) - a_0; providers with closed forms override
  /// this with a cancellation-free expression.
  virtual double remainder(double t, const ExpansionCoefficients& c) const;
  /// trace() is only available for t >= floor(); below it a remainder model
  /// takes over. Zero for providers valid on all of (0, inf).
  virtual double floor() const { return 0.0; }
  /// int_tau^inf t^{-1} Tr dt.
  virtual Integral log_tail(double tau) const;
  virtual std::string label() const = 0;
};

/// Sum over a (possibly truncated) list of eigenvalues. The floor is the
/// larger of the requested one and the tail-policy minimum 40 / completeness;
/// the listed eigenvalues are always summed, so rectangles should use
/// RectangleTrace for exact small-t behaviour.
class SpectrumTrace final : public TraceProvider {
 public:
  explicit SpectrumTrace(Spectrum spectrum, double floor = 0.0);
  double trace(double t) const override;
  double floor() const override { return floor_; }
  Integral log_tail(double tau) const override;
  std::string label() const override { return spectrum_.label; }
  const Spectrum& spectrum() const { return spectrum_; }

 private:
  Spectrum spectrum_;
  double floor_;
};

/// Richardson combination (4 Tr_{h/2} - Tr_h) / 3 of two finite-difference
/// spectra on grids h and h/2; both must be complete past the common floor.
class RichardsonTrace final : public TraceProvider {
 public:
  RichardsonTrace(Spectrum coarse, Spectrum fine, double floor = 0.0);
  double trace(double t) const override;
  double floor() const override { return floor_; }
  Integral log_tail(double tau) const override;
  std::string label() const override;

 private:
  SpectrumTrace coarse_, fine_;
  double floor_;
};

/// Flat a x b rectangle through the theta product, exact for all t.
class RectangleTrace final : public TraceProvider {
 public:
  RectangleTrace(double a, double b);
  double trace(double t) const override;
  double remainder(double t, const ExpansionCoefficients& c) const override;
  std::string label() const override;
  ExpansionCoefficients coefficients() const;

 private:
  double a_, b_;
};

/// Dirichlet interval of length L (eigenvalues (pi n / L)^2); L = pi gives
/// lambda_n = n^2.
class IntervalTrace final : public TraceProvider {
 public:
  explicit IntervalTrace(double L);
  double trace(double t) const override;
  double remainder(double t, const ExpansionCoefficients& c) const override;
  std::string label() const override;
  /// a_-1 = 0, a_-1/2 = L / (2 sqrt pi), a_0 = -1/2.
  ExpansionCoefficients coefficients() const;

 private:
  double L_;
};

struct ZetaErrorBudget {
  double trace = 0.0;        // truncated spectrum tail
  double quadrature = 0.0;   // adaptive integration estimates
  double model = 0.0;        // remainder model below the floor
  double coefficient = 0.0;  // propagated coefficient uncertainty
  double total() const { return trace + quadrature + model + coefficient; }
};

struct ZetaSample {
  double s = 0.0;
  double value = 0.0;
  double error = 0.0;
};

struct ZetaEvaluation {
  std::vector<ZetaSample> samples;
  double zeta0 = 0.0;
  double zeta_prime0 = 0.0;
  double zdet = 0.0;  // e^{-zeta'(0)}
  ZetaErrorBudget budget;
  double floor = 0.0;  // split point between model and trace
  /// Remainder model coefficients on sqrt t, sqrt t log t, t (floor > 0).
  std::array<double, 3> model{0.0, 0.0, 0.0};
};

struct ZetaOptions {
  double tol = 1e-6;  // on the total error budget
  /// Model window [floor, model_span * floor] for floored providers.
  double model_span = 40.0;
  int model_points = 16;
};

/// sum_n lambda_n^{-s} for s > 1 with a two-term Weyl tail beyond the
/// completeness bound. Throws NumericalError naming the eigenvalue count
/// needed when the tail uncertainty exceeds tol.
ZetaSample zeta_series(const Spectrum& spectrum, double s, double tol = 1e-8);

/// Continuation to Re s > -1/2 through
///   Gamma(s) zeta(s) = a_-1/(s-1) + a_-1/2/(s-1/2) + a_0/s
///                      + int_0^1 t^{s-1}(Tr - expansion) dt + int_1^inf t^{s-1} Tr dt.
ZetaSample zeta_continued(const TraceProvider& trace, const ExpansionCoefficients& coeffs,
                          double s, const ZetaOptions& options = {});

/// zeta'(0) = int_0^1 t^{-1}(Tr - expansion) dt + int_1^inf t^{-1} Tr dt
///            - a_-1 - 2 a_-1/2 + gamma a_0, with the split moved to the floor
/// of truncated providers. Throws NumericalError with the budget when it
/// exceeds options.tol.
ZetaEvaluation zeta_prime_at_zero(const TraceProvider& trace, const ExpansionCoefficients& coeffs,
                                  const ZetaOptions& options = {});

}  // namespace spectral
