#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spectral_corner/geometry.hpp"
#include "spectral_corner/spectrum.hpp"

namespace spectral {

/// Smallest t * completeness for which a truncated spectrum may be summed:
/// the missing tail is then below e^{-40} per eigenvalue.
inline constexpr double kTailThreshold = 40.0;

struct TracePoint {
  double t = 0.0;
  double value = 0.0;
  double error = 0.0;
};

struct HeatTraceCurve {
  enum class Source { kSpectrum, kTheta, kDiscrete, kMonteCarlo, kExtrapolated, kSynthetic };

  std::vector<TracePoint> samples;
  Source source = Source::kSpectrum;
  std::string label;
};

std::string to_string(HeatTraceCurve::Source source);

/// n points log-spaced over [a, b].
std::vector<double> log_spaced(double a, double b, int n);

/// Tr e^{-t Delta} = sum_n e^{-t lambda_n}. Rectangles use the theta product
/// S(t/a^2) S(t/b^2). Truncated spectra require t * completeness >= 40;
/// smaller t is refused with the minimum admissible t in the message.
double trace_at(const Spectrum& spectrum, double t);

/// Smallest t accepted by trace_at.
double min_admissible_t(const Spectrum& spectrum);

HeatTraceCurve trace_curve(const Spectrum& spectrum, const std::vector<double>& ts);

/// sum_n e^{-t lambda_n} <psi phi_n, phi_n>_w over the supplied eigenpairs,
/// which must be the k smallest of op.
double weighted_trace(const DiscreteOperator& op, const std::vector<Eigenpair>& pairs,
                      const ScalarField& psi, double t);

/// Richardson combination (4 T_{h/2} - T_h) / 3 of two curves sampled at the
/// same times.
HeatTraceCurve richardson(const HeatTraceCurve& coarse, const HeatTraceCurve& fine);

enum class FitMode {
  kFitAll,     // basis 1/t, 1/sqrt t, 1, sqrt t, sqrt t log t
  kPeelKnown,  // subtract a_-1/t + a_-1/2/sqrt t; basis 1, sqrt t, sqrt t log t, t
  kPeelAll,    // also subtract a_0; basis sqrt t, sqrt t log t, t
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct ExpansionFit {
  double a_m1 = 0.0;
  double a_mhalf = 0.0;
  double a0 = 0.0;
  /// 95% residual-bootstrap intervals; degenerate for supplied coefficients.
  Interval a_m1_ci, a_mhalf_ci, a0_ci;
  /// Remainder coefficients on sqrt t, sqrt t log t, t (missing terms are 0).
  std::array<double, 3> remainder{0.0, 0.0, 0.0};
  Interval window;
  double residual_norm = 0.0;  // RMS residual
  double condition = 0.0;      // of the column-scaled design matrix
  FitMode mode = FitMode::kFitAll;
  std::size_t samples = 0;
};

struct FitOptions {
  int bootstrap = 200;
  unsigned long long seed = 20240611ULL;
  double max_condition = 1e12;
};

/// Least-squares fit of the short-time expansion. peel modes need known.
ExpansionFit fit_expansion(const HeatTraceCurve& curve, FitMode mode,
                           const std::optional<ExpansionCoefficients>& known = std::nullopt,
                           const FitOptions& options = {});

struct CoefficientGap {
  std::string name;
  double predicted = 0.0;
  double fitted = 0.0;
  double abs_gap = 0.0;
  double rel_gap = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct ExpansionComparison {
  ExpansionCoefficients predicted;
  ExpansionFit fit_all;
  ExpansionFit peeled;
  std::vector<CoefficientGap> rows;  // a_-1, a_-1/2, a_0
  bool pass = false;
};

struct CompareTolerances {
  double a_m1 = 1e-3;
  double a_mhalf = 1e-3;
  double a0 = 1e-3;
};

/// Predicted coefficients against fit-all (a_-1, a_-1/2) and peel-known (a_0).
ExpansionComparison compare_expansion(const Domain& domain, const MetricSpec& metric,
                                      const ScalarField& psi, const HeatTraceCurve& curve,
                                      const CompareTolerances& tol = {});

struct DerivativeIdentity {
  double lhs = 0.0;  // d/du sum_n E1(eps lambda_n), central difference
  double rhs = 0.0;  // 2 sum_n e^{-eps lambda_n} <sigma phi_n, phi_n>_w
  double residual = 0.0;
};

struct FdmConfig {
  double h = 1.0 / 64;
  std::size_t eigenpairs = 0;  // 0: enough for the tail policy at the smallest t
};

/// Checks d/du int_eps^inf t^{-1} Tr e^{-t Delta_u} dt = 2 Tr(sigma e^{-eps Delta_u})
/// on the finite-difference model.
DerivativeIdentity derivative_identity_residual(const Domain& domain, const ScalarField& sigma,
                                                double u, double eps, double du,
                                                const FdmConfig& config = {});

/// Number of eigenpairs of op whose 0.8 lambda_k reaches kTailThreshold / t_min,
/// from the closed-form five-point spectrum of the bounding box (an upper
/// bound on the count below any level for subdomains).
std::size_t eigenpairs_for(const DiscreteOperator& op, double t_min);

}  // namespace spectral
