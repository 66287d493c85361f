#include "spectral_corner/heattrace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "spectral_corner/error.hpp"
#include "spectral_corner/special.hpp"

namespace spectral {

namespace {

constexpr double kPi = std::numbers::pi;

double completeness_of(const DiscreteOperator& op, const std::vector<Eigenpair>& pairs) {
  if (pairs.empty()) return 0.0;
  if (static_cast<Eigen::Index>(pairs.size()) >= op.size()) {
    return std::numeric_limits<double>::infinity();
  }
  return 0.8 * pairs.back().lambda;
}

[[noreturn]] void refuse(const char* stage, double t, double t_min) {
  std::ostringstream msg;
  msg << "t = " << t << " is below the completeness threshold of the truncated spectrum; "
      << "minimum admissible t is " << t_min;
  throw InvalidInput(stage, msg.str());
}

struct Solved {
  Eigen::VectorXd beta;
  double condition = 0.0;
};

// Least squares on column-scaled X.
Solved least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Eigen::VectorXd norms = X.colwise().norm();
  const Eigen::MatrixXd Xs = X * norms.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Xs, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  Solved s;
  s.condition = sv[0] / sv[sv.size() - 1];
  s.beta = svd.solve(y).cwiseQuotient(norms);
  return s;
}

Interval percentile_interval(std::vector<double> v) {
  if (v.empty()) return {};
  std::sort(v.begin(), v.end());
  auto at = [&](double q) {
    const double pos = q * double(v.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double f = pos - double(i);
    return i + 1 < v.size() ? v[i] * (1 - f) + v[i + 1] * f : v[i];
  };
  return {at(0.025), at(0.975)};
}

}  // namespace

std::string to_string(HeatTraceCurve::Source source) {
  switch (source) {
    case HeatTraceCurve::Source::kSpectrum: return "spectrum";
    case HeatTraceCurve::Source::kTheta: return "theta";
    case HeatTraceCurve::Source::kDiscrete: return "discrete";
    case HeatTraceCurve::Source::kMonteCarlo: return "monte-carlo";
    case HeatTraceCurve::Source::kExtrapolated: return "richardson";
    case HeatTraceCurve::Source::kSynthetic: return "synthetic";
  }
  return "unknown";
}

std::vector<double> log_spaced(double a, double b, int n) {
  if (!(a > 0) || !(b > a) || n < 2) {
    throw InvalidInput("heattrace.log_spaced", "need 0 < a < b and at least two points");
  }
  std::vector<double> out(static_cast<std::size_t>(n));
  const double la = std::log(a), lb = std::log(b);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::exp(la + (lb - la) * i / (n - 1));
  out.front() = a;
  out.back() = b;
  return out;
}

double min_admissible_t(const Spectrum& spectrum) {
  if (spectrum.rectangle || spectrum.complete()) return 0.0;
  return kTailThreshold / spectrum.completeness;
}

double trace_at(const Spectrum& spectrum, double t) {
  if (!(t > 0)) throw InvalidInput("heattrace.trace_at", "t must be positive");
  if (spectrum.rectangle) {
    const auto [a, b] = *spectrum.rectangle;
    return rect_theta_factor(t / (a * a)) * rect_theta_factor(t / (b * b));
  }
  const double t_min = min_admissible_t(spectrum);
  if (t < t_min) refuse("heattrace.trace_at", t, t_min);
  double sum = 0.0;
  const auto& ev = spectrum.eigenvalues;
  for (auto it = ev.rbegin(); it != ev.rend(); ++it) sum += std::exp(-t * *it);
  return sum;
}

HeatTraceCurve trace_curve(const Spectrum& spectrum, const std::vector<double>& ts) {
  HeatTraceCurve c;
  c.source = spectrum.rectangle ? HeatTraceCurve::Source::kTheta
             : spectrum.provenance == Spectrum::Provenance::kDiscrete
                 ? HeatTraceCurve::Source::kDiscrete
                 : HeatTraceCurve::Source::kSpectrum;
  c.label = spectrum.label;
  for (double t : ts) {
    const double v = trace_at(spectrum, t);
    c.samples.push_back({t, v, 1e-15 * v});
  }
  return c;
}

double weighted_trace(const DiscreteOperator& op, const std::vector<Eigenpair>& pairs,
                      const ScalarField& psi, double t) {
  if (!(t > 0)) throw InvalidInput("heattrace.weighted_trace", "t must be positive");
  const double lam = completeness_of(op, pairs);
  if (t * lam < kTailThreshold) refuse("heattrace.weighted_trace", t, kTailThreshold / lam);
  Eigen::VectorXd w(op.size());
  for (Eigen::Index i = 0; i < op.size(); ++i) w[i] = op.weight[i] * psi(op.nodes[i]);
  w *= op.h * op.h;
  double sum = 0.0;
  for (auto it = pairs.rbegin(); it != pairs.rend(); ++it) {
    sum += std::exp(-t * it->lambda) * (w.array() * it->phi.array().square()).sum();
  }
  return sum;
}

HeatTraceCurve richardson(const HeatTraceCurve& coarse, const HeatTraceCurve& fine) {
  if (coarse.samples.size() != fine.samples.size()) {
    throw InvalidInput("heattrace.richardson", "curves must share their sample times");
  }
  HeatTraceCurve out;
  out.source = HeatTraceCurve::Source::kExtrapolated;
  out.label = "richardson(" + coarse.label + ", " + fine.label + ")";
  for (std::size_t i = 0; i < fine.samples.size(); ++i) {
    const auto& c = coarse.samples[i];
    const auto& f = fine.samples[i];
    if (std::abs(c.t - f.t) > 1e-12 * f.t) {
      throw InvalidInput("heattrace.richardson", "curves must share their sample times");
    }
    const double v = (4 * f.value - c.value) / 3;
    out.samples.push_back({f.t, v, std::abs(f.value - c.value) / 3 + f.error + c.error});
  }
  return out;
}

ExpansionFit fit_expansion(const HeatTraceCurve& curve, FitMode mode,
                           const std::optional<ExpansionCoefficients>& known,
                           const FitOptions& options) {
  const char* stage = "heattrace.fit";
  const auto& s = curve.samples;
  if (s.size() < 8) throw InvalidInput(stage, "need at least 8 samples");
  double t_lo = s.front().t, t_hi = s.front().t;
  for (const auto& p : s) {
    t_lo = std::min(t_lo, p.t);
    t_hi = std::max(t_hi, p.t);
  }
  if (std::log10(t_hi / t_lo) < 1.5 - 1e-12) {
    throw InvalidInput(stage, "samples must span at least 1.5 decades of t");
  }
  if (mode != FitMode::kFitAll && !known) {
    throw InvalidInput(stage, "peel modes need the known coefficients");
  }

  const auto m = static_cast<Eigen::Index>(s.size());
  const Eigen::Index p = mode == FitMode::kFitAll ? 5 : mode == FitMode::kPeelKnown ? 4 : 3;
  Eigen::MatrixXd X(m, p);
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double t = s[static_cast<std::size_t>(i)].t;
    const double v = s[static_cast<std::size_t>(i)].value;
    const double rt = std::sqrt(t);
    switch (mode) {
      case FitMode::kFitAll:
        // Rows scaled by t so every sample carries comparable weight.
        X.row(i) << 1.0, rt, t, t * rt, t * rt * std::log(t);
        y[i] = t * v;
        break;
      case FitMode::kPeelKnown:
        X.row(i) << 1.0, rt, rt * std::log(t), t;
        y[i] = v - known->a_m1 / t - known->a_mhalf / rt;
        break;
      case FitMode::kPeelAll:
        X.row(i) << rt, rt * std::log(t), t;
        y[i] = v - known->a_m1 / t - known->a_mhalf / rt - known->a0;
        break;
    }
  }
  const Solved sol = least_squares(X, y);
  if (!(sol.condition <= options.max_condition)) {
    std::ostringstream msg;
    msg << "ill-conditioned design matrix (condition " << sol.condition
        << "); widen the fit window or move it away from t = 0";
    throw NumericalError(stage, msg.str());
  }
  const Eigen::VectorXd fitted = X * sol.beta;
  const Eigen::VectorXd resid = y - fitted;

  ExpansionFit fit;
  fit.mode = mode;
  fit.window = {t_lo, t_hi};
  fit.samples = s.size();
  fit.condition = sol.condition;
  fit.residual_norm = resid.norm() / std::sqrt(double(m));

  auto unpack = [&](const Eigen::VectorXd& b, double& am1, double& amh, double& a0,
                    std::array<double, 3>& rem) {
    switch (mode) {
      case FitMode::kFitAll:
        am1 = b[0];
        amh = b[1];
        a0 = b[2];
        rem = {b[3], b[4], 0.0};
        break;
      case FitMode::kPeelKnown:
        am1 = known->a_m1;
        amh = known->a_mhalf;
        a0 = b[0];
        rem = {b[1], b[2], b[3]};
        break;
      case FitMode::kPeelAll:
        am1 = known->a_m1;
        amh = known->a_mhalf;
        a0 = known->a0;
        rem = {b[0], b[1], b[2]};
        break;
    }
  };
  unpack(sol.beta, fit.a_m1, fit.a_mhalf, fit.a0, fit.remainder);

  std::vector<double> bm1, bmh, b0;
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, m - 1);
  for (int r = 0; r < options.bootstrap; ++r) {
    Eigen::VectorXd ys(m);
    for (Eigen::Index i = 0; i < m; ++i) ys[i] = fitted[i] + resid[pick(rng)];
    const Solved bs = least_squares(X, ys);
    double am1, amh, a0;
    std::array<double, 3> rem;
    unpack(bs.beta, am1, amh, a0, rem);
    bm1.push_back(am1);
    bmh.push_back(amh);
    b0.push_back(a0);
  }
  fit.a_m1_ci = percentile_interval(bm1);
  fit.a_mhalf_ci = percentile_interval(bmh);
  fit.a0_ci = percentile_interval(b0);
  if (options.bootstrap == 0) {
    fit.a_m1_ci = {fit.a_m1, fit.a_m1};
    fit.a_mhalf_ci = {fit.a_mhalf, fit.a_mhalf};
    fit.a0_ci = {fit.a0, fit.a0};
  }
  return fit;
}

ExpansionComparison compare_expansion(const Domain& domain, const MetricSpec& metric,
                                      const ScalarField& psi, const HeatTraceCurve& curve,
                                      const CompareTolerances& tol) {
  ExpansionComparison c;
  c.predicted = geometric_coefficients(domain, metric, psi);
  c.fit_all = fit_expansion(curve, FitMode::kFitAll);
  c.peeled = fit_expansion(curve, FitMode::kPeelKnown, c.predicted);
  auto row = [](std::string name, double pred, double fitted, double t) {
    CoefficientGap g;
    g.name = std::move(name);
    g.predicted = pred;
    g.fitted = fitted;
    g.abs_gap = std::abs(fitted - pred);
    g.rel_gap = pred != 0.0 ? g.abs_gap / std::abs(pred) : g.abs_gap;
    g.tolerance = t;
    g.pass = g.abs_gap <= t;
    return g;
  };
  c.rows.push_back(row("a_-1", c.predicted.a_m1, c.fit_all.a_m1, tol.a_m1));
  c.rows.push_back(row("a_-1/2", c.predicted.a_mhalf, c.fit_all.a_mhalf, tol.a_mhalf));
  c.rows.push_back(row("a_0", c.predicted.a0, c.peeled.a0, tol.a0));
  c.pass = std::all_of(c.rows.begin(), c.rows.end(), [](const CoefficientGap& g) { return g.pass; });
  return c;
}

std::size_t eigenpairs_for(const DiscreteOperator& op, double t_min) {
  const double lambda = kTailThreshold / t_min / 0.8;
  const std::size_t n = static_cast<std::size_t>(op.size());
  return std::min(n, eigenvalue_count_below(op, lambda) + 1);
}

DerivativeIdentity derivative_identity_residual(const Domain& domain, const ScalarField& sigma,
                                                double u, double eps, double du,
                                                const FdmConfig& config) {
  if (!(eps > 0) || !(du > 0)) {
    throw InvalidInput("heattrace.derivative_identity", "eps and du must be positive");
  }
  const MetricSpec metric{sigma, u};
  auto e1_sum = [&](double uu) {
    const DiscreteOperator op = assemble_fdm(domain, metric, uu, config.h);
    const std::size_t k = config.eigenpairs ? config.eigenpairs : eigenpairs_for(op, eps);
    const Spectrum s = discrete_spectrum(op, k);
    if (eps < min_admissible_t(s)) refuse("heattrace.derivative_identity", eps, min_admissible_t(s));
    double sum = 0.0;
    for (auto it = s.eigenvalues.rbegin(); it != s.eigenvalues.rend(); ++it) {
      sum += expint_e1(eps * *it);
    }
    return sum;
  };
  const DiscreteOperator op = assemble_fdm(domain, metric, u, config.h);
  const std::size_t k = config.eigenpairs ? config.eigenpairs : eigenpairs_for(op, eps);
  const auto pairs = solve_eigs(op, k);

  DerivativeIdentity r;
  r.rhs = 2 * weighted_trace(op, pairs, sigma, eps);
  r.lhs = (e1_sum(u + du) - e1_sum(u - du)) / (2 * du);
  r.residual = std::abs(r.lhs - r.rhs);
  return r;
}

}  // namespace spectral
