#include "spectral_corner/anomaly.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>

#include "spectral_corner/error.hpp"
#include "spectral_corner/parallel.hpp"
#include "spectral_corner/special.hpp"
#include "spectral_corner/spectrum.hpp"

namespace spectral {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLemmaTolerance = 1e-4;

bool fdm_capable(const Domain& domain) {
  return domain.kind() == DomainKind::kRectangle || domain.kind() == DomainKind::kPolygon;
}

void finish(AnomalyCheck& c) {
  c.gap = std::abs(c.lhs - c.rhs);
  c.rel_gap = c.rhs != 0.0 ? c.gap / std::abs(c.rhs) : c.gap;
  c.pass = (c.relative ? c.rel_gap : c.gap) <= c.tolerance;
}

// zeta'(0) of the flat domain scaled by s (metric e^{2 log s} g_0).
class ScaledZeta {
 public:
  ScaledZeta(const Domain& domain, const AnomalyConfig& config) : domain_(domain) {
    if (domain.kind() == DomainKind::kRectangle && !domain.has_slits()) return;
    if (domain.kind() == DomainKind::kDisk || domain.kind() == DomainKind::kSector) {
      base_ = analytic_spectrum_below(domain, config.lambda_max);
      return;
    }
    throw InvalidInput("anomaly.verify", "no analytic spectrum for " + domain.description());
  }

  double operator()(double s) const {
    ZetaOptions options;
    options.tol = 1e-6;
    if (!base_) {
      const RectangleTrace trace(domain_.width() * s, domain_.height() * s);
      return zeta_prime_at_zero(trace, trace.coefficients(), options).zeta_prime0;
    }
    const SpectrumTrace trace(rescaled(*base_, 1 / (s * s)));
    return zeta_prime_at_zero(trace, flat_coefficients(domain_.scaled(s)), options).zeta_prime0;
  }

 private:
  const Domain& domain_;
  std::optional<Spectrum> base_;
};

// zeta'(0) of the finite-difference model at each u, Richardson-combined over
// the configured grid pair.
std::map<double, double> fdm_zeta(const Domain& domain, const ScalarField& sigma,
                                  const std::vector<double>& us, const AnomalyConfig& config) {
  if (config.h.empty() || config.h.size() > 2) {
    throw InvalidInput("anomaly.verify", "grid list must hold one spacing or a pair h, h/2");
  }
  if (config.h.size() == 2 && std::abs(config.h[0] - 2 * config.h[1]) > 1e-12 * config.h[0]) {
    throw InvalidInput("anomaly.verify", "Richardson needs the pair h, h/2");
  }
  const std::size_t nh = config.h.size();
  std::vector<Spectrum> spectra(us.size() * nh);
  parallel_for(spectra.size(), [&](std::size_t i) {
    const MetricSpec metric{sigma, us[i / nh]};
    const DiscreteOperator op = assemble_fdm(domain, metric, metric.u, config.h[i % nh]);
    spectra[i] = discrete_spectrum(op, eigenpairs_for(op, config.floor));
  });
  ZetaOptions options;
  options.tol = std::numeric_limits<double>::infinity();
  options.model_span = config.model_span;
  std::map<double, double> out;
  for (std::size_t k = 0; k < us.size(); ++k) {
    const ExpansionCoefficients coeffs = geometric_coefficients(domain, {sigma, us[k]});
    if (nh == 2) {
      const RichardsonTrace trace(spectra[k * nh], spectra[k * nh + 1], config.floor);
      out[us[k]] = zeta_prime_at_zero(trace, coeffs, options).zeta_prime0;
    } else {
      const SpectrumTrace trace(spectra[k * nh], config.floor);
      out[us[k]] = zeta_prime_at_zero(trace, coeffs, options).zeta_prime0;
    }
  }
  return out;
}

}  // namespace

std::string to_string(AnomalyForm form) {
  return form == AnomalyForm::kIntegrated ? "integrated" : "differentiated";
}

double AnomalyBreakdown::corner_total() const {
  double s = 0.0;
  for (double c : corners) s += c;
  return s;
}

double AnomalyBreakdown::total() const {
  return dirichlet + curvature + boundary_curvature + normal_derivative + corner_total();
}

AnomalyBreakdown pa_rhs(const Domain& domain, const ScalarField& sigma, AnomalyForm form,
                        double u, double tol) {
  AnomalyBreakdown b;
  if (form == AnomalyForm::kDifferentiated) {
    // d/du log zdet = -2 a_0(u, psi = sigma).
    const ExpansionCoefficients c = geometric_coefficients(domain, {sigma, u}, sigma, tol);
    b.curvature = -2 * c.breakdown.interior_curvature;
    b.boundary_curvature = -2 * c.breakdown.boundary_curvature;
    b.normal_derivative = -2 * c.breakdown.normal_derivative;
    for (double t : c.breakdown.corners) b.corners.push_back(-2 * t);
    b.error = 2 * c.error;
    return b;
  }
  const bool constant = sigma.is_constant();
  if (!constant) sigma.require_derivatives();
  auto take = [&b](const Integral& r) {
    b.error = std::max(b.error, r.error);
    return r.value;
  };
  if (!constant) {
    b.dirichlet = take(domain.integrate_interior(
                      [&](const Point& p) { return sigma.gradient(p).squaredNorm(); }, tol)) /
                  (12 * kPi);
    b.normal_derivative =
        take(domain.integrate_boundary(
            [&](const BoundarySample& s) { return sigma.gradient(s.point).dot(s.normal); }, tol)) /
        (4 * kPi);
  }
  // The base metric is flat, so K_0 = 0 and only boundary curvature remains.
  b.boundary_curvature =
      take(domain.integrate_boundary(
          [&](const BoundarySample& s) { return sigma(s.point) * s.curvature; }, tol)) /
      (6 * kPi);
  for (const Corner& k : domain.corners()) {
    b.corners.push_back(2 * sigma(k.location) * corner_term(k.alpha));
  }
  return b;
}

AnomalyReport pa_verify(const Domain& domain, const ScalarField& sigma,
                        const AnomalyConfig& config) {
  AnomalyReport report;
  report.domain = domain.description();
  report.sigma = sigma.description();

  AnomalyCheck& in = report.integrated;
  in.form = AnomalyForm::kIntegrated;
  in.breakdown = pa_rhs(domain, sigma, AnomalyForm::kIntegrated);
  in.rhs = in.breakdown.total();

  AnomalyCheck dc;
  dc.form = AnomalyForm::kDifferentiated;
  dc.breakdown = pa_rhs(domain, sigma, AnomalyForm::kDifferentiated, config.u);
  dc.rhs = dc.breakdown.total();
  dc.relative = true;
  dc.tolerance = config.tol_differentiated;

  const double u = config.u, du = config.du, du2 = config.du_check;
  if (sigma.is_constant()) {
    const double c = sigma.constant_value();
    in.tolerance = dc.tolerance = config.tol_constant;
    in.relative = dc.relative = false;
    if (c == 0.0) {
      in.route = dc.route = "identity";
    } else {
      in.route = dc.route = "analytic";
      const ScaledZeta zp(domain, config);
      const double z0 = zp(1.0), z1 = zp(std::exp(c));
      in.zeta_prime = {z0, z1};
      in.lhs = z1 - z0;
      const double zm = zp(std::exp(c * (u - du))), zq = zp(std::exp(c * (u + du)));
      const double zm2 = zp(std::exp(c * (u - du2))), zq2 = zp(std::exp(c * (u + du2)));
      dc.zeta_prime = {zm, zq};
      dc.lhs = -(zq - zm) / (2 * du);
      dc.lhs_check = -(zq2 - zm2) / (2 * du2);
    }
  } else {
    if (!fdm_capable(domain)) {
      throw InvalidInput("anomaly.verify",
                         "non-constant sigma needs the finite-difference pipeline; " +
                             domain.description() + " is not polygonal");
    }
    in.route = dc.route = config.h.size() == 2 ? "fdm-richardson" : "fdm";
    in.tolerance = config.tol_relative;
    in.relative = true;
    std::vector<double> us{0.0, 1.0};
    if (config.differentiated) {
      for (double s : {u - du, u + du, u - du2, u + du2}) us.push_back(s);
    }
    const auto z = fdm_zeta(domain, sigma, us, config);
    in.zeta_prime = {z.at(0.0), z.at(1.0)};
    in.lhs = z.at(1.0) - z.at(0.0);
    if (config.differentiated) {
      dc.zeta_prime = {z.at(u - du), z.at(u + du)};
      dc.lhs = -(z.at(u + du) - z.at(u - du)) / (2 * du);
      dc.lhs_check = -(z.at(u + du2) - z.at(u - du2)) / (2 * du2);
    }
  }
  finish(in);
  report.pass = in.pass;
  if (config.differentiated) {
    finish(dc);
    report.differentiated = dc;
    report.pass = report.pass && dc.pass;
  }
  if (config.lemma && fdm_capable(domain)) {
    FdmConfig fdm;
    fdm.h = config.h.front();
    report.lemma = derivative_identity_residual(domain, sigma, u, config.lemma_eps, du, fdm);
    report.pass = report.pass && std::abs(report.lemma->residual) < kLemmaTolerance;
  }
  return report;
}

void print_table(std::ostream& out, const AnomalyReport& r) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << "domain: " << r.domain << "\nsigma:  " << r.sigma << "\n";
  auto row = [&out](const std::string& name, double value) {
    out << "  " << std::left << std::setw(26) << name << std::right << std::setw(18)
        << std::scientific << std::setprecision(8) << value << "\n";
  };
  auto check = [&](const AnomalyCheck& c) {
    out << "\n" << to_string(c.form) << " form (route: " << c.route << ")\n";
    const AnomalyBreakdown& b = c.breakdown;
    if (c.form == AnomalyForm::kIntegrated) row("dirichlet energy", b.dirichlet);
    row("interior curvature", b.curvature);
    row("boundary curvature", b.boundary_curvature);
    row("normal derivative", b.normal_derivative);
    for (std::size_t i = 0; i < b.corners.size(); ++i) {
      row("corner " + std::to_string(i), b.corners[i]);
    }
    row("rhs", c.rhs);
    row("lhs", c.lhs);
    if (c.lhs_check) row("lhs (check step)", *c.lhs_check);
    row(c.relative ? "relative gap" : "gap", c.relative ? c.rel_gap : c.gap);
    row("tolerance", c.tolerance);
    out << "  verdict: " << (c.pass ? "PASS" : "FAIL") << "\n";
  };
  check(r.integrated);
  if (r.differentiated) check(*r.differentiated);
  if (r.lemma) {
    out << "\nheat-trace derivative identity\n";
    row("d/du log-trace integral", r.lemma->lhs);
    row("2 Tr(sigma e^{-eps D})", r.lemma->rhs);
    row("residual", r.lemma->residual);
  }
  out << "\noverall: " << (r.pass ? "PASS" : "FAIL") << "\n";
  out.flags(flags);
  out.precision(precision);
}

}  // namespace spectral
