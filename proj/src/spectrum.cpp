#include "spectral_corner/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "spectral_corner/error.hpp"
#include "spectral_corner/special.hpp"

namespace spectral {

namespace {

constexpr double kPi = std::numbers::pi;

void push_zeros(std::vector<double>& out, double nu, double R, double lambda_max, int copies) {
  for (double j : bessel_zeros_below(nu, R * std::sqrt(lambda_max))) {
    const double lam = (j / R) * (j / R);
    if (lam > lambda_max) break;
    for (int c = 0; c < copies; ++c) out.push_back(lam);
  }
}

Spectrum base(const Domain& domain) {
  Spectrum s;
  s.provenance = Spectrum::Provenance::kAnalytic;
  s.volume = domain.area();
  s.boundary_length = domain.perimeter();
  s.label = domain.description();
  if (domain.kind() == DomainKind::kRectangle && !domain.has_slits()) {
    s.rectangle = std::array<double, 2>{domain.width(), domain.height()};
  }
  return s;
}

}  // namespace

Spectrum analytic_spectrum_below(const Domain& domain, double lambda_max) {
  if (!(lambda_max > 0)) throw InvalidInput("spectrum.analytic", "lambda_max must be positive");
  Spectrum s = base(domain);
  auto& ev = s.eigenvalues;
  switch (domain.kind()) {
    case DomainKind::kRectangle: {
      if (domain.has_slits()) {
        throw InvalidInput("spectrum.analytic", "slit rectangles have no closed-form spectrum");
      }
      const double a = domain.width(), b = domain.height();
      const double pi2 = kPi * kPi;
      for (long m = 1; pi2 * m * m / (a * a) <= lambda_max; ++m) {
        const double rest = lambda_max / pi2 - double(m * m) / (a * a);
        const long nmax = static_cast<long>(std::floor(std::sqrt(std::max(rest, 0.0)) * b)) + 1;
        for (long n = 1; n <= nmax; ++n) {
          const double lam = pi2 * (double(m * m) / (a * a) + double(n * n) / (b * b));
          if (lam <= lambda_max) ev.push_back(lam);
        }
      }
      break;
    }
    case DomainKind::kDisk: {
      const double R = domain.radius();
      for (int nu = 0; nu < R * std::sqrt(lambda_max); ++nu) {
        push_zeros(ev, nu, R, lambda_max, nu == 0 ? 1 : 2);
      }
      break;
    }
    case DomainKind::kSector: {
      const double R = domain.radius(), alpha = domain.sector_alpha();
      for (int k = 1; k / alpha < R * std::sqrt(lambda_max); ++k) {
        push_zeros(ev, k / alpha, R, lambda_max, 1);
      }
      break;
    }
    case DomainKind::kPolygon:
      throw InvalidInput("spectrum.analytic",
                         "no closed-form spectrum for polygons; use the finite-difference solver");
  }
  std::sort(ev.begin(), ev.end());
  s.completeness = lambda_max;
  return s;
}

Spectrum analytic_spectrum(const Domain& domain, std::size_t N) {
  if (N == 0) throw InvalidInput("spectrum.analytic", "N must be at least 1");
  // Weyl guess with the perimeter correction, then grow until N are found.
  const double A = domain.area(), L = domain.perimeter();
  const double x = (L + std::sqrt(L * L + 16 * kPi * A * double(N))) / (2 * A);
  double lambda = 1.05 * x * x + 50.0;
  for (;;) {
    Spectrum s = analytic_spectrum_below(domain, lambda);
    if (s.size() >= N) {
      s.eigenvalues.resize(N);
      s.completeness = s.eigenvalues.back();
      return s;
    }
    lambda *= 1.25;
  }
}

double weyl_ratio(const Spectrum& spectrum, std::size_t n) {
  if (n == 0 || n > spectrum.size()) {
    throw InvalidInput("spectrum.weyl_ratio", "index out of range");
  }
  return spectrum.eigenvalues[n - 1] * spectrum.volume / (4 * kPi * double(n));
}

Spectrum rescaled(const Spectrum& spectrum, double factor) {
  Spectrum s = spectrum;
  for (double& l : s.eigenvalues) l *= factor;
  s.completeness *= factor;
  s.volume /= factor;
  s.boundary_length /= std::sqrt(factor);
  if (s.rectangle) {
    (*s.rectangle)[0] /= std::sqrt(factor);
    (*s.rectangle)[1] /= std::sqrt(factor);
  }
  return s;
}

void write_csv(const Spectrum& spectrum, std::ostream& out) {
  out << "index,eigenvalue,multiplicity\n";
  const auto& ev = spectrum.eigenvalues;
  out.precision(17);
  for (std::size_t i = 0; i < ev.size();) {
    std::size_t j = i + 1;
    while (j < ev.size() && std::abs(ev[j] - ev[i]) <= 1e-10 * ev[i]) ++j;
    out << (i + 1) << ',' << ev[i] << ',' << (j - i) << '\n';
    i = j;
  }
}

}  // namespace spectral
