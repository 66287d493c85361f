#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "spectral_corner/geometry.hpp"

namespace spectral {

/// Ascending Dirichlet eigenvalues with their provenance.
struct Spectrum {
  enum class Provenance { kAnalytic, kDiscrete };

  std::vector<double> eigenvalues;
  Provenance provenance = Provenance::kAnalytic;
  double h = 0.0;          // grid spacing (discrete only)
  std::size_t nodes = 0;   // unknowns (discrete only)
  /// No eigenvalue below this bound is missing from the list.
  double completeness = std::numeric_limits<double>::infinity();
  double volume = 0.0;            // Vol(M, g)
  double boundary_length = 0.0;   // prime-end length of the boundary
  /// Sides (a, b) when the spectrum is that of a flat rectangle; enables the
  /// theta-function route for traces.
  std::optional<std::array<double, 2>> rectangle;
  std::string label;

  std::size_t size() const { return eigenvalues.size(); }
  bool complete() const { return std::isinf(completeness); }
};

/// First N eigenvalues of a rectangle, disk or sector (any alpha > 0).
Spectrum analytic_spectrum(const Domain& domain, std::size_t N);
/// All eigenvalues <= lambda_max.
Spectrum analytic_spectrum_below(const Domain& domain, double lambda_max);

/// lambda_n Vol / (4 pi n), n 1-based.
double weyl_ratio(const Spectrum& spectrum, std::size_t n);

/// Spectrum with every eigenvalue multiplied by factor.
Spectrum rescaled(const Spectrum& spectrum, double factor);

/// CSV rows (index, eigenvalue, multiplicity); multiplicity counts equal
/// neighbours within a relative 1e-10.
void write_csv(const Spectrum& spectrum, std::ostream& out);

// ---------------------------------------------------------------------------
// Finite differences

/// Five-point Dirichlet Laplacian of a polygonal domain on a uniform grid for
/// the metric e^{2u sigma}(dx^2 + dy^2): A x = lambda W x with W diagonal.
/// Nodes on slits carry the Dirichlet condition; grid edges crossing a slit
/// are cut, so the two sides never couple.
struct DiscreteOperator {
  double h = 0.0;
  double u = 0.0;
  Point origin = Point::Zero();
  std::vector<Eigen::Vector2i> grid_index;  // (i, j) of every unknown
  std::vector<Point> nodes;                 // node positions
  Eigen::SparseMatrix<double> stiffness;    // A
  Eigen::VectorXd weight;                   // diagonal of W
  double volume = 0.0;                      // Vol_u of the continuum domain
  double boundary_length = 0.0;             // l_u of the continuum boundary

  Eigen::Index size() const { return weight.size(); }
  /// W^{-1/2} A W^{-1/2}.
  Eigen::SparseMatrix<double> symmetric() const;
};

struct Eigenpair {
  double lambda = 0.0;
  /// Node values, normalized so that h^2 sum_i w_i phi_i^2 = 1.
  Eigen::VectorXd phi;
};

DiscreteOperator assemble_fdm(const Domain& domain, const MetricSpec& metric, double u,
                              double h);

/// k smallest eigenpairs; residual ||A x - lambda W x|| / ||x|| below
/// 1e-9 max(1, lambda).
std::vector<Eigenpair> solve_eigs(const DiscreteOperator& op, std::size_t k);
/// Number of eigenvalues of op below lambda, by inertia of A - lambda W.
std::size_t eigenvalue_count_below(const DiscreteOperator& op, double lambda);

/// Eigenvalues only (same solver, vectors discarded).
std::vector<double> solve_eigenvalues(const DiscreteOperator& op, std::size_t k);

/// Discrete spectrum from the k smallest eigenvalues; completeness is set to
/// 0.8 lambda_k unless all eigenvalues were computed.
Spectrum discrete_spectrum(const DiscreteOperator& op, std::size_t k);
Spectrum discrete_spectrum(const DiscreteOperator& op, const std::vector<double>& eigenvalues);

/// Weighted inner product h^2 sum w f g.
double weighted_dot(const DiscreteOperator& op, const Eigen::VectorXd& f,
                    const Eigen::VectorXd& g);

}  // namespace spectral
