#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "spectral_corner/error.hpp"
#include "spectral_corner/spectrum.hpp"

namespace spectral {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Eigen::Index kDenseLimit = 2000;
constexpr Eigen::Index kSliceMax = 80;

using SpMat = Eigen::SparseMatrix<double>;

double orient(const Point& a, const Point& b, const Point& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

bool on_segment(const Point& p, const Point& a, const Point& b, double tol) {
  const Eigen::Vector2d d = b - a;
  const double s = std::clamp((p - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
  return (a + s * d - p).norm() < tol;
}

// Closed segments [p,q] and [a,b] intersect.
bool crosses(const Point& p, const Point& q, const Point& a, const Point& b, double tol) {
  const double o1 = orient(p, q, a), o2 = orient(p, q, b);
  const double o3 = orient(a, b, p), o4 = orient(a, b, q);
  if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) {
    return true;
  }
  return on_segment(a, p, q, tol) || on_segment(b, p, q, tol) || on_segment(p, a, b, tol) ||
         on_segment(q, a, b, tol);
}

// Shift-and-invert inertia counter for B - s I.
class ShiftedFactor {
 public:
  explicit ShiftedFactor(const SpMat& B) : B_(B) {
    identity_.resize(B.rows(), B.cols());
    identity_.setIdentity();
    ldlt_.analyzePattern(B_);
  }

  void factor(double shift) {
    ldlt_.factorize(B_ - shift * identity_);
    if (ldlt_.info() != Eigen::Success) {
      throw NumericalError("spectrum.solve_eigs", "LDLT factorization failed at a spectral shift");
    }
  }

  // Number of eigenvalues of B below shift (Sylvester's law of inertia).
  Eigen::Index count_below(double shift) {
    factor(shift);
    return (ldlt_.vectorD().array() < 0).count();
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& x) const { return ldlt_.solve(x); }

 private:
  const SpMat& B_;
  SpMat identity_;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

struct Slice {
  double lo, hi;
  Eigen::Index below_lo, below_hi;
};

struct PartialEigen {
  std::vector<double> values;
  Eigen::MatrixXd vectors;  // columns are unit eigenvectors of B
};

// All eigenpairs of B in [lo, hi): shift-invert Lanczos with full
// reorthogonalization, locking converged pairs and restarting until the
// count certified by inertia is reached.
void solve_slice(const SpMat& B, ShiftedFactor& factor, const Slice& slice, bool vectors,
                 std::uint64_t seed, std::vector<double>& values_out,
                 std::vector<Eigen::VectorXd>& vectors_out) {
  const Eigen::Index n = B.rows();
  const Eigen::Index target = slice.below_hi - slice.below_lo;
  if (target == 0) return;
  const double shift = slice.lo + 0.5 * (slice.hi - slice.lo) * (1 + 1e-7 * std::numbers::sqrt2);
  factor.factor(shift);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd locked(n, 0);
  std::vector<double> locked_values;
  Eigen::Index steps = std::min<Eigen::Index>(n, 2 * target + 40);
  int stalls = 0;

  auto project_out = [&](Eigen::VectorXd& w, const Eigen::MatrixXd& Q, Eigen::Index cols) {
    if (cols > 0) w.noalias() -= Q.leftCols(cols) * (Q.leftCols(cols).transpose() * w);
    if (locked.cols() > 0) w.noalias() -= locked * (locked.transpose() * w);
  };

  while (static_cast<Eigen::Index>(locked_values.size()) < target) {
    const Eigen::Index m = std::min<Eigen::Index>(steps, n - locked.cols());
    Eigen::MatrixXd Q(n, m);
    Eigen::VectorXd alpha(m), beta(m);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss(rng);
    project_out(v, Q, 0);
    project_out(v, Q, 0);
    v.normalize();
    Eigen::Index used = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
      Q.col(j) = v;
      Eigen::VectorXd w = factor.solve(v);
      alpha[j] = v.dot(w);
      w -= alpha[j] * v;
      if (j > 0) w -= beta[j - 1] * Q.col(j - 1);
      // Full reorthogonalization, repeated only when cancellation is severe.
      const double before_norm = w.norm();
      project_out(w, Q, j + 1);
      if (w.norm() < 0.7 * before_norm) project_out(w, Q, j + 1);
      used = j + 1;
      beta[j] = w.norm();
      if (beta[j] < 1e-12 * std::abs(alpha[j]) || j + 1 == m) break;
      v = w / beta[j];
    }
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(used, used);
    for (Eigen::Index j = 0; j < used; ++j) {
      T(j, j) = alpha[j];
      if (j + 1 < used) T(j, j + 1) = T(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri(T);
    const Eigen::Index before = locked.cols();
    std::vector<Eigen::VectorXd> fresh;
    std::vector<double> fresh_values;
    std::vector<Eigen::Index> candidates;
    for (Eigen::Index i = 0; i < used; ++i) {
      const double theta = tri.eigenvalues()[i];
      if (theta == 0.0) continue;
      const double lambda = shift + 1.0 / theta;
      if (lambda >= slice.lo && lambda < slice.hi) candidates.push_back(i);
    }
    if (!candidates.empty()) {
      Eigen::MatrixXd S(used, static_cast<Eigen::Index>(candidates.size()));
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        S.col(static_cast<Eigen::Index>(c)) = tri.eigenvectors().col(candidates[c]);
      }
      Eigen::MatrixXd X = Q.leftCols(used) * S;
      X.colwise().normalize();
      const Eigen::MatrixXd BX = B * X;
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        const auto col = static_cast<Eigen::Index>(c);
        const double lambda = shift + 1.0 / tri.eigenvalues()[candidates[c]];
        const double res = (BX.col(col) - lambda * X.col(col)).norm();
        if (res > 1e-9 * std::max(1.0, std::abs(lambda))) continue;
        fresh.push_back(X.col(col));
        fresh_values.push_back(lambda);
      }
    }
    if (!fresh.empty()) {
      locked.conservativeResize(n, before + static_cast<Eigen::Index>(fresh.size()));
      for (std::size_t i = 0; i < fresh.size(); ++i) {
        locked.col(before + static_cast<Eigen::Index>(i)) = fresh[i];
        locked_values.push_back(fresh_values[i]);
      }
    }
    if (locked.cols() == before) {
      if (++stalls > 6) {
        std::ostringstream msg;
        msg << "shift-invert Lanczos found " << locked_values.size() << " of " << target
            << " eigenvalues in [" << slice.lo << ", " << slice.hi << ")";
        throw NumericalError("spectrum.solve_eigs", msg.str());
      }
      steps = std::min<Eigen::Index>(n, steps + steps / 2 + 20);
    }
  }
  if (static_cast<Eigen::Index>(locked_values.size()) > target) {
    std::ostringstream msg;
    msg << "Lanczos returned " << locked_values.size() << " eigenvalues in [" << slice.lo << ", "
        << slice.hi << ") but inertia certifies " << target;
    throw NumericalError("spectrum.solve_eigs", msg.str());
  }
  for (std::size_t i = 0; i < locked_values.size(); ++i) {
    values_out.push_back(locked_values[i]);
    if (vectors) vectors_out.push_back(locked.col(static_cast<Eigen::Index>(i)));
  }
}

PartialEigen smallest_eigenpairs(const SpMat& B, Eigen::Index k, double volume, bool vectors) {
  const Eigen::Index n = B.rows();
  if (k <= 0 || k > n) {
    throw InvalidInput("spectrum.solve_eigs", "requested eigenpair count exceeds the node count");
  }
  PartialEigen out;
  if (n <= kDenseLimit) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(B),
                                                      vectors ? Eigen::ComputeEigenvectors
                                                              : Eigen::EigenvaluesOnly);
    out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + k);
    if (vectors) out.vectors = es.eigenvectors().leftCols(k);
    return out;
  }

  ShiftedFactor factor(B);
  // Upper shift from Weyl's law, grown until it covers k eigenvalues.
  double hi = 4 * kPi * double(k) / volume * 1.2 + 1.0;
  Eigen::Index below_hi = factor.count_below(hi);
  while (below_hi < k) {
    hi *= 1.5;
    below_hi = factor.count_below(hi);
  }
  // Bisect into slices holding at most kSliceMax eigenvalues.
  std::vector<Slice> pending{{0.0, hi, 0, below_hi}}, slices;
  while (!pending.empty()) {
    Slice s = pending.back();
    pending.pop_back();
    if (s.below_lo >= k) continue;
    if (s.below_hi - s.below_lo <= kSliceMax) {
      slices.push_back(s);
      continue;
    }
    const double mid = 0.5 * (s.lo + s.hi) * (1 + 1e-9 * std::numbers::pi);
    const Eigen::Index c = factor.count_below(mid);
    pending.push_back({mid, s.hi, c, s.below_hi});
    pending.push_back({s.lo, mid, s.below_lo, c});
  }
  std::sort(slices.begin(), slices.end(), [](const Slice& a, const Slice& b) { return a.lo < b.lo; });

  std::vector<double> values;
  std::vector<Eigen::VectorXd> vecs;
  std::uint64_t seed = 0x5eed;
  for (const Slice& s : slices) {
    if (static_cast<Eigen::Index>(values.size()) >= k) break;
    solve_slice(B, factor, s, vectors, seed++, values, vecs);
  }
  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  out.values.resize(k);
  if (vectors) out.vectors.resize(n, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    out.values[i] = values[order[i]];
    if (vectors) out.vectors.col(i) = vecs[order[i]];
  }
  return out;
}

}  // namespace

SpMat DiscreteOperator::symmetric() const {
  const Eigen::VectorXd s = weight.cwiseSqrt().cwiseInverse();
  SpMat B = s.asDiagonal() * stiffness * s.asDiagonal();
  B.makeCompressed();
  return B;
}

DiscreteOperator assemble_fdm(const Domain& domain, const MetricSpec& metric, double u,
                              double h) {
  const char* stage = "spectrum.assemble_fdm";
  if (domain.kind() == DomainKind::kDisk || domain.kind() == DomainKind::kSector) {
    throw InvalidInput(stage,
                       "finite differences need a polygonal domain; disks and sectors use the "
                       "analytic spectrum");
  }
  for (const Corner& c : domain.corners()) {
    if (c.alpha > 2.0 + 1e-12) {
      throw InvalidInput(stage, "corner with alpha > 2 has no planar grid; use the analytic sector "
                                "or wedge routines");
    }
  }
  if (!(h > 0)) throw InvalidInput(stage, "grid spacing must be positive");

  const auto& v = domain.vertices();
  Point lo = v.front(), hi = v.front();
  for (const Point& p : v) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  auto check_on_grid = [&](const Point& p, const char* what) {
    const Eigen::Vector2d r = (p - lo) / h;
    if ((r - r.array().round().matrix()).cwiseAbs().maxCoeff() > 1e-8) {
      std::ostringstream msg;
      msg << what << " (" << p.x() << ", " << p.y() << ") is not on the grid of spacing " << h;
      throw InvalidInput(stage, msg.str());
    }
  };
  for (const Point& p : v) check_on_grid(p, "vertex");
  for (const auto& line : domain.slits())
    for (const Point& p : line) check_on_grid(p, "slit point");

  DiscreteOperator op;
  op.h = h;
  op.u = u;
  op.origin = lo;
  const int nx = static_cast<int>(std::lround((hi.x() - lo.x()) / h));
  const int ny = static_cast<int>(std::lround((hi.y() - lo.y()) / h));
  Eigen::MatrixXi index = Eigen::MatrixXi::Constant(nx + 1, ny + 1, -1);
  for (int j = 1; j < ny; ++j) {
    for (int i = 1; i < nx; ++i) {
      const Point p = lo + h * Point(i, j);
      if (!domain.contains(p)) continue;
      index(i, j) = static_cast<int>(op.nodes.size());
      op.nodes.push_back(p);
      op.grid_index.emplace_back(i, j);
    }
  }
  const auto n = static_cast<Eigen::Index>(op.nodes.size());
  if (n == 0) throw InvalidInput(stage, "grid too coarse: no interior nodes");

  const double tol = 1e-9 * h;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(5 * n));
  const double inv_h2 = 1.0 / (h * h);
  const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto [i, j] = std::pair{op.grid_index[k].x(), op.grid_index[k].y()};
    trip.emplace_back(k, k, 4 * inv_h2);
    for (int d = 0; d < 4; ++d) {
      const int q = index(i + di[d], j + dj[d]);
      if (q < 0) continue;
      bool cut = false;
      for (const auto& piece : domain.pieces()) {
        if (crosses(op.nodes[k], op.nodes[q], piece.start, piece.end, tol)) {
          cut = true;
          break;
        }
      }
      if (!cut) trip.emplace_back(k, q, -inv_h2);
    }
  }
  op.stiffness.resize(n, n);
  op.stiffness.setFromTriplets(trip.begin(), trip.end());
  op.stiffness.makeCompressed();

  op.weight.resize(n);
  const bool flat = u == 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    op.weight[k] = flat ? 1.0 : std::exp(2 * u * metric.sigma(op.nodes[k]));
  }
  if (flat) {
    op.volume = domain.area();
    op.boundary_length = domain.perimeter();
  } else {
    op.volume = domain.integrate_interior(
        [&](const Point& p) { return std::exp(2 * u * metric.sigma(p)); }).value;
    op.boundary_length = domain.integrate_boundary(
        [&](const BoundarySample& b) { return std::exp(u * metric.sigma(b.point)); }).value;
  }
  return op;
}

std::vector<Eigenpair> solve_eigs(const DiscreteOperator& op, std::size_t k) {
  const SpMat B = op.symmetric();
  const PartialEigen pe =
      smallest_eigenpairs(B, static_cast<Eigen::Index>(k), op.volume, /*vectors=*/true);
  const Eigen::VectorXd scale = (op.h * op.weight.cwiseSqrt()).cwiseInverse();
  std::vector<Eigenpair> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    out[i].lambda = pe.values[i];
    out[i].phi = scale.cwiseProduct(pe.vectors.col(static_cast<Eigen::Index>(i)));
  }
  return out;
}

std::size_t eigenvalue_count_below(const DiscreteOperator& op, double lambda) {
  const SpMat B = op.symmetric();
  ShiftedFactor factor(B);
  return static_cast<std::size_t>(factor.count_below(lambda));
}

std::vector<double> solve_eigenvalues(const DiscreteOperator& op, std::size_t k) {
  const SpMat B = op.symmetric();
  return smallest_eigenpairs(B, static_cast<Eigen::Index>(k), op.volume, /*vectors=*/false).values;
}

Spectrum discrete_spectrum(const DiscreteOperator& op, const std::vector<double>& eigenvalues) {
  Spectrum s;
  s.provenance = Spectrum::Provenance::kDiscrete;
  s.eigenvalues = eigenvalues;
  std::sort(s.eigenvalues.begin(), s.eigenvalues.end());
  s.h = op.h;
  s.nodes = static_cast<std::size_t>(op.size());
  s.volume = op.volume;
  s.boundary_length = op.boundary_length;
  if (static_cast<Eigen::Index>(eigenvalues.size()) < op.size()) {
    s.completeness = 0.8 * s.eigenvalues.back();
  }
  std::ostringstream label;
  label << "fdm(h=" << op.h << ", nodes=" << op.size() << ", u=" << op.u << ")";
  s.label = label.str();
  return s;
}

Spectrum discrete_spectrum(const DiscreteOperator& op, std::size_t k) {
  return discrete_spectrum(op, solve_eigenvalues(op, k));
}

double weighted_dot(const DiscreteOperator& op, const Eigen::VectorXd& f,
                    const Eigen::VectorXd& g) {
  return op.h * op.h * (op.weight.array() * f.array() * g.array()).sum();
}

}  // namespace spectral
