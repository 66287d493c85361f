#include "spectral_corner/walker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "spectral_corner/error.hpp"
#include "spectral_corner/parallel.hpp"

namespace spectral {

namespace {

constexpr double kPi = std::numbers::pi;

struct Segment {
  Point a, b;
};

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based stream: value i of the stream keyed by (seed, sample, step, node).
class Counter {
 public:
  Counter(std::uint64_t seed, std::uint64_t sample) : key_(mix(mix(seed) ^ sample)) {}

  double uniform(std::uint64_t step, std::uint64_t node, std::uint64_t i) const {
    const std::uint64_t z = mix(key_ ^ mix((step << 20) ^ (node << 2) ^ i));
    return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
  }

  // Two independent standard normals (Box-Muller).
  Point normal2(std::uint64_t step, std::uint64_t node) const {
    const double r = std::sqrt(-2 * std::log(uniform(step, node, 0)));
    const double a = 2 * kPi * uniform(step, node, 1);
    return {r * std::cos(a), r * std::sin(a)};
  }

 private:
  std::uint64_t key_;
};

double cross(const Point& u, const Point& v) { return u.x() * v.y() - u.y() * v.x(); }

bool segments_cross(const Point& p, const Point& q, const Segment& s) {
  const Point r = q - p, d = s.b - s.a;
  const double den = cross(r, d);
  if (den == 0.0) return false;  // parallel paths meet the segment with probability zero
  const Point w = s.a - p;
  const double u = cross(w, d) / den, v = cross(w, r) / den;
  return u >= 0 && u <= 1 && v >= 0 && v <= 1;
}

double distance(const Point& p, const Segment& s) {
  const Point d = s.b - s.a;
  const double len2 = d.squaredNorm();
  const double u = len2 > 0 ? std::clamp((p - s.a).dot(d) / len2, 0.0, 1.0) : 0.0;
  return (p - (s.a + u * d)).norm();
}

std::vector<Segment> collect_segments(const Domain& domain) {
  std::vector<Segment> out;
  const auto& v = domain.vertices();
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back({v[i], v[(i + 1) % v.size()]});
  for (const auto& line : domain.slits()) {
    for (std::size_t i = 0; i + 1 < line.size(); ++i) out.push_back({line[i], line[i + 1]});
  }
  return out;
}

// Smallest distance from a free slit end to any other boundary segment.
double slit_clearance(const Domain& domain, const std::vector<Segment>& segments) {
  double best = std::numeric_limits<double>::infinity();
  const auto& v = domain.vertices();
  for (const auto& line : domain.slits()) {
    for (const Point& end : {line.front(), line.back()}) {
      double to_edge = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < v.size(); ++i) {
        to_edge = std::min(to_edge, distance(end, {v[i], v[(i + 1) % v.size()]}));
      }
      if (to_edge < 1e-12) continue;  // attached to the outer boundary
      for (const Segment& s : segments) {
        const double d = distance(end, s);
        if (d > 1e-12) best = std::min(best, d);
      }
    }
  }
  return best;
}

class BridgeWalker {
 public:
  BridgeWalker(const std::vector<Segment>& segments, const BridgeOptions& options)
      : segments_(segments), options_(options) {}

  // Bridge piece a -> b of duration dt at dyadic node `node` of `step`.
  bool survives(const Counter& rng, std::uint64_t step, std::uint64_t node, int depth,
                const Point& a, const Point& b, double dt) const {
    double stay = 1.0;
    for (const Segment& s : segments_) {
      if (segments_cross(a, b, s)) return false;
      // Half-plane bridge crossing probability for coordinate variance 2 dt.
      const double e = distance(a, s) * distance(b, s) / dt;
      if (e < 40) stay *= -std::expm1(-e);
    }
    const double hit = 1 - stay;
    if (hit < options_.accept_below) return true;
    if (depth >= options_.refine_depth) return rng.uniform(step, node, 2) >= hit;
    const Point mid = 0.5 * (a + b) + std::sqrt(dt / 2) * rng.normal2(step, node);
    return survives(rng, step, 2 * node, depth + 1, a, mid, dt / 2) &&
           survives(rng, step, 2 * node + 1, depth + 1, mid, b, dt / 2);
  }

 private:
  const std::vector<Segment>& segments_;
  BridgeOptions options_;
};

}  // namespace

BridgeEstimate bridge_trace_estimate(const Domain& domain, double t, std::size_t samples,
                                     int steps, std::uint64_t seed, const BridgeOptions& options) {
  const char* stage = "walker.bridge";
  if (!(t > 0)) throw InvalidInput(stage, "t must be positive");
  if (samples == 0 || steps < 1) throw InvalidInput(stage, "need at least one sample and step");
  if (domain.kind() != DomainKind::kRectangle && domain.kind() != DomainKind::kPolygon) {
    throw InvalidInput(stage, "the bridge walker handles straight-edged planar domains only");
  }
  const std::vector<Segment> segments = collect_segments(domain);
  const double clearance = slit_clearance(domain, segments);
  const double step_length = std::sqrt(4 * t / steps);  // rms planar displacement
  if (step_length > clearance) {
    std::ostringstream msg;
    msg << "rms step length " << step_length << " exceeds the slit clearance " << clearance
        << "; use at least " << std::ceil(4 * t / (clearance * clearance)) << " steps";
    throw InvalidInput(stage, msg.str());
  }

  Point lo = domain.vertices().front(), hi = lo;
  for (const Point& p : domain.vertices()) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const BridgeWalker walker(segments, options);
  const double dt = t / steps;

  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (samples + kChunk - 1) / kChunk;
  std::vector<std::size_t> inside(chunks, 0), alive(chunks, 0);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t end = std::min(samples, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      const Counter rng(seed, i);
      const Point p = lo + (hi - lo).cwiseProduct(
                               Point(rng.uniform(0, 0, 0), rng.uniform(0, 0, 1)));
      if (!domain.contains(p)) continue;
      ++inside[c];
      Point x = p;
      bool ok = true;
      for (int k = 0; k < steps && ok; ++k) {
        Point next = p;
        if (k + 1 < steps) {
          // Exact bridge transition: remaining time r = t - k dt.
          const double r = t - k * dt;
          const Point mean = x + (p - x) * (dt / r);
          next = mean + std::sqrt(2 * dt * (r - dt) / r) *
                            rng.normal2(static_cast<std::uint64_t>(k) + 1, 0);
        }
        ok = walker.survives(rng, static_cast<std::uint64_t>(k) + 1, 1, 0, x, next, dt);
        x = next;
      }
      if (ok) ++alive[c];
    }
  });

  BridgeEstimate r;
  r.t = t;
  r.samples = samples;
  r.steps = steps;
  r.seed = seed;
  for (std::size_t c = 0; c < chunks; ++c) {
    r.inside += inside[c];
    r.survivors += alive[c];
  }
  if (r.inside == 0) throw NumericalError(stage, "no start point fell inside the domain");
  const double f = static_cast<double>(r.survivors) / static_cast<double>(r.inside);
  const double scale = domain.area() / (4 * kPi * t);
  r.estimate = scale * f;
  r.standard_error = scale * std::sqrt(f * (1 - f) / static_cast<double>(r.inside));
  return r;
}

void write_csv(std::ostream& out, const std::vector<BridgeEstimate>& rows) {
  const auto old = out.precision(17);
  out << "t,estimate,stderr,n,steps,seed\n";
  for (const auto& r : rows) {
    out << r.t << ',' << r.estimate << ',' << r.standard_error << ',' << r.samples << ','
        << r.steps << ',' << r.seed << '\n';
  }
  out.precision(old);
}

}  // namespace spectral
