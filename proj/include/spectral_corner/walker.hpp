#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "spectral_corner/geometry.hpp"

namespace spectral {

struct BridgeEstimate {
  double t = 0.0;
  std::size_t samples = 0;
  int steps = 0;
  std::uint64_t seed = 0;
  std::size_t inside = 0;     // start points that fell in the domain
  std::size_t survivors = 0;  // bridges that never left it
  double estimate = 0.0;      // Area / (4 pi t) * survivors / inside
  double standard_error = 0.0;
};

struct BridgeOptions {
  /// Dyadic refinement levels below a step when the bridge nears the boundary.
  int refine_depth = 8;
  /// Crossing probability below which a step is accepted without refinement.
  double accept_below = 1e-7;
};

/// Tr e^{-t Delta} = int_D (1/4 pi t) P[bridge p -> p of lifetime t stays in D] dp
/// for straight-edged planar domains (slits included). Start points are drawn
/// uniformly from the bounding box; the bridge has coordinate variance 2s at
/// time s and is sampled exactly at `steps` times, then refined by conditional
/// midpoints near the boundary, with a half-plane crossing correction at the
/// finest level. Every Gaussian is keyed by (seed, sample, step, node), so the
/// result does not depend on the thread count and shares paths across domains.
BridgeEstimate bridge_trace_estimate(const Domain& domain, double t, std::size_t samples,
                                     int steps, std::uint64_t seed,
                                     const BridgeOptions& options = {});

/// t,estimate,stderr,n,steps,seed
void write_csv(std::ostream& out, const std::vector<BridgeEstimate>& rows);

}  // namespace spectral
