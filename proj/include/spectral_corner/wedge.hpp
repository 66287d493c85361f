#pragma once

#include <iosfwd>
#include <vector>

namespace spectral {

/// Infinite wedge of opening alpha*pi (alpha > 2 lives on the cone), the ball
/// B_eps around its tip and a time t.
struct WedgeBallQuery {
  double alpha = 1.0;
  double eps = 1.0;
  double t = 0.1;
};

/// Region S(eps, h, b) next to the straight boundary x2 = 0 of a half-plane:
/// 0 < x2 < h, -sqrt(eps^2 - x2^2) < x1 < b.
struct SliverShape {
  double eps = 1.0;
  double h = 0.5;
  double b = 0.0;
};

/// Exponentially small remainder A(t) of the ball-restricted wedge trace.
/// For alpha > 1/2,
///   A(t) = (1/4 pi) sin(pi/alpha)
///          int_0^inf e^{-eps^2(1+cosh q)/2t} / ((1+cosh q)(cosh(q/alpha) - cos(pi/alpha))) dq;
/// smaller angles first peel off the image terms of the kernel ratio.
double a_remainder(const WedgeBallQuery& q);

/// The published bound on |A(t)| for the range alpha falls in.
double a_remainder_bound(const WedgeBallQuery& q);

/// int_{W cap B_eps} H_W(t; x, x) dx =
///   alpha eps^2 / 8t - (eps^2 / 2 pi t) int_0^1 e^{-(eps u)^2/t} sqrt(1-u^2) du
///   + (1 - alpha^2)/(24 alpha) + A(t).
double wedge_ball_trace(const WedgeBallQuery& q);

/// int_0^1 e^{-x u^2} sqrt(1-u^2) du = (pi/4) e^{-x/2} (I_0 + I_1)(x/2).
double ball_profile(double x);

enum class SliverMode {
  kDisplayed,  // hb/4pi t - (b+eps)/8 sqrt(pi t) + (eps^2/4 pi t) int_0^{h/eps} ...
  kExact,      // quadrature of (1/4 pi t)(1 - e^{-x2^2/t}) over the region
};

/// Half-plane heat-kernel diagonal integrated over a sliver.
double halfplane_sliver_trace(const SliverShape& shape, double t,
                              SliverMode mode = SliverMode::kDisplayed);

struct WedgeRow {
  WedgeBallQuery query;
  double trace = 0.0;
  double remainder = 0.0;
  double bound = 0.0;
  bool pass = false;  // |remainder| <= bound
};

WedgeRow wedge_row(const WedgeBallQuery& q);
std::vector<WedgeRow> wedge_table(const std::vector<WedgeBallQuery>& queries);

/// alpha,eps,t,trace,A,bound,pass
void write_wedge_csv(std::ostream& out, const std::vector<WedgeRow>& rows);

}  // namespace spectral
