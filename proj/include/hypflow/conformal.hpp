#pragma once

// Conformal solitons: curves whose ICSF evolution is a vertical translation.
//
// By arc length with inclination theta, the soliton condition reduces to
//
//     y'     = sin(theta)
//     theta' = -1/cos(theta) - cos(theta)/y    on  {y > 0, |theta| < pi/2},
//
// together with x' = cos(theta). theta' < 0 everywhere, so theta sweeps
// monotonically from +pi/2 down to -pi/2 over a finite arc; y rises while
// theta > 0 and falls while theta < 0. The resulting curve is a concave cap:
// a graph over a bounded x-interval (x_m, x_M) with vertical tangents at both
// endpoints, which sit at a common height y*.
//
// The system carries a first integral (check by differentiating and
// substituting the equations):
//
//     E(y, theta) = 2/y + cos^2(theta)/y^2,       dE/ds = 0.
//
// At the vertical endpoints cos(theta) = 0, so y* = 2/E exactly. Orbits are
// the level sets y = (1 + sqrt(1 + E cos^2 theta))/E.
//
// Every trace is anchored at its theta = 0 crossing: states are reported in
// coordinates with s = 0, x = 0 there, making the curve symmetric under
// s -> -s, (x, y, theta) -> (-x, y, -theta).

#include <cmath>
#include <string>

#include "hypflow/halfplane.hpp"
#include "hypflow/ode.hpp"
#include "hypflow/parabolic.hpp"
#include "hypflow/sampling.hpp"

namespace hypflow {

// Right-hand side (dy, dtheta) of the phase system. Throws std::domain_error
// outside {y > 0, |theta| < pi/2}.
std::pair<double, double> conf_rhs(double y, double theta);

// First integral E(y, theta) = 2/y + cos^2(theta)/y^2 (same domain checks).
double conformal_invariant(double y, double theta);

// Hyperbolic curvature along a conformal soliton: kappa_h = -y/cos(theta).
inline double conf_kappa(double y, double theta) { return -y / std::cos(theta); }

struct ConformalControl {
  ode::StepControl step;
  double boundary_margin = 1e-6;  // guard inset from theta = -+pi/2 and y = 0

  ConformalControl() {
    step.s_max = 50.0;
    step.h_min = 1e-14;  // boundary guards sit at 1e-6; keep them reachable
  }
};

struct ConformalTrace {
  double y0 = 0.0, theta0 = 0.0;  // requested start

  // Canonical trajectories, anchored at the theta = 0 crossing: s = 0 and
  // x = 0 there. State layout: (y, theta, x). The requested start sits at
  // (s_start, x_start) in these coordinates; y_anchor is y at the anchor.
  ode::Trajectory forward, backward;
  double y_anchor = 0.0;
  double s_start = 0.0, x_start = 0.0;

  // Extrapolated boundary limits: theta -> -pi/2 forward, +pi/2 backward,
  // both at height y*. y_star averages the two sides; y_star_err bounds the
  // spread plus extrapolation error.
  BoundaryLimit backward_limit, forward_limit;
  double y_star = 0.0, y_star_err = 0.0;

  // Extrapolated x-span of the soliton curve (x_min = -x_max by symmetry).
  double x_min = 0.0, x_max = 0.0;

  double s_min = 0.0, s_max = 0.0;  // integrated parameter range
  bool ok = false;
  std::string diagnostics;  // nonempty iff !ok
};

// Integrate the orbit through (y0, theta0) and re-anchor it at theta = 0.
// For theta0 < 0 the mirror symmetry maps the problem to theta0 > 0; the
// canonical trace is identical, only (s_start, x_start) flip sign.
ConformalTrace integrate_conformal(double y0, double theta0,
                                   const ConformalControl& ctrl = {});

// State (y, theta, x) at canonical parameter s, via dense output.
PhasePoint conformal_state(const ConformalTrace& trace, double s);

// Merged backward+forward integration nodes, strictly ascending in s.
std::vector<PhasePoint> conformal_nodes(const ConformalTrace& trace);

struct ConformalCurve {
  PolyCurve curve;            // open polyline, x strictly increasing
  std::vector<double> s;      // parameter at each vertex
  std::vector<double> theta;  // inclination at each vertex
  double x_m = 0.0, x_M = 0.0;     // extrapolated span of the full curve
  double y_star = 0.0;             // common endpoint height
  bool concave = false;            // y - sin(theta)cos(theta)... see below
  bool vertical_endpoints = false; // |tan(theta)| large at both sampled ends
};

// Resample a trace into a polyline. Concavity is certified through the sign
// of y''(x) = -(y + cos^2 theta)/(y cos^4 theta), negative on the whole
// domain. Throws std::invalid_argument for bad sampling parameters or a
// window excluding the anchor.
ConformalCurve conformal_curve(const ConformalTrace& trace,
                               const TraceSampling& sampling = {});

// Evaluate the graph y = y(x). Throws std::domain_error outside the sampled
// x-range.
double y_of_x(const ConformalCurve& curve, double x);

// Max over interior vertices of |1/kappa_h + <N, d/dy>| (hyperbolic inner
// product). Zero exactly on conformal solitons; a horizontal line y = c
// returns the constant 1 + 1/c.
double conformal_residual(const PolyCurve& curve);
double conformal_residual(const ConformalCurve& curve);

}  // namespace hypflow
