#pragma once

// Parabolic solitons: curves whose ICSF evolution is a horizontal translation.
//
// Writing the curve by arc length with inclination theta, the soliton
// condition reduces to the phase-plane system
//
//     y'     = sin(theta)
//     theta' = 1/sin(theta) - cos(theta)/y        on  {y > 0, theta in (0, pi)},
//
// together with x' = cos(theta), x(0) = 0. Orbits fall into three families,
// separated by a threshold height H for starts on theta = pi/2:
//
//   TypeI              backward limit (0, pi/2): the curve meets the x-axis
//                      orthogonally. Crosses the nullcline Gamma: y =
//                      (1/2) sin(2 theta) exactly once in backward time.
//   TypeII             backward limit (Y_bar, 0) with Y_bar > 0: a concave
//                      graph over a bounded y-interval.
//   OrthogonalToXAxis  starts with theta0 > pi/2 and keeps theta > pi/2 all
//                      the way down to y -> 0.
//
// Forward in time every orbit runs to theta -> pi at a finite height Y (the
// horizontal asymptote of the soliton curve).

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hypflow/halfplane.hpp"
#include "hypflow/ode.hpp"
#include "hypflow/sampling.hpp"

namespace hypflow {

// Right-hand side of the phase system; domain-checked.
std::pair<double, double> para_rhs(double y, double theta);

// The theta-nullcline Gamma: y = (1/2) sin(2 theta), for theta in (0, pi).
double gamma_curve(double theta);

// Hyperbolic curvature along a parabolic soliton: kappa_h = y / sin(theta).
inline double para_kappa(double y, double theta) { return y / std::sin(theta); }

enum class OrbitType { TypeI, TypeII, OrthogonalToXAxis, Undetermined };
const char* to_string(OrbitType type);

struct GammaCrossing {
  double s = 0.0, y = 0.0, theta = 0.0;
  bool tangential = false;  // guard slope below the double-root threshold
};

struct BoundaryLimit {
  double y = 0.0;
  double theta = 0.0;
};

struct OrbitControl {
  ode::StepControl step;
  double boundary_margin = 1e-6;  // guard inset from theta in {0, pi} and y = 0

  OrbitControl() {
    step.s_max = 50.0;
    step.h_min = 1e-14;  // boundary guards sit at 1e-6; keep them reachable
  }
};

struct OrbitTrace {
  double y0 = 0.0, theta0 = 0.0;
  ode::Trajectory forward;   // state layout: (y, theta, x)
  ode::Trajectory backward;
  std::vector<GammaCrossing> gamma_crossings;  // ascending in s
  OrbitType type = OrbitType::Undetermined;
  BoundaryLimit backward_limit;     // extrapolated onto the boundary
  BoundaryLimit forward_limit;      // (Y, theta at the recorded endpoint)
  double forward_limit_err = 0.0;   // |extrapolated Y - recorded Y|
  double s_min = 0.0, s_max = 0.0;  // reached parameter span
  std::string diagnostics;          // nonempty iff Undetermined
};

OrbitTrace integrate_orbit(double y0, double theta0, const OrbitControl& ctrl = {});

// The reflection s -> (y(-s), theta(-s) - pi, x(-s)), again a solution of the
// phase system but living in the mirrored chart theta in (-pi, 0). Involutive;
// used as a symmetry check, not as a phase-space orbit.
OrbitTrace reflect_orbit(const OrbitTrace& trace);

struct PhasePoint {
  double s = 0.0, y = 0.0, theta = 0.0, x = 0.0;
};

// Merged backward+forward integration nodes, strictly ascending in s.
std::vector<PhasePoint> orbit_nodes(const OrbitTrace& trace);

struct SolitonCurve {
  PolyCurve curve;            // open polyline, y strictly increasing
  std::vector<double> s;      // parameter at each vertex
  std::vector<double> theta;  // inclination at each vertex
  double Y = 0.0;             // forward asymptote height
  double Y_err = 0.0;
  std::optional<double> Y_bar;  // TypeII lower height
  bool orthogonal_hit = false;  // reaches y -> 0 with theta -> pi/2
  bool concave = false;         // x''(y) < 0 at every vertex
};

SolitonCurve soliton_curve(const OrbitTrace& trace, const TraceSampling& sampling = {});

// The graph map y -> x (cubic Hermite between vertices, slopes cot(theta)).
double x_of_y(const SolitonCurve& curve, double y);

struct ThresholdControl {
  OrbitControl orbit;
  double bracket_lo = 1e-3;
  double bracket_hi = 10.0;
  double width = 1e-8;   // final bracket width
  int max_widenings = 3;  // geometric widening attempts before giving up
};

struct ThresholdResult {
  double H = 0.0;
  double lo = 0.0, hi = 0.0;  // final bracket
  std::vector<std::pair<double, OrbitType>> log;  // every classified y0
};

// Bisection on y0 (theta0 = pi/2) over the TypeI predicate. Throws
// std::runtime_error if the (widened) bracket never straddles the threshold.
ThresholdResult find_threshold_H(const ThresholdControl& ctrl = {});

}  // namespace hypflow
