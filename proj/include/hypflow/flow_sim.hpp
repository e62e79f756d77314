#pragma once

// Front-tracking discretization of the inverse curve shortening flow: each
// vertex of a polygonal curve moves by explicit Euler along the hyperbolic
// normal, vertex <- vertex - dt * (1/kappa_h) * N, with N = y(-sin t, cos t)
// the Euclidean coordinates of the unit hyperbolic normal. After each step
// the mesh is held at a fixed hyperbolic arc-length spacing, re-gridding
// whenever a segment drifts outside [0.8, 1.25] of it. The measure matters:
// the sawtooth growth rate of the Euler update scales like
// y^2 / (kappa_h * euclidean spacing)^2, so a hyperbolically uniform mesh
// (euclidean spacing ~ y) is what keeps the stability margin uniform along
// the curve, with the heuristic cap dt <= 0.25 * spacing^2 * min(kappa_h)^2
// sitting at half the resulting CFL limit. Exceeding the cap is reported as
// a warning, not an error: between the cap and the hard limit the scheme
// still converges, it just starts with less headroom. Re-gridding lazily
// instead of every step matters too: each interpolation pass costs an
// O(spacing^4) bias, and under an expanding flow segments only grow, so the
// band is left at the rate the curve stretches, not once per dt -- otherwise
// the accumulated mesh bias ~ t/dt would defeat refinement in time.
//
// The scheme is deliberately first order in dt and second order in the
// spacing: it is the independent oracle that connects the soliton traces and
// the closed-form flows to the evolution equation itself, so transparency
// beats efficiency. The evolution prescribes only the normal velocity; the
// tangential redistribution performed by the resampling is an implementation
// choice the equation leaves open.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypflow/halfplane.hpp"

namespace hypflow {

// Snapshot of the evolving curve. per_vertex[i] belongs to curve.vertices[i];
// on open curves the first and last samples are one-sided estimates (chord
// tangent, curvature copied from the nearest interior vertex), which is also
// how the endpoints are advected.
struct FlowFrame {
  double t = 0.0;
  PolyCurve curve;
  std::vector<CurvatureSample> per_vertex;
};

enum class FlowTermination { ReachedT, CurvatureSignChange, BoundaryContact };

const char* to_string(FlowTermination t);

struct FlowControl {
  double dt = 1e-4;
  // Hyperbolic arc-length spacing the mesh is held at (re-gridding when a
  // segment drifts outside [0.8, 1.25] of it); <= 0 locks it to the mean
  // spacing of the initial curve.
  double resample_spacing = 0.0;
  double kappa_floor = 1e-6;  // below: flow speed 1/kappa is considered lost
  double y_floor = 1e-6;      // below: the curve has reached the ideal boundary
  // run_icsf keeps the initial frame, every frame_stride-th step, and the
  // final frame; 1 keeps everything.
  std::size_t frame_stride = 1;
};

// Thrown by step_icsf when the update cannot be applied, and by
// verify_soliton_translation when the run ends before t_total.
class FlowStop : public std::runtime_error {
 public:
  FlowStop(FlowTermination why, double t, const std::string& what)
      : std::runtime_error(what), why(why), t(t) {}
  FlowTermination why;
  double t;
};

struct FlowRun {
  std::vector<FlowFrame> frames;
  double dt = 0.0;
  double resample_spacing = 0.0;
  FlowTermination termination = FlowTermination::ReachedT;
  std::vector<std::string> warnings;
};

// Builds the frame for a curve: validates it (>= 4 vertices, all y above
// y_floor) and attaches per-vertex curvature data. Throws std::invalid_argument
// on malformed input.
FlowFrame make_flow_frame(double t, PolyCurve curve, double y_floor = 1e-6);

// One Euler step, re-gridding the mesh if it drifted off the target spacing.
// ctrl.dt is ignored; the explicit dt argument is the step taken. Throws
// FlowStop{CurvatureSignChange} when any kappa_h of the input frame is below
// ctrl.kappa_floor, and FlowStop{BoundaryContact} when the update pushes a
// vertex below ctrl.y_floor.
FlowFrame step_icsf(const FlowFrame& frame, double dt,
                    const FlowControl& ctrl = {});

// Evolves the curve to t_total in steps of ctrl.dt (plus one shorter closing
// step if t_total is not a multiple). Early termination is recorded in the
// result, never thrown; frames hold the history up to the last valid state.
FlowRun run_icsf(const PolyCurve& start, double t_total,
                 const FlowControl& ctrl = {});

// Least-squares circle through the vertices (Kasa fit: linear in the center
// and squared radius). Exact on exact circles; throws std::invalid_argument
// on degenerate input (< 3 vertices or collinear points).
struct CircleFit {
  double cx = 0.0, cy = 0.0, rho = 0.0;
};
CircleFit fit_circle(const PolyCurve& c);

// Hyperbolic radius of the fitted circle: a Euclidean circle with center
// height b and radius rho < b is the hyperbolic circle of radius
// atanh(rho / b). Throws std::domain_error when the fit crosses the axis.
double fitted_hyperbolic_radius(const PolyCurve& c);

// Evolves a soliton curve to t_total and measures how far it is from the
// predicted rigid motion of the initial curve: Parabolic -> x-shift by
// t_total, ConformalVertical -> y-shift by t_total. Other fields are
// rejected. The comparison is normal-only (the soliton property fixes the
// evolution only up to tangential sliding): each evolved vertex casts a ray
// along its own normal, and the deviation is the hyperbolic-scale distance
// |tau| / y to the nearest intersection with the shifted initial curve.
//
// Open curves are compared away from their free ends. The flow on an open
// curve is determined only up to boundary data the window cannot supply; the
// simulator's one-sided end closure is a modeling choice whose influence
// spreads inward diffusively (linearized flow = heat equation, diffusivity
// 1/kappa^2 in hyperbolic arc length; unit diffusivity in the stretched
// variable dz = kappa ds). Each end sheds the margin z < 4*sqrt(t_total),
// so stiff (high-kappa) ends cost almost nothing and slow ends are excluded
// generously. Closed curves are compared everywhere. Throws if the margins
// leave no interior to compare.
//
// Curves oriented with negative kappa_h are reversed internally. Returns the
// maximum deviation; throws FlowStop if the flow terminates before t_total.
double verify_soliton_translation(const PolyCurve& soliton, FieldKind kind,
                                  double t_total, const FlowControl& ctrl = {});

}  // namespace hypflow
