#pragma once

// Closed-form ICSF evolutions of the constant-curvature families.
//
// All three families evolve self-similarly under the inverse curve shortening
// flow: a hyperbolic circle of radius r grows as r(t) = asinh(sinh(R) e^t), a
// horocycle's Euclidean radius as r(t) = R e^t, and an equidistant arc's
// circumradius as r(t) = R e^t above the fixed ideal endpoints (-a, 0), (a, 0).
// The circle and horocycle flows are ancient; the equidistant flow exists only
// for t > t_min = log(a/R), where it emanates from the geodesic half-circle of
// Euclidean radius a.

#include <cstddef>
#include <limits>
#include <optional>

#include "hypflow/halfplane.hpp"

namespace hypflow {

enum class ExactFlowKind { HyperbolicCircle, Horocycle, Equidistant };

struct ExactFlow {
  ExactFlowKind kind = ExactFlowKind::HyperbolicCircle;
  double R = 1.0;  // initial radius (hyperbolic for circles, Euclidean otherwise)
  double a = 0.0;  // Equidistant: ideal half-width, a^2 = R^2 - c^2
  double c = 0.0;  // Equidistant: initial center height
  double t_min = -std::numeric_limits<double>::infinity();

  // Radius of the evolved curve at time t (defined for t >= t_min).
  double radius(double t) const;

  // Exact hyperbolic curvature of the evolved curve at time t.
  double curvature(double t) const;

  // Samples the evolved curve with n vertices in the canonical orientation
  // (counterclockwise; positive curvature). Circles and horocycles are closed;
  // equidistant arcs are open with endpoints just above y = 0.
  PolyCurve curve_at(double t, std::size_t n) const;
};

// Builds a flow from the initial data. c is required for Equidistant
// (0 < c < R) and must be omitted otherwise.
ExactFlow make_exact_flow(ExactFlowKind kind, double R, std::optional<double> c = {});

// Max over interior vertices of |<dgamma/dt, N> + 1/kappa|, the defect in the
// flow equation, with the time derivative taken by central finite difference
// (step dt, default 1e-4 * max(1, |t|)).
double flow_residual(const ExactFlow& flow, double t, std::size_t n_samples,
                     std::optional<double> dt = {});

}  // namespace hypflow
