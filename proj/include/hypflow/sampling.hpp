#pragma once

#include <optional>

namespace hypflow {

// Resampling rule for turning an integrated trace into a polyline. Default:
// adaptive steps bounded in both arc length and turning; uniform_ds forces an
// exact grid. The optional window bounds clip to the contiguous s-interval
// around s = 0 where theta stays inside [theta_lo, theta_hi] and y stays
// above y_min. (A theta window alone cannot trim the axis tail of a TypeI
// parabolic curve: theta returns to pi/2 there while the curvature radius
// blows up.)
struct TraceSampling {
  std::optional<double> uniform_ds;
  double max_ds = 1e-3;
  double max_dtheta = 1e-3;
  std::optional<double> theta_lo;
  std::optional<double> theta_hi;
  std::optional<double> y_min;
};

}  // namespace hypflow
