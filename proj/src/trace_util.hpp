#pragma once

// Small helpers shared by the soliton-trace modules: boundary-limit
// extrapolation off the last trajectory nodes and human-readable
// termination summaries for diagnostics strings.

#include <cstdio>
#include <string>
#include <vector>

#include "hypflow/ode.hpp"

namespace hypflow::detail {

inline double lagrange3(double x0, double f0, double x1, double f1, double x2,
                        double f2, double x) {
  const double l0 = (x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2));
  const double l1 = (x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2));
  const double l2 = (x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1));
  return f0 * l0 + f1 * l1 + f2 * l2;
}

// Quadratic extrapolation of state component `out`, viewed as a function of
// state component `in`, through the last three trajectory nodes.
inline double extrapolate_tail(const std::vector<ode::Node>& nodes, std::size_t in,
                               std::size_t out, double target) {
  const std::size_t n = nodes.size();
  if (n < 3) return nodes.back().state[out];
  const ode::Node& a = nodes[n - 3];
  const ode::Node& b = nodes[n - 2];
  const ode::Node& c = nodes[n - 1];
  return lagrange3(a.state[in], a.state[out], b.state[in], b.state[out], c.state[in],
                   c.state[out], target);
}

// Linear variant through the last two nodes; the quad/linear spread bounds
// the unresolved higher-order part of the tail.
inline double linear_tail(const std::vector<ode::Node>& nodes, std::size_t in,
                          std::size_t out, double target) {
  const std::size_t n = nodes.size();
  if (n < 2) return nodes.back().state[out];
  const ode::Node& b = nodes[n - 2];
  const ode::Node& c = nodes[n - 1];
  return c.state[out] + (target - c.state[in]) * (c.state[out] - b.state[out]) /
                            (c.state[in] - b.state[in]);
}

inline const char* term_name(ode::Termination t) {
  switch (t) {
    case ode::Termination::EventStop: return "event stop";
    case ode::Termination::BlowUp: return "blow-up";
    case ode::Termination::StepUnderflow: return "step underflow";
    case ode::Termination::ReachedBound: return "span bound";
  }
  return "unknown";
}

inline std::string describe_end(const char* side, const ode::Trajectory& traj) {
  const ode::Node& n = traj.nodes.back();
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s: %s at s=%.6g (y=%.6g, theta=%.6g); ", side,
                term_name(traj.termination), n.s, n.state[0], n.state[1]);
  return buf;
}

}  // namespace hypflow::detail
