#include "hypflow/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "trace_util.hpp"

namespace hypflow {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kHalfPi = 0.5 * kPi;

// Raw phase formulas for the integrator, state (y, theta, x). As in the
// parabolic module, no domain checks: the guards stop a margin away from
// cos(theta) = 0 and y = 0, and out-of-domain trial stages must produce
// finite values for the error estimate to reject.
void phase_rhs(double /*s*/, std::span<const double> st, std::span<double> d) {
  const double c = std::cos(st[1]);
  d[0] = std::sin(st[1]);
  d[1] = -1.0 / c - c / st[0];
  d[2] = c;
}

// Forward guard list: the theta = 0 anchor crossing (non-terminal), the
// theta -> -pi/2 boundary, and a defensive y floor. Backward sees theta
// rising toward +pi/2 instead.
std::vector<ode::EventSpec> boundary_events(double eps, ode::Direction dir) {
  std::vector<ode::EventSpec> ev;
  if (dir == ode::Direction::Forward) {
    ev.push_back({[](double, std::span<const double> st) { return st[1]; },
                  ode::GuardDirection::Falling, false, "anchor"});
    ev.push_back(
        {[eps](double, std::span<const double> st) { return st[1] + (kHalfPi - eps); },
         ode::GuardDirection::Falling, true, "theta_bottom"});
  } else {
    ev.push_back(
        {[eps](double, std::span<const double> st) { return st[1] - (kHalfPi - eps); },
         ode::GuardDirection::Rising, true, "theta_top"});
  }
  ev.push_back({[eps](double, std::span<const double> st) { return st[0] - eps; },
                ode::GuardDirection::Falling, true, "y_floor"});
  return ev;
}

ode::Node make_node(double s, double y, double theta, double x) {
  ode::Node n;
  n.s = s;
  n.state = {y, theta, x};
  const double c = std::cos(theta);
  n.deriv = {std::sin(theta), -1.0 / c - c / y, c};
  return n;
}

ode::Node shifted(const ode::Node& n, double sbar, double xc) {
  ode::Node m;
  m.s = n.s - sbar;
  m.state = {n.state[0], n.state[1], n.state[2] - xc};
  m.deriv = n.deriv;
  return m;
}

// Mirror a canonical trajectory under s -> -s, (y, theta, x) -> (y, -theta, -x).
// The chain rule flips dy/ds and keeps the other two derivatives.
ode::Trajectory mirrored(const ode::Trajectory& in) {
  ode::Trajectory out;
  out.termination = in.termination;
  out.stop_event = in.stop_event;
  out.nodes.reserve(in.nodes.size());
  for (const ode::Node& n : in.nodes) {
    ode::Node m;
    m.s = -n.s;
    m.state = {n.state[0], -n.state[1], -n.state[2]};
    m.deriv = {-n.deriv[0], n.deriv[1], n.deriv[2]};
    out.nodes.push_back(std::move(m));
  }
  out.events.reserve(in.events.size());
  for (const ode::EventRecord& e : in.events) {
    ode::EventRecord r;
    r.s = -e.s;
    r.state = {e.state[0], -e.state[1], -e.state[2]};
    r.event_index = e.event_index;
    r.guard_slope = e.guard_slope;
    out.events.push_back(std::move(r));
  }
  return out;
}

std::vector<double> state_at(const ConformalTrace& trace, double s) {
  return s < 0.0 ? ode::sample(trace.backward, s) : ode::sample(trace.forward, s);
}

}  // namespace

std::pair<double, double> conf_rhs(double y, double theta) {
  if (!(y > 0.0) || !(theta > -kHalfPi) || !(theta < kHalfPi))
    throw std::domain_error(
        "conf_rhs: (y, theta) outside {y > 0, |theta| < pi/2}");
  const double c = std::cos(theta);
  return {std::sin(theta), -1.0 / c - c / y};
}

double conformal_invariant(double y, double theta) {
  if (!(y > 0.0) || !(theta > -kHalfPi) || !(theta < kHalfPi))
    throw std::domain_error(
        "conformal_invariant: (y, theta) outside {y > 0, |theta| < pi/2}");
  const double c = std::cos(theta);
  return 2.0 / y + c * c / (y * y);
}

ConformalTrace integrate_conformal(double y0, double theta0,
                                   const ConformalControl& ctrl) {
  conf_rhs(y0, theta0);  // domain check; throws std::domain_error
  const double eps = ctrl.boundary_margin;
  if (!(eps > 0.0) || !(eps < 1e-2))
    throw std::invalid_argument("integrate_conformal: boundary_margin out of range");
  if (y0 <= eps || std::fabs(theta0) >= kHalfPi - eps)
    throw std::domain_error(
        "integrate_conformal: start lies inside the boundary margin");

  // The mirror symmetry (y, theta, x)(s) -> (y, -theta, -x)(-s) maps a
  // theta0 < 0 start to an equivalent theta0 > 0 problem; solve that one
  // and flip the result at the end.
  const bool flip = theta0 < 0.0;
  const double th_work = std::fabs(theta0);

  ode::OdeProblem prob;
  prob.rhs = phase_rhs;
  prob.y0 = {y0, th_work, 0.0};
  prob.s0 = 0.0;

  const std::vector<ode::EventSpec> fev = boundary_events(eps, ode::Direction::Forward);
  const std::vector<ode::EventSpec> bev = boundary_events(eps, ode::Direction::Backward);
  prob.direction = ode::Direction::Forward;
  const ode::Trajectory fwd = ode::integrate(prob, fev, ctrl.step);
  prob.direction = ode::Direction::Backward;
  const ode::Trajectory bwd = ode::integrate(prob, bev, ctrl.step);

  ConformalTrace tr;
  tr.y0 = y0;
  tr.theta0 = theta0;

  // Locate the theta = 0 anchor. A start on theta0 = 0 is its own anchor;
  // otherwise the forward pass must have recorded the crossing.
  double sbar = 0.0, yc = y0, xc = 0.0;
  bool anchored = true;
  if (th_work > 0.0) {
    anchored = false;
    for (const ode::EventRecord& e : fwd.events) {
      if (e.event_index == 0) {
        sbar = e.s;
        yc = e.state[0];
        xc = e.state[2];
        anchored = true;
        break;
      }
    }
  }

  bool fwd_ok = false;
  if (fwd.termination == ode::Termination::EventStop && fwd.stop_event)
    fwd_ok = fwd.events[*fwd.stop_event].event_index == 1;
  if (!fwd_ok && fwd.termination == ode::Termination::StepUnderflow &&
      fwd.nodes.back().state[1] < -kHalfPi + 1e-3)
    fwd_ok = true;
  bool bwd_ok = false;
  if (bwd.termination == ode::Termination::EventStop && bwd.stop_event)
    bwd_ok = bwd.events[*bwd.stop_event].event_index == 0;
  if (!bwd_ok && bwd.termination == ode::Termination::StepUnderflow &&
      bwd.nodes.back().state[1] > kHalfPi - 1e-3)
    bwd_ok = true;

  if (!anchored || !fwd_ok || !bwd_ok) {
    tr.ok = false;
    if (!anchored) tr.diagnostics += "no theta = 0 crossing recorded; ";
    if (!fwd_ok) tr.diagnostics += detail::describe_end("forward", fwd);
    if (!bwd_ok) tr.diagnostics += detail::describe_end("backward", bwd);
    tr.forward = fwd;
    tr.backward = bwd;
    tr.s_min = bwd.nodes.back().s;
    tr.s_max = fwd.nodes.back().s;
    return tr;
  }

  // Re-anchor: shift every node by (sbar, xc) and split the forward pass at
  // the anchor, so the canonical trajectories carry s = 0, x = 0 exactly at
  // the theta = 0 crossing. The pre-anchor forward stretch joins the
  // backward branch (reversed); no re-integration happens.
  const double pad = 1e-12 * (1.0 + std::fabs(sbar));
  const double lo_cut = sbar - pad, hi_cut = sbar + pad;
  ode::Trajectory cf, cb;
  cf.nodes.push_back(make_node(0.0, yc, 0.0, 0.0));
  for (const ode::Node& n : fwd.nodes)
    if (n.s > hi_cut) cf.nodes.push_back(shifted(n, sbar, xc));
  cf.termination = fwd.termination;
  for (const ode::EventRecord& e : fwd.events) {
    if (e.event_index == 0) continue;
    ode::EventRecord r;
    r.s = e.s - sbar;
    r.state = {e.state[0], e.state[1], e.state[2] - xc};
    r.event_index = e.event_index;
    r.guard_slope = e.guard_slope;
    cf.events.push_back(std::move(r));
  }
  if (fwd.termination == ode::Termination::EventStop && !cf.events.empty())
    cf.stop_event = cf.events.size() - 1;

  cb.nodes.push_back(cf.nodes.front());
  for (auto it = fwd.nodes.rbegin(); it != fwd.nodes.rend(); ++it)
    if (it->s < lo_cut) cb.nodes.push_back(shifted(*it, sbar, xc));
  for (const ode::Node& n : bwd.nodes) {
    if (!cb.nodes.empty() && n.s - sbar >= cb.nodes.back().s) continue;
    cb.nodes.push_back(shifted(n, sbar, xc));
  }
  cb.termination = bwd.termination;
  for (const ode::EventRecord& e : bwd.events) {
    ode::EventRecord r;
    r.s = e.s - sbar;
    r.state = {e.state[0], e.state[1], e.state[2] - xc};
    r.event_index = e.event_index;
    r.guard_slope = e.guard_slope;
    cb.events.push_back(std::move(r));
  }
  if (bwd.stop_event) cb.stop_event = *bwd.stop_event;

  // Boundary limits and x-span, extrapolated in theta off the last nodes.
  const ode::Node& fn = cf.nodes.back();
  const ode::Node& bn = cb.nodes.back();
  const double yf = detail::extrapolate_tail(cf.nodes, 1, 0, -kHalfPi);
  const double yb = detail::extrapolate_tail(cb.nodes, 1, 0, kHalfPi);
  const double yf_lin = detail::linear_tail(cf.nodes, 1, 0, -kHalfPi);
  const double yb_lin = detail::linear_tail(cb.nodes, 1, 0, kHalfPi);
  tr.forward_limit = {fn.state[0], fn.state[1]};
  tr.backward_limit = {bn.state[0], bn.state[1]};
  tr.y_star = 0.5 * (yf + yb);
  tr.y_star_err =
      0.5 * std::fabs(yf - yb) + std::max(std::fabs(yf - yf_lin), std::fabs(yb - yb_lin));
  tr.x_max = detail::extrapolate_tail(cf.nodes, 1, 2, -kHalfPi);
  tr.x_min = detail::extrapolate_tail(cb.nodes, 1, 2, kHalfPi);

  tr.y_anchor = yc;
  tr.s_start = flip ? sbar : -sbar;
  tr.x_start = flip ? xc : -xc;
  if (flip) {
    tr.forward = mirrored(cb);
    tr.backward = mirrored(cf);
    tr.forward_limit = {tr.forward.nodes.back().state[0],
                        tr.forward.nodes.back().state[1]};
    tr.backward_limit = {tr.backward.nodes.back().state[0],
                         tr.backward.nodes.back().state[1]};
    const double xs = tr.x_max;
    tr.x_max = -tr.x_min;
    tr.x_min = -xs;
  } else {
    tr.forward = std::move(cf);
    tr.backward = std::move(cb);
  }
  tr.s_min = tr.backward.nodes.back().s;
  tr.s_max = tr.forward.nodes.back().s;
  tr.ok = true;
  return tr;
}

PhasePoint conformal_state(const ConformalTrace& trace, double s) {
  const std::vector<double> st = state_at(trace, s);
  double theta = st[1];
  // Toward the vertical ends theta(s) has unbounded derivatives (theta'
  // ~ -1/cos(theta)), so the cubic dense output sheds digits there even
  // though y(s) stays smooth through the collision.  Recover theta from
  // y via the conserved quantity instead: cos^2(theta) = E y^2 - 2 y,
  // whose transfer d(theta)/dy = O(1/cos(theta)) is mildest exactly
  // where interpolation is worst.  Keep plain interpolation around the
  // apex, where the acos branch point makes the recovery the worse one.
  if (std::fabs(theta) >= 1.0 && st[0] > 0.0) {
    const double inv = conformal_invariant(trace.y0, trace.theta0);
    const double c2 = st[0] * (inv * st[0] - 2.0);
    if (c2 > 0.0 && c2 < 1.0)
      theta = std::copysign(std::acos(std::sqrt(c2)), theta);
  }
  return {s, st[0], theta, st[2]};
}

std::vector<PhasePoint> conformal_nodes(const ConformalTrace& trace) {
  std::vector<PhasePoint> out;
  out.reserve(trace.backward.nodes.size() + trace.forward.nodes.size());
  for (auto it = trace.backward.nodes.rbegin(); it != trace.backward.nodes.rend(); ++it)
    out.push_back({it->s, it->state[0], it->state[1], it->state[2]});
  std::size_t first = 0;
  if (!out.empty() && !trace.forward.nodes.empty() &&
      trace.forward.nodes.front().s == out.back().s)
    first = 1;
  for (std::size_t i = first; i < trace.forward.nodes.size(); ++i) {
    const ode::Node& n = trace.forward.nodes[i];
    out.push_back({n.s, n.state[0], n.state[1], n.state[2]});
  }
  return out;
}

ConformalCurve conformal_curve(const ConformalTrace& trace,
                               const TraceSampling& sampling) {
  if (!trace.ok)
    throw std::invalid_argument("conformal_curve: trace is not usable: " +
                                trace.diagnostics);

  double lo = trace.s_min, hi = trace.s_max;
  if (sampling.theta_lo || sampling.theta_hi || sampling.y_min) {
    auto inside = [&sampling](double y, double th) {
      if (sampling.theta_lo && th < *sampling.theta_lo) return false;
      if (sampling.theta_hi && th > *sampling.theta_hi) return false;
      if (sampling.y_min && y < *sampling.y_min) return false;
      return true;
    };
    if (!inside(trace.y_anchor, 0.0))
      throw std::invalid_argument("conformal_curve: window excludes the anchor");

    auto refine = [&](double s_in, double s_out) {
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (s_in + s_out);
        const std::vector<double> st = state_at(trace, mid);
        if (inside(st[0], st[1]))
          s_in = mid;
        else
          s_out = mid;
      }
      return s_in;
    };
    const std::vector<PhasePoint> nodes = conformal_nodes(trace);
    const auto origin =
        std::lower_bound(nodes.begin(), nodes.end(), 0.0,
                         [](const PhasePoint& p, double s) { return p.s < s; });
    const std::size_t o = static_cast<std::size_t>(origin - nodes.begin());
    for (std::size_t i = o; i < nodes.size(); ++i) {
      if (!inside(nodes[i].y, nodes[i].theta)) {
        hi = refine(nodes[i - 1].s, nodes[i].s);
        break;
      }
    }
    for (std::size_t i = o; i-- > 0;) {
      if (!inside(nodes[i].y, nodes[i].theta)) {
        lo = refine(nodes[i + 1].s, nodes[i].s);
        break;
      }
    }
  }

  std::vector<double> grid;
  if (sampling.uniform_ds) {
    const double ds = *sampling.uniform_ds;
    if (!(ds > 0.0)) throw std::invalid_argument("conformal_curve: uniform_ds <= 0");
    const auto n = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround((hi - lo) / ds)));
    const double step = (hi - lo) / static_cast<double>(n);
    for (std::size_t k = 0; k <= n; ++k)
      grid.push_back(lo + step * static_cast<double>(k));
    grid.back() = hi;
  } else {
    if (!(sampling.max_ds > 0.0) || !(sampling.max_dtheta > 0.0))
      throw std::invalid_argument("conformal_curve: sampling bounds must be positive");
    grid.push_back(lo);
    while (grid.back() < hi) {
      const std::vector<double> st = state_at(trace, grid.back());
      const double c = std::cos(st[1]);
      const double dth = 1.0 / std::fabs(c) + std::fabs(c) / st[0];
      double step = std::min(sampling.max_ds, sampling.max_dtheta / dth);
      step = std::max(step, 1e-9);
      double next = grid.back() + step;
      if (next > hi - 1e-9) next = hi;
      grid.push_back(next);
    }
  }

  ConformalCurve out;
  std::vector<HPoint> verts;
  verts.reserve(grid.size());
  out.s.reserve(grid.size());
  out.theta.reserve(grid.size());
  bool concave = true;
  for (double s : grid) {
    const std::vector<double> st = state_at(trace, s);
    verts.push_back({st[2], st[0]});
    out.s.push_back(s);
    out.theta.push_back(st[1]);
    // y''(x) = -(y + cos^2 theta)/(y cos^4 theta) < 0 iff y + cos^2 theta > 0.
    const double c = std::cos(st[1]);
    if (!(st[0] + c * c > 0.0) || !(st[0] > 0.0)) concave = false;
  }
  out.curve = make_poly_curve(verts, false);
  out.x_m = trace.x_min;
  out.x_M = trace.x_max;
  out.y_star = trace.y_star;
  out.concave = concave;
  const double tf = std::fabs(std::tan(out.theta.front()));
  const double tb = std::fabs(std::tan(out.theta.back()));
  out.vertical_endpoints = tf > 1e3 && tb > 1e3;
  return out;
}

double y_of_x(const ConformalCurve& curve, double x) {
  const std::vector<HPoint>& v = curve.curve.vertices;
  if (v.size() < 2 || curve.theta.size() != v.size())
    throw std::invalid_argument("y_of_x: malformed conformal curve");
  if (!(v.front().x < v.back().x))
    throw std::invalid_argument("y_of_x: curve is not a graph over increasing x");
  if (x < v.front().x || x > v.back().x)
    throw std::domain_error("y_of_x: x outside the graph range");

  std::size_t lo = 0, hi = v.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (x < v[mid].x)
      hi = mid;
    else
      lo = mid;
  }
  const double h = v[hi].x - v[lo].x;
  const double u = (x - v[lo].x) / h;
  const double m0 = std::tan(curve.theta[lo]);
  const double m1 = std::tan(curve.theta[hi]);
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * v[lo].y + (u3 - 2 * u2 + u) * h * m0 +
         (-2 * u3 + 3 * u2) * v[hi].y + (u3 - u2) * h * m1;
}

double conformal_residual(const PolyCurve& curve) {
  return soliton_residual(curve, KillingField{FieldKind::ConformalVertical});
}

double conformal_residual(const ConformalCurve& curve) {
  return conformal_residual(curve.curve);
}

}  // namespace hypflow
