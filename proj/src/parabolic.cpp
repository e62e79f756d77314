#include "hypflow/parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "trace_util.hpp"

namespace hypflow {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Guard derivative below this at a located root marks a tangential touch.
constexpr double kTangentialSlope = 1e-8;

// Raw phase formulas for the integrator, state (y, theta, x). No domain
// checks on purpose: the terminal guards stop the trajectory a margin away
// from the singular sets, and trial stages that wander outside the domain
// must still return finite values so the error estimate can reject them.
void phase_rhs(double /*s*/, std::span<const double> st, std::span<double> d) {
  d[0] = std::sin(st[1]);
  d[1] = 1.0 / std::sin(st[1]) - std::cos(st[1]) / st[0];
  d[2] = std::cos(st[1]);
}

std::vector<ode::EventSpec> boundary_events(double eps, ode::Direction dir) {
  std::vector<ode::EventSpec> ev;
  ev.push_back({[](double, std::span<const double> st) {
                  return st[0] - 0.5 * std::sin(2.0 * st[1]);
                },
                ode::GuardDirection::Any, false, "gamma"});
  if (dir == ode::Direction::Backward) {
    ev.push_back({[eps](double, std::span<const double> st) { return st[0] - eps; },
                  ode::GuardDirection::Falling, true, "y_zero"});
    ev.push_back({[eps](double, std::span<const double> st) { return st[1] - eps; },
                  ode::GuardDirection::Falling, true, "theta_zero"});
  } else {
    ev.push_back(
        {[eps](double, std::span<const double> st) { return st[1] - (kPi - eps); },
         ode::GuardDirection::Rising, true, "theta_pi"});
  }
  return ev;
}

std::vector<double> state_at(const OrbitTrace& trace, double s) {
  return s < 0.0 ? ode::sample(trace.backward, s) : ode::sample(trace.forward, s);
}

}  // namespace

std::pair<double, double> para_rhs(double y, double theta) {
  if (!(y > 0.0) || !(theta > 0.0) || !(theta < kPi))
    throw std::domain_error("para_rhs: (y, theta) outside {y > 0, theta in (0, pi)}");
  return {std::sin(theta), 1.0 / std::sin(theta) - std::cos(theta) / y};
}

double gamma_curve(double theta) {
  if (!(theta > 0.0) || !(theta < kPi))
    throw std::domain_error("gamma_curve: theta outside (0, pi)");
  return 0.5 * std::sin(2.0 * theta);
}

const char* to_string(OrbitType type) {
  switch (type) {
    case OrbitType::TypeI: return "TypeI";
    case OrbitType::TypeII: return "TypeII";
    case OrbitType::OrthogonalToXAxis: return "OrthogonalToXAxis";
    case OrbitType::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

OrbitTrace integrate_orbit(double y0, double theta0, const OrbitControl& ctrl) {
  para_rhs(y0, theta0);  // domain check; throws std::domain_error
  const double eps = ctrl.boundary_margin;
  if (!(eps > 0.0) || !(eps < 1e-2))
    throw std::invalid_argument("integrate_orbit: boundary_margin out of range");
  if (y0 <= eps || theta0 <= eps || theta0 >= kPi - eps)
    throw std::domain_error("integrate_orbit: start lies inside the boundary margin");

  ode::OdeProblem prob;
  prob.rhs = phase_rhs;
  prob.y0 = {y0, theta0, 0.0};
  prob.s0 = 0.0;

  const std::vector<ode::EventSpec> bev = boundary_events(eps, ode::Direction::Backward);
  const std::vector<ode::EventSpec> fev = boundary_events(eps, ode::Direction::Forward);

  OrbitTrace tr;
  tr.y0 = y0;
  tr.theta0 = theta0;
  prob.direction = ode::Direction::Backward;
  tr.backward = ode::integrate(prob, bev, ctrl.step);
  prob.direction = ode::Direction::Forward;
  tr.forward = ode::integrate(prob, fev, ctrl.step);
  tr.s_min = tr.backward.nodes.back().s;
  tr.s_max = tr.forward.nodes.back().s;

  // Nullcline crossings in ascending s; backward records arrive in
  // encounter order, i.e. decreasing s.
  for (auto it = tr.backward.events.rbegin(); it != tr.backward.events.rend(); ++it)
    if (it->event_index == 0)
      tr.gamma_crossings.push_back({it->s, it->state[0], it->state[1],
                                    std::fabs(it->guard_slope) < kTangentialSlope});
  for (const ode::EventRecord& ev : tr.forward.events)
    if (ev.event_index == 0)
      tr.gamma_crossings.push_back(
          {ev.s, ev.state[0], ev.state[1], std::fabs(ev.guard_slope) < kTangentialSlope});

  // Which boundary did the backward integration reach? A step underflow is
  // read as "hit a phase-space boundary the guards could not resolve" and is
  // mapped to the nearest one; anything else stays undetermined.
  enum class Boundary { None, YZero, ThetaZero };
  Boundary bnd = Boundary::None;
  const ode::Node& bn = tr.backward.nodes.back();
  if (tr.backward.termination == ode::Termination::EventStop && tr.backward.stop_event) {
    const std::size_t idx = tr.backward.events[*tr.backward.stop_event].event_index;
    bnd = idx == 1 ? Boundary::YZero : Boundary::ThetaZero;
  } else if (tr.backward.termination == ode::Termination::StepUnderflow) {
    if (bn.state[1] < 1e-3)
      bnd = Boundary::ThetaZero;
    else if (bn.state[0] < 1e-3)
      bnd = Boundary::YZero;
  }

  const ode::Node& fn = tr.forward.nodes.back();
  bool fwd_ok = tr.forward.termination == ode::Termination::EventStop;
  if (!fwd_ok && tr.forward.termination == ode::Termination::StepUnderflow &&
      fn.state[1] > kPi - 1e-3)
    fwd_ok = true;

  if (fwd_ok) {
    tr.forward_limit = {fn.state[0], fn.state[1]};
    tr.forward_limit_err =
        std::fabs(detail::extrapolate_tail(tr.forward.nodes, 1, 0, kPi) - fn.state[0]);
  }

  switch (bnd) {
    case Boundary::ThetaZero:
      tr.type = OrbitType::TypeII;
      tr.backward_limit = {detail::extrapolate_tail(tr.backward.nodes, 1, 0, 0.0), 0.0};
      break;
    case Boundary::YZero: {
      double th_min = theta0;
      for (const ode::Node& nd : tr.backward.nodes)
        th_min = std::min(th_min, nd.state[1]);
      tr.type = th_min > 0.5 * kPi ? OrbitType::OrthogonalToXAxis : OrbitType::TypeI;
      tr.backward_limit = {0.0, detail::extrapolate_tail(tr.backward.nodes, 0, 1, 0.0)};
      break;
    }
    case Boundary::None:
      break;
  }

  if (bnd == Boundary::None || !fwd_ok) {
    tr.type = OrbitType::Undetermined;
    if (bnd == Boundary::None) tr.diagnostics += detail::describe_end("backward", tr.backward);
    if (!fwd_ok) tr.diagnostics += detail::describe_end("forward", tr.forward);
  }
  return tr;
}

OrbitTrace reflect_orbit(const OrbitTrace& trace) {
  const double shift = trace.theta0 > 0.0 ? -kPi : kPi;
  auto flip = [shift](const ode::Trajectory& in) {
    ode::Trajectory out;
    out.termination = in.termination;
    out.stop_event = in.stop_event;
    out.nodes.reserve(in.nodes.size());
    for (const ode::Node& n : in.nodes) {
      ode::Node m;
      m.s = -n.s;
      m.state = {n.state[0], n.state[1] + shift, n.state[2]};
      m.deriv = {-n.deriv[0], -n.deriv[1], -n.deriv[2]};
      out.nodes.push_back(std::move(m));
    }
    out.events.reserve(in.events.size());
    for (const ode::EventRecord& e : in.events) {
      ode::EventRecord r;
      r.s = -e.s;
      r.state = {e.state[0], e.state[1] + shift, e.state[2]};
      r.event_index = e.event_index;
      r.guard_slope = -e.guard_slope;
      out.events.push_back(std::move(r));
    }
    return out;
  };

  OrbitTrace out;
  out.y0 = trace.y0;
  out.theta0 = trace.theta0 + shift;
  out.forward = flip(trace.backward);
  out.backward = flip(trace.forward);
  for (const GammaCrossing& c : trace.gamma_crossings)
    out.gamma_crossings.push_back({-c.s, c.y, c.theta + shift, c.tangential});
  std::reverse(out.gamma_crossings.begin(), out.gamma_crossings.end());
  out.type = trace.type;
  out.backward_limit = {trace.forward_limit.y, trace.forward_limit.theta + shift};
  out.forward_limit = {trace.backward_limit.y, trace.backward_limit.theta + shift};
  out.forward_limit_err = trace.forward_limit_err;
  out.s_min = -trace.s_max;
  out.s_max = -trace.s_min;
  out.diagnostics = trace.diagnostics;
  return out;
}

std::vector<PhasePoint> orbit_nodes(const OrbitTrace& trace) {
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

SolitonCurve soliton_curve(const OrbitTrace& trace, const TraceSampling& sampling) {
  if (trace.backward.nodes.empty() || trace.forward.nodes.empty())
    throw std::invalid_argument("soliton_curve: trace has no nodes");

  double lo = trace.s_min, hi = trace.s_max;
  if (sampling.theta_lo || sampling.theta_hi || sampling.y_min) {
    auto inside = [&sampling](double y, double th) {
      if (sampling.theta_lo && th < *sampling.theta_lo) return false;
      if (sampling.theta_hi && th > *sampling.theta_hi) return false;
      if (sampling.y_min && y < *sampling.y_min) return false;
      return true;
    };
    if (!inside(trace.y0, trace.theta0))
      throw std::invalid_argument("soliton_curve: window excludes the start");

    // Contiguous in-window interval around s = 0, edges refined on the dense
    // output by bisection on the window predicate.
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
    const std::vector<PhasePoint> nodes = orbit_nodes(trace);
    const auto origin = std::lower_bound(
        nodes.begin(), nodes.end(), 0.0,
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
    if (!(ds > 0.0)) throw std::invalid_argument("soliton_curve: uniform_ds <= 0");
    const auto n = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround((hi - lo) / ds)));
    const double step = (hi - lo) / static_cast<double>(n);
    for (std::size_t k = 0; k <= n; ++k)
      grid.push_back(lo + step * static_cast<double>(k));
    grid.back() = hi;
  } else {
    if (!(sampling.max_ds > 0.0) || !(sampling.max_dtheta > 0.0))
      throw std::invalid_argument("soliton_curve: sampling bounds must be positive");
    grid.push_back(lo);
    while (grid.back() < hi) {
      const std::vector<double> st = state_at(trace, grid.back());
      const double dth = std::fabs(1.0 / std::sin(st[1]) - std::cos(st[1]) / st[0]);
      double step = std::min(sampling.max_ds, sampling.max_dtheta / std::max(dth, 1e-12));
      step = std::max(step, 1e-9);
      double next = grid.back() + step;
      if (next > hi - 1e-9) next = hi;
      grid.push_back(next);
    }
  }

  SolitonCurve out;
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
    if (st[0] - std::sin(st[1]) * std::cos(st[1]) <= 0.0) concave = false;
  }
  out.curve = make_poly_curve(verts, false);
  out.Y = trace.forward_limit.y;
  out.Y_err = trace.forward_limit_err;
  if (trace.type == OrbitType::TypeII) out.Y_bar = trace.backward_limit.y;
  out.orthogonal_hit = (trace.type == OrbitType::TypeI ||
                        trace.type == OrbitType::OrthogonalToXAxis) &&
                       std::fabs(trace.backward_limit.theta - 0.5 * kPi) < 0.05;
  out.concave = concave;
  return out;
}

double x_of_y(const SolitonCurve& curve, double y) {
  const std::vector<HPoint>& v = curve.curve.vertices;
  if (v.size() < 2 || curve.theta.size() != v.size())
    throw std::invalid_argument("x_of_y: malformed soliton curve");
  if (!(v.front().y < v.back().y))
    throw std::invalid_argument("x_of_y: curve is not a graph over increasing y");
  if (y < v.front().y || y > v.back().y)
    throw std::domain_error("x_of_y: y outside the graph range");

  std::size_t lo = 0, hi = v.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (y < v[mid].y)
      hi = mid;
    else
      lo = mid;
  }
  const double h = v[hi].y - v[lo].y;
  const double u = (y - v[lo].y) / h;
  const double m0 = std::cos(curve.theta[lo]) / std::sin(curve.theta[lo]);
  const double m1 = std::cos(curve.theta[hi]) / std::sin(curve.theta[hi]);
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * v[lo].x + (u3 - 2 * u2 + u) * h * m0 +
         (-2 * u3 + 3 * u2) * v[hi].x + (u3 - u2) * h * m1;
}

ThresholdResult find_threshold_H(const ThresholdControl& ctrl) {
  if (!(ctrl.bracket_lo > 0.0) || !(ctrl.bracket_hi > ctrl.bracket_lo))
    throw std::invalid_argument("find_threshold_H: bad bracket");
  if (!(ctrl.width > 0.0))
    throw std::invalid_argument("find_threshold_H: width must be positive");

  ThresholdResult res;
  auto classify = [&res, &ctrl](double y0) {
    const OrbitType t = integrate_orbit(y0, 0.5 * kPi, ctrl.orbit).type;
    res.log.emplace_back(y0, t);
    return t;
  };

  double lo = ctrl.bracket_lo, hi = ctrl.bracket_hi;
  OrbitType tlo = classify(lo), thi = classify(hi);
  for (int k = 0; k < ctrl.max_widenings && tlo != OrbitType::TypeI; ++k) {
    lo = std::max(lo / 10.0, 1e-5);
    tlo = classify(lo);
  }
  for (int k = 0; k < ctrl.max_widenings && thi != OrbitType::TypeII; ++k) {
    hi *= 10.0;
    thi = classify(hi);
  }
  if (tlo != OrbitType::TypeI || thi != OrbitType::TypeII) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "find_threshold_H: bracket does not straddle (y0=%g is %s, y0=%g is %s)",
                  lo, to_string(tlo), hi, to_string(thi));
    throw std::runtime_error(buf);
  }

  while (hi - lo > ctrl.width) {
    const double mid = 0.5 * (lo + hi);
    const OrbitType tm = classify(mid);
    if (tm == OrbitType::TypeI) {
      lo = mid;
    } else if (tm == OrbitType::TypeII) {
      hi = mid;
    } else {
      char buf[120];
      std::snprintf(buf, sizeof buf,
                    "find_threshold_H: unclassifiable orbit at y0=%.17g (%s)", mid,
                    to_string(tm));
      throw std::runtime_error(buf);
    }
  }
  res.H = 0.5 * (lo + hi);
  res.lo = lo;
  res.hi = hi;
  return res;
}

}  // namespace hypflow
