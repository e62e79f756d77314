#include "hypflow/ode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hypflow::ode {

namespace {

// Dormand-Prince 5(4) tableau (FSAL: the 7th stage is the next step's first).
constexpr double kC2 = 1.0 / 5.0, kC3 = 3.0 / 10.0, kC4 = 4.0 / 5.0, kC5 = 8.0 / 9.0;
constexpr double kA21 = 1.0 / 5.0;
constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0,
                 kA53 = 64448.0 / 6561.0, kA54 = -212.0 / 729.0;
constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0, kA63 = 46732.0 / 5247.0,
                 kA64 = 49.0 / 176.0, kA65 = -5103.0 / 18656.0;
constexpr double kB1 = 35.0 / 384.0, kB3 = 500.0 / 1113.0, kB4 = 125.0 / 192.0,
                 kB5 = -2187.0 / 6784.0, kB6 = 11.0 / 84.0;
constexpr double kE1 = 71.0 / 57600.0, kE3 = -71.0 / 16695.0, kE4 = 71.0 / 1920.0,
                 kE5 = -17253.0 / 339200.0, kE6 = 22.0 / 525.0, kE7 = -1.0 / 40.0;

// PI controller (Hairer, Noersett, Wanner: Solving ODEs I, dopri5).
constexpr double kBeta = 0.04;
constexpr double kExpo1 = 0.2 - kBeta * 0.75;
constexpr double kSafe = 0.9;
constexpr double kFacMin = 0.2;   // max shrink per step
constexpr double kFacMax = 10.0;  // max growth per step

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

// Cubic Hermite over [s0, s0+h] given endpoint states and derivatives.
void hermite(double u, double h, std::span<const double> y0, std::span<const double> f0,
             std::span<const double> y1, std::span<const double> f1,
             std::span<double> out) {
  const double u2 = u * u, u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1;
  const double h10 = u3 - 2 * u2 + u;
  const double h01 = -2 * u3 + 3 * u2;
  const double h11 = u3 - u2;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
}

struct StepWindow {
  double s0, h;
  std::span<const double> y0, f0, y1, f1;
};

// Guard value on the dense output of one step.
double guard_on_step(const Guard& g, const StepWindow& w, double s,
                     std::vector<double>& scratch) {
  hermite((s - w.s0) / w.h, w.h, w.y0, w.f0, w.y1, w.f1, scratch);
  return g(s, scratch);
}

bool fired(GuardDirection dir, double g_prev, double g_new) {
  switch (dir) {
    case GuardDirection::Rising:
      return g_prev < 0.0 && g_new >= 0.0;
    case GuardDirection::Falling:
      return g_prev > 0.0 && g_new <= 0.0;
    case GuardDirection::Any:
      return (g_prev < 0.0 && g_new >= 0.0) || (g_prev > 0.0 && g_new <= 0.0);
  }
  return false;
}

}  // namespace

Trajectory integrate(const OdeProblem& problem, std::span<const EventSpec> events,
                     const StepControl& ctrl) {
  if (!problem.rhs) throw std::invalid_argument("integrate: missing rhs");
  if (problem.y0.empty()) throw std::invalid_argument("integrate: empty initial state");
  if (!(ctrl.rtol > 0.0) || !(ctrl.atol > 0.0))
    throw std::invalid_argument("integrate: rtol and atol must be positive");
  if (!(ctrl.h_min > 0.0) || !(ctrl.h_init > 0.0))
    throw std::invalid_argument("integrate: h_init and h_min must be positive");
  if (!(ctrl.s_max > 0.0)) throw std::invalid_argument("integrate: s_max must be positive");
  for (const EventSpec& e : events)
    if (!e.guard) throw std::invalid_argument("integrate: event without guard");

  const std::size_t n = problem.y0.size();
  const double sgn = problem.direction == Direction::Forward ? 1.0 : -1.0;
  const double s_end = problem.s0 + sgn * ctrl.s_max;

  Trajectory traj;
  std::vector<double> y = problem.y0;
  std::vector<double> f0(n), k2(n), k3(n), k4(n), k5(n), k6(n), y1(n), f1(n), ytmp(n),
      scratch(n);
  double s = problem.s0;

  problem.rhs(s, y, f0);
  if (!all_finite(f0)) {
    traj.nodes.push_back({s, y, f0});
    traj.termination = Termination::BlowUp;
    return traj;
  }
  traj.nodes.push_back({s, y, f0});

  std::vector<double> g_prev(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) g_prev[i] = events[i].guard(s, y);

  double h = sgn * std::min({ctrl.h_init, ctrl.h_max, ctrl.s_max});
  double facold = 1e-4;
  bool last_rejected = false;
  bool nonfinite_seen = false;

  for (std::size_t step = 0; step < ctrl.max_steps; ++step) {
    if (sgn * (s_end - s) <= 1e-14 * std::max(1.0, std::fabs(s))) {
      traj.termination = Termination::ReachedBound;
      return traj;
    }
    bool clipped = false;
    if (sgn * (s + h) > sgn * s_end) {
      h = s_end - s;
      clipped = true;
    }
    if (!clipped && std::fabs(h) < ctrl.h_min) {
      traj.termination = nonfinite_seen ? Termination::BlowUp : Termination::StepUnderflow;
      return traj;
    }

    // Stages (k1 = f0 by FSAL).
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * kA21 * f0[i];
    problem.rhs(s + kC2 * h, ytmp, k2);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (kA31 * f0[i] + kA32 * k2[i]);
    problem.rhs(s + kC3 * h, ytmp, k3);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (kA41 * f0[i] + kA42 * k2[i] + kA43 * k3[i]);
    problem.rhs(s + kC4 * h, ytmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (kA51 * f0[i] + kA52 * k2[i] + kA53 * k3[i] + kA54 * k4[i]);
    problem.rhs(s + kC5 * h, ytmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (kA61 * f0[i] + kA62 * k2[i] + kA63 * k3[i] + kA64 * k4[i] +
                            kA65 * k5[i]);
    problem.rhs(s + h, ytmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      y1[i] = y[i] + h * (kB1 * f0[i] + kB3 * k3[i] + kB4 * k4[i] + kB5 * k5[i] +
                          kB6 * k6[i]);
    problem.rhs(s + h, y1, f1);

    bool finite = all_finite(k2) && all_finite(k3) && all_finite(k4) && all_finite(k5) &&
                  all_finite(k6) && all_finite(y1) && all_finite(f1);
    double err = 0.0;
    if (finite) {
      for (std::size_t i = 0; i < n; ++i) {
        const double ei = h * (kE1 * f0[i] + kE3 * k3[i] + kE4 * k4[i] + kE5 * k5[i] +
                               kE6 * k6[i] + kE7 * f1[i]);
        const double sc = ctrl.atol + ctrl.rtol * std::max(std::fabs(y[i]), std::fabs(y1[i]));
        err += (ei / sc) * (ei / sc);
      }
      err = std::sqrt(err / static_cast<double>(n));
      finite = std::isfinite(err);
    }

    if (!finite) {
      nonfinite_seen = true;
      last_rejected = true;
      h *= 0.25;
      continue;
    }

    if (err > 1.0) {  // reject
      const double fac11 = std::pow(err, kExpo1);
      h /= std::min(1.0 / kFacMin, fac11 / kSafe);
      last_rejected = true;
      continue;
    }

    // Accepted. Locate events inside [s, s+h] on the dense output.
    nonfinite_seen = false;
    const StepWindow win{s, h, y, f0, y1, f1};
    struct Hit {
      double s;
      std::size_t idx;
      double slope;
    };
    std::vector<Hit> hits;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const double g_new = events[i].guard(s + h, y1);
      if (fired(events[i].direction, g_prev[i], g_new)) {
        double sa = s, sb = s + h;
        double ga = g_prev[i];
        double sm = 0.5 * (sa + sb);
        double gm = guard_on_step(events[i].guard, win, sm, scratch);
        for (int it = 0; it < 200; ++it) {
          // The recorded root is always a point whose guard value was measured.
          if (std::fabs(gm) < ctrl.atol && std::fabs(sb - sa) < 0.02 * ctrl.atol) break;
          if (std::fabs(sb - sa) <= 4.0 * std::fabs(sm) * 1e-16 + 1e-300) break;
          if ((ga <= 0.0) == (gm <= 0.0)) {
            sa = sm;
            ga = gm;
          } else {
            sb = sm;
          }
          sm = 0.5 * (sa + sb);
          gm = guard_on_step(events[i].guard, win, sm, scratch);
        }
        const double ds = std::max(1e-9, 1e-9 * std::fabs(sm));
        const double slope = (guard_on_step(events[i].guard, win, sm + sgn * ds, scratch) -
                              guard_on_step(events[i].guard, win, sm - sgn * ds, scratch)) /
                             (2.0 * sgn * ds);
        hits.push_back({sm, i, slope});
      }
      g_prev[i] = g_new;
    }
    std::sort(hits.begin(), hits.end(),
              [sgn](const Hit& a, const Hit& b) { return sgn * a.s < sgn * b.s; });

    std::optional<Hit> stop;
    for (const Hit& hit : hits) {
      if (events[hit.idx].terminal) {
        stop = hit;
        break;
      }
    }
    std::optional<std::size_t> stop_record;
    for (const Hit& hit : hits) {
      if (stop && sgn * hit.s > sgn * stop->s) break;
      EventRecord rec;
      rec.s = hit.s;
      rec.state.resize(n);
      hermite((hit.s - s) / h, h, y, f0, y1, f1, rec.state);
      rec.event_index = hit.idx;
      rec.guard_slope = hit.slope;
      if (stop && hit.idx == stop->idx && hit.s == stop->s)
        stop_record = traj.events.size();
      traj.events.push_back(std::move(rec));
    }

    if (stop) {
      if (stop->s != traj.nodes.back().s) {
        Node end;
        end.s = stop->s;
        end.state.resize(n);
        hermite((stop->s - s) / h, h, y, f0, y1, f1, end.state);
        end.deriv.resize(n);
        problem.rhs(end.s, end.state, end.deriv);
        traj.nodes.push_back(std::move(end));
      }
      traj.termination = Termination::EventStop;
      traj.stop_event = stop_record;
      return traj;
    }

    s += h;
    y.swap(y1);
    f0.swap(f1);
    traj.nodes.push_back({s, y, f0});

    const double fac11 = std::pow(err, kExpo1);
    double fac = fac11 / std::pow(facold, kBeta);
    fac = std::clamp(fac / kSafe, 1.0 / kFacMax, 1.0 / kFacMin);
    double hnew = h / fac;
    if (last_rejected) hnew = sgn * std::min(std::fabs(hnew), std::fabs(h));
    if (std::fabs(hnew) > ctrl.h_max) hnew = sgn * ctrl.h_max;
    h = hnew;
    facold = std::max(err, 1e-4);
    last_rejected = false;
  }
  throw std::runtime_error("integrate: step budget exhausted");
}

std::vector<double> sample(const Trajectory& t, double s) {
  if (t.nodes.empty()) throw std::invalid_argument("sample: empty trajectory");
  if (t.nodes.size() == 1) return t.nodes.front().state;

  const bool increasing = t.nodes.back().s >= t.nodes.front().s;
  std::size_t lo = 0, hi = t.nodes.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    const bool left = increasing ? (s < t.nodes[mid].s) : (s > t.nodes[mid].s);
    if (left)
      hi = mid;
    else
      lo = mid;
  }
  const Node& a = t.nodes[lo];
  const Node& b = t.nodes[hi];
  const double h = b.s - a.s;
  std::vector<double> out(a.state.size());
  hermite((s - a.s) / h, h, a.state, a.deriv, b.state, b.deriv, out);
  return out;
}

}  // namespace hypflow::ode
