#include "hypflow/flow_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace hypflow {

namespace {

std::string format(const char* fmt, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

// Hyperbolic length of the segment p -> q, chord / midpoint height. The
// resampling measure must be hyperbolic: the sawtooth growth rate of the
// Euler update scales like dt * y^2 / (kappa_h * spacing_euclid)^2, so only
// a mesh with spacing_euclid ~ y keeps the stability margin uniform along
// the curve — and makes the dt cap below an honest CFL estimate.
double seg_hlen(const HPoint& p, const HPoint& q) {
  return std::hypot(q.x - p.x, q.y - p.y) / (0.5 * (p.y + q.y));
}

double hyperbolic_length(const PolyCurve& c) {
  double total = 0.0;
  for (std::size_t i = 1; i < c.vertices.size(); ++i)
    total += seg_hlen(c.vertices[i - 1], c.vertices[i]);
  if (c.closed) total += seg_hlen(c.vertices.back(), c.vertices.front());
  return total;
}

double mean_spacing(const PolyCurve& c) {
  const std::size_t segs = c.vertices.size() - (c.closed ? 0 : 1);
  return hyperbolic_length(c) / static_cast<double>(segs);
}

// Open-curve endpoints have no neighbour pair, so the estimate there is
// one-sided: the tangent of the end triple's circumcircle at the endpoint,
// and kappa_e extrapolated linearly in arc length from the two nearest
// interior estimates. Copying the neighbour's kappa_e instead would leave an
// O(spacing) velocity error at the ends, which Euler stepping turns into a
// boundary layer creeping into the curve one cell per step.
CurvatureSample one_sided(const HPoint& at, const HPoint& mid,
                          const HPoint& far, const CurvatureSample& near_s,
                          const CurvatureSample& next_s, bool forward) {
  CurvatureSample s;
  const double dx = forward ? mid.x - at.x : at.x - mid.x;
  const double dy = forward ? mid.y - at.y : at.y - mid.y;
  s.theta = circle_tangent_angle(at, mid, far, dx, dy);
  const double h0 = std::hypot(mid.x - at.x, mid.y - at.y);
  const double h1 = std::hypot(far.x - mid.x, far.y - mid.y);
  s.kappa_e =
      near_s.kappa_e + (near_s.kappa_e - next_s.kappa_e) * h0 / std::max(h1, 1e-300);
  s.kappa_h = at.y * s.kappa_e + std::cos(s.theta);
  s.normal = {at, -at.y * std::sin(s.theta), at.y * std::cos(s.theta)};
  return s;
}

std::vector<CurvatureSample> samples_for(const PolyCurve& c) {
  const std::size_t n = c.vertices.size();
  std::vector<CurvatureSample> out(n);
  if (c.closed) {
    for (std::size_t i = 0; i < n; ++i) out[i] = curvature_at(c, i);
    return out;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = curvature_at(c, i);
  out[0] = one_sided(c.vertices[0], c.vertices[1], c.vertices[2], out[1],
                     out[2], true);
  out[n - 1] = one_sided(c.vertices[n - 1], c.vertices[n - 2], c.vertices[n - 3],
                         out[n - 2], out[n - 3], false);
  return out;
}

// Cumulative chord lengths; for closed curves the wrap segment is appended,
// so knots.size() == vertices.size() + 1 and knots.back() is the full length.
std::vector<double> chord_knots(const std::vector<HPoint>& v, bool closed) {
  std::vector<double> u(v.size() + (closed ? 1 : 0));
  u[0] = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i)
    u[i] = u[i - 1] + std::hypot(v[i].x - v[i - 1].x, v[i].y - v[i - 1].y);
  if (closed)
    u[v.size()] = u[v.size() - 1] +
                  std::hypot(v[0].x - v.back().x, v[0].y - v.back().y);
  return u;
}

// Cumulative hyperbolic lengths on the same index grid as chord_knots.
std::vector<double> hyper_knots(const std::vector<HPoint>& v, bool closed) {
  std::vector<double> w(v.size() + (closed ? 1 : 0));
  w[0] = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i)
    w[i] = w[i - 1] + seg_hlen(v[i - 1], v[i]);
  if (closed) w[v.size()] = w[v.size() - 1] + seg_hlen(v.back(), v.front());
  return w;
}

// Resampling to (hyperbolically) equidistant vertices: targets are uniform
// in the hyperbolic measure, positions come from Catmull-Rom interpolation
// on chord-length knots. The cubic's O(spacing^4) interior error keeps the
// per-step interpolation from biasing convex curves inward the way linear
// resampling would (sagitta ~ spacing^2 * kappa per step adds up over
// thousands of steps).
PolyCurve resample(const PolyCurve& c, double spacing) {
  const std::vector<HPoint>& v = c.vertices;
  const std::size_t n = v.size();
  const std::vector<double> u = chord_knots(v, c.closed);
  const std::vector<double> w = hyper_knots(v, c.closed);
  const double total = w.back();

  auto point = [&](std::size_t i) -> const HPoint& { return v[i % n]; };
  // Tangent dP/du at vertex i (central difference). Open ends get the
  // tangent of the end triple's circumcircle instead of the one-sided chord:
  // a chord is only first-order in the direction, and the resulting bow of
  // the end-segment cubic reads back as large spurious curvature once finer
  // targets sample it.
  auto tangent = [&](std::size_t i) {
    if (!c.closed && (i == 0 || i + 1 == n)) {
      const std::size_t j = i == 0 ? 1 : n - 2, k = i == 0 ? 2 : n - 3;
      // orient along increasing u: toward v[1] at the start, away from
      // v[n-2] at the end
      const double cx = i == 0 ? v[1].x - v[0].x : v[n - 1].x - v[n - 2].x;
      const double cy = i == 0 ? v[1].y - v[0].y : v[n - 1].y - v[n - 2].y;
      const double ang = circle_tangent_angle(v[i], v[j], v[k], cx, cy);
      const double speed = std::hypot(cx, cy) / (i == 0 ? u[1] - u[0]
                                                        : u[n - 1] - u[n - 2]);
      return std::pair<double, double>{speed * std::cos(ang),
                                       speed * std::sin(ang)};
    }
    const std::size_t a = (i + n - 1) % n;
    const std::size_t b = i + 1;  // may be n (wrap vertex) for closed curves
    const double span = (i > 0 ? u[i] - u[i - 1] : u.back() - u[u.size() - 2]) +
                        u[i + 1 <= n ? i + 1 : 1] - u[i];
    return std::pair<double, double>{(point(b).x - point(a).x) / span,
                                     (point(b).y - point(a).y) / span};
  };

  std::size_t n_new =
      std::max<std::size_t>(c.closed ? 8 : 4,
                            static_cast<std::size_t>(std::llround(total / spacing)) +
                                (c.closed ? 0 : 1));
  std::vector<HPoint> out;
  out.reserve(n_new);
  const double step =
      total / static_cast<double>(c.closed ? n_new : n_new - 1);

  std::size_t seg = 0;
  for (std::size_t j = 0; j < n_new; ++j) {
    const double target = std::min(static_cast<double>(j) * step, total);
    while (seg + 2 < w.size() && w[seg + 1] < target) ++seg;
    const double du = u[seg + 1] - u[seg];
    const double tau = (target - w[seg]) / (w[seg + 1] - w[seg]);
    const auto [m0x, m0y] = tangent(seg);
    const auto [m1x, m1y] = tangent(seg + 1 < n ? seg + 1 : (c.closed ? 0 : n - 1));
    const double h00 = (1.0 + 2.0 * tau) * (1.0 - tau) * (1.0 - tau);
    const double h10 = tau * (1.0 - tau) * (1.0 - tau);
    const double h01 = tau * tau * (3.0 - 2.0 * tau);
    const double h11 = tau * tau * (tau - 1.0);
    const HPoint& p0 = point(seg);
    const HPoint& p1 = point(seg + 1);
    out.push_back({h00 * p0.x + h10 * du * m0x + h01 * p1.x + h11 * du * m1x,
                   h00 * p0.y + h10 * du * m0y + h01 * p1.y + h11 * du * m1y});
  }
  return {std::move(out), c.closed};
}

// Re-grid only when some segment has drifted well away from the target:
// each resample pass costs an O(spacing^4) interpolation bias, so doing it
// every step would accumulate a mesh error ~ t/dt that swamps the Euler
// error exactly when dt is refined. Expansion grows segments, which only
// widens the local stability margin, so waiting for the band edge is safe.
bool needs_resample(const PolyCurve& c, double spacing) {
  const std::size_t n = c.vertices.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = seg_hlen(c.vertices[i], c.vertices[i + 1]);
    if (h > 1.25 * spacing || h < 0.8 * spacing) return true;
  }
  if (c.closed) {
    const double h = seg_hlen(c.vertices.back(), c.vertices.front());
    if (h > 1.25 * spacing || h < 0.8 * spacing) return true;
  }
  return false;
}

double min_kappa(const FlowFrame& f) {
  double k = std::numeric_limits<double>::infinity();
  for (const CurvatureSample& s : f.per_vertex) k = std::min(k, s.kappa_h);
  return k;
}

}  // namespace

const char* to_string(FlowTermination t) {
  switch (t) {
    case FlowTermination::ReachedT: return "ReachedT";
    case FlowTermination::CurvatureSignChange: return "CurvatureSignChange";
    case FlowTermination::BoundaryContact: return "BoundaryContact";
  }
  return "?";
}

FlowFrame make_flow_frame(double t, PolyCurve curve, double y_floor) {
  if (curve.vertices.size() < 4)
    throw std::invalid_argument("make_flow_frame: need at least 4 vertices");
  PolyCurve checked = make_poly_curve(std::move(curve.vertices), curve.closed);
  for (const HPoint& p : checked.vertices)
    if (!(p.y > y_floor))
      throw std::invalid_argument(
          format("make_flow_frame: vertex height %.3g at or below the floor %.3g",
                 p.y, y_floor));
  FlowFrame f;
  f.t = t;
  f.per_vertex = samples_for(checked);
  f.curve = std::move(checked);
  return f;
}

FlowFrame step_icsf(const FlowFrame& frame, double dt, const FlowControl& ctrl) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_icsf: dt must be positive");
  for (const CurvatureSample& s : frame.per_vertex)
    if (!(s.kappa_h > ctrl.kappa_floor))
      throw FlowStop(FlowTermination::CurvatureSignChange, frame.t,
                     format("flow speed lost: kappa_h = %.6g fell below the "
                            "floor %.3g",
                            s.kappa_h, ctrl.kappa_floor));

  PolyCurve moved = frame.curve;
  for (std::size_t i = 0; i < moved.vertices.size(); ++i) {
    const CurvatureSample& s = frame.per_vertex[i];
    moved.vertices[i].x -= dt * s.normal.dx / s.kappa_h;
    moved.vertices[i].y -= dt * s.normal.dy / s.kappa_h;
  }

  const double spacing =
      ctrl.resample_spacing > 0.0 ? ctrl.resample_spacing : mean_spacing(frame.curve);
  if (needs_resample(moved, spacing)) moved = resample(moved, spacing);

  for (const HPoint& p : moved.vertices)
    if (!(p.y > ctrl.y_floor))
      throw FlowStop(FlowTermination::BoundaryContact, frame.t,
                     format("curve reached the ideal boundary: y = %.6g at or "
                            "below the floor %.3g",
                            p.y, ctrl.y_floor));

  FlowFrame next;
  next.t = frame.t + dt;
  next.per_vertex = samples_for(moved);
  next.curve = std::move(moved);
  return next;
}

FlowRun run_icsf(const PolyCurve& start, double t_total, const FlowControl& ctrl) {
  if (!(t_total > 0.0))
    throw std::invalid_argument("run_icsf: t_total must be positive");
  if (!(ctrl.dt > 0.0)) throw std::invalid_argument("run_icsf: dt must be positive");
  if (ctrl.frame_stride == 0)
    throw std::invalid_argument("run_icsf: frame_stride must be >= 1");

  FlowRun run;
  run.dt = ctrl.dt;
  run.resample_spacing =
      ctrl.resample_spacing > 0.0 ? ctrl.resample_spacing : mean_spacing(start);
  FlowControl locked = ctrl;
  locked.resample_spacing = run.resample_spacing;

  FlowFrame f = make_flow_frame(0.0, start, ctrl.y_floor);
  const double cap =
      0.25 * run.resample_spacing * run.resample_spacing * min_kappa(f) * min_kappa(f);
  if (ctrl.dt > cap)
    run.warnings.push_back(
        format("dt = %.3g exceeds the stability heuristic "
               "0.25*spacing^2*min(kappa_h)^2 = %.3g; continuing, but expect "
               "noise if the flow roughens",
               ctrl.dt, cap));
  run.frames.push_back(f);

  const std::size_t n_full =
      static_cast<std::size_t>(std::floor(t_total / ctrl.dt + 1e-9));
  const double rem_start = static_cast<double>(n_full) * ctrl.dt;
  const bool has_rem = t_total - rem_start > 1e-12 * std::max(1.0, t_total);
  const std::size_t n_steps = n_full + (has_rem ? 1 : 0);

  for (std::size_t k = 1; k <= n_steps; ++k) {
    const double dt = k <= n_full ? ctrl.dt : t_total - rem_start;
    try {
      f = step_icsf(f, dt, locked);
    } catch (const FlowStop& stop) {
      run.termination = stop.why;
      run.warnings.push_back(format("stopped at t = %.6g: ", stop.t, 0.0) +
                             stop.what());
      break;
    }
    if (k % ctrl.frame_stride == 0 || k == n_steps) run.frames.push_back(f);
  }
  if (run.frames.back().t != f.t) run.frames.push_back(f);
  return run;
}

CircleFit fit_circle(const PolyCurve& c) {
  const std::vector<HPoint>& v = c.vertices;
  if (v.size() < 3) throw std::invalid_argument("fit_circle: need >= 3 vertices");
  double mx = 0.0, my = 0.0;
  for (const HPoint& p : v) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(v.size());
  my /= static_cast<double>(v.size());

  // Kasa fit on centered coordinates: x^2 + y^2 + A x + B y + C = 0 is linear
  // in (A, B, C); solve the 3x3 normal equations.
  double sxx = 0, sxy = 0, syy = 0, sx = 0, sy = 0, sz = 0, szx = 0, szy = 0;
  for (const HPoint& p : v) {
    const double x = p.x - mx, y = p.y - my, z = x * x + y * y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    sx += x;
    sy += y;
    sz += z;
    szx += z * x;
    szy += z * y;
  }
  const double n = static_cast<double>(v.size());
  // Rows of M [A B C]^T = rhs.
  const double M[3][3] = {{sxx, sxy, sx}, {sxy, syy, sy}, {sx, sy, n}};
  const double rhs[3] = {-szx, -szy, -sz};
  const double det = M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
                     M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
                     M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
  const double scale = sxx + syy;
  if (!(std::fabs(det) > 1e-12 * std::max(1.0, scale * scale * n)))
    throw std::invalid_argument("fit_circle: degenerate (collinear?) vertices");
  auto solve = [&](int col) {
    double A[3][3];
    for (int r = 0; r < 3; ++r)
      for (int k = 0; k < 3; ++k) A[r][k] = k == col ? rhs[r] : M[r][k];
    return (A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1]) -
            A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0]) +
            A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0])) /
           det;
  };
  const double A = solve(0), B = solve(1), C = solve(2);
  const double r2 = 0.25 * (A * A + B * B) - C;
  if (!(r2 > 0.0)) throw std::invalid_argument("fit_circle: no real radius");
  return {mx - 0.5 * A, my - 0.5 * B, std::sqrt(r2)};
}

double fitted_hyperbolic_radius(const PolyCurve& c) {
  const CircleFit fit = fit_circle(c);
  if (!(fit.cy > fit.rho))
    throw std::domain_error(
        "fitted_hyperbolic_radius: fitted circle is not contained in y > 0");
  return std::atanh(fit.rho / fit.cy);
}

double verify_soliton_translation(const PolyCurve& soliton, FieldKind kind,
                                  double t_total, const FlowControl& ctrl) {
  if (kind != FieldKind::Parabolic && kind != FieldKind::ConformalVertical)
    throw std::invalid_argument(
        "verify_soliton_translation: only Parabolic and ConformalVertical "
        "solitons translate rigidly");

  // The simulator needs kappa_h > 0 (flow speed 1/kappa); the soliton modules
  // emit the conformal cap with negative curvature, so fix orientation here.
  PolyCurve c = soliton;
  {
    const FlowFrame probe = make_flow_frame(0.0, c, ctrl.y_floor);
    double mean = 0.0;
    for (const CurvatureSample& s : probe.per_vertex) mean += s.kappa_h;
    if (mean < 0.0) c = reverse(c);
  }

  const FlowRun run = run_icsf(c, t_total, ctrl);
  if (run.termination != FlowTermination::ReachedT)
    throw FlowStop(run.termination, run.frames.back().t,
                   std::string("verify_soliton_translation: flow ended early "
                               "(") +
                       to_string(run.termination) + ")");

  const double sx = kind == FieldKind::Parabolic ? t_total : 0.0;
  const double sy = kind == FieldKind::Parabolic ? 0.0 : t_total;
  std::vector<HPoint> target = c.vertices;
  for (HPoint& p : target) {
    p.x += sx;
    p.y += sy;
  }

  const FlowFrame& last = run.frames.back();
  const std::vector<HPoint>& w = last.curve.vertices;

  // Comparison window. An open curve's evolution is determined only up to
  // boundary data at its free ends; the simulator closes the ends with
  // one-sided estimates, a modeling choice whose influence spreads inward
  // diffusively (the flow linearizes to a heat equation with diffusivity
  // 1/kappa^2 in hyperbolic arc length). In the stretched variable
  // dz = kappa ds that equation has unit diffusivity, so by time t the end
  // data reaches z ~ sqrt(t): drop every vertex within 4*sqrt(t_total) of
  // either end in z. Stiff (high-kappa) ends barely move and shed almost no
  // margin; slow ends shed a wide one. Closed curves have no ends.
  const std::vector<double> u = hyper_knots(w, last.curve.closed);
  double lo = -1.0, hi = std::numeric_limits<double>::infinity();
  if (!last.curve.closed) {
    const double span = 4.0 * std::sqrt(t_total);
    std::vector<double> z(w.size());
    z[0] = 0.0;
    for (std::size_t i = 1; i < w.size(); ++i)
      z[i] = z[i - 1] + (u[i] - u[i - 1]) * 0.5 *
                            (std::fabs(last.per_vertex[i - 1].kappa_h) +
                             std::fabs(last.per_vertex[i].kappa_h));
    std::size_t i = 0;
    while (i < w.size() && z[i] < span) ++i;
    lo = i < w.size() ? u[i] : std::numeric_limits<double>::infinity();
    std::size_t j = w.size();
    while (j-- > 0 && z.back() - z[j] < span) {
    }
    hi = j < w.size() ? u[j] : -1.0;
    if (!(lo < hi))
      throw std::runtime_error(
          "verify_soliton_translation: curve shorter than the free-end "
          "influence regions at this t_total");
  }

  const std::size_t nseg = target.size() - (last.curve.closed ? 0 : 1);
  double worst = -1.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (u[i] < lo || u[i] > hi) continue;
    const HPoint& p = w[i];
    const double nx = last.per_vertex[i].normal.dx / p.y;
    const double ny = last.per_vertex[i].normal.dy / p.y;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < nseg; ++k) {
      const HPoint& a = target[k];
      const HPoint& b = target[(k + 1) % target.size()];
      const double ex = b.x - a.x, ey = b.y - a.y;
      const double det = nx * (-ey) + ex * ny;
      if (std::fabs(det) < 1e-300) continue;  // ray parallel to the segment
      const double rx = a.x - p.x, ry = a.y - p.y;
      const double tau = (rx * (-ey) + ex * ry) / det;
      const double frac = (nx * ry - ny * rx) / det;
      if (frac >= -1e-12 && frac <= 1.0 + 1e-12)
        best = std::min(best, std::fabs(tau));
    }
    if (std::isinf(best)) continue;  // ray escaped past the trimmed ends
    worst = std::max(worst, best / p.y);
  }
  if (worst < 0.0)
    throw std::runtime_error(
        "verify_soliton_translation: no normal ray met the translated curve");
  return worst;
}

}  // namespace hypflow
