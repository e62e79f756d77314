#include "hypflow/exact_flows.hpp"

#include <cmath>
#include <stdexcept>

namespace hypflow {

namespace {

// Angular inset that keeps equidistant arc endpoints strictly above y = 0.
constexpr double kArcEndInset = 1e-9;

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

ExactFlow make_exact_flow(ExactFlowKind kind, double R, std::optional<double> c) {
  require(R > 0.0, "make_exact_flow: R must be positive");
  ExactFlow flow;
  flow.kind = kind;
  flow.R = R;
  if (kind == ExactFlowKind::Equidistant) {
    require(c.has_value(), "make_exact_flow: Equidistant needs the center height c");
    require(*c > 0.0 && *c < R, "make_exact_flow: Equidistant needs 0 < c < R");
    flow.c = *c;
    flow.a = std::sqrt(R * R - *c * *c);
    flow.t_min = std::log(flow.a / R);
  } else {
    require(!c.has_value(), "make_exact_flow: c is only meaningful for Equidistant");
  }
  return flow;
}

double ExactFlow::radius(double t) const {
  if (t < t_min) throw std::domain_error("ExactFlow::radius: t below t_min");
  switch (kind) {
    case ExactFlowKind::HyperbolicCircle:
      return std::asinh(std::sinh(R) * std::exp(t));
    case ExactFlowKind::Horocycle:
    case ExactFlowKind::Equidistant:
      return R * std::exp(t);
  }
  throw std::logic_error("ExactFlow::radius: bad kind");
}

double ExactFlow::curvature(double t) const {
  const double r = radius(t);
  switch (kind) {
    case ExactFlowKind::HyperbolicCircle:
      return 1.0 / std::tanh(r);
    case ExactFlowKind::Horocycle:
      return 1.0;
    case ExactFlowKind::Equidistant:
      return std::sqrt(r * r - a * a) / r;
  }
  throw std::logic_error("ExactFlow::curvature: bad kind");
}

PolyCurve ExactFlow::curve_at(double t, std::size_t n) const {
  require(n >= 4, "ExactFlow::curve_at: need at least 4 samples");
  const double r = radius(t);

  std::vector<HPoint> pts;
  pts.reserve(n);
  if (kind == ExactFlowKind::Equidistant) {
    // Arc of the Euclidean circle centered at (0, h) through (+-a, 0),
    // counterclockwise from the right endpoint. The half-step-free sweep
    // sin(u) >= -h/r is inset so vertices stay strictly above the axis.
    const double h = std::sqrt(std::max(r * r - a * a, 0.0));
    const double alpha = std::asin(h / r);
    const double u0 = -alpha + kArcEndInset;
    const double u1 = M_PI + alpha - kArcEndInset;
    for (std::size_t k = 0; k < n; ++k) {
      const double u = u0 + (u1 - u0) * static_cast<double>(k) / static_cast<double>(n - 1);
      pts.push_back({r * std::cos(u), h + r * std::sin(u)});
    }
    return make_poly_curve(pts, false);
  }

  // Circle families: Euclidean center (0, b) and radius rho. The half-step
  // angular offset keeps horocycle samples off their ideal point at y = 0.
  const double b = kind == ExactFlowKind::HyperbolicCircle ? std::cosh(r) : r;
  const double rho = kind == ExactFlowKind::HyperbolicCircle ? std::sinh(r) : r;
  for (std::size_t k = 0; k < n; ++k) {
    const double u =
        -M_PI / 2 + (static_cast<double>(k) + 0.5) * 2.0 * M_PI / static_cast<double>(n);
    pts.push_back({rho * std::cos(u), b + rho * std::sin(u)});
  }
  return make_poly_curve(pts, true);
}

double flow_residual(const ExactFlow& flow, double t, std::size_t n_samples,
                     std::optional<double> dt) {
  require(n_samples >= 16, "flow_residual: need at least 16 samples");
  const double step = dt.value_or(1e-4 * std::max(1.0, std::fabs(t)));
  require(step > 0.0, "flow_residual: dt must be positive");
  if (t <= flow.t_min || t - step <= flow.t_min)
    throw std::domain_error("flow_residual: t - dt must exceed t_min");

  const PolyCurve now = flow.curve_at(t, n_samples);
  const PolyCurve before = flow.curve_at(t - step, n_samples);
  const PolyCurve after = flow.curve_at(t + step, n_samples);

  double worst = 0.0;
  for (std::size_t i : interior_indices(now)) {
    const CurvatureSample s = curvature_at(now, i);
    const double vx = (after.vertices[i].x - before.vertices[i].x) / (2.0 * step);
    const double vy = (after.vertices[i].y - before.vertices[i].y) / (2.0 * step);
    const TangentVector velocity{now.vertices[i], vx, vy};
    worst = std::max(worst,
                     std::fabs(hyperbolic_inner(velocity, s.normal) + 1.0 / s.kappa_h));
  }
  return worst;
}

}  // namespace hypflow
