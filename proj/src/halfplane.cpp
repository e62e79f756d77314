#include "hypflow/halfplane.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace hypflow {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double sq(double v) { return v * v; }

}  // namespace

double hyperbolic_inner(const TangentVector& u, const TangentVector& v) {
  if (u.base.x != v.base.x || u.base.y != v.base.y)
    throw std::invalid_argument("hyperbolic_inner: vectors attached at different base points");
  require(u.base.y > 0.0, "hyperbolic_inner: base point not in the upper half-plane");
  return (u.dx * v.dx + u.dy * v.dy) / sq(u.base.y);
}

double hyperbolic_norm(const TangentVector& u) {
  return std::sqrt(hyperbolic_inner(u, u));
}

double hyperbolic_distance(const HPoint& p, const HPoint& q) {
  require(p.y > 0.0 && q.y > 0.0, "hyperbolic_distance: points must have y > 0");
  const double d2 = sq(p.x - q.x) + sq(p.y - q.y);
  return std::acosh(1.0 + d2 / (2.0 * p.y * q.y));
}

PolyCurve make_poly_curve(std::vector<HPoint> vertices, bool closed, double y_floor) {
  const std::size_t n = vertices.size();
  require(n >= (closed ? 3u : 2u), "make_poly_curve: too few vertices");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(vertices[i].y >= y_floor))
      throw std::invalid_argument("make_poly_curve: vertex " + std::to_string(i) +
                                  " below the y floor");
  }
  const std::size_t last_pair = closed ? n : n - 1;
  for (std::size_t i = 0; i < last_pair; ++i) {
    const HPoint& a = vertices[i];
    const HPoint& b = vertices[(i + 1) % n];
    if (a.x == b.x && a.y == b.y)
      throw std::invalid_argument("make_poly_curve: zero-length segment at vertex " +
                                  std::to_string(i));
  }
  return PolyCurve{std::move(vertices), closed};
}

double curve_length(const PolyCurve& c) {
  const std::size_t n = c.vertices.size();
  double len = 0.0;
  const std::size_t segs = c.closed ? n : n - 1;
  for (std::size_t i = 0; i < segs; ++i) {
    const HPoint& a = c.vertices[i];
    const HPoint& b = c.vertices[(i + 1) % n];
    len += std::hypot(b.x - a.x, b.y - a.y);
  }
  return len;
}

std::vector<std::size_t> interior_indices(const PolyCurve& c) {
  std::vector<std::size_t> idx;
  const std::size_t n = c.vertices.size();
  if (c.closed) {
    idx.reserve(n);
    for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
  } else if (n >= 3) {
    idx.reserve(n - 2);
    for (std::size_t i = 1; i + 1 < n; ++i) idx.push_back(i);
  }
  return idx;
}

CurvatureSample curvature_at(const PolyCurve& c, std::size_t i) {
  const std::size_t n = c.vertices.size();
  require(i < n, "curvature_at: index out of range");
  if (!c.closed) require(i >= 1 && i + 1 < n, "curvature_at: open-curve endpoint has no two neighbours");

  const HPoint& a = c.vertices[(i + n - 1) % n];
  const HPoint& b = c.vertices[i];
  const HPoint& d = c.vertices[(i + 1) % n];

  // Signed Menger curvature: 2 * cross(b-a, d-b) / (|b-a| |d-b| |d-a|).
  const double ux = b.x - a.x, uy = b.y - a.y;
  const double vx = d.x - b.x, vy = d.y - b.y;
  const double wx = d.x - a.x, wy = d.y - a.y;
  const double cross = ux * vy - uy * vx;
  const double denom = std::sqrt((ux * ux + uy * uy) * (vx * vx + vy * vy) *
                                 (wx * wx + wy * wy));
  require(denom > 0.0, "curvature_at: degenerate vertex triple");

  CurvatureSample s;
  s.kappa_e = 2.0 * cross / denom;
  s.theta = circle_tangent_angle(b, a, d, wx, wy);
  s.kappa_h = b.y * s.kappa_e + std::cos(s.theta);
  s.normal = TangentVector{b, -b.y * std::sin(s.theta), b.y * std::cos(s.theta)};
  return s;
}

double circle_tangent_angle(const HPoint& p, const HPoint& q, const HPoint& r,
                            double along_x, double along_y) {
  const double ax = q.x - p.x, ay = q.y - p.y;
  const double dx = r.x - p.x, dy = r.y - p.y;
  const double twice_area = ax * dy - ay * dx;
  const double a2 = ax * ax + ay * ay;
  const double d2 = dx * dx + dy * dy;
  if (std::fabs(twice_area) <= 1e-14 * std::sqrt(a2 * d2))
    return std::atan2(along_y, along_x);
  // Circumcenter relative to p from |O - A|^2 = |O|^2 = |O - D|^2; the
  // tangent at p is perpendicular to O.
  const double ox = (dy * a2 - ay * d2) / (2.0 * twice_area);
  const double oy = (ax * d2 - dx * a2) / (2.0 * twice_area);
  double tx = oy, ty = -ox;
  if (tx * along_x + ty * along_y < 0.0) {
    tx = -tx;
    ty = -ty;
  }
  return std::atan2(ty, tx);
}

PolyCurve reverse(const PolyCurve& c) {
  PolyCurve out = c;
  std::reverse(out.vertices.begin(), out.vertices.end());
  return out;
}

Classification classify_constant_curvature(const PolyCurve& c, double tol) {
  require(c.vertices.size() >= 4, "classify_constant_curvature: need at least four vertices");
  require(tol > 0.0, "classify_constant_curvature: tol must be positive");

  const std::vector<std::size_t> idx = interior_indices(c);
  require(!idx.empty(), "classify_constant_curvature: no vertex with two neighbours");

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double sum = 0.0;
  for (std::size_t i : idx) {
    const double k = curvature_at(c, i).kappa_h;
    lo = std::min(lo, k);
    hi = std::max(hi, k);
    sum += k;
  }
  const double mean = sum / static_cast<double>(idx.size());
  if (hi - lo > tol * std::max(1.0, std::fabs(mean))) return {CurveClass::NonConstant, {}};

  const double m = std::fabs(mean);
  if (m <= tol) return {CurveClass::Geodesic, mean};
  if (std::fabs(m - 1.0) <= tol) return {CurveClass::Horocycle, mean};
  return {m < 1.0 ? CurveClass::Equidistant : CurveClass::HyperbolicCircle, mean};
}

TangentVector KillingField::at(const HPoint& p) const {
  require(p.y > 0.0, "KillingField::at: point must have y > 0");
  switch (kind) {
    case FieldKind::Parabolic:
      return {p, 1.0, 0.0};
    case FieldKind::HyperbolicTranslation:
      return {p, p.x, p.y};
    case FieldKind::Rotation:
      return {p, p.y * p.y - p.x * p.x, 2.0 * p.x * p.y};
    case FieldKind::ConformalVertical:
      return {p, 0.0, 1.0};
  }
  throw std::invalid_argument("KillingField::at: unknown field kind");
}

HPoint apply_isometry(IsometryKind k, double t, const HPoint& p) {
  require(p.y > 0.0, "apply_isometry: point must have y > 0");
  switch (k) {
    case IsometryKind::Translation:
      return {p.x + t, p.y};
    case IsometryKind::Dilation: {
      const double e = std::exp(t);
      return {e * p.x, e * p.y};
    }
    case IsometryKind::Rotation: {
      const std::complex<double> z(p.x, p.y);
      const double ct = std::cos(t), st = std::sin(t);
      const std::complex<double> den = st * z + ct;
      if (std::norm(den) == 0.0)
        throw std::domain_error("apply_isometry: Moebius denominator vanished");
      const std::complex<double> w = (ct * z - st) / den;
      if (!(w.imag() > 0.0))
        throw std::domain_error("apply_isometry: image left the upper half-plane");
      return {w.real(), w.imag()};
    }
  }
  throw std::invalid_argument("apply_isometry: unknown isometry kind");
}

double soliton_residual(const PolyCurve& c, const KillingField& X, double kappa_floor) {
  require(kappa_floor > 0.0, "soliton_residual: kappa_floor must be positive");
  const std::vector<std::size_t> idx = interior_indices(c);
  require(!idx.empty(), "soliton_residual: no vertex with two neighbours");

  double worst = 0.0;
  for (std::size_t i : idx) {
    const CurvatureSample s = curvature_at(c, i);
    if (std::fabs(s.kappa_h) < kappa_floor)
      throw std::domain_error("soliton_residual: singular curvature at vertex " +
                              std::to_string(i));
    const double r = std::fabs(1.0 / s.kappa_h +
                               hyperbolic_inner(s.normal, X.at(c.vertices[i])));
    worst = std::max(worst, r);
  }
  return worst;
}

namespace {

double point_segment_distance(const HPoint& p, const HPoint& a, const HPoint& b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p.x - a.x) * vx + (p.y - a.y) * vy) / len2, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

double directed_hausdorff(const PolyCurve& from, const PolyCurve& to) {
  const std::size_t m = to.vertices.size();
  const std::size_t segs = to.closed ? m : m - 1;
  double worst = 0.0;
  for (const HPoint& p : from.vertices) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < segs; ++j) {
      best = std::min(best, point_segment_distance(p, to.vertices[j], to.vertices[(j + 1) % m]));
      if (best == 0.0) break;
    }
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

double hausdorff_distance(const PolyCurve& a, const PolyCurve& b) {
  require(a.vertices.size() >= 2 && b.vertices.size() >= 2,
          "hausdorff_distance: curves must have at least two vertices");
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

}  // namespace hypflow
