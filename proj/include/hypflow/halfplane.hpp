#pragma once

// Geometry of curves in the upper half-plane model of the hyperbolic plane:
// H2 = { (x,y) : y > 0 } with metric g = (dx^2 + dy^2) / y^2.
//
// Curvature/normal conventions for a curve s -> (x(s), y(s)) parametrised
// proportionally to Euclidean arc length, with tangent angle theta
// (x' = cos(theta), y' = sin(theta)):
//
//   N       = y * (-sin(theta), cos(theta))        (unit hyperbolic normal,
//                                                   +90 deg rotation of the tangent)
//   kappa_h = y * kappa_e + cos(theta)             (geodesic curvature)
//
// where kappa_e is the signed Euclidean curvature. Discrete estimates use the
// Menger circumcircle for kappa_e and the central-difference chord for theta;
// both are exact on points sampled from a Euclidean circle.

#include <cstddef>
#include <optional>
#include <vector>

namespace hypflow {

inline constexpr double kDefaultYFloor = 1e-12;

struct HPoint {
  double x = 0.0;
  double y = 1.0;  // must stay > 0
};

// Tangent vector (dx, dy) attached at a base point.
struct TangentVector {
  HPoint base;
  double dx = 0.0;
  double dy = 0.0;
};

// Riemannian inner product <u,v> = (u.dx*v.dx + u.dy*v.dy) / y^2.
// Throws std::invalid_argument if the base points differ.
double hyperbolic_inner(const TangentVector& u, const TangentVector& v);

double hyperbolic_norm(const TangentVector& u);

// Distance in H2: acosh(1 + (|p-q|_euclid)^2 / (2 p.y q.y)).
double hyperbolic_distance(const HPoint& p, const HPoint& q);

// Polyline in the upper half-plane. For closed curves the wrap-around segment
// (last vertex -> first vertex) is implicit; the first vertex is stored once.
struct PolyCurve {
  std::vector<HPoint> vertices;
  bool closed = false;
};

// Validating constructor: at least two vertices (three if closed), every
// y >= y_floor, and no zero-length segment (including the wrap-around pair of
// a closed curve). Throws std::invalid_argument on violation.
PolyCurve make_poly_curve(std::vector<HPoint> vertices, bool closed,
                          double y_floor = kDefaultYFloor);

// Euclidean length of the polyline (including the wrap segment if closed).
double curve_length(const PolyCurve& c);

struct CurvatureSample {
  double kappa_e = 0.0;   // signed Euclidean curvature (Menger circumcircle)
  double kappa_h = 0.0;   // hyperbolic geodesic curvature
  double theta = 0.0;     // Euclidean tangent angle at the vertex
  TangentVector normal;   // y * (-sin theta, cos theta); |N|_h = 1
};

// Discrete curvature data at vertex i. The vertex must have two neighbours:
// any vertex of a closed curve, or an interior vertex (1 <= i <= n-2) of an
// open one. Throws std::invalid_argument otherwise.
CurvatureSample curvature_at(const PolyCurve& c, std::size_t i);

// Euclidean tangent angle at p of the circle through (p, q, r), oriented to
// have positive dot product with (along_x, along_y); falls back to the
// direction of `along` itself when the triple is nearly collinear. Unlike a
// plain chord, this is exact on circular arcs at any node spacing, which is
// what keeps curvature estimates unbiased on non-uniform meshes.
double circle_tangent_angle(const HPoint& p, const HPoint& q, const HPoint& r,
                            double along_x, double along_y);

// Indices of the vertices curvature_at accepts for this curve.
std::vector<std::size_t> interior_indices(const PolyCurve& c);

// Reverses the traversal orientation (flips kappa_h and the normal together).
PolyCurve reverse(const PolyCurve& c);

enum class CurveClass {
  Geodesic,          // |kappa_h| = 0
  Equidistant,       // 0 < |kappa_h| < 1
  Horocycle,         // |kappa_h| = 1
  HyperbolicCircle,  // |kappa_h| > 1
  NonConstant,
};

struct Classification {
  CurveClass label = CurveClass::NonConstant;
  std::optional<double> kappa;  // mean kappa_h when the curve is constant-curvature
};

// Samples kappa_h at every vertex with two neighbours; if the spread
// (max - min) exceeds tol * max(1, |mean|) the curve is NonConstant, else the
// class is decided from |mean| with the same tolerance. Requires at least four
// vertices.
Classification classify_constant_curvature(const PolyCurve& c, double tol = 1e-6);

// Basis of Killing fields of H2, plus the conformal field d/dy (which scales
// the metric rather than preserving it but shares the evaluation interface):
//   Parabolic             X1 = d/dx              -> (1, 0)
//   HyperbolicTranslation X2 = x d/dx + y d/dy   -> (x, y)
//   Rotation              X3                     -> (y^2 - x^2, 2xy)
//   ConformalVertical     Y  = d/dy              -> (0, 1)
enum class FieldKind { Parabolic, HyperbolicTranslation, Rotation, ConformalVertical };

struct KillingField {
  FieldKind kind = FieldKind::Parabolic;
  TangentVector at(const HPoint& p) const;
};

// One-parameter isometry subgroups, acting on z = x + iy:
//   Translation  P_t(z) = z + t
//   Dilation     H_t(z) = e^t z
//   Rotation     R_t(z) = (cos t * z - sin t) / (sin t * z + cos t)
enum class IsometryKind { Translation, Dilation, Rotation };

// Applies the isometry; throws std::domain_error if the Moebius denominator
// vanishes (cannot happen for y > 0, but inputs are not trusted).
HPoint apply_isometry(IsometryKind k, double t, const HPoint& p);

// Max over vertices with two neighbours of |1/kappa_h + <N, X(p)>|, the
// pointwise defect of the soliton equation 1/kappa = -<N, X o gamma>.
// Throws std::domain_error if |kappa_h| < kappa_floor at a sampled vertex.
double soliton_residual(const PolyCurve& c, const KillingField& X,
                        double kappa_floor = 1e-9);

// Symmetric Hausdorff distance between two polylines (Euclidean,
// vertex-to-segment). Used by convergence and symmetry checks.
double hausdorff_distance(const PolyCurve& a, const PolyCurve& b);

}  // namespace hypflow
