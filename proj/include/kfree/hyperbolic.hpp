#pragma once

// Upper half-space model of hyperbolic 3-space.
//
// A point is z + t j with z complex and t > 0.  An orientation-preserving
// isometry is a 2x2 complex matrix of determinant one acting by the
// quaternionic Moebius formula (aP + b)(cP + d)^-1; the action factors
// through PSL(2,C).

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>

#include "kfree/errors.hpp"

namespace kfree {

using Complex = std::complex<double>;

struct Point {
  Complex z{0.0, 0.0};
  double t = 1.0;

  Point() = default;
  Point(Complex z_, double t_) : z(z_), t(t_) {
    if (!(t_ > 0.0) || !std::isfinite(t_) || !std::isfinite(z_.real()) ||
        !std::isfinite(z_.imag()))
      throw GeometryError("point must have finite coordinates and t > 0");
  }
  Point(double x, double y, double t_) : Point(Complex{x, y}, t_) {}
};

/// A point of the sphere at infinity: a complex number or infinity.
struct BoundaryPoint {
  Complex z{0.0, 0.0};
  bool infinite = false;

  static BoundaryPoint at(Complex w) { return {w, false}; }
  static BoundaryPoint infinity() { return {Complex{0.0, 0.0}, true}; }
};

/// Position on the unit sphere (stereographic chart); used to compare
/// boundary points uniformly, including points near infinity.
struct SpherePoint {
  double x, y, z;
};

inline SpherePoint to_sphere(const BoundaryPoint& p) {
  if (p.infinite) return {0.0, 0.0, 1.0};
  const double n = std::norm(p.z);
  if (!std::isfinite(n)) return {0.0, 0.0, 1.0};
  const double den = n + 1.0;
  return {2.0 * p.z.real() / den, 2.0 * p.z.imag() / den, (n - 1.0) / den};
}

inline double chordal_distance(const BoundaryPoint& p, const BoundaryPoint& q) {
  const auto a = to_sphere(p);
  const auto b = to_sphere(q);
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                   (a.z - b.z) * (a.z - b.z));
}

/// Oriented geodesic line, given by its endpoints on the sphere at infinity.
struct Geodesic {
  BoundaryPoint from;
  BoundaryPoint to;
};

/// Unordered comparison of two lines by their endpoints.
inline bool same_line(const Geodesic& l, const Geodesic& m, double tol) {
  const bool direct =
      chordal_distance(l.from, m.from) <= tol && chordal_distance(l.to, m.to) <= tol;
  const bool flipped =
      chordal_distance(l.from, m.to) <= tol && chordal_distance(l.to, m.from) <= tol;
  return direct || flipped;
}

class Isometry {
 public:
  Complex a{1.0, 0.0}, b{0.0, 0.0}, c{0.0, 0.0}, d{1.0, 0.0};

  Isometry() = default;

  /// Builds an isometry from any invertible matrix, rescaling to determinant one.
  static Isometry from_matrix(Complex a, Complex b, Complex c, Complex d) {
    const Complex det = a * d - b * c;
    if (!(std::abs(det) > 1e-300) || !std::isfinite(std::abs(det)))
      throw GeometryError("matrix is singular or non-finite");
    const Complex s = std::sqrt(det);
    Isometry g;
    g.a = a / s;
    g.b = b / s;
    g.c = c / s;
    g.d = d / s;
    // ad - bc loses digits in proportion to |ad| + |bc|.
    const double scale = std::abs(g.a * g.d) + std::abs(g.b * g.c);
    if (std::abs(g.det() - 1.0) > 1e-12 * std::max(1.0, scale))
      throw GeometryError("determinant normalization failed");
    return g;
  }

  static Isometry identity() { return {}; }

  static Isometry diagonal(Complex mu) { return from_matrix(mu, 0.0, 0.0, 1.0 / mu); }

  /// Translation-dilation z -> s z + w sending (0,1) to (w, s).
  static Isometry affine(double s, Complex w) {
    const double r = std::sqrt(s);
    return from_matrix(r, w / r, 0.0, 1.0 / r);
  }

  Complex det() const { return a * d - b * c; }
  Complex trace() const { return a + d; }

  Isometry inverse() const {
    Isometry g;
    g.a = d;
    g.b = -b;
    g.c = -c;
    g.d = a;
    return g;
  }

  friend Isometry operator*(const Isometry& x, const Isometry& y) {
    Isometry g;
    g.a = x.a * y.a + x.b * y.c;
    g.b = x.a * y.b + x.b * y.d;
    g.c = x.c * y.a + x.d * y.c;
    g.d = x.c * y.b + x.d * y.d;
    return g;
  }

  /// Largest entrywise distance to `o`, minimized over the sign ambiguity.
  double distance_mod_sign(const Isometry& o) const {
    auto dist = [&](double s) {
      return std::max({std::abs(a - s * o.a), std::abs(b - s * o.b),
                       std::abs(c - s * o.c), std::abs(d - s * o.d)});
    };
    return std::min(dist(1.0), dist(-1.0));
  }

  double max_abs_entry() const {
    return std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
  }
};

inline Isometry power(const Isometry& g, unsigned n) {
  Isometry result = Isometry::identity();
  Isometry base = g;
  while (n > 0) {
    if (n & 1u) result = result * base;
    base = base * base;
    n >>= 1u;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Metric and action

/// Hyperbolic distance; cosh d = 1 + (|z-z'|^2 + (t-t')^2) / (2 t t').
inline double distance(const Point& p, const Point& q) {
  const double num = std::norm(p.z - q.z) + (p.t - q.t) * (p.t - q.t);
  return 2.0 * std::asinh(std::sqrt(num) / (2.0 * std::sqrt(p.t * q.t)));
}

inline Point apply(const Isometry& g, const Point& p) {
  const Complex cz_d = g.c * p.z + g.d;
  const double den = std::norm(cz_d) + std::norm(g.c) * p.t * p.t;
  const Complex num = (g.a * p.z + g.b) * std::conj(cz_d) + g.a * std::conj(g.c) * p.t * p.t;
  const Complex z = num / den;
  const double t = p.t / den;
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || !std::isfinite(t) || !(t > 0.0))
    throw GeometryError("numeric overflow applying isometry");
  return Point{z, t};
}

inline BoundaryPoint apply(const Isometry& g, const BoundaryPoint& p) {
  if (p.infinite) {
    if (g.c == Complex{0.0, 0.0}) return BoundaryPoint::infinity();
    return BoundaryPoint::at(g.a / g.c);
  }
  const Complex den = g.c * p.z + g.d;
  if (den == Complex{0.0, 0.0}) return BoundaryPoint::infinity();
  return BoundaryPoint::at((g.a * p.z + g.b) / den);
}

inline Geodesic apply(const Isometry& g, const Geodesic& l) {
  return {apply(g, l.from), apply(g, l.to)};
}

inline double displacement(const Isometry& g, const Point& p) {
  return distance(p, apply(g, p));
}

// ---------------------------------------------------------------------------
// Classification

enum class IsometryKind { identity, elliptic, parabolic, loxodromic, indeterminate };

inline std::string to_string(IsometryKind k) {
  switch (k) {
    case IsometryKind::identity: return "identity";
    case IsometryKind::elliptic: return "elliptic";
    case IsometryKind::parabolic: return "parabolic";
    case IsometryKind::loxodromic: return "loxodromic";
    case IsometryKind::indeterminate: return "indeterminate";
  }
  return "?";
}

/// Complex length data of a loxodromic element.  The axis is oriented from
/// the repelling to the attracting fixed point.
struct LoxodromicData {
  double length = 0.0;  ///< translation length, > 0
  double angle = 0.0;   ///< rotation angle in (-pi, pi]
  Geodesic axis;
};

struct Classification {
  IsometryKind kind = IsometryKind::indeterminate;
  std::optional<LoxodromicData> lox;
};

inline double wrap_angle(double theta) {
  constexpr double pi = std::numbers::pi;
  double w = std::remainder(theta, 2.0 * pi);  // in [-pi, pi]
  if (w <= -pi) w += 2.0 * pi;
  return w;
}

/// Tolerances used by `classify`.  Within `exact` of trace^2 = 4 a
/// non-identity element is parabolic; between `exact` and `boundary` it is
/// too close to call.
struct ClassifyTolerance {
  double boundary = 1e-9;
  double exact = 1e-12;
};

inline Classification classify(const Isometry& g, ClassifyTolerance tol = {}) {
  Classification out;
  if (g.distance_mod_sign(Isometry::identity()) <= tol.exact) {
    out.kind = IsometryKind::identity;
    return out;
  }
  const Complex tau = g.trace();
  const Complex tau2 = tau * tau;
  const double to_parabolic = std::abs(tau2 - 4.0);
  // Distance from trace^2 to the real segment [0, 4].
  const double re = tau2.real();
  const double clamp = std::clamp(re, 0.0, 4.0);
  const double to_segment = std::hypot(re - clamp, tau2.imag());

  if (to_parabolic <= tol.exact) {
    out.kind = IsometryKind::parabolic;
    return out;
  }
  if (to_parabolic <= tol.boundary) {
    out.kind = IsometryKind::indeterminate;
    return out;
  }
  if (to_segment <= tol.boundary) {
    out.kind = IsometryKind::elliptic;
    return out;
  }

  out.kind = IsometryKind::loxodromic;
  const Complex s = std::sqrt(tau2 - 4.0);
  Complex mu = (tau + s) / 2.0;
  if (std::abs(tau - s) > std::abs(tau + s)) mu = (tau - s) / 2.0;
  LoxodromicData lox;
  lox.length = 2.0 * std::log(std::abs(mu));
  lox.angle = wrap_angle(2.0 * std::arg(mu));

  // Fixed points: c z^2 + (d - a) z - b = 0.
  const double scale = g.max_abs_entry();
  if (std::abs(g.c) <= 1e-15 * scale) {
    const BoundaryPoint finite = BoundaryPoint::at(g.b / (g.d - g.a));
    const BoundaryPoint inf = BoundaryPoint::infinity();
    // g(z) ~ (a/d) z: infinity attracts iff |a| > |d|.
    if (std::abs(g.a) > std::abs(g.d))
      lox.axis = {finite, inf};
    else
      lox.axis = {inf, finite};
  } else {
    const Complex amd = g.a - g.d;
    const Complex q1 = std::abs(amd + s) >= std::abs(amd - s) ? amd + s : amd - s;
    const Complex r1 = q1 / (2.0 * g.c);
    const Complex r2 = -g.b / (g.c * r1);
    // |c r + d| > 1 means the derivative 1/(c r + d)^2 is contracting.
    const bool r1_attracting = std::abs(g.c * r1 + g.d) > std::abs(g.c * r2 + g.d);
    if (r1_attracting)
      lox.axis = {BoundaryPoint::at(r2), BoundaryPoint::at(r1)};
    else
      lox.axis = {BoundaryPoint::at(r1), BoundaryPoint::at(r2)};
  }
  out.lox = lox;
  return out;
}

/// Loxodromic data of `g`, or GeometryError if it is not loxodromic.
inline LoxodromicData loxodromic_data(const Isometry& g, ClassifyTolerance tol = {}) {
  auto c = classify(g, tol);
  if (c.kind != IsometryKind::loxodromic)
    throw GeometryError("expected a loxodromic element, got " + to_string(c.kind));
  return *c.lox;
}

// ---------------------------------------------------------------------------
// Lines

/// An isometry sending the endpoints of `line` to 0 and infinity respectively.
inline Isometry normalizing_isometry(const Geodesic& line) {
  const auto& u = line.from;
  const auto& v = line.to;
  if (u.infinite && v.infinite) throw GeometryError("degenerate geodesic");
  if (v.infinite) return Isometry::from_matrix(1.0, -u.z, 0.0, 1.0);
  if (u.infinite) return Isometry::from_matrix(0.0, 1.0, 1.0, -v.z);
  if (std::abs(u.z - v.z) == 0.0) throw GeometryError("degenerate geodesic");
  return Isometry::from_matrix(1.0, -u.z, 1.0, -v.z);
}

/// Distance from a point to the vertical axis (0, infinity).
inline double distance_to_vertical_axis(const Point& p) {
  return std::asinh(std::abs(p.z) / p.t);
}

inline double dist_point_to_line(const Point& p, const Geodesic& line) {
  return distance_to_vertical_axis(apply(normalizing_isometry(line), p));
}

/// Nearest point of `line` to `p`.
inline Point nearest_point_on_line(const Point& p, const Geodesic& line) {
  const Isometry h = normalizing_isometry(line);
  const Point q = apply(h, p);
  return apply(h.inverse(), Point{Complex{0.0, 0.0}, std::hypot(std::abs(q.z), q.t)});
}

/// The point of `line` at signed arc length `s` from its nearest point to
/// the base point (0,1) of the normalized frame.  Useful for walking a line.
inline Point point_on_line(const Geodesic& line, double s) {
  const Isometry h = normalizing_isometry(line);
  return apply(h.inverse(), Point{Complex{0.0, 0.0}, std::exp(s)});
}

/// Geodesic line through two distinct points, oriented from p to q.
inline Geodesic line_through(const Point& p, const Point& q) {
  const Complex dz = q.z - p.z;
  const double L = std::abs(dz);
  const double scale = std::max({p.t, q.t, std::abs(p.z), std::abs(q.z)});
  if (L <= 1e-15 * scale) {
    if (q.t > p.t) return {BoundaryPoint::at(p.z), BoundaryPoint::infinity()};
    return {BoundaryPoint::infinity(), BoundaryPoint::at(p.z)};
  }
  const Complex e = dz / L;
  const double c = (L * L + q.t * q.t - p.t * p.t) / (2.0 * L);
  const double R = std::hypot(c, p.t);
  // The endpoint beyond q (in direction e) is where the line heads.
  return {BoundaryPoint::at(p.z + e * (c - R)), BoundaryPoint::at(p.z + e * (c + R))};
}

/// Point at distance `s` from p along the geodesic towards q.
inline Point point_along(const Point& p, const Point& q, double s) {
  const Geodesic line = line_through(p, q);
  const Isometry h = normalizing_isometry(line);
  const Point hp = apply(h, p);
  // After normalization the line is vertical and oriented upward.
  return apply(h.inverse(), Point{Complex{0.0, 0.0}, hp.t * std::exp(s)});
}

/// Distance between two lines (zero when they meet or are asymptotic).
inline double line_distance(const Geodesic& l, const Geodesic& m, double tol = 1e-12) {
  const Isometry h = normalizing_isometry(l);
  const Geodesic n = apply(h, m);
  const BoundaryPoint zero = BoundaryPoint::at(0.0);
  const BoundaryPoint inf = BoundaryPoint::infinity();
  for (const auto& e : {n.from, n.to})
    if (chordal_distance(e, zero) <= tol || chordal_distance(e, inf) <= tol) return 0.0;
  // Rescale so the endpoints become w and 1/w; the common perpendicular then
  // meets the vertical axis at (0,1).
  const Complex u = n.from.z, v = n.to.z;
  const Complex root = std::sqrt(u * v);
  const Geodesic scaled{BoundaryPoint::at(u / root), BoundaryPoint::at(v / root)};
  return dist_point_to_line(Point{Complex{0.0, 0.0}, 1.0}, scaled);
}

/// Feet of the common perpendicular (on l, on m).  Only meaningful when the
/// lines are neither asymptotic nor equal.
inline std::pair<Point, Point> common_perpendicular(const Geodesic& l, const Geodesic& m) {
  const Isometry h = normalizing_isometry(l);
  const Geodesic n = apply(h, m);
  if (n.from.infinite || n.to.infinite || std::abs(n.from.z) == 0.0 || std::abs(n.to.z) == 0.0)
    throw GeometryError("lines are asymptotic");
  const Complex root = std::sqrt(n.from.z * n.to.z);
  const Point foot_l{Complex{0.0, 0.0}, std::abs(root)};
  const Point foot_m = nearest_point_on_line(foot_l, n);
  const Isometry hi = h.inverse();
  return {apply(hi, foot_l), apply(hi, foot_m)};
}

// ---------------------------------------------------------------------------
// Tubes

/// Closed-form displacement at distance rho from the axis:
/// sinh^2(d/2) = cosh^2(rho) sinh^2(l/2) + sinh^2(rho) sin^2(theta/2).
inline double tube_displacement(double length, double angle, double rho) {
  const double sl = std::sinh(length / 2.0);
  const double sa = std::sin(angle / 2.0);
  const double ch = std::cosh(rho), sh = std::sinh(rho);
  return 2.0 * std::asinh(std::sqrt(ch * ch * sl * sl + sh * sh * sa * sa));
}

/// Radius of the open tube {P : d(P, gP) < lambda}, or nullopt when
/// lambda <= length (the set is then empty).
inline std::optional<double> cylinder_radius(double length, double angle, double lambda) {
  if (!(lambda > 0.0)) throw InputError("lambda must be positive");
  if (lambda <= length) return std::nullopt;
  const double sl = std::sinh(length / 2.0);
  const double sL = std::sinh(lambda / 2.0);
  const double sa = std::sin(angle / 2.0);
  const double sh2 = (sL * sL - sl * sl) / (sl * sl + sa * sa);
  return std::asinh(std::sqrt(sh2));
}

inline std::optional<double> cylinder_radius(const LoxodromicData& ld, double lambda) {
  return cylinder_radius(ld.length, ld.angle, lambda);
}

// ---------------------------------------------------------------------------
// Exponential chart

/// Exponential map at `base`: the point at distance |v| from base along the
/// geodesic with initial direction v = (vx, vy, vt) in the frame where base
/// is moved to (0,1) by a translation-dilation.
inline Point exp_at(const Point& base, double vx, double vy, double vt) {
  const double s = std::sqrt(vx * vx + vy * vy + vt * vt);
  Point local{Complex{0.0, 0.0}, 1.0};
  if (s > 0.0) {
    const Complex h{vx / s, vy / s};
    const double w = vt / s;
    const double den = std::cosh(s) - w * std::sinh(s);
    local = Point{h * (std::sinh(s) / den), 1.0 / den};
  }
  return Point{base.z + base.t * local.z, base.t * local.t};
}

// ---------------------------------------------------------------------------
// Ball model

/// Map from the Poincare unit ball to upper half-space, sending the origin
/// to (0,1) and the x3 axis to the vertical axis.
inline Point from_poincare_ball(double x1, double x2, double x3) {
  const double n2 = x1 * x1 + x2 * x2 + x3 * x3;
  if (!(n2 < 1.0)) throw GeometryError("point outside the Poincare ball");
  const double den = x1 * x1 + x2 * x2 + (1.0 - x3) * (1.0 - x3);
  return Point{Complex{2.0 * x1 / den, 2.0 * x2 / den}, (1.0 - n2) / den};
}

/// Hyperbolic ball used as a sampling/covering region.
struct Ball {
  Point center;
  double radius = 1.0;
};

/// Point of `region` given by Poincare-ball coordinates scaled to its radius
/// (|x| < 1 fills the ball).
inline Point ball_point(const Ball& region, double x1, double x2, double x3) {
  const double e = std::tanh(region.radius / 2.0);
  const Point local = from_poincare_ball(e * x1, e * x2, e * x3);
  return apply(Isometry::affine(region.center.t, region.center.z), local);
}

}  // namespace kfree
