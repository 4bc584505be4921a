#pragma once

// Intersection testing for hyperbolic cylinders.
//
// The tube of an element g at level lambda is {P : d(P, gP) < lambda}.  A
// finite family of tubes meets iff F(P) = max_i d(P, g_i P) < lambda for
// some P.  Each displacement function is convex along geodesics, so F is
// too and every local minimum of F is global.  Floating point cannot
// certify an open condition at its boundary, so the verdict is three-valued.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kfree/hyperbolic.hpp"

namespace kfree {

enum class Feasibility { feasible, empty, undecided };

inline std::string to_string(Feasibility f) {
  switch (f) {
    case Feasibility::feasible: return "feasible";
    case Feasibility::empty: return "empty";
    case Feasibility::undecided: return "undecided";
  }
  return "?";
}

struct FeasibilityOptions {
  double witness_margin = 1e-6;  ///< feasible needs F(witness) < lambda - witness_margin
  double empty_margin = 1e-6;    ///< empty needs min F >= lambda + empty_margin
  int max_restarts = 60;
};

/// Tube around `core` that is the lambda-sublevel set of `element`'s
/// displacement.  `label` identifies the indexing cyclic subgroup.
struct Cylinder {
  Geodesic core;
  double radius = 0.0;
  double lambda = 0.0;
  std::size_t label = 0;
  Isometry element;
};

struct FeasibilityResult {
  Feasibility verdict = Feasibility::undecided;
  /// Best point found; satisfies the witness margin when verdict is feasible.
  std::optional<Point> witness;
  /// Smallest value of the slack max_i(phi_i) found (F - lambda when no region).
  double min_slack = std::numeric_limits<double>::infinity();
  /// Certified lower bound on the slack, when one is available.
  std::optional<double> lower_bound;
  std::string method;
};

namespace detail {

struct SlackFunction {
  std::span<const Isometry> elements;
  double lambda;
  const Ball* region;

  double operator()(const Point& p) const {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& g : elements) worst = std::max(worst, displacement(g, p) - lambda);
    if (region != nullptr) worst = std::max(worst, distance(p, region->center) - region->radius);
    return worst;
  }
};

struct Probe {
  Point p;
  double value;
};

/// Golden-section search of f(exp_at(base, s*dir)) over s in [-span, span].
template <class F>
Probe line_search(const F& f, const Point& base, const std::array<double, 3>& dir, double span,
                  double base_value) {
  constexpr double inv_phi = 0.6180339887498949;
  auto at = [&](double s) { return exp_at(base, s * dir[0], s * dir[1], s * dir[2]); };
  double lo = -span, hi = span;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = f(at(x1)), f2 = f(at(x2));
  for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(at(x1));
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(at(x2));
    }
  }
  const double s = f1 <= f2 ? x1 : x2;
  const double v = std::min(f1, f2);
  if (v < base_value) return {at(s), v};
  return {base, base_value};
}

/// Nelder-Mead in exponential coordinates around `base`.
template <class F>
Probe nelder_mead(const F& f, const Point& base, double step, int max_iter) {
  using V = std::array<double, 3>;
  auto eval = [&](const V& v) { return f(exp_at(base, v[0], v[1], v[2])); };
  std::array<V, 4> x{V{0, 0, 0}, V{step, 0, 0}, V{0, step, 0}, V{0, 0, step}};
  std::array<double, 4> fx{};
  for (int i = 0; i < 4; ++i) fx[i] = eval(x[i]);
  for (int it = 0; it < max_iter; ++it) {
    std::array<int, 4> idx{0, 1, 2, 3};
    std::sort(idx.begin(), idx.end(), [&](int i, int j) { return fx[i] < fx[j]; });
    std::array<V, 4> xs;
    std::array<double, 4> fs;
    for (int i = 0; i < 4; ++i) {
      xs[i] = x[idx[i]];
      fs[i] = fx[idx[i]];
    }
    x = xs;
    fx = fs;
    double size = 0.0;
    for (int i = 1; i < 4; ++i)
      for (int k = 0; k < 3; ++k) size = std::max(size, std::abs(x[i][k] - x[0][k]));
    if (size < 1e-12) break;
    V centroid{0, 0, 0};
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) centroid[k] += x[i][k] / 3.0;
    auto lerp = [&](double t) {
      V r;
      for (int k = 0; k < 3; ++k) r[k] = centroid[k] + t * (x[3][k] - centroid[k]);
      return r;
    };
    const V xr = lerp(-1.0);
    const double fr = eval(xr);
    if (fr < fx[0]) {
      const V xe = lerp(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        x[3] = xe;
        fx[3] = fe;
      } else {
        x[3] = xr;
        fx[3] = fr;
      }
    } else if (fr < fx[2]) {
      x[3] = xr;
      fx[3] = fr;
    } else {
      const bool outside = fr < fx[3];
      const V xc = lerp(outside ? -0.5 : 0.5);
      const double fc = eval(xc);
      if (fc < std::min(fr, fx[3])) {
        x[3] = xc;
        fx[3] = fc;
      } else {
        for (int i = 1; i < 4; ++i) {
          for (int k = 0; k < 3; ++k) x[i][k] = x[0][k] + 0.5 * (x[i][k] - x[0][k]);
          fx[i] = eval(x[i]);
        }
      }
    }
  }
  int best = static_cast<int>(std::min_element(fx.begin(), fx.end()) - fx.begin());
  return {exp_at(base, x[best][0], x[best][1], x[best][2]), fx[best]};
}

/// Local descent from `start`: alternating geodesic line searches along
/// the frame directions and Nelder-Mead, restarted at the incumbent with a
/// shrinking scale.  Stops early once the value drops below `stop_below`.
template <class F>
Probe descend(const F& f, const Point& start, double stop_below, int restarts) {
  Probe best{start, f(start)};
  double step = 1.0;
  static constexpr std::array<std::array<double, 3>, 7> dirs{{{1, 0, 0},
                                                             {0, 1, 0},
                                                             {0, 0, 1},
                                                             {0.57735026918962573, 0.57735026918962573, 0.57735026918962573},
                                                             {0.57735026918962573, -0.57735026918962573, 0.57735026918962573},
                                                             {-0.57735026918962573, 0.57735026918962573, 0.57735026918962573},
                                                             {0.57735026918962573, 0.57735026918962573, -0.57735026918962573}}};
  int stalls = 0;
  for (int r = 0; r < restarts && best.value >= stop_below; ++r) {
    const double before = best.value;
    for (const auto& dir : dirs) best = line_search(f, best.p, dir, 4.0 * step, best.value);
    best = std::min(best, nelder_mead(f, best.p, step, 400),
                    [](const Probe& a, const Probe& b) { return a.value < b.value; });
    const double gain = before - best.value;
    if (gain < 1e-13) {
      ++stalls;
      step *= 0.3;
      if (stalls >= 4 && step < 1e-9) break;
    } else {
      stalls = 0;
      step = std::min(1.0, std::max(step, 1e-3));
    }
  }
  return best;
}

}  // namespace detail

/// Lower bound on max(d(P, gP), d(P, hP)) over all P from the distance D
/// between the two axes: rho_g + rho_h >= D for every P, and displacement is
/// increasing in the distance to the axis.  Returns the bound in displacement
/// units (same units as lambda).
inline double pair_displacement_lower_bound(const LoxodromicData& g, const LoxodromicData& h) {
  const double D = line_distance(g.axis, h.axis);
  auto dg = [&](double rho) { return tube_displacement(g.length, g.angle, rho); };
  auto dh = [&](double rho) { return tube_displacement(h.length, h.angle, rho); };
  // max(dg(s), dh(D - s)) is minimized where the two branches cross.
  double lo = 0.0, hi = D;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, D); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (dg(mid) < dh(D - mid))
      lo = mid;
    else
      hi = mid;
  }
  return std::min(std::max(dg(lo), dh(D - lo)), std::max(dg(hi), dh(D - hi)));
}

/// Lower bound on max(dist(P, c) - R, d(P, gP) - lambda) when the tube of
/// radius r around g's axis misses the region ball by `gap` > 0.
inline double region_tube_lower_bound(const LoxodromicData& g, double r, double gap, double lambda) {
  auto slack = [&](double s) { return tube_displacement(g.length, g.angle, r + gap - s) - lambda; };
  double lo = 0.0, hi = gap;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid < slack(mid))
      lo = mid;
    else
      hi = mid;
  }
  return std::min(std::max(lo, slack(lo)), std::max(hi, slack(hi)));
}

/// Point where two tubes of radii r_g, r_h around the given axes overlap
/// deepest along the common perpendicular (or walking along asymptotic axes).
inline std::optional<Point> pair_witness_candidate(const Geodesic& g_axis, double r_g,
                                                   const Geodesic& h_axis, double r_h) {
  const double D = line_distance(g_axis, h_axis);
  if (D <= 1e-9) {
    // Meeting or asymptotic: walk along g's axis until h's axis is close.
    Point best = point_on_line(g_axis, 0.0);
    double best_gap = dist_point_to_line(best, h_axis);
    for (double s = -40.0; s <= 40.0; s += 0.25) {
      const Point p = point_on_line(g_axis, s);
      const double gap = dist_point_to_line(p, h_axis);
      if (gap < best_gap) {
        best = p;
        best_gap = gap;
      }
    }
    return best;
  }
  try {
    auto [fg, fh] = common_perpendicular(g_axis, h_axis);
    const double frac = r_g / (r_g + r_h);
    return point_along(fg, fh, frac * D);
  } catch (const GeometryError&) {
    return std::nullopt;
  }
}

/// Decides whether {P : d(P, g_i P) < lambda for all i} (intersected with
/// `region` when given) is nonempty.  Every element must be loxodromic.
inline FeasibilityResult cylinders_feasible(std::span<const Isometry> elements, double lambda,
                                            const FeasibilityOptions& opt = {},
                                            const Ball* region = nullptr) {
  if (!(lambda > 0.0)) throw InputError("lambda must be positive");
  FeasibilityResult out;
  if (elements.empty() && region == nullptr) {
    out.verdict = Feasibility::feasible;
    out.witness = Point{};
    out.min_slack = -std::numeric_limits<double>::infinity();
    out.method = "empty-family";
    return out;
  }

  std::vector<LoxodromicData> lox;
  std::vector<std::optional<double>> radius;
  for (const auto& g : elements) {
    lox.push_back(loxodromic_data(g));
    radius.push_back(cylinder_radius(lox.back(), lambda));
  }

  // Certified emptiness from a single tube or from a separated pair.
  double lower = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lox.size(); ++i) lower = std::max(lower, lox[i].length - lambda);
  for (std::size_t i = 0; i < lox.size(); ++i)
    for (std::size_t j = i + 1; j < lox.size(); ++j)
      lower = std::max(lower, pair_displacement_lower_bound(lox[i], lox[j]) - lambda);
  if (region != nullptr)
    for (std::size_t i = 0; i < lox.size(); ++i)
      if (radius[i]) {
        // Region and tube are disjoint when the centre is far from the axis.
        const double gap = dist_point_to_line(region->center, lox[i].axis) - *radius[i] - region->radius;
        if (gap > 0.0) lower = std::max(lower, region_tube_lower_bound(lox[i], *radius[i], gap, lambda));
      }
  out.lower_bound = lower;
  if (lower >= opt.empty_margin) {
    out.verdict = Feasibility::empty;
    out.min_slack = lower;
    out.method = "pair-bound";
    return out;
  }

  const detail::SlackFunction f{elements, lambda, region};
  const double stop_below = -4.0 * opt.witness_margin - 1e-3;

  // Starting candidates: points on each axis, deepest points of pairwise
  // overlaps, and the region centre.
  std::vector<Point> starts;
  if (region != nullptr) starts.push_back(region->center);
  for (std::size_t i = 0; i < lox.size(); ++i) {
    if (region != nullptr)
      starts.push_back(nearest_point_on_line(region->center, lox[i].axis));
    else
      starts.push_back(point_on_line(lox[i].axis, 0.0));
  }
  for (std::size_t i = 0; i < lox.size(); ++i)
    for (std::size_t j = i + 1; j < lox.size(); ++j) {
      if (!radius[i] || !radius[j]) continue;
      if (auto p = pair_witness_candidate(lox[i].axis, *radius[i], lox[j].axis, *radius[j]))
        starts.push_back(*p);
    }

  std::vector<detail::Probe> probes;
  for (const auto& s : starts) probes.push_back({s, f(s)});
  std::sort(probes.begin(), probes.end(),
            [](const auto& a, const auto& b) { return a.value < b.value; });

  detail::Probe best = probes.front();
  if (best.value >= stop_below) {
    const std::size_t tries = std::min<std::size_t>(probes.size(), 3);
    for (std::size_t i = 0; i < tries && best.value >= stop_below; ++i) {
      auto r = detail::descend(f, probes[i].p, stop_below, opt.max_restarts);
      if (r.value < best.value) best = r;
    }
  }

  out.witness = best.p;
  out.min_slack = best.value;
  out.method = "descent";
  if (best.value < -opt.witness_margin)
    out.verdict = Feasibility::feasible;
  else if (best.value >= opt.empty_margin)
    out.verdict = Feasibility::empty;
  else
    out.verdict = Feasibility::undecided;
  return out;
}

inline FeasibilityResult cylinders_feasible(std::span<const Cylinder> cyls, double lambda,
                                            const FeasibilityOptions& opt = {},
                                            const Ball* region = nullptr) {
  std::vector<Isometry> elements;
  elements.reserve(cyls.size());
  for (const auto& c : cyls) elements.push_back(c.element);
  return cylinders_feasible(std::span<const Isometry>(elements), lambda, opt, region);
}

/// Point minimizing max_i d(P, g_i P), found by the same descent scheme.
inline std::pair<Point, double> minimize_max_displacement(std::span<const Isometry> elements) {
  if (elements.empty()) throw InputError("no elements");
  const detail::SlackFunction f{elements, 0.0, nullptr};
  std::vector<Point> starts;
  for (const auto& g : elements) starts.push_back(point_on_line(loxodromic_data(g).axis, 0.0));
  detail::Probe best{starts.front(), f(starts.front())};
  for (const auto& s : starts) {
    auto r = detail::descend(f, s, -std::numeric_limits<double>::infinity(), 40);
    if (r.value < best.value) best = r;
  }
  return {best.p, best.value};
}

}  // namespace kfree
