#pragma once

// Shared generators for test inputs: random words and labeled complexes,
// interval covers and tube covers with known nerves.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "kfree/complex.hpp"
#include "kfree/feasibility.hpp"
#include "kfree/free_group.hpp"
#include "kfree/hyperbolic.hpp"
#include "kfree/nerve.hpp"

namespace fixtures {

using namespace kfree;

inline FreeWord random_word(std::mt19937_64& rng, int letters, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<int> let(1, letters);
  std::bernoulli_distribution sign(0.5);
  FreeWord w;
  while (w.empty()) {
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) w.push_back(sign(rng) ? let(rng) : -let(rng));
  }
  return w;
}

/// Random complex with at most `max_simplices` simplices on `vertices`
/// vertices, each vertex labeled by a short word in F_letters.
inline LabeledComplex random_labeled_complex(std::mt19937_64& rng, std::size_t vertices,
                                             std::size_t max_simplices, int letters = 2,
                                             std::size_t max_len = 3) {
  std::uniform_int_distribution<VertexId> vx(0, static_cast<VertexId>(vertices - 1));
  std::uniform_int_distribution<int> dim(0, 3);
  std::vector<Simplex> maximal;
  SimplicialComplex cx;
  for (int tries = 0; tries < 40; ++tries) {
    std::vector<VertexId> v;
    const int d = dim(rng);
    for (int i = 0; i <= d; ++i) v.push_back(vx(rng));
    auto next = maximal;
    next.push_back(make_simplex(v));
    auto candidate = SimplicialComplex::closure_of(next);
    if (candidate.size() > max_simplices) continue;
    maximal = std::move(next);
    cx = std::move(candidate);
  }
  LabeledComplex lc;
  lc.complex = std::move(cx);
  for (std::size_t i = 0; i < vertices; ++i) lc.labels.push_back(random_word(rng, letters, max_len));
  return lc;
}

/// Open intervals on a line; a family meets iff max(left) < min(right).
inline IntersectionOracle interval_oracle(std::vector<std::pair<double, double>> intervals) {
  return [intervals = std::move(intervals)](const Simplex& s) {
    double lo = -INFINITY, hi = INFINITY;
    for (VertexId v : s) {
      lo = std::max(lo, intervals.at(v).first);
      hi = std::min(hi, intervals.at(v).second);
    }
    return lo < hi ? Feasibility::feasible : Feasibility::empty;
  };
}

/// Open arcs of a circle given in degrees (right end may exceed 360); a
/// family meets iff some half-degree grid point lies in all of them, which
/// is exact for integer endpoints.
inline IntersectionOracle arc_oracle(std::vector<std::pair<double, double>> arcs) {
  return [arcs = std::move(arcs)](const Simplex& s) {
    for (double x = 0.25; x < 360.0; x += 0.5) {
      bool all = true;
      for (VertexId v : s) {
        const auto [lo, hi] = arcs.at(v);
        const double y = x < lo ? x + 360.0 : x;
        all = all && y > lo && y < hi;
      }
      if (all) return Feasibility::feasible;
    }
    return Feasibility::empty;
  };
}

/// Loxodromic of complex length (length, angle) along `axis`.
inline Isometry along(const Geodesic& axis, double length, double angle) {
  const Isometry n = normalizing_isometry(axis);
  return n.inverse() * Isometry::diagonal(std::polar(std::exp(length / 2.0), angle / 2.0)) * n;
}

/// Tubes around lines perpendicular to the vertical axis at heights e^{s_i},
/// turned by random angles.  Two such lines are at distance |s_i - s_j|
/// (the vertical axis is their common perpendicular), so with spacing
/// 1.3 r consecutive tubes meet and others do not: the nerve is a path and
/// the union is contractible.  Heights are centred on 1 to keep the matrix
/// entries moderate.
inline std::vector<Isometry> chain_cover(std::mt19937_64& rng, std::size_t count, double lambda) {
  std::uniform_real_distribution<double> len(0.4, 0.8), turn(0.0, 2.0 * std::numbers::pi);
  const double length = len(rng);
  const double r = *cylinder_radius(length, 0.0, lambda);
  std::vector<Isometry> out;
  for (std::size_t i = 0; i < count; ++i) {
    const Complex w = std::polar(std::exp(1.3 * r * (static_cast<double>(i) - 0.5 * static_cast<double>(count - 1))), turn(rng));
    out.push_back(along({BoundaryPoint::at(-w), BoundaryPoint::at(w)}, length, 0.0));
  }
  return out;
}

/// Tubes whose axes all pass through `center`: every subfamily meets.
inline std::vector<Isometry> star_cover(std::mt19937_64& rng, std::size_t count, const Point& center) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> len(0.2, 0.8), ang(-1.0, 1.0);
  std::vector<Isometry> out;
  for (std::size_t i = 0; i < count; ++i) {
    const Point p = exp_at(center, n(rng), n(rng), n(rng));
    out.push_back(along(line_through(center, p), len(rng), ang(rng)));
  }
  return out;
}

}  // namespace fixtures
