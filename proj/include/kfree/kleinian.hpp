#pragma once

// Finite truncations of a matrix group given by generators: the word ball,
// maximal cyclic subgroups (one label per axis), short sets and Schottky
// constructions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "kfree/errors.hpp"
#include "kfree/feasibility.hpp"
#include "kfree/free_group.hpp"
#include "kfree/hyperbolic.hpp"

namespace kfree {

struct NamedGenerator {
  std::string name;
  Isometry matrix;
};

struct GroupSpec {
  std::vector<NamedGenerator> generators;
  int ball_radius = 1;
  double matrix_tolerance = 1e-9;
  /// Chordal distance on the Riemann sphere below which two axis endpoints
  /// are identified.
  double axis_tolerance = 1e-7;
  ClassifyTolerance classify_tolerance{};
};

struct Element {
  FreeWord word;
  Isometry matrix;
  LoxodromicData lox;
  std::size_t axis_class = 0;
};

/// Maximal cyclic subgroup of the truncation, identified by its axis.
struct CyclicLabel {
  std::size_t id = 0;  ///< axis class index in the table
  FreeWord primitive;
  Isometry matrix;
  LoxodromicData lox;
  double length() const { return lox.length; }
};

class ElementTable {
 public:
  const std::vector<Element>& elements() const { return elements_; }
  const std::vector<CyclicLabel>& labels() const { return labels_; }
  const CyclicLabel& label(std::size_t id) const { return labels_.at(id); }
  int ball_radius() const { return ball_radius_; }
  std::size_t generator_count() const { return generator_count_; }
  double axis_tolerance() const { return axis_tolerance_; }

  /// Word pairs whose matrices coincided up to sign (a relation, or a
  /// tolerance too coarse for this group).
  const std::vector<std::pair<FreeWord, FreeWord>>& collisions() const { return collisions_; }

  std::optional<std::size_t> find(const FreeWord& w) const {
    auto it = by_word_.find(w);
    if (it == by_word_.end()) return std::nullopt;
    return it->second;
  }

  const Element& at(const FreeWord& w) const {
    auto i = find(w);
    if (!i) throw TruncationError("word " + w.str() + " is out of truncation");
    return elements_[*i];
  }

  /// Matrix of an arbitrary word, evaluated from the generators.
  Isometry evaluate(const FreeWord& w) const {
    Isometry m = Isometry::identity();
    for (Letter x : w.letters()) {
      const auto& g = gens_.at(static_cast<std::size_t>(std::abs(x) - 1));
      m = m * (x > 0 ? g : g.inverse());
    }
    return m;
  }

  std::optional<std::size_t> find_axis(const Geodesic& axis) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
      if (same_line(labels_[i].lox.axis, axis, axis_tolerance_)) return i;
    return std::nullopt;
  }

  /// Number of nontrivial entries.
  std::size_t size() const { return elements_.size(); }

 private:
  friend ElementTable enumerate_ball(const GroupSpec& spec);

  std::vector<Isometry> gens_;
  std::vector<Element> elements_;
  std::map<FreeWord, std::size_t> by_word_;
  std::vector<CyclicLabel> labels_;
  std::vector<std::pair<FreeWord, FreeWord>> collisions_;
  int ball_radius_ = 0;
  std::size_t generator_count_ = 0;
  double axis_tolerance_ = 1e-7;
};

namespace detail {

inline bool matrices_close(const Isometry& x, const Isometry& y, double tol) {
  const double scale = std::max({1.0, x.max_abs_entry(), y.max_abs_entry()});
  return x.distance_mod_sign(y) <= tol * scale;
}

/// Label preference inside an axis class: smallest translation length, then
/// shortest word, then shortlex.
inline bool better_primitive(const Element& a, const Element& b) {
  const double tol = 1e-9 * std::max(1.0, b.lox.length);
  if (a.lox.length < b.lox.length - tol) return true;
  if (a.lox.length > b.lox.length + tol) return false;
  if (a.word.length() != b.word.length()) return a.word.length() < b.word.length();
  return a.word < b.word;
}

}  // namespace detail

/// All nontrivial reduced words of length <= R with their matrices.
/// Throws GeometryError when some nontrivial element is not loxodromic.
inline ElementTable enumerate_ball(const GroupSpec& spec) {
  if (spec.ball_radius < 1) throw InputError("ball radius must be at least 1");
  if (spec.generators.empty()) throw InputError("no generators");
  if (spec.generators.size() > 26) throw InputError("at most 26 generators");
  ElementTable table;
  table.ball_radius_ = spec.ball_radius;
  table.generator_count_ = spec.generators.size();
  table.axis_tolerance_ = spec.axis_tolerance;
  for (const auto& g : spec.generators) table.gens_.push_back(g.matrix);

  const int n = static_cast<int>(spec.generators.size());
  std::vector<std::size_t> frontier;

  auto add = [&](const FreeWord& w, const Isometry& m) -> std::optional<std::size_t> {
    for (const auto& e : table.elements_)
      if (detail::matrices_close(e.matrix, m, spec.matrix_tolerance)) {
        table.collisions_.emplace_back(e.word, w);
        table.by_word_.emplace(w, table.by_word_.at(e.word));
        return std::nullopt;
      }
    const auto c = classify(m, spec.classify_tolerance);
    if (c.kind != IsometryKind::loxodromic)
      throw GeometryError("not purely loxodromic at this tolerance: " + w.str() + " is " +
                          to_string(c.kind));
    table.elements_.push_back({w, m, *c.lox, 0});
    table.by_word_.emplace(w, table.elements_.size() - 1);
    return table.elements_.size() - 1;
  };

  for (int i = 0; i < n; ++i)
    for (Letter x : {i + 1, -(i + 1)}) {
      const FreeWord w({x});
      const Isometry& g = spec.generators[static_cast<std::size_t>(i)].matrix;
      if (auto id = add(w, x > 0 ? g : g.inverse())) frontier.push_back(*id);
    }

  for (int len = 2; len <= spec.ball_radius; ++len) {
    std::vector<std::size_t> next;
    for (std::size_t id : frontier) {
      const FreeWord base = table.elements_[id].word;
      const Isometry mb = table.elements_[id].matrix;
      for (int i = 0; i < n; ++i)
        for (Letter x : {i + 1, -(i + 1)}) {
          if (base.letters().back() == -x) continue;
          FreeWord w = base;
          w.push_back(x);
          const Isometry& g = table.gens_[static_cast<std::size_t>(i)];
          if (auto nid = add(w, mb * (x > 0 ? g : g.inverse()))) next.push_back(*nid);
        }
    }
    frontier = std::move(next);
  }

  // Axis classes and their labels.
  std::vector<std::vector<std::size_t>> classes;
  std::vector<Geodesic> class_axis;
  for (std::size_t i = 0; i < table.elements_.size(); ++i) {
    auto& e = table.elements_[i];
    std::size_t cls = classes.size();
    for (std::size_t k = 0; k < classes.size(); ++k)
      if (same_line(class_axis[k], e.lox.axis, spec.axis_tolerance)) {
        cls = k;
        break;
      }
    if (cls == classes.size()) {
      classes.emplace_back();
      class_axis.push_back(e.lox.axis);
    }
    classes[cls].push_back(i);
    e.axis_class = cls;
  }
  for (std::size_t k = 0; k < classes.size(); ++k) {
    std::size_t best = classes[k].front();
    for (std::size_t i : classes[k])
      if (detail::better_primitive(table.elements_[i], table.elements_[best])) best = i;
    const Element& p = table.elements_[best];
    for (std::size_t i : classes[k]) {
      const double ratio = table.elements_[i].lox.length / p.lox.length;
      if (std::abs(ratio - std::round(ratio)) > 1e-6 || std::round(ratio) < 1.0)
        throw GeometryError("incommensurable translation lengths on a shared axis: " +
                            p.word.str() + " and " + table.elements_[i].word.str());
    }
    table.labels_.push_back({k, p.word, p.matrix, p.lox});
  }
  return table;
}

/// Labels whose primitive translation length is below lambda.
inline std::vector<CyclicLabel> maximal_cyclics(const ElementTable& table, double lambda) {
  std::vector<CyclicLabel> out;
  for (const auto& l : table.labels())
    if (l.length() < lambda) out.push_back(l);
  return out;
}

/// Z_lambda(C) as the tube of the power of the primitive with the widest
/// sublevel set.  nullopt when the primitive is already too long.
inline std::optional<Cylinder> label_cylinder(const CyclicLabel& c, double lambda) {
  std::optional<Cylinder> best;
  for (unsigned n = 1; n * c.lox.length < lambda; ++n) {
    const double angle = wrap_angle(n * c.lox.angle);
    auto r = cylinder_radius(n * c.lox.length, angle, lambda);
    if (!r) continue;
    if (!best || *r > best->radius)
      best = Cylinder{c.lox.axis, *r, lambda, c.id, power(c.matrix, n)};
  }
  return best;
}

struct ShortSetOptions {
  double marginal = 1e-6;
};

struct ShortSet {
  std::vector<std::size_t> labels;    ///< ids, ascending
  std::vector<std::size_t> marginal;  ///< ids whose displacement is within the margin of lambda
  bool certified = true;
};

/// S_lambda(P): labels C having some nontrivial power displacing p by less
/// than lambda.
inline ShortSet short_set(const ElementTable& table, double lambda, const Point& p,
                          const ShortSetOptions& opt = {}) {
  ShortSet out;
  for (const auto& c : table.labels()) {
    if (c.length() >= lambda + opt.marginal) continue;
    double best = std::numeric_limits<double>::infinity();
    Isometry g = c.matrix;
    // d(p, g^n p) >= n * length, so the scan can stop there.
    for (unsigned n = 1; n * c.length() < lambda + opt.marginal; ++n) {
      best = std::min(best, displacement(g, p));
      g = g * c.matrix;
    }
    if (std::abs(best - lambda) <= opt.marginal) {
      out.marginal.push_back(c.id);
      out.certified = false;
    }
    if (best < lambda) out.labels.push_back(c.id);
  }
  return out;
}

/// The same set via cylinder membership: distance to the axis against the
/// tube radius.
inline ShortSet short_set_by_membership(const ElementTable& table, double lambda, const Point& p,
                                        const ShortSetOptions& opt = {}) {
  ShortSet out;
  for (const auto& c : table.labels()) {
    auto cyl = label_cylinder(c, lambda);
    if (!cyl) continue;
    const double d = dist_point_to_line(p, cyl->core);
    const double disp = displacement(cyl->element, p);
    if (std::abs(disp - lambda) <= opt.marginal) {
      out.marginal.push_back(c.id);
      out.certified = false;
    }
    if (d < cyl->radius) out.labels.push_back(c.id);
  }
  return out;
}

/// Label of g C g^-1.  Throws TruncationError when its axis class or
/// primitive is not represented in the table.
inline const CyclicLabel& conjugate_label(const ElementTable& table, const Isometry& g,
                                          const CyclicLabel& c) {
  const Geodesic image = apply(g, c.lox.axis);
  auto id = table.find_axis(image);
  if (!id) throw TruncationError("out of truncation: image of " + c.primitive.str());
  const CyclicLabel& out = table.label(*id);
  if (std::abs(out.length() - c.length()) > 1e-9 * std::max(1.0, c.length()))
    throw TruncationError("out of truncation: primitive of the image of " + c.primitive.str() +
                          " is not in the ball");
  return out;
}

struct LogBoundReport {
  std::vector<double> displacements;
  double sum = 0.0;
  double max_displacement = 0.0;
  double threshold = 0.0;  ///< log(2k - 1)
  bool sum_ok = false;
  bool max_ok = false;
};

inline LogBoundReport check_log_bound(std::span<const Isometry> gens, const Point& p,
                                      double slack = 1e-9) {
  if (gens.empty()) throw InputError("no generators");
  LogBoundReport r;
  r.threshold = std::log(2.0 * static_cast<double>(gens.size()) - 1.0);
  for (const auto& g : gens) {
    const double d = displacement(g, p);
    r.displacements.push_back(d);
    r.sum += 1.0 / (1.0 + std::exp(d));
    r.max_displacement = std::max(r.max_displacement, d);
  }
  r.sum_ok = r.sum <= 0.5 + slack;
  r.max_ok = r.max_displacement >= r.threshold - slack;
  return r;
}

// ---------------------------------------------------------------------------
// Schottky groups

struct Disk {
  Complex center;
  double radius = 0.0;
};

struct PingPongReport {
  bool ok = false;
  double min_gap = 0.0;  ///< smallest Euclidean gap between isometric disks
  std::vector<Disk> disks;
  std::string reason;
};

/// Ping-pong check on isometric circles.  g maps the outside of the disk
/// centred at -d/c onto the inside of the disk centred at a/c, both of
/// radius 1/|c|; pairwise disjoint closed disks certify that the generators
/// freely generate a discrete, purely loxodromic group.
inline PingPongReport verify_ping_pong(std::span<const Isometry> gens, double margin = 0.0) {
  PingPongReport rep;
  rep.min_gap = std::numeric_limits<double>::infinity();
  for (const auto& g : gens) {
    if (std::abs(g.c) < 1e-12) {
      rep.reason = "generator fixes infinity";
      rep.min_gap = -std::numeric_limits<double>::infinity();
      return rep;
    }
    const double r = 1.0 / std::abs(g.c);
    rep.disks.push_back({-g.d / g.c, r});
    rep.disks.push_back({g.a / g.c, r});
  }
  for (std::size_t i = 0; i < rep.disks.size(); ++i)
    for (std::size_t j = i + 1; j < rep.disks.size(); ++j) {
      const double gap = std::abs(rep.disks[i].center - rep.disks[j].center) -
                         rep.disks[i].radius - rep.disks[j].radius;
      rep.min_gap = std::min(rep.min_gap, gap);
    }
  rep.ok = rep.min_gap > margin;
  if (!rep.ok) rep.reason = "isometric disks overlap or are too close";
  return rep;
}

/// Generator with isometric disks centred at p (outside is mapped in) and q
/// (the image), of common radius |q - p| / kappa, and trace kappa e^{i delta}.
inline Isometry schottky_generator(Complex p, Complex q, double kappa, double delta) {
  if (!(kappa > 2.0)) throw InputError("kappa must exceed 2");
  const Complex u = (q - p) / std::polar(kappa, delta);
  return Isometry::from_matrix(q / u, (-u * u - q * p) / u, 1.0 / u, -p / u);
}

struct SchottkyOptions {
  double kappa_min = 2.05;
  double kappa_max = 3.0;
  double delta_max = 0.6;  ///< |arg trace| bound
  double box = 3.0;        ///< centres drawn from [-box, box]^2
  double margin = 0.05;    ///< required ping-pong gap
  int max_tries = 100000;
};

/// Random ping-pong-certified Schottky generators (rejection sampling).
template <class Rng>
std::vector<Isometry> random_schottky(std::size_t rank, Rng& rng, const SchottkyOptions& opt = {}) {
  std::uniform_real_distribution<double> pos(-opt.box, opt.box);
  std::uniform_real_distribution<double> kap(opt.kappa_min, opt.kappa_max);
  std::uniform_real_distribution<double> ang(-opt.delta_max, opt.delta_max);
  for (int attempt = 0; attempt < opt.max_tries; ++attempt) {
    std::vector<Isometry> gens;
    for (std::size_t i = 0; i < rank; ++i) {
      const Complex p{pos(rng), pos(rng)};
      const Complex q{pos(rng), pos(rng)};
      if (std::abs(q - p) < 1e-3) break;
      const double k = kap(rng);
      const double d = ang(rng);
      gens.push_back(schottky_generator(p, q, k, d));
    }
    if (gens.size() != rank) continue;
    if (verify_ping_pong(gens, opt.margin).ok) return gens;
  }
  throw InputError("could not sample a Schottky group with these options");
}

}  // namespace kfree
