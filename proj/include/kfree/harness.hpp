#pragma once

// Suites run on a scenario.  Each suite returns a certificate: ordered JSON
// with the scenario digest, the truncation data and a list of checks, every
// check carrying its tolerance and the word-ball radius.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kfree/complex.hpp"
#include "kfree/component_tree.hpp"
#include "kfree/feasibility.hpp"
#include "kfree/free_group.hpp"
#include "kfree/hyperbolic.hpp"
#include "kfree/kleinian.hpp"
#include "kfree/nerve.hpp"
#include "kfree/rank_lemma.hpp"
#include "kfree/scenario.hpp"

namespace kfree {

using Certificate = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Sampling

inline double radical_inverse(std::uint64_t i, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

/// Halton points (bases 2, 3, 5) with a seeded Cranley-Patterson shift,
/// kept inside the unit ball and mapped into `region`.  The first n points
/// do not depend on how many are requested.
inline std::vector<Point> sample_region(const Ball& region, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::array<double, 3> shift{};
  for (auto& s : shift) s = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  std::vector<Point> out;
  out.reserve(count);
  for (std::uint64_t i = 1; out.size() < count; ++i) {
    std::array<double, 3> x{};
    const unsigned bases[3] = {2, 3, 5};
    for (int d = 0; d < 3; ++d) {
      double u = radical_inverse(i, bases[d]) + shift[static_cast<std::size_t>(d)];
      u -= std::floor(u);
      x[static_cast<std::size_t>(d)] = 2.0 * u - 1.0;
    }
    if (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] >= 1.0) continue;
    out.push_back(ball_point(region, x[0], x[1], x[2]));
  }
  return out;
}

inline nlohmann::ordered_json to_json(const Point& p) {
  return nlohmann::ordered_json::array({p.z.real(), p.z.imag(), p.t});
}

// ---------------------------------------------------------------------------
// Shared context

struct HarnessContext {
  Scenario scenario;
  ElementTable table;
  double lambda = 0.0;
  FeasibilityOptions feas;
  std::string digest;
  // Free-group ranks equal ranks in the group only when ping-pong holds;
  // otherwise they bound them from above.
  bool rank_exact = false;

  explicit HarnessContext(Scenario s)
      : scenario(std::move(s)), table(enumerate_ball(scenario.group_spec())) {
    scenario.validate();
    lambda = scenario.effective_lambda();
    feas.witness_margin = scenario.tolerances.witness_margin;
    feas.empty_margin = scenario.tolerances.empty_margin;
    digest = scenario_digest(scenario);
    rank_exact = verify_ping_pong(scenario.generator_matrices()).ok;
  }
};

inline Certificate certificate_header(const HarnessContext& ctx, const std::string& suite) {
  const auto& s = ctx.scenario;
  Certificate c;
  c["suite"] = suite;
  c["scenario"] = {{"name", s.name}, {"digest", ctx.digest}};
  c["parameters"] = {{"k", s.k},
                     {"lambda", ctx.lambda},
                     {"log_2k_minus_1", s.log_threshold()},
                     {"sample_count", s.sample_count},
                     {"seed", s.seed},
                     {"witness_margin", s.tolerances.witness_margin},
                     {"empty_margin", s.tolerances.empty_margin},
                     {"marginal", s.tolerances.marginal}};
  c["truncation"] = {{"ball_radius", ctx.table.ball_radius()},
                     {"elements", ctx.table.size()},
                     {"labels", ctx.table.labels().size()},
                     {"collisions", ctx.table.collisions().size()}};
  c["rank_mode"] = ctx.rank_exact ? "exact (ping-pong certified)" : "rank upper bound only";
  c["checks"] = nlohmann::ordered_json::array();
  return c;
}

/// verdict is "pass", "fail" or "observation".
inline void add_check(Certificate& c, const std::string& name, const std::string& verdict,
                      double tolerance, int ball_radius, nlohmann::ordered_json detail = {}) {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["verdict"] = verdict;
  j["tolerance"] = tolerance;
  j["truncation_radius"] = ball_radius;
  if (!detail.is_null()) j["detail"] = std::move(detail);
  c["checks"].push_back(std::move(j));
}

inline void add_check(Certificate& c, const std::string& name, bool passed, double tolerance,
                      int ball_radius, nlohmann::ordered_json detail = {}) {
  add_check(c, name, std::string(passed ? "pass" : "fail"), tolerance, ball_radius,
            std::move(detail));
}

/// True when no check in the certificate failed.
inline bool certificate_passed(const Certificate& c) {
  for (const auto& ch : c.at("checks"))
    if (ch.at("verdict") == "fail") return false;
  return true;
}

inline std::vector<FreeWord> primitives(const ElementTable& table, const std::vector<std::size_t>& ids) {
  std::vector<FreeWord> out;
  for (auto id : ids) out.push_back(table.label(id).primitive);
  return out;
}

// ---------------------------------------------------------------------------
// Labeled nerve of the cylinders that meet the sample region

struct LabeledNerve {
  LabeledComplex lc;
  std::vector<Simplex> undecided;
  std::vector<std::size_t> vertex_of_label;  ///< label id -> vertex or npos
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
};

/// Vertices are the labels of length < lambda whose tube meets the sample
/// region; simplices record global intersections of the tubes.
inline LabeledNerve build_labeled_nerve(const HarnessContext& ctx, bool abort_on_undecided) {
  LabeledNerve out;
  const auto& region = ctx.scenario.sample_region;
  std::vector<Isometry> elements;
  out.vertex_of_label.assign(ctx.table.labels().size(), LabeledNerve::npos);
  for (const auto& c : maximal_cyclics(ctx.table, ctx.lambda)) {
    auto cyl = label_cylinder(c, ctx.lambda);
    if (!cyl) continue;
    if (dist_point_to_line(region.center, cyl->core) >= region.radius + cyl->radius) continue;
    out.vertex_of_label[c.id] = elements.size();
    elements.push_back(cyl->element);
    out.lc.labels.push_back(c.primitive);
    out.lc.label_ids.push_back(c.id);
  }
  NerveOptions nopt;
  nopt.max_dimension = ctx.scenario.max_nerve_dimension;
  nopt.abort_on_undecided = abort_on_undecided;
  auto res = nerve(elements.size(), cylinder_oracle(elements, ctx.lambda, ctx.feas), nopt);
  out.lc.complex = std::move(res.complex);
  out.undecided = std::move(res.undecided);
  return out;
}

// ---------------------------------------------------------------------------
// Suites

struct MainSearchSummary {
  std::size_t min_ir = 0;
  bool success = false;
  bool certified = false;
  Point witness;
};

inline Certificate run_main_search(const HarnessContext& ctx, MainSearchSummary* summary = nullptr) {
  const auto& s = ctx.scenario;
  Certificate cert = certificate_header(ctx, "main-search");
  const int R = ctx.table.ball_radius();

  // Structural candidates first, then the low-discrepancy samples.
  std::vector<std::pair<Point, std::string>> candidates;
  for (const auto& c : maximal_cyclics(ctx.table, ctx.lambda))
    candidates.push_back({nearest_point_on_line(s.sample_region.center, c.lox.axis), "axis:" + c.primitive.str()});
  {
    const auto gens = s.generator_matrices();
    candidates.push_back({minimize_max_displacement(std::span<const Isometry>(gens)).first, "minimax"});
  }
  for (const auto& p : sample_region(s.sample_region, s.sample_count, s.seed))
    candidates.push_back({p, "sample"});

  InternalRankCache cache(s.ir_subset_cap);
  std::map<std::size_t, std::size_t> histogram, core_histogram;
  std::optional<std::size_t> best;
  std::size_t best_ir = std::numeric_limits<std::size_t>::max();
  bool best_certified = false;
  std::size_t marginal_points = 0;
  std::vector<std::size_t> irs;
  std::vector<ShortSet> sets;
  const auto gens = s.generator_matrices();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& p = candidates[i].first;
    ShortSet ss = short_set(ctx.table, ctx.lambda, p, {s.tolerances.marginal});
    const auto words = primitives(ctx.table, ss.labels);
    const std::size_t ir = cache(std::span<const FreeWord>(words));
    ++histogram[ir];
    // Points within distance 1 of a generator axis: the part of space where
    // the search is not trivially won.
    bool near_core = false;
    for (const auto& g : gens) near_core |= dist_point_to_line(p, loxodromic_data(g).axis) < 1.0;
    if (near_core) ++core_histogram[ir];
    if (!ss.certified) ++marginal_points;
    const bool better = ir < best_ir || (ir == best_ir && ss.certified && !best_certified);
    if (better) {
      best = i;
      best_ir = ir;
      best_certified = ss.certified;
    }
    irs.push_back(ir);
    sets.push_back(std::move(ss));
  }

  const std::size_t target = static_cast<std::size_t>(s.k - 3);
  const bool success = best_ir <= target;
  auto hist_json = [](const std::map<std::size_t, std::size_t>& h) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [ir, n] : h) j[std::to_string(ir)] = n;
    return j;
  };
  const auto& bp = candidates[*best];
  nlohmann::ordered_json witness = {{"point", to_json(bp.first)},
                                    {"source", bp.second},
                                    {"internal_rank", best_ir},
                                    {"short_set", nlohmann::ordered_json::array()},
                                    {"certified", best_certified}};
  for (auto id : sets[*best].labels) witness["short_set"].push_back(ctx.table.label(id).primitive.str());
  if (!best_certified) {
    witness["marginal"] = nlohmann::ordered_json::array();
    for (auto id : sets[*best].marginal) witness["marginal"].push_back(ctx.table.label(id).primitive.str());
  }
  add_check(cert, "min IR(S_lambda(P)) <= k-3", success && best_certified, s.tolerances.marginal, R,
            {{"min_internal_rank", best_ir}, {"k_minus_3", target}, {"certified", best_certified}});
  cert["witness"] = witness;
  cert["statistics"] = {{"points", candidates.size()},
                        {"marginal_points", marginal_points},
                        {"ir_histogram", hist_json(histogram)},
                        {"near_core_ir_histogram", hist_json(core_histogram)}};
  cert["note"] = "short sets are computed within the word ball; labels outside it are not seen";
  if (summary) *summary = {best_ir, success, best_certified, bp.first};
  return cert;
}

inline Certificate run_lemma51_suite(const HarnessContext& ctx) {
  const auto& s = ctx.scenario;
  Certificate cert = certificate_header(ctx, "lemma51");
  const int R = ctx.table.ball_radius();
  const auto ln = build_labeled_nerve(ctx, false);
  const std::size_t bound = static_cast<std::size_t>(s.k - 1);
  std::size_t worst = 0;
  auto violations = nlohmann::ordered_json::array();
  for (const auto& sigma : ln.lc.complex.simplices()) {
    const std::size_t r = rank_theta(ln.lc, sigma);
    worst = std::max(worst, r);
    if (r > bound) {
      nlohmann::ordered_json v = {{"simplex", sigma}, {"rank", r}, {"labels", nlohmann::ordered_json::array()}};
      for (auto x : sigma) v["labels"].push_back(ln.lc.labels[x].str());
      violations.push_back(v);
    }
  }
  add_check(cert, "rank Theta(sigma) <= k-1 on every nerve simplex", violations.empty(),
            s.tolerances.empty_margin, R,
            {{"simplices", ln.lc.complex.size()},
             {"max_rank", worst},
             {"bound", bound},
             {"violations", violations}});
  auto undecided = nlohmann::ordered_json::array();
  for (const auto& u : ln.undecided) undecided.push_back(u);
  add_check(cert, "no undecided intersections", ln.undecided.empty(), s.tolerances.witness_margin, R,
            {{"undecided", undecided}});
  cert["nerve"] = {{"vertices", ln.lc.labels.size()},
                   {"simplices", ln.lc.complex.size()},
                   {"dimension", ln.lc.complex.dimension()}};
  if (!violations.empty())
    cert["note"] = "a violation on ping-pong-certified input contradicts freeness or discreteness";
  return cert;
}

/// Strata of the labeled nerve together with the IR of every simplex.
struct StrataContext {
  LabeledNerve nerve;
  std::vector<std::size_t> irs;
  Strata strata;
};

inline StrataContext build_strata(const HarnessContext& ctx) {
  StrataContext sc;
  sc.nerve = build_labeled_nerve(ctx, false);
  InternalRankCache cache(ctx.scenario.ir_subset_cap);
  sc.irs = internal_ranks(sc.nerve.lc, cache);
  sc.strata = strata_components(sc.nerve.lc, sc.irs, static_cast<std::size_t>(ctx.scenario.k));
  return sc;
}

inline Certificate run_rank_lemma_suite(const HarnessContext& ctx) {
  const auto& s = ctx.scenario;
  Certificate cert = certificate_header(ctx, "rank-lemma");
  const int R = ctx.table.ball_radius();
  const auto sc = build_strata(ctx);
  auto stratum_violations = nlohmann::ordered_json::array();
  for (const auto& v : sc.strata.violations) stratum_violations.push_back(v);
  add_check(cert, "every simplex outside K'(k-3) has IR in {k-2, k-1}",
            sc.strata.violations.empty(), 0.0, R, {{"violations", stratum_violations}});

  bool all_pass = true, all_agree = true;
  auto runs = nlohmann::ordered_json::array();
  for (std::size_t slot = 0; slot < 2; ++slot)
    for (std::size_t c = 0; c < sc.strata.components[slot].size(); ++c) {
      const auto& comp = sc.strata.components[slot][c];
      const std::size_t r = sc.strata.rank_of(slot);
      const auto a = rank_lemma_run(sc.nerve.lc, comp, r, {Ordering::bfs, 0});
      const auto b = rank_lemma_run(sc.nerve.lc, comp, r, {Ordering::random, s.seed + c});
      all_pass = all_pass && a.passed && b.passed;
      all_agree = all_agree && a.final_rank == b.final_rank;
      nlohmann::ordered_json ranks = nlohmann::ordered_json::array();
      for (const auto& st : a.trace) ranks.push_back(st.rank);
      runs.push_back({{"stratum", r},
                      {"component", c},
                      {"simplices", comp.size()},
                      {"passed", a.passed && b.passed},
                      {"final_rank", a.final_rank},
                      {"final_rank_random_order", b.final_rank},
                      {"bfs_ranks", ranks}});
    }
  add_check(cert, "rank Theta(V_i) <= r at every step", all_pass, 0.0, R, {{"components", runs.size()}});
  add_check(cert, "orderings agree on final rank", all_agree, 0.0, R);
  cert["runs"] = runs;
  return cert;
}

inline Certificate run_displacement_suite(const HarnessContext& ctx) {
  const auto& s = ctx.scenario;
  Certificate cert = certificate_header(ctx, "displacement");
  const int R = ctx.table.ball_radius();
  const auto gens = s.generator_matrices();
  const auto pp = verify_ping_pong(gens);
  cert["header"] = {{"generators", gens.size()},
                    {"threshold_log_2n_minus_1", std::log(2.0 * gens.size() - 1.0)},
                    {"log_2k_minus_1", s.log_threshold()},
                    {"lambda", ctx.lambda}};
  add_check(cert, "ping-pong certificate", pp.ok, 0.0, R, {{"min_gap", pp.min_gap}});
  const double slack = 1e-9;
  double worst_sum = -std::numeric_limits<double>::infinity();
  double worst_max_margin = std::numeric_limits<double>::infinity();
  std::size_t sum_fail = 0, max_fail = 0;
  std::optional<Point> worst_point;
  const auto points = sample_region(s.sample_region, s.sample_count, s.seed);
  for (const auto& p : points) {
    const auto rep = check_log_bound(std::span<const Isometry>(gens), p, slack);
    if (rep.sum > worst_sum) {
      worst_sum = rep.sum;
      worst_point = p;
    }
    worst_max_margin = std::min(worst_max_margin, rep.max_displacement - rep.threshold);
    sum_fail += !rep.sum_ok;
    max_fail += !rep.max_ok;
  }
  add_check(cert, "sum 1/(1+e^d_i) <= 1/2", sum_fail == 0, slack, R,
            {{"points", points.size()},
             {"failures", sum_fail},
             {"worst_sum", worst_sum},
             {"worst_sum_margin", 0.5 - worst_sum},
             {"worst_point", worst_point ? to_json(*worst_point) : nlohmann::ordered_json()}});
  add_check(cert, "max d_i >= log(2n-1)", max_fail == 0, slack, R,
            {{"failures", max_fail}, {"worst_max_margin", worst_max_margin}});
  return cert;
}

/// Vertex map induced on the labeled nerve by conjugation with `g`.
inline std::vector<std::optional<VertexId>> conjugation_vertex_map(const HarnessContext& ctx,
                                                                   const LabeledNerve& ln,
                                                                   const Isometry& g) {
  std::vector<std::optional<VertexId>> map(ln.lc.labels.size());
  for (std::size_t v = 0; v < ln.lc.labels.size(); ++v) {
    try {
      const auto& img = conjugate_label(ctx.table, g, ctx.table.label(ln.lc.label_ids[v]));
      const std::size_t w = ln.vertex_of_label[img.id];
      if (w != LabeledNerve::npos) map[v] = static_cast<VertexId>(w);
    } catch (const TruncationError&) {
    }
  }
  return map;
}

inline Certificate run_tree_suite(const HarnessContext& ctx) {
  const auto& s = ctx.scenario;
  Certificate cert = certificate_header(ctx, "tree");
  const int R = ctx.table.ball_radius();
  const auto sc = build_strata(ctx);
  const auto graph = ComponentGraph::build(sc.strata);
  const auto verdict = is_tree(graph);
  add_check(cert, "component graph is bipartite", graph.is_bipartite(), 0.0, R);
  add_check(cert, "component graph is a tree", std::string("observation"), 0.0, R,
            {{"verdict", to_string(verdict.kind)},
             {"witness", verdict.witness},
             {"note", verdict.note},
             {"nodes", graph.nodes().size()},
             {"edges", graph.edges().size()}});

  auto actions = nlohmann::ordered_json::array();
  bool naturality = true, strata_ok = true, edges_ok = true;
  for (std::size_t i = 0; i < s.generators.size(); ++i)
    for (int sign : {1, -1}) {
      const Isometry g = sign > 0 ? s.generators[i].matrix : s.generators[i].matrix.inverse();
      const auto vmap = conjugation_vertex_map(ctx, sc.nerve, g);
      const auto rep = action_on_components(sc.nerve.lc, sc.irs, sc.strata, graph, vmap);
      std::size_t mapped_to_component = 0;
      for (const auto& im : rep.images) mapped_to_component += im.target.has_value();
      naturality = naturality && rep.naturality_ok;
      // Stratum is only checked where the image is a component of the truncation.
      for (const auto& im : rep.images)
        if (im.target && !im.stratum_preserved) strata_ok = false;
      edges_ok = edges_ok && rep.edges_ok;
      actions.push_back({{"generator", s.generators[i].name + (sign > 0 ? "" : "^-1")},
                         {"components", rep.total},
                         {"defined", rep.images.size()},
                         {"coverage", rep.coverage},
                         {"image_is_component", mapped_to_component},
                         {"edges_checked", rep.edges_checked}});
    }
  add_check(cert, "rank Theta(g W) = rank Theta(W) where defined", naturality, 0.0, R);
  add_check(cert, "stratum preserved where the image is a component", strata_ok, 0.0, R);
  add_check(cert, "edges preserved where defined", edges_ok, 0.0, R);
  cert["actions"] = actions;
  cert["graph"] = graph.to_edge_list();
  try {
    const auto betti = homology_z2(sc.nerve.lc.complex);
    cert["nerve_betti_z2"] = betti;
  } catch (const CapExceeded& e) {
    cert["nerve_betti_z2"] = e.what();
  }
  cert["note"] = "tree verdicts are observations on a truncated, non-cocompact example";
  return cert;
}

// ---------------------------------------------------------------------------
// Output formats

/// CSV summary: one row per check.
inline std::string certificate_csv(const Certificate& c, bool header = true) {
  std::ostringstream os;
  if (header) os << "suite,check,verdict,tolerance,truncation_radius\n";
  for (const auto& ch : c.at("checks")) {
    std::string name = ch.at("name").get<std::string>();
    std::replace(name.begin(), name.end(), ',', ';');
    os << c.at("suite").get<std::string>() << ',' << '"' << name << '"' << ','
       << ch.at("verdict").get<std::string>() << ',' << ch.at("tolerance").dump() << ','
       << ch.at("truncation_radius").dump() << '\n';
  }
  return os.str();
}

inline std::string certificate_text(const Certificate& c) {
  std::ostringstream os;
  os << "[" << c.at("suite").get<std::string>() << "] scenario " << c["scenario"]["name"].get<std::string>()
     << " (" << c["scenario"]["digest"].get<std::string>() << ")\n";
  os << "  lambda " << c["parameters"]["lambda"].dump() << ", log(2k-1) "
     << c["parameters"]["log_2k_minus_1"].dump() << ", ball radius "
     << c["truncation"]["ball_radius"].dump() << "\n";
  for (const auto& ch : c.at("checks"))
    os << "  " << ch.at("verdict").get<std::string>() << "  " << ch.at("name").get<std::string>() << "\n";
  return os.str();
}

}  // namespace kfree
