#pragma once

// The inductive rank argument over a face-connected set of simplices: order
// the simplices so each one is a proper face or coface of an earlier one,
// then track rank Theta(V_i) for the growing prefixes V_i.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "kfree/errors.hpp"
#include "kfree/free_group.hpp"
#include "kfree/nerve.hpp"

namespace kfree {

enum class Ordering { bfs, random };

struct RankLemmaStep {
  std::size_t index = 0;
  Simplex simplex;
  std::optional<std::size_t> parent;  ///< earlier step it is attached to
  std::string relation;               ///< "base", "face" or "coface" (relative to parent)
  std::vector<FreeWord> new_labels;
  std::size_t rank = 0;               ///< rank Theta(V_i)
};

struct RankLemmaResult {
  bool passed = true;
  std::size_t r = 0;
  std::optional<std::size_t> failed_step;
  std::size_t final_rank = 0;
  std::vector<RankLemmaStep> trace;
  /// Simplices of V whose internal rank differs from r (hypothesis check).
  std::vector<Simplex> ir_mismatch;
};

struct RankLemmaOptions {
  Ordering ordering = Ordering::bfs;
  std::uint64_t seed = 0;
};

/// Orders `v` so that every simplex after the first is a proper face or
/// proper coface of an earlier one.  Returns (order, parent) or throws when
/// V is not face-connected.
inline std::vector<std::pair<std::size_t, std::optional<std::size_t>>> face_connected_order(
    const std::vector<Simplex>& v, const RankLemmaOptions& opt) {
  const std::size_t n = v.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (is_proper_face(v[i], v[j]) || is_proper_face(v[j], v[i])) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }

  std::vector<std::pair<std::size_t, std::optional<std::size_t>>> order;
  std::vector<bool> seen(n, false);
  if (opt.ordering == Ordering::bfs) {
    std::vector<std::size_t> queue{0};
    seen[0] = true;
    order.push_back({0, std::nullopt});
    for (std::size_t head = 0; head < queue.size(); ++head)
      for (std::size_t j : adj[queue[head]])
        if (!seen[j]) {
          seen[j] = true;
          queue.push_back(j);
          order.push_back({j, queue[head]});
        }
  } else {
    std::mt19937_64 rng(opt.seed);
    const std::size_t start = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    seen[start] = true;
    order.push_back({start, std::nullopt});
    // Frontier of (candidate, attaching earlier simplex).
    std::vector<std::pair<std::size_t, std::size_t>> frontier;
    for (std::size_t j : adj[start]) frontier.push_back({j, start});
    while (!frontier.empty()) {
      const std::size_t pick = std::uniform_int_distribution<std::size_t>(0, frontier.size() - 1)(rng);
      const auto [j, parent] = frontier[pick];
      frontier.erase(frontier.begin() + static_cast<std::ptrdiff_t>(pick));
      if (seen[j]) continue;
      seen[j] = true;
      order.push_back({j, parent});
      for (std::size_t l : adj[j])
        if (!seen[l]) frontier.push_back({l, j});
    }
  }
  if (order.size() != n) throw InputError("not connected as saturated set");
  return order;
}

/// Runs the induction over V with target rank r.  The first simplex of V
/// in the given order is the BFS root.
inline RankLemmaResult rank_lemma_run(const LabeledComplex& lc, std::vector<Simplex> v,
                                      std::size_t r, const RankLemmaOptions& opt = {},
                                      InternalRankCache* cache = nullptr) {
  if (v.empty()) throw InputError("empty saturated set");
  for (auto& s : v) s = make_simplex(s);
  {
    std::set<Simplex> uniq(v.begin(), v.end());
    if (uniq.size() != v.size()) throw InputError("duplicate simplex in saturated set");
  }
  const auto order = face_connected_order(v, opt);

  RankLemmaResult out;
  out.r = r;
  InternalRankCache local;
  InternalRankCache& irc = cache ? *cache : local;
  for (const auto& s : v)
    if (internal_rank_of_simplex(lc, s, irc) != r) out.ir_mismatch.push_back(s);

  std::vector<std::size_t> step_of(v.size());
  std::set<VertexId> vertices_seen;
  std::set<FreeWord> keys_seen;
  SubgroupGraph graph;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto [idx, parent] = order[i];
    step_of[idx] = i;
    RankLemmaStep step;
    step.index = i;
    step.simplex = v[idx];
    if (parent) {
      step.parent = step_of[*parent];
      step.relation = is_proper_face(v[idx], v[*parent]) ? "face" : "coface";
    } else {
      step.relation = "base";
    }
    for (VertexId x : v[idx]) {
      if (!vertices_seen.insert(x).second) continue;
      const FreeWord key = subgroup_key(lc.labels.at(x));
      if (!keys_seen.insert(key).second) continue;
      step.new_labels.push_back(key);
      graph = join(graph, key);
    }
    step.rank = rank(graph);
    if (step.rank > r && out.passed) {
      out.passed = false;
      out.failed_step = i;
    }
    out.trace.push_back(std::move(step));
  }
  out.final_rank = out.trace.back().rank;
  return out;
}

}  // namespace kfree
