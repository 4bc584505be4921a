#pragma once

// Bipartite graph on the components of the two top IR strata, a tree test,
// and the partial action of a vertex map on components.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "kfree/complex.hpp"
#include "kfree/nerve.hpp"
#include "kfree/union_find.hpp"

namespace kfree {

struct ComponentNode {
  std::size_t slot = 0;       ///< 0 for X_{k-2}, 1 for X_{k-1}
  std::size_t component = 0;  ///< index into Strata::components[slot]
  auto operator<=>(const ComponentNode&) const = default;
};

class ComponentGraph {
 public:
  const std::vector<ComponentNode>& nodes() const { return nodes_; }
  /// Edges as (node index of the X_{k-2} side, node index of the X_{k-1} side).
  const std::vector<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }
  std::size_t node_index(ComponentNode n) const { return index_.at(n); }

  bool is_bipartite() const {
    return std::all_of(edges_.begin(), edges_.end(), [&](const auto& e) {
      return nodes_[e.first].slot == 0 && nodes_[e.second].slot == 1;
    });
  }

  /// Plain edge list: a header line, then one "u v" line per edge with the
  /// node names "L<i>" (lower stratum) and "U<i>" (upper stratum).
  std::string to_edge_list() const {
    std::ostringstream os;
    os << "# nodes " << nodes_.size() << " edges " << edges_.size() << '\n';
    auto name = [&](std::size_t i) {
      return std::string(nodes_[i].slot == 0 ? "L" : "U") + std::to_string(nodes_[i].component);
    };
    for (const auto& [u, v] : edges_) os << name(u) << ' ' << name(v) << '\n';
    return os.str();
  }

  /// Graph with `lower` nodes on the X_{k-2} side and `upper` on the X_{k-1}
  /// side; edges are (lower index, upper index).
  static ComponentGraph from_edges(std::size_t lower, std::size_t upper,
                                   const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    ComponentGraph g;
    for (std::size_t i = 0; i < lower; ++i) g.add_node({0, i});
    for (std::size_t i = 0; i < upper; ++i) g.add_node({1, i});
    std::set<std::pair<std::size_t, std::size_t>> uniq;
    for (const auto& [l, u] : edges) {
      if (l >= lower || u >= upper) throw InputError("edge endpoint out of range");
      uniq.emplace(l, lower + u);
    }
    g.edges_.assign(uniq.begin(), uniq.end());
    return g;
  }

  static ComponentGraph build(const Strata& strata) {
    ComponentGraph g;
    std::map<Simplex, ComponentNode> where;
    for (std::size_t slot = 0; slot < 2; ++slot)
      for (std::size_t c = 0; c < strata.components[slot].size(); ++c) {
        g.add_node({slot, c});
        for (const auto& s : strata.components[slot][c]) where.emplace(s, ComponentNode{slot, c});
      }
    std::set<std::pair<std::size_t, std::size_t>> edges;
    for (const auto& [s, node] : where)
      for (const auto& f : proper_faces(s)) {
        auto it = where.find(f);
        if (it == where.end() || it->second.slot == node.slot) continue;
        const auto lower = node.slot == 0 ? node : it->second;
        const auto upper = node.slot == 0 ? it->second : node;
        edges.emplace(g.index_.at(lower), g.index_.at(upper));
      }
    g.edges_.assign(edges.begin(), edges.end());
    return g;
  }

 private:
  void add_node(ComponentNode n) {
    index_.emplace(n, nodes_.size());
    nodes_.push_back(n);
  }

  std::vector<ComponentNode> nodes_;
  std::map<ComponentNode, std::size_t> index_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
};

enum class TreeKind { tree, disconnected, has_cycle };

inline std::string to_string(TreeKind k) {
  switch (k) {
    case TreeKind::tree: return "tree";
    case TreeKind::disconnected: return "disconnected";
    case TreeKind::has_cycle: return "has_cycle";
  }
  return "?";
}

struct TreeVerdict {
  TreeKind kind = TreeKind::disconnected;
  /// For has_cycle: node indices along a cycle.  For disconnected: one node
  /// from each component.
  std::vector<std::size_t> witness;
  std::string note;
};

/// Cycles take precedence over disconnection in the verdict.
inline TreeVerdict is_tree(const ComponentGraph& g) {
  TreeVerdict v;
  const std::size_t n = g.nodes().size();
  if (n == 0) {
    v.kind = TreeKind::disconnected;
    v.note = "empty graph (by convention not a tree)";
    return v;
  }
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& [a, b] : g.edges()) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  // Iterative DFS recording parents; a non-tree edge closes a cycle.
  std::vector<std::optional<std::size_t>> parent(n);
  std::vector<int> state(n, 0);
  std::vector<std::size_t> roots;
  for (std::size_t root = 0; root < n; ++root) {
    if (state[root]) continue;
    roots.push_back(root);
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    state[root] = 1;
    while (!stack.empty()) {
      auto& [u, next] = stack.back();
      if (next == adj[u].size()) {
        state[u] = 2;
        stack.pop_back();
        continue;
      }
      const std::size_t w = adj[u][next++];
      if (parent[u] && *parent[u] == w) continue;
      if (state[w] == 1) {
        // Back edge u -> w: cycle w ... u.
        std::vector<std::size_t> cycle{u};
        for (std::size_t x = u; x != w;) {
          x = *parent[x];
          cycle.push_back(x);
        }
        std::reverse(cycle.begin(), cycle.end());
        v.kind = TreeKind::has_cycle;
        v.witness = std::move(cycle);
        return v;
      }
      if (state[w] == 0) {
        state[w] = 1;
        parent[w] = u;
        stack.push_back({w, 0});
      }
    }
  }
  if (roots.size() > 1) {
    v.kind = TreeKind::disconnected;
    v.witness = roots;
    v.note = std::to_string(roots.size()) + " components";
    return v;
  }
  v.kind = TreeKind::tree;
  return v;
}

// ---------------------------------------------------------------------------
// Action on components

struct ComponentImage {
  ComponentNode source;
  std::optional<ComponentNode> target;  ///< unset when the image is not a component here
  bool ir_preserved = false;
  bool stratum_preserved = false;
  std::size_t rank_source = 0;
  std::size_t rank_image = 0;
  std::string note;
};

struct ActionReport {
  std::vector<ComponentImage> images;  ///< one per component whose image is defined
  std::size_t total = 0;
  double coverage = 0.0;
  bool naturality_ok = true;  ///< rank Theta preserved wherever defined
  bool strata_ok = true;
  bool ir_ok = true;
  bool edges_ok = true;
  std::size_t edges_checked = 0;
};

/// Partial action induced by a vertex map (unset entries are vertices whose
/// image is outside the truncation).  A component is mapped when all of its
/// simplices map to simplices of the complex.
inline ActionReport action_on_components(const LabeledComplex& lc,
                                         const std::vector<std::size_t>& irs, const Strata& strata,
                                         const ComponentGraph& graph,
                                         const std::vector<std::optional<VertexId>>& vertex_map) {
  ActionReport rep;
  std::map<Simplex, ComponentNode> where;
  for (std::size_t slot = 0; slot < 2; ++slot)
    for (std::size_t c = 0; c < strata.components[slot].size(); ++c)
      for (const auto& s : strata.components[slot][c]) where.emplace(s, ComponentNode{slot, c});

  auto map_simplex = [&](const Simplex& s) -> std::optional<Simplex> {
    std::vector<VertexId> img;
    for (VertexId v : s) {
      if (v >= vertex_map.size() || !vertex_map[v]) return std::nullopt;
      img.push_back(*vertex_map[v]);
    }
    Simplex t = make_simplex(img);
    if (t.size() != s.size() || !lc.complex.contains(t)) return std::nullopt;
    return t;
  };

  std::map<ComponentNode, ComponentNode> node_map;
  for (std::size_t slot = 0; slot < 2; ++slot)
    for (std::size_t c = 0; c < strata.components[slot].size(); ++c) {
      ++rep.total;
      const auto& comp = strata.components[slot][c];
      SaturatedSet image;
      bool defined = true;
      for (const auto& s : comp) {
        auto t = map_simplex(s);
        if (!t) {
          defined = false;
          break;
        }
        image.push_back(*t);
      }
      if (!defined) continue;
      ComponentImage ci;
      ci.source = {slot, c};
      ci.ir_preserved = true;
      for (std::size_t i = 0; i < comp.size(); ++i)
        if (irs.at(lc.complex.index_of(comp[i])) != irs.at(lc.complex.index_of(image[i])))
          ci.ir_preserved = false;
      // The image is a component when it is exactly one component's simplex set.
      std::set<Simplex> img_set(image.begin(), image.end());
      auto it = where.find(image.front());
      if (it != where.end()) {
        const auto& target = strata.components[it->second.slot][it->second.component];
        if (std::set<Simplex>(target.begin(), target.end()) == img_set) ci.target = it->second;
      }
      ci.stratum_preserved = ci.target && ci.target->slot == slot;
      if (!ci.target) ci.note = "image is not a component of the truncated complex";
      ci.rank_source = rank_theta(lc, comp);
      ci.rank_image = rank_theta(lc, image);
      if (ci.rank_source != ci.rank_image) rep.naturality_ok = false;
      if (!ci.ir_preserved) rep.ir_ok = false;
      if (!ci.stratum_preserved) rep.strata_ok = false;
      if (ci.target) node_map.emplace(ci.source, *ci.target);
      rep.images.push_back(std::move(ci));
    }
  rep.coverage = rep.total ? static_cast<double>(rep.images.size()) / static_cast<double>(rep.total)
                           : 1.0;

  std::set<std::pair<std::size_t, std::size_t>> edge_set(graph.edges().begin(), graph.edges().end());
  for (const auto& [u, v] : graph.edges()) {
    auto a = node_map.find(graph.nodes()[u]);
    auto b = node_map.find(graph.nodes()[v]);
    if (a == node_map.end() || b == node_map.end()) continue;
    ++rep.edges_checked;
    if (!edge_set.count({graph.node_index(a->second), graph.node_index(b->second)}))
      rep.edges_ok = false;
  }
  return rep;
}

}  // namespace kfree
