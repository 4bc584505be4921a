#pragma once

// Subgroups of free groups via Stallings foldings.
//
// Words are over generators x_1..x_n encoded as signed integers (+i for x_i,
// -i for its inverse) and serialized with lowercase letters for generators
// and uppercase for inverses, so "abA" is a b a^-1.  A finitely generated
// subgroup is represented by its folded core graph; its rank is the first
// Betti number E - V + 1.

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kfree/errors.hpp"
#include "kfree/union_find.hpp"

namespace kfree {

using Letter = int;

class FreeWord {
 public:
  FreeWord() = default;

  /// Freely reduces `letters`.
  explicit FreeWord(std::vector<Letter> letters) {
    for (Letter x : letters) push_back(x);
  }

  static FreeWord parse(std::string_view s) {
    FreeWord w;
    if (s == "1") return w;
    for (char ch : s) {
      if (ch >= 'a' && ch <= 'z')
        w.push_back(ch - 'a' + 1);
      else if (ch >= 'A' && ch <= 'Z')
        w.push_back(-(ch - 'A' + 1));
      else
        throw InputError(std::string("invalid letter '") + ch + "' in word");
    }
    return w;
  }

  static FreeWord generator(int index) { return FreeWord({index + 1}); }

  std::string str() const {
    if (letters_.empty()) return "1";
    std::string s;
    for (Letter x : letters_)
      s.push_back(x > 0 ? static_cast<char>('a' + x - 1) : static_cast<char>('A' - x - 1));
    return s;
  }

  const std::vector<Letter>& letters() const { return letters_; }
  std::size_t length() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }

  /// Appends a letter, cancelling against the last one if possible.
  void push_back(Letter x) {
    if (x == 0 || x > 26 || x < -26) throw InputError("letter out of range");
    if (!letters_.empty() && letters_.back() == -x)
      letters_.pop_back();
    else
      letters_.push_back(x);
  }

  FreeWord inverse() const {
    FreeWord w;
    w.letters_.reserve(letters_.size());
    for (auto it = letters_.rbegin(); it != letters_.rend(); ++it) w.letters_.push_back(-*it);
    return w;
  }

  friend FreeWord operator*(const FreeWord& u, const FreeWord& v) {
    FreeWord w = u;
    for (Letter x : v.letters_) w.push_back(x);
    return w;
  }

  /// Largest generator index used (0 for the empty word).
  int alphabet_size() const {
    int n = 0;
    for (Letter x : letters_) n = std::max(n, std::abs(x));
    return n;
  }

  friend bool operator==(const FreeWord&, const FreeWord&) = default;

  /// Shortlex order with a < A < b < B < ...
  friend std::strong_ordering operator<=>(const FreeWord& u, const FreeWord& v) {
    if (u.length() != v.length()) return u.length() <=> v.length();
    for (std::size_t i = 0; i < u.length(); ++i) {
      const auto ku = order_key(u.letters_[i]), kv = order_key(v.letters_[i]);
      if (ku != kv) return ku <=> kv;
    }
    return std::strong_ordering::equal;
  }

 private:
  static int order_key(Letter x) { return x > 0 ? 2 * x : -2 * x + 1; }
  std::vector<Letter> letters_;
};

/// The word w or w^-1, whichever is smaller; identifies the cyclic subgroup.
inline FreeWord subgroup_key(const FreeWord& w) {
  FreeWord inv = w.inverse();
  return inv < w ? inv : w;
}

/// Cyclically reduced core of w, i.e. w = u c u^-1 with c cyclically reduced.
inline FreeWord cyclic_core(const FreeWord& w) {
  const auto& l = w.letters();
  std::size_t i = 0, j = l.size();
  while (j - i >= 2 && l[i] == -l[j - 1]) {
    ++i;
    --j;
  }
  return FreeWord(std::vector<Letter>(l.begin() + static_cast<std::ptrdiff_t>(i),
                                      l.begin() + static_cast<std::ptrdiff_t>(j)));
}

// ---------------------------------------------------------------------------
// Core graphs

/// Folded core graph of a subgroup.  Vertex 0 is the basepoint; `adj[v]`
/// maps a signed label to the unique neighbour reached along it.
class SubgroupGraph {
 public:
  struct Edge {
    std::uint32_t from;
    Letter label;  ///< positive
    std::uint32_t to;
    friend auto operator<=>(const Edge&, const Edge&) = default;
  };

  SubgroupGraph() : adj_(1) {}

  std::size_t vertex_count() const { return adj_.size(); }

  std::size_t edge_count() const {
    std::size_t e = 0;
    for (const auto& m : adj_)
      for (const auto& [x, v] : m)
        if (x > 0) ++e;
    return e;
  }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (std::uint32_t u = 0; u < adj_.size(); ++u)
      for (const auto& [x, v] : adj_[u])
        if (x > 0) out.push_back({u, x, static_cast<std::uint32_t>(v)});
    std::sort(out.begin(), out.end());
    return out;
  }

  const std::map<Letter, std::uint32_t>& neighbours(std::uint32_t v) const { return adj_[v]; }

  /// Follows `w` from the basepoint; returns the endpoint if the path exists.
  std::optional<std::uint32_t> trace(const FreeWord& w, std::uint32_t start = 0) const {
    std::uint32_t v = start;
    for (Letter x : w.letters()) {
      auto it = adj_[v].find(x);
      if (it == adj_[v].end()) return std::nullopt;
      v = it->second;
    }
    return v;
  }

  /// Whether w belongs to the subgroup (reduced closed path at the basepoint).
  bool contains(const FreeWord& w) const {
    auto end = trace(w);
    return end && *end == 0;
  }

  bool is_folded() const {
    // adj maps are functions by construction; check the reverse direction.
    for (std::uint32_t u = 0; u < adj_.size(); ++u)
      for (const auto& [x, v] : adj_[u]) {
        auto it = adj_[v].find(-x);
        if (it == adj_[v].end() || it->second != u) return false;
      }
    return true;
  }

  bool is_core() const {
    for (std::uint32_t v = 1; v < adj_.size(); ++v)
      if (adj_[v].size() < 2) return false;
    return true;
  }

  /// Breadth-first relabelling from the basepoint with labels visited in the
  /// order a, A, b, B, ...; equal strings mean equal subgroups.
  std::string canonical_form() const {
    std::vector<std::int64_t> id(adj_.size(), -1);
    std::vector<std::uint32_t> order{0};
    id[0] = 0;
    for (std::size_t head = 0; head < order.size(); ++head) {
      const auto u = order[head];
      std::vector<std::pair<int, std::uint32_t>> nb;
      for (const auto& [x, v] : adj_[u]) nb.push_back({x > 0 ? 2 * x : -2 * x + 1, v});
      std::sort(nb.begin(), nb.end());
      for (const auto& [key, v] : nb)
        if (id[v] < 0) {
          id[v] = static_cast<std::int64_t>(order.size());
          order.push_back(v);
        }
    }
    std::vector<std::tuple<std::int64_t, Letter, std::int64_t>> es;
    for (std::uint32_t u = 0; u < adj_.size(); ++u)
      for (const auto& [x, v] : adj_[u])
        if (x > 0) es.emplace_back(id[u], x, id[v]);
    std::sort(es.begin(), es.end());
    std::ostringstream os;
    os << order.size() << ':';
    for (const auto& [u, x, v] : es) os << u << ',' << x << ',' << v << ';';
    return os.str();
  }

  /// Plain-text adjacency export, one edge per line.
  std::string to_text() const {
    std::ostringstream os;
    os << "vertices " << vertex_count() << "\nbase 0\n";
    for (const auto& e : edges())
      os << "edge " << e.from << ' ' << FreeWord({e.label}).str() << ' ' << e.to << '\n';
    return os.str();
  }

 private:
  friend class Folder;
  std::vector<std::map<Letter, std::uint32_t>> adj_;
};

inline std::size_t rank(const SubgroupGraph& g) {
  return g.edge_count() + 1 - g.vertex_count();
}

/// Builds folded core graphs.  Edges may be added in any order; folding is
/// performed with a union-find over vertices.  When an RNG is supplied the
/// pending identifications are processed in random order.
class Folder {
 public:
  explicit Folder(std::mt19937_64* rng = nullptr) : rng_(rng) { new_vertex(); }

  explicit Folder(const SubgroupGraph& g, std::mt19937_64* rng = nullptr) : rng_(rng) {
    for (std::size_t v = 0; v < g.vertex_count(); ++v) new_vertex();
    for (const auto& e : g.edges()) raw_edges_.push_back({e.from, e.label, e.to});
  }

  void add_loop(const FreeWord& w) {
    if (w.empty()) return;
    std::uint32_t cur = 0;
    const auto& l = w.letters();
    for (std::size_t i = 0; i < l.size(); ++i) {
      const std::uint32_t next = (i + 1 == l.size()) ? 0u : new_vertex();
      add_edge(cur, l[i], next);
      cur = next;
    }
  }

  /// Adds a copy of `g` with its basepoint glued to ours.
  void add_graph(const SubgroupGraph& g) {
    std::vector<std::uint32_t> map(g.vertex_count());
    map[0] = 0;
    for (std::size_t v = 1; v < g.vertex_count(); ++v) map[v] = new_vertex();
    for (const auto& e : g.edges()) raw_edges_.push_back({map[e.from], e.label, map[e.to]});
  }

  /// Adds `n` fresh vertices and returns the id of the first.
  std::uint32_t add_vertices(std::size_t n) {
    const auto first = static_cast<std::uint32_t>(adj_.size());
    for (std::size_t i = 0; i < n; ++i) new_vertex();
    return first;
  }

  void add_edge(std::uint32_t u, Letter x, std::uint32_t v) {
    if (x < 0) {
      std::swap(u, v);
      x = -x;
    }
    raw_edges_.push_back({u, x, v});
  }

  SubgroupGraph finish() {
    if (rng_ != nullptr) std::shuffle(raw_edges_.begin(), raw_edges_.end(), *rng_);
    for (const auto& e : raw_edges_) {
      insert(e.from, e.label, e.to);
      insert(e.to, -e.label, e.from);
      drain();
    }
    return trim();
  }

 private:
  struct RawEdge {
    std::uint32_t from;
    Letter label;
    std::uint32_t to;
  };

  std::uint32_t new_vertex() {
    adj_.emplace_back();
    return static_cast<std::uint32_t>(uf_.add());
  }

  void insert(std::uint32_t u, Letter x, std::uint32_t v) {
    const auto ru = static_cast<std::uint32_t>(uf_.find(u));
    auto [it, fresh] = adj_[ru].try_emplace(x, v);
    if (!fresh && uf_.find(it->second) != uf_.find(v)) pending_.push_back({it->second, v});
  }

  void drain() {
    while (!pending_.empty()) {
      std::size_t pick = 0;
      if (rng_ != nullptr) pick = std::uniform_int_distribution<std::size_t>(0, pending_.size() - 1)(*rng_);
      auto [a, b] = pending_[pick];
      pending_.erase(pending_.begin() + static_cast<std::ptrdiff_t>(pick));
      merge(a, b);
    }
  }

  void merge(std::uint32_t a, std::uint32_t b) {
    const auto ra = static_cast<std::uint32_t>(uf_.find(a));
    const auto rb = static_cast<std::uint32_t>(uf_.find(b));
    if (ra == rb) return;
    uf_.unite(ra, rb);
    const auto root = static_cast<std::uint32_t>(uf_.find(ra));
    const auto other = root == ra ? rb : ra;
    auto moved = std::move(adj_[other]);
    adj_[other].clear();
    for (const auto& [x, v] : moved) insert(root, x, v);
  }

  SubgroupGraph trim() {
    const std::size_t n = adj_.size();
    // Resolve targets to representatives.
    std::vector<std::map<Letter, std::uint32_t>> g(n);
    std::vector<bool> alive(n, false);
    for (std::uint32_t v = 0; v < n; ++v) {
      if (uf_.find(v) != v) continue;
      alive[v] = true;
      for (const auto& [x, w] : adj_[v]) g[v][x] = static_cast<std::uint32_t>(uf_.find(w));
    }
    const auto base = static_cast<std::uint32_t>(uf_.find(0));
    // Only the component of the basepoint matters.
    std::vector<bool> seen(n, false);
    std::vector<std::uint32_t> stack{base};
    seen[base] = true;
    while (!stack.empty()) {
      auto u = stack.back();
      stack.pop_back();
      for (const auto& [x, w] : g[u])
        if (!seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
    }
    for (std::uint32_t v = 0; v < n; ++v) alive[v] = alive[v] && seen[v];
    // Prune hanging trees.
    std::vector<std::uint32_t> leaves;
    for (std::uint32_t v = 0; v < n; ++v)
      if (alive[v] && v != base && g[v].size() <= 1) leaves.push_back(v);
    while (!leaves.empty()) {
      auto v = leaves.back();
      leaves.pop_back();
      if (!alive[v]) continue;
      alive[v] = false;
      for (const auto& [x, w] : g[v]) {
        g[w].erase(-x);
        if (w != base && alive[w] && g[w].size() <= 1) leaves.push_back(w);
      }
      g[v].clear();
    }
    std::vector<std::int64_t> id(n, -1);
    std::uint32_t next = 0;
    id[base] = next++;
    for (std::uint32_t v = 0; v < n; ++v)
      if (alive[v] && v != base) id[v] = next++;
    SubgroupGraph out;
    out.adj_.assign(next, {});
    for (std::uint32_t v = 0; v < n; ++v) {
      if (!alive[v]) continue;
      for (const auto& [x, w] : g[v])
        out.adj_[static_cast<std::size_t>(id[v])][x] = static_cast<std::uint32_t>(id[w]);
    }
    return out;
  }

  std::mt19937_64* rng_;
  UnionFind uf_;
  std::vector<std::map<Letter, std::uint32_t>> adj_;
  std::vector<RawEdge> raw_edges_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pending_;
};

inline SubgroupGraph subgroup_from_words(std::span<const FreeWord> words,
                                         std::mt19937_64* rng = nullptr) {
  Folder f(rng);
  for (const auto& w : words) f.add_loop(w);
  return f.finish();
}

inline SubgroupGraph subgroup_from_words(std::initializer_list<FreeWord> words) {
  return subgroup_from_words(std::span<const FreeWord>(words.begin(), words.size()));
}

/// Core graph of <H1, H2>.
inline SubgroupGraph join(const SubgroupGraph& g1, const SubgroupGraph& g2) {
  Folder f(g1);
  f.add_graph(g2);
  return f.finish();
}

inline SubgroupGraph join(const SubgroupGraph& g, const FreeWord& w) {
  Folder f(g);
  f.add_loop(w);
  return f.finish();
}

/// Core of the based fibre product: the graph of H1 intersected with H2.
inline SubgroupGraph intersect(const SubgroupGraph& g1, const SubgroupGraph& g2) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> id;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> order{{0, 0}};
  id[{0, 0}] = 0;
  std::vector<std::tuple<std::uint32_t, Letter, std::uint32_t>> edges;
  for (std::size_t head = 0; head < order.size(); ++head) {
    const auto [u1, u2] = order[head];
    for (const auto& [x, v1] : g1.neighbours(u1)) {
      auto it = g2.neighbours(u2).find(x);
      if (it == g2.neighbours(u2).end()) continue;
      const std::pair<std::uint32_t, std::uint32_t> key{v1, it->second};
      auto [pos, fresh] = id.try_emplace(key, static_cast<std::uint32_t>(order.size()));
      if (fresh) order.push_back(key);
      if (x > 0) edges.emplace_back(static_cast<std::uint32_t>(head), x, pos->second);
    }
  }
  // The product of folded graphs is folded; Folder only trims it to the core.
  Folder f;
  f.add_vertices(order.size() - 1);
  for (const auto& [u, x, v] : edges) f.add_edge(u, x, v);
  return f.finish();
}

// ---------------------------------------------------------------------------
// Internal rank

struct InternalRankResult {
  std::size_t rank = 0;
  /// Indices into the input of one subset attaining the maximum.
  std::vector<std::size_t> witness;
};

/// Maximum of rank<T> over subsets T of `gens`; IR of the empty set is 0.
/// Subsets are scanned exhaustively, so the size is capped.
inline InternalRankResult internal_rank(std::span<const FreeWord> gens, std::size_t cap = 16) {
  if (gens.size() > cap)
    throw CapExceeded("internal rank of " + std::to_string(gens.size()) +
                      " generators exceeds the subset-scan cap of " + std::to_string(cap));
  InternalRankResult best;
  std::vector<std::size_t> chosen;
  const std::size_t n = gens.size();
  // Depth-first over include/exclude decisions; the graph of the current
  // subset is carried down the recursion.  A branch is cut when even adding
  // every remaining word could not beat the incumbent.
  auto visit = [&](auto&& self, std::size_t i, const SubgroupGraph& g, std::size_t r) -> void {
    if (!chosen.empty() && r > best.rank) {
      best.rank = r;
      best.witness = chosen;
    }
    if (i == n || r + (n - i) <= best.rank) return;
    chosen.push_back(i);
    SubgroupGraph with = join(g, gens[i]);
    self(self, i + 1, with, rank(with));
    chosen.pop_back();
    self(self, i + 1, g, r);
  };
  visit(visit, 0, SubgroupGraph{}, 0);
  if (best.witness.empty() && n > 0) best.witness = {0};
  return best;
}

inline InternalRankResult internal_rank(std::initializer_list<FreeWord> gens) {
  return internal_rank(std::span<const FreeWord>(gens.begin(), gens.size()));
}

/// Memoizes internal ranks keyed by the set of cyclic subgroups involved.
class InternalRankCache {
 public:
  explicit InternalRankCache(std::size_t cap = 16) : cap_(cap) {}

  /// Internal rank of the cyclic subgroups generated by `gens` (duplicates and
  /// inverse pairs collapse to one subgroup).
  std::size_t operator()(std::span<const FreeWord> gens) {
    std::vector<FreeWord> keys;
    for (const auto& w : gens)
      if (!w.empty()) keys.push_back(subgroup_key(w));
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    std::string key;
    for (const auto& w : keys) key += w.str() + ',';
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    const std::size_t r = internal_rank(keys, cap_).rank;
    memo_.emplace(std::move(key), r);
    return r;
  }

  std::size_t cap() const { return cap_; }

 private:
  std::size_t cap_;
  std::unordered_map<std::string, std::size_t> memo_;
};

}  // namespace kfree
