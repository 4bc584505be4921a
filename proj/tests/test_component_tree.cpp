#include <random>
#include <set>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "kfree/component_tree.hpp"
#include "oracles.hpp"

using namespace kfree;

namespace {

FreeWord W(const char* s) { return FreeWord::parse(s); }

LabeledComplex labeled(std::vector<Simplex> maximal, std::vector<const char*> labels) {
  LabeledComplex lc;
  lc.complex = SimplicialComplex::closure_of(maximal);
  for (const char* l : labels) lc.labels.push_back(W(l));
  return lc;
}

std::set<std::pair<std::size_t, std::size_t>> component_edges(const ComponentGraph& g) {
  std::set<std::pair<std::size_t, std::size_t>> out;
  for (const auto& [u, v] : g.edges()) out.insert({g.nodes()[u].component, g.nodes()[v].component});
  return out;
}

bool is_cycle(const ComponentGraph& g, const std::vector<std::size_t>& c) {
  if (c.size() < 3) return false;
  std::set<std::pair<std::size_t, std::size_t>> e;
  for (const auto& [a, b] : g.edges()) {
    e.insert({a, b});
    e.insert({b, a});
  }
  for (std::size_t i = 0; i < c.size(); ++i)
    if (!e.count({c[i], c[(i + 1) % c.size()]})) return false;
  return std::set<std::size_t>(c.begin(), c.end()).size() == c.size();
}

}  // namespace

TEST(ComponentGraph, OneComponentPerStratum) {
  Strata st;
  st.k = 3;
  st.components[0] = {{{0}}};
  st.components[1] = {{{0, 1}}};
  const auto g = ComponentGraph::build(st);
  EXPECT_EQ(g.nodes().size(), 2u);
  EXPECT_EQ(component_edges(g), (std::set<std::pair<std::size_t, std::size_t>>{{0, 0}}));
  EXPECT_TRUE(g.is_bipartite());
  EXPECT_EQ(is_tree(g).kind, TreeKind::tree);
}

TEST(ComponentGraph, DisjointStrataAreEdgeless) {
  Strata st;
  st.k = 4;
  st.components[0] = {{{0, 1}}};
  st.components[1] = {{{2, 3, 4}}};
  const auto g = ComponentGraph::build(st);
  EXPECT_TRUE(g.edges().empty());
  EXPECT_EQ(is_tree(g).kind, TreeKind::disconnected);
}

TEST(ComponentGraph, HandBuiltComplex) {
  // a - a joined to b - b by an edge of IR 2 (k = 3).
  const auto lc = labeled({{0, 1}, {1, 2}, {2, 3}}, {"a", "A", "b", "bb"});
  InternalRankCache cache;
  const auto irs = internal_ranks(lc, cache);
  const auto st = strata_components(lc, irs, 3);
  ASSERT_EQ(st.components[0].size(), 2u);
  ASSERT_EQ(st.components[1].size(), 1u);
  const auto g = ComponentGraph::build(st);
  EXPECT_EQ(component_edges(g), oracle::brute_component_edges(st));
  EXPECT_EQ(g.edges().size(), 2u);
  EXPECT_EQ(is_tree(g).kind, TreeKind::tree);
  const std::string text = g.to_edge_list();
  EXPECT_EQ(text.substr(0, text.find('\n')), "# nodes 3 edges 2");
  EXPECT_NE(text.find("L0 U0"), std::string::npos);
  EXPECT_NE(text.find("L1 U0"), std::string::npos);
}

TEST(ComponentGraph, MatchesBruteForceOnRandomComplexes) {
  std::mt19937_64 rng(1);
  std::size_t nonempty = 0;
  for (int i = 0; i < 200; ++i) {
    const auto lc = fixtures::random_labeled_complex(rng, 7, 30, 2, 2);
    InternalRankCache cache;
    const auto irs = internal_ranks(lc, cache);
    for (std::size_t k : {3u, 4u}) {
      const auto st = strata_components(lc, irs, k);
      const auto g = ComponentGraph::build(st);
      EXPECT_TRUE(g.is_bipartite());
      EXPECT_EQ(component_edges(g), oracle::brute_component_edges(st));
      const auto v = is_tree(g);
      EXPECT_EQ(v.kind == TreeKind::tree, oracle::is_tree_by_count(g.nodes().size(), g.edges()));
      nonempty += !g.edges().empty();
    }
  }
  EXPECT_GT(nonempty, 50u);
}

TEST(IsTree, Examples) {
  EXPECT_EQ(is_tree(ComponentGraph::from_edges(1, 1, {{0, 0}})).kind, TreeKind::tree);

  const auto square = ComponentGraph::from_edges(2, 2, {{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  const auto v = is_tree(square);
  EXPECT_EQ(v.kind, TreeKind::has_cycle);
  EXPECT_EQ(v.witness.size(), 4u);
  EXPECT_TRUE(is_cycle(square, v.witness));

  EXPECT_EQ(is_tree(ComponentGraph::from_edges(3, 2, {{0, 0}, {1, 0}, {1, 1}, {2, 1}})).kind, TreeKind::tree);

  const auto empty = is_tree(ComponentGraph{});
  EXPECT_EQ(empty.kind, TreeKind::disconnected);
  EXPECT_FALSE(empty.note.empty());

  const auto split = is_tree(ComponentGraph::from_edges(2, 1, {{0, 0}}));
  EXPECT_EQ(split.kind, TreeKind::disconnected);
  EXPECT_EQ(split.witness.size(), 2u);

  EXPECT_THROW(ComponentGraph::from_edges(1, 1, {{0, 1}}), InputError);
}

TEST(IsTree, AgreesWithEdgeCountOnRandomGraphs) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t lo = 1 + rng() % 5, up = 1 + rng() % 5;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    const std::size_t m = rng() % (lo + up + 1);
    for (std::size_t e = 0; e < m; ++e) edges.push_back({rng() % lo, rng() % up});
    const auto g = ComponentGraph::from_edges(lo, up, edges);
    const auto v = is_tree(g);
    EXPECT_EQ(v.kind == TreeKind::tree, oracle::is_tree_by_count(g.nodes().size(), g.edges()));
    if (v.kind == TreeKind::has_cycle) {
      EXPECT_TRUE(is_cycle(g, v.witness));
    }
  }
}

TEST(Action, IdentityIsTotal) {
  const auto lc = labeled({{0, 1}, {1, 2}, {2, 3}}, {"a", "A", "b", "bb"});
  InternalRankCache cache;
  const auto irs = internal_ranks(lc, cache);
  const auto st = strata_components(lc, irs, 3);
  const auto g = ComponentGraph::build(st);
  std::vector<std::optional<VertexId>> id{0, 1, 2, 3};
  const auto rep = action_on_components(lc, irs, st, g, id);
  EXPECT_EQ(rep.images.size(), rep.total);
  EXPECT_DOUBLE_EQ(rep.coverage, 1.0);
  for (const auto& im : rep.images) EXPECT_EQ(im.target, std::optional<ComponentNode>(im.source));
  EXPECT_TRUE(rep.naturality_ok && rep.strata_ok && rep.ir_ok && rep.edges_ok);
  EXPECT_EQ(rep.edges_checked, g.edges().size());
}

TEST(Action, UndefinedVerticesGivePartialMaps) {
  const auto lc = labeled({{0, 1}, {1, 2}, {2, 3}}, {"a", "A", "b", "bb"});
  InternalRankCache cache;
  const auto irs = internal_ranks(lc, cache);
  const auto st = strata_components(lc, irs, 3);
  const auto g = ComponentGraph::build(st);
  std::vector<std::optional<VertexId>> partial{0, 1, std::nullopt, std::nullopt};
  const auto rep = action_on_components(lc, irs, st, g, partial);
  EXPECT_EQ(rep.images.size(), 1u);
  EXPECT_LT(rep.coverage, 1.0);
}

TEST(Action, ConjugatedCopyIsNatural) {
  // K on vertices 0..n-1 and a copy on n..2n-1 with labels g w g^-1; the
  // vertex map v -> v + n models conjugation by g.
  std::mt19937_64 rng(3);
  std::size_t mapped = 0;
  for (int i = 0; i < 50; ++i) {
    const auto base = fixtures::random_labeled_complex(rng, 5, 20, 2, 2);
    const FreeWord g = fixtures::random_word(rng, 2, 3);
    const VertexId n = 5;
    std::vector<Simplex> maximal;
    for (const auto& s : base.complex.maximal_simplices()) {
      maximal.push_back(s);
      Simplex t;
      for (VertexId v : s) t.push_back(v + n);
      maximal.push_back(t);
    }
    LabeledComplex lc;
    lc.complex = SimplicialComplex::closure_of(maximal);
    lc.labels = base.labels;
    for (const auto& w : base.labels) lc.labels.push_back(g * w * g.inverse());
    InternalRankCache cache;
    const auto irs = internal_ranks(lc, cache);
    const auto st = strata_components(lc, irs, 3);
    const auto graph = ComponentGraph::build(st);
    std::vector<std::optional<VertexId>> vmap(2 * n);
    for (VertexId v = 0; v < n; ++v) vmap[v] = v + n;
    const auto rep = action_on_components(lc, irs, st, graph, vmap);
    EXPECT_TRUE(rep.naturality_ok);
    EXPECT_TRUE(rep.ir_ok);
    EXPECT_TRUE(rep.strata_ok);
    EXPECT_TRUE(rep.edges_ok);
    for (const auto& im : rep.images) {
      ASSERT_TRUE(im.target.has_value());
      EXPECT_EQ(im.rank_source, im.rank_image);
    }
    mapped += rep.images.size();
  }
  EXPECT_GT(mapped, 100u);
}
