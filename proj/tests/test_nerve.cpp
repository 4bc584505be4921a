#include <random>
#include <set>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "kfree/complex.hpp"
#include "kfree/nerve.hpp"

using namespace kfree;

namespace {

FreeWord W(const char* s) { return FreeWord::parse(s); }

LabeledComplex labeled(std::vector<Simplex> maximal, std::vector<const char*> labels) {
  LabeledComplex lc;
  lc.complex = SimplicialComplex::closure_of(maximal);
  for (const char* l : labels) lc.labels.push_back(W(l));
  return lc;
}

std::vector<std::size_t> betti(const SimplicialComplex& cx) { return homology_z2(cx); }

const double kLog5 = std::log(5.0);

}  // namespace

TEST(Complex, ClosureAndAudit) {
  const auto cx = SimplicialComplex::closure_of({{2, 0, 1}});
  EXPECT_EQ(cx.size(), 7u);
  EXPECT_EQ(cx.dimension(), 2);
  EXPECT_TRUE(cx.is_downward_closed());
  EXPECT_TRUE(cx.contains({0, 2}));
  EXPECT_EQ(cx.maximal_simplices(), (std::vector<Simplex>{{0, 1, 2}}));
  EXPECT_THROW(SimplicialComplex::from_closed_family({{0, 1}, {0}}), InputError);
  EXPECT_EQ(SimplicialComplex().dimension(), -1);
}

TEST(Complex, OrderingAndIndex) {
  const auto cx = SimplicialComplex::closure_of({{0, 1}, {1, 2}});
  const auto& s = cx.simplices();
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(cx.index_of(s[i]), i);
  for (std::size_t i = 1; i < s.size(); ++i)
    EXPECT_TRUE(s[i - 1].size() < s[i].size() || (s[i - 1].size() == s[i].size() && s[i - 1] < s[i]));
  EXPECT_THROW(cx.index_of({0, 2}), InputError);
}

TEST(Complex, TextRoundTrip) {
  const auto cx = SimplicialComplex::closure_of({{0, 1, 2}, {2, 3}, {4}});
  EXPECT_EQ(cx.to_text(), "0 1 2\n2 3\n4\n");
  const auto back = SimplicialComplex::from_text(cx.to_text());
  EXPECT_EQ(back.simplices(), cx.simplices());
}

TEST(Homology, Examples) {
  EXPECT_EQ(betti(SimplicialComplex::closure_of({{0, 1, 2}})), (std::vector<std::size_t>{1, 0, 0}));
  EXPECT_EQ(betti(SimplicialComplex::closure_of({{0, 1}, {1, 2}, {0, 2}})), (std::vector<std::size_t>{1, 1}));
  // Octahedron boundary: a 2-sphere.
  const auto octa = SimplicialComplex::closure_of(
      {{0, 2, 4}, {0, 2, 5}, {0, 3, 4}, {0, 3, 5}, {1, 2, 4}, {1, 2, 5}, {1, 3, 4}, {1, 3, 5}});
  EXPECT_EQ(betti(octa), (std::vector<std::size_t>{1, 0, 1}));
  EXPECT_EQ(betti(SimplicialComplex::closure_of({{0}, {1}, {2, 3}})), (std::vector<std::size_t>{3, 0}));
  EXPECT_TRUE(betti(SimplicialComplex()).empty());
  EXPECT_TRUE(acyclic_z2(SimplicialComplex::closure_of({{0, 1, 2, 3}})));
  EXPECT_THROW(homology_z2(octa, 10), CapExceeded);
}

TEST(Homology, EulerCharacteristic) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto lc = fixtures::random_labeled_complex(rng, 7, 30);
    if (lc.complex.empty()) continue;
    const auto b = betti(lc.complex);
    long chi_b = 0, chi_c = 0;
    for (std::size_t d = 0; d < b.size(); ++d) chi_b += (d % 2 ? -1 : 1) * static_cast<long>(b[d]);
    for (const auto& s : lc.complex.simplices()) chi_c += (s.size() % 2 ? 1 : -1);
    EXPECT_EQ(chi_b, chi_c);
  }
}

TEST(Nerve, IntervalsOnALine) {
  // Pairwise-meeting intervals on a line share a point, so the nerve fills in.
  const auto full = nerve(3, fixtures::interval_oracle({{0, 2}, {1, 3}, {-1, 1.5}}));
  EXPECT_EQ(full.complex.maximal_simplices(), (std::vector<Simplex>{{0, 1, 2}}));
  const auto path = nerve(3, fixtures::interval_oracle({{0, 2}, {1, 3}, {2.5, 4}}));
  EXPECT_EQ(path.complex.maximal_simplices(), (std::vector<Simplex>{{0, 1}, {1, 2}}));
  EXPECT_EQ(betti(path.complex), (std::vector<std::size_t>{1, 0}));
}

TEST(Nerve, ThreeArcsGiveACircle) {
  const auto res = nerve(3, fixtures::arc_oracle({{0, 150}, {120, 270}, {240, 390}}));
  EXPECT_EQ(res.complex.size(), 6u);
  EXPECT_EQ(res.complex.dimension(), 1);
  EXPECT_EQ(betti(res.complex), (std::vector<std::size_t>{1, 1}));
}

TEST(Nerve, SingleAndNestedCylinders) {
  const auto g1 = Isometry::diagonal(std::exp(0.15));
  const auto g2 = Isometry::diagonal(std::polar(std::exp(0.3), 0.4));
  const auto one = nerve(1, cylinder_oracle({g1}, kLog5));
  EXPECT_EQ(one.complex.simplices(), (std::vector<Simplex>{{0}}));
  const auto two = nerve(2, cylinder_oracle({g1, g2}, kLog5));
  EXPECT_EQ(two.complex.maximal_simplices(), (std::vector<Simplex>{{0, 1}}));
  // Non-faithful indexing: the same tube twice still gives two vertices.
  const auto twin = nerve(2, cylinder_oracle({g1, g1}, kLog5));
  EXPECT_EQ(twin.complex.maximal_simplices(), (std::vector<Simplex>{{0, 1}}));
}

TEST(Nerve, UndecidedAbortsOrIsCollected) {
  auto oracle = [](const Simplex& s) { return s.size() == 2 ? Feasibility::undecided : Feasibility::feasible; };
  EXPECT_THROW(nerve(3, oracle), CertificationError);
  const auto res = nerve(3, oracle, {8, false});
  EXPECT_EQ(res.undecided.size(), 3u);
  EXPECT_EQ(res.complex.dimension(), 0);
}

TEST(Nerve, DimensionCap) {
  auto all = [](const Simplex&) { return Feasibility::feasible; };
  EXPECT_NO_THROW(nerve(4, all, {3, true}));
  EXPECT_THROW(nerve(5, all, {3, true}), CapExceeded);
}

TEST(Nerve, DefiningPropertyOnRandomSubfamilies) {
  std::mt19937_64 rng(3);
  std::vector<Isometry> elems;
  const Point center{0.2, -0.1, 1.0};
  // A mix of tubes through one point and tubes near it.
  for (const auto& g : fixtures::star_cover(rng, 4, center)) elems.push_back(g);
  std::normal_distribution<double> n(0.0, 0.8);
  for (const auto& g : fixtures::star_cover(rng, 4, exp_at(center, n(rng), n(rng), n(rng)))) elems.push_back(g);
  const auto oracle = cylinder_oracle(elems, kLog5);
  const auto res = nerve(elems.size(), oracle);
  std::uniform_int_distribution<int> bit(0, 1);
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    Simplex s;
    for (VertexId v = 0; v < elems.size(); ++v)
      if (bit(rng)) s.push_back(v);
    if (s.empty()) continue;
    const auto f = oracle(s);
    if (f == Feasibility::undecided) continue;
    ++checked;
    EXPECT_EQ(res.complex.contains(s), f == Feasibility::feasible) << to_string(s);
  }
  EXPECT_GT(checked, 80);
}

TEST(Nerve, ConvexCoversAreAcyclic) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 5; ++i) {
    const auto star = nerve(5, cylinder_oracle(fixtures::star_cover(rng, 5, Point{0, 0, 1}), kLog5));
    EXPECT_EQ(star.complex.dimension(), 4);
    EXPECT_EQ(betti(star.complex), (std::vector<std::size_t>{1, 0, 0, 0, 0}));
    const auto chain = nerve(6, cylinder_oracle(fixtures::chain_cover(rng, 6, kLog5), kLog5));
    EXPECT_EQ(chain.complex.dimension(), 1);
    EXPECT_EQ(chain.complex.of_dimension(1).size(), 5u);
    EXPECT_EQ(betti(chain.complex), (std::vector<std::size_t>{1, 0}));
  }
}

TEST(Link, Examples) {
  const auto edge = SimplicialComplex::closure_of({{0, 1}});
  EXPECT_EQ(link(edge, {0}).simplices(), (std::vector<Simplex>{{1}}));
  const auto tri = SimplicialComplex::closure_of({{0, 1, 2}});
  EXPECT_EQ(link(tri, {0}).maximal_simplices(), (std::vector<Simplex>{{1, 2}}));
  EXPECT_EQ(link(tri, {0}).size(), 3u);
  EXPECT_TRUE(link(tri, {0, 1, 2}).empty());
  EXPECT_THROW(link(edge, {2}), InputError);
}

TEST(Link, EqualsNerveOfRestrictedCover) {
  std::mt19937_64 rng(5);
  std::vector<Isometry> elems;
  const Point center{0.0, 0.0, 1.0};
  for (const auto& g : fixtures::star_cover(rng, 3, center)) elems.push_back(g);
  for (const auto& g : fixtures::star_cover(rng, 3, exp_at(center, 0.9, 0.0, 0.0))) elems.push_back(g);
  const auto oracle = cylinder_oracle(elems, kLog5);
  const auto k = nerve(elems.size(), oracle).complex;
  int nontrivial = 0;
  for (const auto& sigma : k.simplices()) {
    // Cover of Z_sigma by Z_C, C outside sigma.
    std::vector<VertexId> rest;
    for (VertexId v = 0; v < elems.size(); ++v)
      if (!std::binary_search(sigma.begin(), sigma.end(), v)) rest.push_back(v);
    const auto restricted = nerve(rest.size(), [&](const Simplex& t) {
      std::vector<VertexId> u(sigma);
      for (VertexId i : t) u.push_back(rest[i]);
      return oracle(make_simplex(u));
    });
    std::vector<Simplex> mapped;
    for (const auto& t : restricted.complex.simplices()) {
      Simplex m;
      for (VertexId i : t) m.push_back(rest[i]);
      mapped.push_back(make_simplex(m));
    }
    const auto lk = link(k, sigma);
    EXPECT_EQ(SimplicialComplex::closure_of(mapped).simplices(), lk.simplices()) << to_string(sigma);
    for (VertexId v : lk.vertices()) EXPECT_FALSE(std::binary_search(sigma.begin(), sigma.end(), v));
    nontrivial += !lk.empty();
  }
  EXPECT_GT(nontrivial, 0);
}

TEST(Theta, Examples) {
  const auto lc = labeled({{0, 1}, {1, 2}}, {"a", "b", "BA"});
  EXPECT_EQ(theta(lc, Simplex{0, 1}), (std::vector<FreeWord>{W("a"), W("b")}));
  // Face generators are contained in the simplex generators.
  const auto face = theta(lc, Simplex{1}), full = theta(lc, Simplex{0, 1});
  EXPECT_TRUE(std::includes(full.begin(), full.end(), face.begin(), face.end()));
  const SaturatedSet w{{0, 1}, {1, 2}};
  EXPECT_EQ(theta(lc, w), (std::vector<FreeWord>{W("a"), W("b"), W("ab")}));
  EXPECT_EQ(rank_theta(lc, w), 2u);
}

TEST(InternalRankOfSimplex, Examples) {
  const auto lc = labeled({{0, 1}, {0, 2}}, {"a", "a", "b"});
  EXPECT_EQ(internal_rank_of_simplex(lc, {0}), 1u);
  EXPECT_EQ(internal_rank_of_simplex(lc, {0, 1}), 1u);
  EXPECT_EQ(internal_rank_of_simplex(lc, {0, 2}), 2u);
}

TEST(InternalRankOfSimplex, MatchesFaceMaximum) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 100; ++i) {
    const auto lc = fixtures::random_labeled_complex(rng, 6, 30);
    InternalRankCache cache;
    for (const auto& s : lc.complex.simplices())
      EXPECT_EQ(internal_rank_of_simplex(lc, s, cache), internal_rank_face_max(lc, s)) << to_string(s);
  }
}

TEST(Filtration, Examples) {
  const auto lc = labeled({{0, 1, 2}}, {"a", "b", "ab"});
  EXPECT_EQ(filtered_subcomplex(lc, 5).simplices(), lc.complex.simplices());
  EXPECT_TRUE(filtered_subcomplex(lc, 0).empty());
  // Vertices have IR 1; every edge and the triangle have IR 2.
  EXPECT_EQ(filtered_subcomplex(lc, 1).simplices(), (std::vector<Simplex>{{0}, {1}, {2}}));
}

TEST(Filtration, MonotoneNested) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const auto lc = fixtures::random_labeled_complex(rng, 6, 30);
    InternalRankCache cache;
    const auto irs = internal_ranks(lc, cache);
    for (const auto& s : lc.complex.simplices())
      for (const auto& f : proper_faces(s))
        EXPECT_LE(irs[lc.complex.index_of(f)], irs[lc.complex.index_of(s)]);
    for (std::size_t m = 0; m < 4; ++m) {
      const auto a = filtered_subcomplex(lc, irs, m), b = filtered_subcomplex(lc, irs, m + 1);
      EXPECT_TRUE(a.is_downward_closed());
      for (const auto& s : a.simplices()) EXPECT_TRUE(b.contains(s));
    }
  }
}

TEST(Strata, Examples) {
  // k = 3: vertices labeled a and b have IR 1, the edge IR 2.
  const auto lc = labeled({{0, 1}}, {"a", "b"});
  InternalRankCache cache;
  const auto st = strata_components(lc, internal_ranks(lc, cache), 3);
  EXPECT_EQ(st.components[0].size(), 2u);
  EXPECT_EQ(st.components[1].size(), 1u);
  EXPECT_TRUE(st.violations.empty());

  // Vertices always have IR 1, so "everything in the top stratum" needs
  // k = 2: all labels in one cyclic subgroup.
  const auto lc2 = labeled({{0, 1}, {1, 2}}, {"a", "aa", "A"});
  const auto st2 = strata_components(lc2, internal_ranks(lc2, cache), 2);
  EXPECT_TRUE(st2.components[0].empty());
  ASSERT_EQ(st2.components[1].size(), 1u);
  EXPECT_EQ(st2.components[1][0].size(), 5u);

  const auto st3 = strata_components(LabeledComplex{}, {}, 3);
  EXPECT_TRUE(st3.components[0].empty());
  EXPECT_TRUE(st3.components[1].empty());

  const auto lc4 = labeled({{0, 1, 2}}, {"a", "b", "c"});
  const auto st4 = strata_components(lc4, internal_ranks(lc4, cache), 3);
  EXPECT_EQ(st4.violations, (std::vector<Simplex>{{0, 1, 2}}));
}
