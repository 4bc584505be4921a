#pragma once

// Nerves of indexed covers and free-group labeled complexes: Theta, internal
// rank of simplices, the IR filtration and the top two IR strata.

#include <algorithm>
#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "kfree/complex.hpp"
#include "kfree/errors.hpp"
#include "kfree/feasibility.hpp"
#include "kfree/free_group.hpp"
#include "kfree/union_find.hpp"

namespace kfree {

/// Simplicial complex with a free-word label (primitive of a cyclic
/// subgroup) on every vertex.  Vertex ids index `labels`.
struct LabeledComplex {
  SimplicialComplex complex;
  std::vector<FreeWord> labels;
  /// Optional external identifier per vertex (cyclic label id in a table).
  std::vector<std::size_t> label_ids;

  void validate() const {
    for (VertexId v : complex.vertices())
      if (v >= labels.size())
        throw InputError("vertex " + std::to_string(v) + " has no label");
  }
};

/// A union of open simplices: just a set of simplices, not closed under faces.
using SaturatedSet = std::vector<Simplex>;

// ---------------------------------------------------------------------------
// Nerve

struct NerveOptions {
  std::size_t max_dimension = 8;
  bool abort_on_undecided = true;
};

struct NerveResult {
  SimplicialComplex complex;
  std::vector<Simplex> undecided;  ///< families left out (only when not aborting)
  std::size_t oracle_calls = 0;
};

using IntersectionOracle = std::function<Feasibility(const Simplex&)>;

/// Nerve of a cover indexed by 0..n-1.  Candidates of each dimension are
/// built from present faces, so the oracle is only asked about families all
/// of whose proper subfamilies meet.
inline NerveResult nerve(std::size_t n, const IntersectionOracle& oracle,
                         const NerveOptions& opt = {}) {
  NerveResult out;
  std::vector<Simplex> all;
  std::set<Simplex> present;
  std::vector<Simplex> level;

  auto decide = [&](const Simplex& s) {
    ++out.oracle_calls;
    const Feasibility f = oracle(s);
    if (f == Feasibility::undecided) {
      if (opt.abort_on_undecided)
        throw CertificationError("intersection of family " + to_string(s) +
                                 " could not be decided at the configured margins");
      out.undecided.push_back(s);
      return false;
    }
    return f == Feasibility::feasible;
  };

  for (std::size_t v = 0; v < n; ++v) {
    const Simplex s{static_cast<VertexId>(v)};
    if (decide(s)) level.push_back(s);
  }
  while (!level.empty()) {
    for (const auto& s : level) {
      present.insert(s);
      all.push_back(s);
    }
    const std::size_t dim = level.front().size();  // dimension of the next level
    std::vector<Simplex> next;
    // Join pairs sharing all but the last vertex.
    for (std::size_t i = 0; i < level.size(); ++i)
      for (std::size_t j = i + 1; j < level.size(); ++j) {
        const auto& a = level[i];
        const auto& b = level[j];
        if (!std::equal(a.begin(), a.end() - 1, b.begin())) break;
        Simplex c = a;
        c.push_back(b.back());
        bool faces_ok = true;
        for (std::size_t drop = 0; drop + 2 < c.size() && faces_ok; ++drop) {
          Simplex f = c;
          f.erase(f.begin() + static_cast<std::ptrdiff_t>(drop));
          faces_ok = present.count(f) != 0;
        }
        if (!faces_ok) continue;
        if (decide(c)) {
          if (dim > opt.max_dimension)
            throw CapExceeded("nerve has a simplex of dimension " + std::to_string(dim) +
                              " above the cap " + std::to_string(opt.max_dimension) +
                              "; expected finite dimension, likely a truncation artifact");
          next.push_back(std::move(c));
        }
      }
    level = std::move(next);
  }
  out.complex = SimplicialComplex::from_closed_family(all);
  return out;
}

/// Oracle for a family of cylinders: the tubes of `elements[v]`.
inline IntersectionOracle cylinder_oracle(std::vector<Isometry> elements, double lambda,
                                          FeasibilityOptions opt = {}) {
  return [elements = std::move(elements), lambda, opt](const Simplex& s) {
    std::vector<Isometry> sub;
    for (VertexId v : s) sub.push_back(elements.at(v));
    return cylinders_feasible(std::span<const Isometry>(sub), lambda, opt).verdict;
  };
}

// ---------------------------------------------------------------------------
// Theta and internal rank

namespace detail {
inline void add_labels(const LabeledComplex& lc, const Simplex& s, std::set<FreeWord>& keys) {
  for (VertexId v : s) keys.insert(subgroup_key(lc.labels.at(v)));
}
}  // namespace detail

/// Generators I_sigma of Theta(sigma), one per distinct cyclic subgroup.
inline std::vector<FreeWord> theta(const LabeledComplex& lc, const Simplex& s) {
  std::set<FreeWord> keys;
  detail::add_labels(lc, s, keys);
  return {keys.begin(), keys.end()};
}

/// I_W, the union of I_sigma over the simplices of W.
inline std::vector<FreeWord> theta(const LabeledComplex& lc, const SaturatedSet& w) {
  std::set<FreeWord> keys;
  for (const auto& s : w) detail::add_labels(lc, s, keys);
  return {keys.begin(), keys.end()};
}

inline std::size_t rank_theta(const LabeledComplex& lc, const SaturatedSet& w) {
  const auto gens = theta(lc, w);
  return rank(subgroup_from_words(std::span<const FreeWord>(gens)));
}

inline std::size_t rank_theta(const LabeledComplex& lc, const Simplex& s) {
  const auto gens = theta(lc, s);
  return rank(subgroup_from_words(std::span<const FreeWord>(gens)));
}

/// IR(sigma) = IR(I_sigma).
inline std::size_t internal_rank_of_simplex(const LabeledComplex& lc, const Simplex& s,
                                            InternalRankCache& cache) {
  const auto gens = theta(lc, s);
  return cache(std::span<const FreeWord>(gens));
}

inline std::size_t internal_rank_of_simplex(const LabeledComplex& lc, const Simplex& s) {
  InternalRankCache cache;
  return internal_rank_of_simplex(lc, s, cache);
}

/// IR(sigma) as the maximum of rank Theta(tau) over the faces tau of sigma.
inline std::size_t internal_rank_face_max(const LabeledComplex& lc, const Simplex& s) {
  std::size_t best = rank_theta(lc, s);
  for (const auto& f : proper_faces(s)) best = std::max(best, rank_theta(lc, f));
  return best;
}

/// IR of every simplex, indexed like complex.simplices().
inline std::vector<std::size_t> internal_ranks(const LabeledComplex& lc, InternalRankCache& cache) {
  std::vector<std::size_t> out;
  out.reserve(lc.complex.size());
  for (const auto& s : lc.complex.simplices()) out.push_back(internal_rank_of_simplex(lc, s, cache));
  return out;
}

/// K'_(m): simplices with IR <= m.  Throws if the result is not a complex,
/// which would contradict face monotonicity of IR.
inline SimplicialComplex filtered_subcomplex(const LabeledComplex& lc,
                                             const std::vector<std::size_t>& irs, std::size_t m) {
  std::vector<Simplex> keep;
  const auto& all = lc.complex.simplices();
  for (std::size_t i = 0; i < all.size(); ++i)
    if (irs.at(i) <= m) keep.push_back(all[i]);
  return SimplicialComplex::from_closed_family(keep);
}

inline SimplicialComplex filtered_subcomplex(const LabeledComplex& lc, std::size_t m) {
  InternalRankCache cache;
  return filtered_subcomplex(lc, internal_ranks(lc, cache), m);
}

// ---------------------------------------------------------------------------
// Strata

struct Strata {
  std::size_t k = 0;
  /// components[0] lists the components of X_{k-2}, components[1] of X_{k-1}.
  std::array<std::vector<SaturatedSet>, 2> components;
  /// Simplices with IR >= k.
  std::vector<Simplex> violations;

  std::size_t rank_of(std::size_t slot) const { return k - 2 + slot; }
};

/// Face-adjacency components of X_{k-2} and X_{k-1}.  Simplices of IR at
/// least k are reported as violations and left out.
inline Strata strata_components(const LabeledComplex& lc, const std::vector<std::size_t>& irs,
                                std::size_t k) {
  if (k < 2) throw InputError("k must be at least 2");
  Strata out;
  out.k = k;
  const auto& all = lc.complex.simplices();
  for (std::size_t i = 0; i < all.size(); ++i)
    if (irs.at(i) >= k) out.violations.push_back(all[i]);

  for (std::size_t slot = 0; slot < 2; ++slot) {
    const std::size_t r = k - 2 + slot;
    std::vector<std::size_t> members;
    std::map<std::size_t, std::size_t> local;  // simplex index -> member slot
    for (std::size_t i = 0; i < all.size(); ++i)
      if (irs[i] == r) {
        local.emplace(i, members.size());
        members.push_back(i);
      }
    UnionFind uf(members.size());
    for (std::size_t m = 0; m < members.size(); ++m)
      for (const auto& f : proper_faces(all[members[m]])) {
        auto it = local.find(lc.complex.index_of(f));
        if (it != local.end()) uf.unite(m, it->second);
      }
    std::map<std::size_t, std::size_t> comp_of_root;
    auto& comps = out.components[slot];
    for (std::size_t m = 0; m < members.size(); ++m) {
      const std::size_t root = uf.find(m);
      auto [it, fresh] = comp_of_root.emplace(root, comps.size());
      if (fresh) comps.emplace_back();
      comps[it->second].push_back(all[members[m]]);
    }
  }
  return out;
}

}  // namespace kfree
