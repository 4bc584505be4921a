#pragma once

// Finite abstract simplicial complexes stored as a downward-closed family of
// vertex sets, with links and mod-2 homology.

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kfree/errors.hpp"

namespace kfree {

using VertexId = std::uint32_t;
/// Sorted, duplicate-free vertex list.
using Simplex = std::vector<VertexId>;

inline Simplex make_simplex(std::vector<VertexId> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  if (v.empty()) throw InputError("empty simplex");
  return v;
}

inline std::size_t dimension(const Simplex& s) { return s.size() - 1; }

/// Proper nonempty faces of `s`.
inline std::vector<Simplex> proper_faces(const Simplex& s) {
  std::vector<Simplex> out;
  const std::size_t n = s.size();
  if (n > 30) throw CapExceeded("simplex too large to enumerate faces");
  const std::uint32_t full = (1u << n) - 1u;
  for (std::uint32_t mask = 1; mask < full; ++mask) {
    Simplex f;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) f.push_back(s[i]);
    out.push_back(std::move(f));
  }
  return out;
}

/// Whether a is a proper face of b.
inline bool is_proper_face(const Simplex& a, const Simplex& b) {
  return a.size() < b.size() && std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline std::string to_string(const Simplex& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(s[i]);
  }
  return out + "}";
}

class SimplicialComplex {
 public:
  SimplicialComplex() = default;

  /// The complex generated by `simplices` (all their faces are added).
  static SimplicialComplex closure_of(const std::vector<Simplex>& simplices) {
    std::set<Simplex> all;
    for (const auto& s0 : simplices) {
      const Simplex s = make_simplex(s0);
      if (all.count(s)) continue;
      all.insert(s);
      for (auto& f : proper_faces(s)) all.insert(std::move(f));
    }
    return SimplicialComplex(std::move(all));
  }

  /// Takes `simplices` as-is; throws if the family is not downward closed.
  static SimplicialComplex from_closed_family(const std::vector<Simplex>& simplices) {
    std::set<Simplex> all;
    for (const auto& s : simplices) all.insert(make_simplex(s));
    SimplicialComplex c(std::move(all));
    if (auto bad = c.first_missing_face())
      throw InputError("family is not closed under faces: " + to_string(*bad) + " missing");
    return c;
  }

  const std::vector<Simplex>& simplices() const { return simplices_; }
  std::size_t size() const { return simplices_.size(); }
  bool empty() const { return simplices_.empty(); }

  bool contains(const Simplex& s) const { return index_.count(s) != 0; }

  /// Position of `s` in simplices(), which is ordered by dimension then
  /// lexicographically.
  std::size_t index_of(const Simplex& s) const {
    auto it = index_.find(s);
    if (it == index_.end()) throw InputError("simplex " + to_string(s) + " not in complex");
    return it->second;
  }

  /// -1 for the empty complex.
  int dimension() const {
    return simplices_.empty() ? -1 : static_cast<int>(simplices_.back().size()) - 1;
  }

  std::vector<VertexId> vertices() const {
    std::vector<VertexId> out;
    for (const auto& s : simplices_)
      if (s.size() == 1) out.push_back(s[0]);
    return out;
  }

  std::vector<Simplex> of_dimension(std::size_t d) const {
    std::vector<Simplex> out;
    for (const auto& s : simplices_)
      if (s.size() == d + 1) out.push_back(s);
    return out;
  }

  std::vector<Simplex> maximal_simplices() const {
    std::vector<Simplex> out;
    for (const auto& s : simplices_) {
      bool maximal = true;
      for (const auto& t : simplices_)
        if (t.size() == s.size() + 1 && std::includes(t.begin(), t.end(), s.begin(), s.end())) {
          maximal = false;
          break;
        }
      if (maximal) out.push_back(s);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Audit of the defining property; returns a missing face if any.
  std::optional<Simplex> first_missing_face() const {
    for (const auto& s : simplices_)
      if (s.size() > 1)
        for (std::size_t i = 0; i < s.size(); ++i) {
          Simplex f = s;
          f.erase(f.begin() + static_cast<std::ptrdiff_t>(i));
          if (!contains(f)) return f;
        }
    return std::nullopt;
  }

  bool is_downward_closed() const { return !first_missing_face().has_value(); }

  /// Sub-family selected by `keep`; not necessarily a complex.
  template <class Pred>
  std::vector<Simplex> select(Pred keep) const {
    std::vector<Simplex> out;
    for (const auto& s : simplices_)
      if (keep(s)) out.push_back(s);
    return out;
  }

  /// Line-oriented text: one sorted maximal simplex per line.
  std::string to_text() const {
    std::ostringstream os;
    for (const auto& s : maximal_simplices()) {
      for (std::size_t i = 0; i < s.size(); ++i) os << (i ? " " : "") << s[i];
      os << '\n';
    }
    return os.str();
  }

  static SimplicialComplex from_text(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::vector<Simplex> maximal;
    while (std::getline(is, line)) {
      std::istringstream ls(line);
      std::vector<VertexId> v;
      long long x;
      while (ls >> x) {
        if (x < 0) throw InputError("negative vertex id");
        v.push_back(static_cast<VertexId>(x));
      }
      if (!v.empty()) maximal.push_back(v);
    }
    return closure_of(maximal);
  }

 private:
  explicit SimplicialComplex(std::set<Simplex> all) {
    simplices_.assign(all.begin(), all.end());
    std::stable_sort(simplices_.begin(), simplices_.end(),
                     [](const Simplex& a, const Simplex& b) { return a.size() < b.size(); });
    for (std::size_t i = 0; i < simplices_.size(); ++i) index_.emplace(simplices_[i], i);
  }

  std::vector<Simplex> simplices_;
  std::map<Simplex, std::size_t> index_;
};

/// link(sigma) = { tau : tau disjoint from sigma, tau u sigma in cx }.
inline SimplicialComplex link(const SimplicialComplex& cx, const Simplex& sigma) {
  if (!cx.contains(sigma)) throw InputError("simplex " + to_string(sigma) + " not in complex");
  std::vector<Simplex> out;
  for (const auto& s : cx.simplices()) {
    if (!std::includes(s.begin(), s.end(), sigma.begin(), sigma.end()) || s.size() == sigma.size())
      continue;
    Simplex tau;
    std::set_difference(s.begin(), s.end(), sigma.begin(), sigma.end(), std::back_inserter(tau));
    out.push_back(std::move(tau));
  }
  return SimplicialComplex::closure_of(out);
}

/// Betti numbers over the two-element field, b_0 .. b_dim.  The empty
/// complex has no Betti numbers.
inline std::vector<std::size_t> homology_z2(const SimplicialComplex& cx, std::size_t simplex_cap = 200000) {
  if (cx.size() > simplex_cap)
    throw CapExceeded("complex has " + std::to_string(cx.size()) + " simplices, cap is " +
                      std::to_string(simplex_cap));
  const int dim = cx.dimension();
  if (dim < 0) return {};
  std::vector<std::vector<Simplex>> by_dim(static_cast<std::size_t>(dim) + 1);
  for (const auto& s : cx.simplices()) by_dim[s.size() - 1].push_back(s);
  std::vector<std::map<Simplex, std::size_t>> pos(by_dim.size());
  for (std::size_t d = 0; d < by_dim.size(); ++d)
    for (std::size_t i = 0; i < by_dim[d].size(); ++i) pos[d][by_dim[d][i]] = i;

  // rank of the boundary map from dimension d to d-1, by column elimination
  // on bit-packed columns.
  auto boundary_rank = [&](std::size_t d) -> std::size_t {
    if (d == 0 || d >= by_dim.size()) return 0;
    const std::size_t rows = by_dim[d - 1].size();
    const std::size_t words = (rows + 63) / 64;
    std::map<std::size_t, std::vector<std::uint64_t>> pivots;  // lowest row -> column
    std::size_t r = 0;
    for (const auto& s : by_dim[d]) {
      std::vector<std::uint64_t> col(words, 0);
      for (std::size_t i = 0; i < s.size(); ++i) {
        Simplex f = s;
        f.erase(f.begin() + static_cast<std::ptrdiff_t>(i));
        const std::size_t row = pos[d - 1].at(f);
        col[row / 64] ^= (std::uint64_t{1} << (row % 64));
      }
      for (;;) {
        std::size_t low = rows;
        for (std::size_t w = words; w-- > 0;)
          if (col[w]) {
            low = w * 64 + (63 - static_cast<std::size_t>(__builtin_clzll(col[w])));
            break;
          }
        if (low == rows) break;
        auto it = pivots.find(low);
        if (it == pivots.end()) {
          pivots.emplace(low, std::move(col));
          ++r;
          break;
        }
        for (std::size_t w = 0; w < words; ++w) col[w] ^= it->second[w];
      }
    }
    return r;
  };

  std::vector<std::size_t> ranks(by_dim.size() + 1, 0);
  for (std::size_t d = 1; d < by_dim.size(); ++d) ranks[d] = boundary_rank(d);
  std::vector<std::size_t> betti(by_dim.size());
  for (std::size_t d = 0; d < by_dim.size(); ++d)
    betti[d] = by_dim[d].size() - ranks[d] - ranks[d + 1];
  return betti;
}

/// Homology proxy for contractibility: b_0 = 1 and every higher Betti number
/// vanishes.
inline bool acyclic_z2(const SimplicialComplex& cx) {
  const auto b = homology_z2(cx);
  if (b.empty() || b[0] != 1) return false;
  return std::all_of(b.begin() + 1, b.end(), [](std::size_t x) { return x == 0; });
}

}  // namespace kfree
