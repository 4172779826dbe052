#pragma once

// Order-theoretic queries on component posets and the cross-resolution
// refinement signature.

#include <algorithm>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chainposet/chaingraph.hpp"

namespace chainposet {

using CoverPair = std::pair<std::size_t, std::size_t>;  // (lower, upper)

inline bool is_linear(const ComponentPoset& p) {
  for (std::size_t a = 0; a < p.size(); ++a)
    for (std::size_t b = a + 1; b < p.size(); ++b)
      if (!p.comparable(a, b)) return false;
  return true;
}

inline std::vector<std::size_t> minimal_elements(const ComponentPoset& p) {
  std::vector<std::size_t> out;
  for (std::size_t q = 0; q < p.size(); ++q)
    if (p.count_below(q) == 0) out.push_back(q);
  return out;
}

inline std::vector<std::size_t> maximal_elements(const ComponentPoset& p) {
  std::vector<std::size_t> out;
  for (std::size_t q = 0; q < p.size(); ++q)
    if (p.count_above(q) == 0) out.push_back(q);
  return out;
}

/// (a, b) with a < b and nothing strictly between.
inline std::vector<CoverPair> hasse_covers(const ComponentPoset& p) {
  std::vector<CoverPair> out;
  const std::size_t n = p.size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (!p.less(a, b)) continue;
      bool covered = true;
      for (std::size_t c = 0; c < n && covered; ++c)
        if (p.less(a, c) && p.less(c, b)) covered = false;
      if (covered) out.push_back({a, b});
    }
  }
  return out;
}

/// Same components, reversed order.
inline ComponentPoset dual(const ComponentPoset& p) {
  ComponentPoset d = p;
  d.below_ = BitMatrix(p.size());
  for (std::size_t a = 0; a < p.size(); ++a)
    for (std::size_t b = 0; b < p.size(); ++b)
      if (p.less(a, b)) d.below_.set(a, b);  // now b < a
  return d;
}

/// Component ids from bottom to top; requires a linear poset.
inline std::vector<std::size_t> linear_sequence(const ComponentPoset& p) {
  if (!is_linear(p)) throw std::invalid_argument("poset is not linear");
  std::vector<std::size_t> ids(p.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  std::sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) { return p.less(a, b); });
  return ids;
}

/// Order type of a finite chain, i.e. its number of elements.
inline std::size_t linear_order_type(const ComponentPoset& p) {
  if (!is_linear(p)) throw std::invalid_argument("linear_order_type requires a linear poset");
  return p.size();
}

// ---------------------------------------------------------------------------
// Isomorphism

enum class IsoVerdict { Isomorphic, NotIsomorphic, ProbablyIsomorphic };

inline std::string to_string(IsoVerdict v) {
  switch (v) {
    case IsoVerdict::Isomorphic: return "isomorphic";
    case IsoVerdict::NotIsomorphic: return "not_isomorphic";
    case IsoVerdict::ProbablyIsomorphic: return "probably_isomorphic";
  }
  return "?";
}

inline constexpr std::size_t kExactIsomorphismLimit = 64;

namespace detail {

// Longest chain ending at each element (1 for minimal elements).
inline std::vector<std::size_t> heights(const ComponentPoset& p) {
  std::vector<std::size_t> order(p.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return p.count_below(a) < p.count_below(b); });
  std::vector<std::size_t> h(p.size(), 1);
  for (std::size_t i : order)
    for (std::size_t j = 0; j < p.size(); ++j)
      if (p.less(j, i)) h[i] = std::max(h[i], h[j] + 1);
  return h;
}

struct PosetInvariants {
  std::size_t size = 0;
  std::size_t pairs = 0;
  std::vector<std::pair<std::size_t, std::size_t>> degrees;  // sorted (below, above)
  std::vector<std::size_t> level_profile;                     // elements per height
  friend bool operator==(const PosetInvariants&, const PosetInvariants&) = default;
};

inline PosetInvariants invariants(const ComponentPoset& p) {
  PosetInvariants inv;
  inv.size = p.size();
  for (std::size_t i = 0; i < p.size(); ++i) {
    inv.degrees.push_back({p.count_below(i), p.count_above(i)});
    inv.pairs += p.count_below(i);
  }
  std::sort(inv.degrees.begin(), inv.degrees.end());
  for (std::size_t h : heights(p)) {
    if (inv.level_profile.size() < h) inv.level_profile.resize(h, 0);
    ++inv.level_profile[h - 1];
  }
  return inv;
}

inline bool extend_isomorphism(const ComponentPoset& p, const ComponentPoset& q,
                               const std::vector<std::size_t>& order,
                               const std::vector<std::pair<std::size_t, std::size_t>>& dp,
                               const std::vector<std::pair<std::size_t, std::size_t>>& dq,
                               std::vector<std::size_t>& image, std::vector<bool>& used,
                               std::size_t depth) {
  if (depth == order.size()) return true;
  const std::size_t x = order[depth];
  for (std::size_t y = 0; y < q.size(); ++y) {
    if (used[y] || dq[y] != dp[x]) continue;
    bool consistent = true;
    for (std::size_t k = 0; k < depth && consistent; ++k) {
      const std::size_t u = order[k];
      if (p.less(u, x) != q.less(image[u], y) || p.less(x, u) != q.less(y, image[u])) consistent = false;
    }
    if (!consistent) continue;
    image[x] = y;
    used[y] = true;
    if (extend_isomorphism(p, q, order, dp, dq, image, used, depth + 1)) return true;
    used[y] = false;
  }
  return false;
}

}  // namespace detail

/// Exact backtracking search up to 64 components; beyond that only canonical
/// invariants are compared and a match is reported as ProbablyIsomorphic.
inline IsoVerdict order_isomorphic(const ComponentPoset& p, const ComponentPoset& q) {
  if (p.size() != q.size()) return IsoVerdict::NotIsomorphic;
  if (!(detail::invariants(p) == detail::invariants(q))) return IsoVerdict::NotIsomorphic;
  if (p.size() > kExactIsomorphismLimit) return IsoVerdict::ProbablyIsomorphic;

  std::vector<std::pair<std::size_t, std::size_t>> dp(p.size()), dq(q.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    dp[i] = {p.count_below(i), p.count_above(i)};
    dq[i] = {q.count_below(i), q.count_above(i)};
  }
  // Most constrained first: rare degree pairs, then comparability-rich elements.
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> frequency;
  for (const auto& d : dp) ++frequency[d];
  std::vector<std::size_t> order(p.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (frequency[dp[a]] != frequency[dp[b]]) return frequency[dp[a]] < frequency[dp[b]];
    return dp[a].first + dp[a].second > dp[b].first + dp[b].second;
  });
  std::vector<std::size_t> image(p.size());
  std::vector<bool> used(q.size(), false);
  return detail::extend_isomorphism(p, q, order, dp, dq, image, used, 0) ? IsoVerdict::Isomorphic
                                                                         : IsoVerdict::NotIsomorphic;
}

// ---------------------------------------------------------------------------
// Refinement traces

struct TraceLevel {
  Grid grid;
  Rational eps;
  ComponentPoset poset;
  std::size_t resolution() const { return grid.size(); }
};

struct RefinementTrace {
  std::vector<TraceLevel> levels;
  // matching[k][c]: component at level k+1 whose cells hold the representative
  // of component c at level k.
  std::vector<std::vector<std::optional<std::size_t>>> matching;
};

namespace detail {

inline std::vector<std::optional<std::size_t>> match_levels(const TraceLevel& coarse, const TraceLevel& fine) {
  std::vector<std::size_t> owner(fine.grid.size(), SIZE_MAX);
  for (const auto& comp : fine.poset.components())
    for (auto cell : comp.cells) owner[cell] = comp.id;

  std::vector<std::optional<std::size_t>> out(coarse.poset.size());
  std::vector<bool> taken(fine.poset.size(), false);
  for (const auto& comp : coarse.poset.components()) {
    const Rational& x = comp.representative;
    const auto cell = fine.grid.cell_of(x);
    if (!cell) continue;
    std::vector<std::size_t> candidates{*cell};
    // Cells are closed: a representative on a shared endpoint touches both.
    if (*cell > 0 && fine.grid.cell_lo(*cell) == x) candidates.push_back(*cell - 1);
    for (auto c : candidates) {
      const std::size_t target = owner[c];
      if (target == SIZE_MAX || taken[target]) continue;
      out[comp.id] = target;
      taken[target] = true;
      break;
    }
  }
  return out;
}

}  // namespace detail

/// Orders the levels by resolution and matches components between
/// consecutive levels by representative-point containment.
inline RefinementTrace make_trace(std::vector<TraceLevel> levels) {
  for (std::size_t k = 1; k < levels.size(); ++k)
    if (!(levels[k].resolution() > levels[k - 1].resolution()))
      throw std::invalid_argument("trace resolutions must strictly increase");
  RefinementTrace trace{std::move(levels), {}};
  for (std::size_t k = 0; k + 1 < trace.levels.size(); ++k)
    trace.matching.push_back(detail::match_levels(trace.levels[k], trace.levels[k + 1]));
  return trace;
}

class SignatureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PersistentPair {
  std::size_t lower = 0;  // ids at the coarsest level
  std::size_t upper = 0;
  Rational lower_representative;
  Rational upper_representative;
  std::vector<Interval> gaps;  // the unrefined gap at every level
};

struct DensitySignature {
  bool dense_growth = false;
  std::size_t covers_checked = 0;
  std::size_t covers_refined = 0;
  std::size_t covers_unmatched = 0;
  std::vector<std::size_t> component_counts;
  std::vector<PersistentPair> persistent_pairs;
};

namespace detail {

// Open gap between the hulls of two components, as the closed hull [lo, hi].
inline std::optional<Interval> gap_between(const ChainComponent& a, const ChainComponent& b) {
  if (a.hull.hi < b.hull.lo) return Interval{a.hull.hi, b.hull.lo};
  if (b.hull.hi < a.hull.lo) return Interval{b.hull.hi, a.hull.lo};
  return std::nullopt;
}

// A fine component sits strictly between the matched ends in the order and
// inside the coarse gap in space.
inline bool cover_refined(const ComponentPoset& fine, std::size_t lo, std::size_t hi, const Interval& gap) {
  for (const auto& k : fine.components()) {
    if (!fine.less(lo, k.id) || !fine.less(k.id, hi)) continue;
    if (gap.contains(k.hull)) return true;
  }
  return false;
}

}  // namespace detail

/// Tests whether every Hasse cover at each level gains an intermediate
/// component at the next level, and tracks covers whose gap is never filled.
inline DensitySignature density_signature(const RefinementTrace& trace) {
  if (trace.levels.size() < 2) throw SignatureError("density signature needs at least two levels");
  for (std::size_t k = 0; k < trace.levels.size(); ++k)
    if (!is_linear(trace.levels[k].poset))
      throw SignatureError("level " + std::to_string(k) + " poset is not linear");

  DensitySignature sig;
  sig.dense_growth = true;
  for (const auto& lvl : trace.levels) sig.component_counts.push_back(lvl.poset.size());

  struct Tracked {
    PersistentPair pair;
    Interval gap;
    bool alive = true;
  };
  std::vector<Tracked> tracked;
  {
    const auto& first = trace.levels.front().poset;
    for (const auto& [lo, hi] : hasse_covers(first)) {
      PersistentPair pp{lo, hi, first.component(lo).representative, first.component(hi).representative, {}};
      const auto gap = detail::gap_between(first.component(lo), first.component(hi));
      if (!gap) continue;
      pp.gaps.push_back(*gap);
      tracked.push_back({std::move(pp), *gap, true});
    }
  }

  for (std::size_t k = 0; k + 1 < trace.levels.size(); ++k) {
    const auto& coarse = trace.levels[k].poset;
    const auto& fine = trace.levels[k + 1].poset;
    const auto& match = trace.matching[k];
    for (const auto& [lo, hi] : hasse_covers(coarse)) {
      ++sig.covers_checked;
      if (!match[lo] || !match[hi]) {
        // A cover that cannot be followed cannot witness refinement.
        ++sig.covers_unmatched;
        sig.dense_growth = false;
        continue;
      }
      const auto gap = detail::gap_between(coarse.component(lo), coarse.component(hi));
      if (gap && detail::cover_refined(fine, *match[lo], *match[hi], *gap)) {
        ++sig.covers_refined;
      } else {
        sig.dense_growth = false;
      }
    }

    // Follow each still-unrefined gap into the cover of the next level that
    // straddles its midpoint.
    const auto fine_covers = hasse_covers(fine);
    for (auto& t : tracked) {
      if (!t.alive) continue;
      const Rational mid = (t.gap.lo + t.gap.hi) / 2;
      std::optional<Interval> next;
      bool refined = false;
      for (const auto& [flo, fhi] : fine_covers) {
        const auto g = detail::gap_between(fine.component(flo), fine.component(fhi));
        if (g && g->lo < mid && mid < g->hi) {
          next = g;
          break;
        }
      }
      for (const auto& comp : fine.components())
        if (t.gap.contains(comp.hull)) refined = true;
      if (!next || refined) {
        t.alive = false;
        continue;
      }
      t.gap = *next;
      t.pair.gaps.push_back(*next);
    }
  }
  for (auto& t : tracked)
    if (t.alive) sig.persistent_pairs.push_back(std::move(t.pair));
  return sig;
}

// ---------------------------------------------------------------------------
// DOT

/// One node per component, labeled by its representative; one edge per Hasse
/// cover, drawn from the larger to the smaller component.
inline void write_dot(const ComponentPoset& p, std::ostream& os, const std::string& name = "chain_components") {
  os << "digraph " << name << " {\n";
  os << "  node [shape=box];\n";
  for (const auto& c : p.components())
    os << "  c" << c.id << " [label=\"" << to_string(c.representative) << "\"];\n";
  for (const auto& [lo, hi] : hasse_covers(p)) os << "  c" << hi << " -> c" << lo << ";\n";
  os << "}\n";
}

inline std::string to_dot(const ComponentPoset& p, const std::string& name = "chain_components") {
  std::ostringstream os;
  write_dot(p, os, name);
  return os.str();
}

}  // namespace chainposet
