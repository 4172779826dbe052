#pragma once

// Discrete complete Lyapunov functions on chain graphs: one Cantor-set value
// per condensation node, strictly decreasing along every edge between
// distinct strongly connected components.

#include <algorithm>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chainposet/chaingraph.hpp"
#include "chainposet/rational.hpp"
#include "chainposet/systems.hpp"

namespace chainposet {

/// ceil(log2(total)); 0 for total == 1.
inline unsigned cantor_digits(std::size_t total) {
  unsigned k = 0;
  while ((std::size_t{1} << k) < total) ++k;
  return k;
}

/// Binary digits b_1..b_k of `rank` (most significant first, k = ceil(log2 total))
/// mapped to sum 2*b_i / 3^i. Strictly increasing in rank.
inline Rational cantor_value(std::size_t rank, std::size_t total) {
  if (total == 0 || rank >= total) throw std::invalid_argument("cantor_value requires rank < total");
  const unsigned k = cantor_digits(total);
  Integer num = 0;
  for (unsigned i = 0; i < k; ++i) {
    num *= 3;
    if ((rank >> (k - 1 - i)) & 1u) num += 2;
  }
  Integer den;
  mpz_ui_pow_ui(den.get_mpz_t(), 3, k);
  return make_rational(num, den);
}

/// Finite ternary expansion 0.d_1 d_2 ... d_k with every d_i in {0, 2}.
inline bool has_cantor_expansion(const Rational& v) {
  if (v < 0 || v >= 1) return false;
  Integer den = v.get_den();
  unsigned k = 0;
  while (den % 3 == 0) {
    den /= 3;
    ++k;
  }
  if (den != 1) return false;
  Integer num = v.get_num();
  for (unsigned i = 0; i < k; ++i) {
    const Integer digit = num % 3;
    if (digit == 1) return false;
    num /= 3;
  }
  return true;
}

struct LyapunovAssignment {
  std::vector<Rational> cell_values;
  // Value of each chain component, indexed like chain_components(g).
  std::vector<Rational> component_values;
};

/// Ranks the whole condensation sinks-first (ties: smallest member cell) and
/// gives rank r of M the value cantor_value(r, M).
inline LyapunovAssignment synthesize(const ChainGraph& g) {
  const Condensation c = condense(g.adjacency);
  const std::size_t m = c.size();

  std::vector<std::size_t> pending(m, 0);
  std::vector<std::vector<std::uint32_t>> predecessors(m);
  for (std::size_t v = 0; v < m; ++v) {
    pending[v] = c.successors[v].size();
    for (auto s : c.successors[v]) predecessors[s].push_back(static_cast<std::uint32_t>(v));
  }
  using Entry = std::pair<std::uint32_t, std::uint32_t>;  // (lowest cell, node)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> ready;
  for (std::size_t v = 0; v < m; ++v)
    if (pending[v] == 0) ready.push({c.members[v].front(), static_cast<std::uint32_t>(v)});

  std::vector<Rational> node_value(m);
  std::size_t rank = 0;
  while (!ready.empty()) {
    const auto [cell, v] = ready.top();
    ready.pop();
    node_value[v] = cantor_value(rank++, m);
    for (auto p : predecessors[v])
      if (--pending[p] == 0) ready.push({c.members[p].front(), p});
  }

  LyapunovAssignment a;
  a.cell_values.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) a.cell_values[i] = node_value[c.node_of[i]];

  std::vector<std::size_t> cyclic;
  for (std::size_t v = 0; v < m; ++v)
    if (c.cyclic[v]) cyclic.push_back(v);
  std::sort(cyclic.begin(), cyclic.end(),
            [&](std::size_t x, std::size_t y) { return c.members[x].front() < c.members[y].front(); });
  for (auto v : cyclic) a.component_values.push_back(node_value[v]);
  return a;
}

// ---------------------------------------------------------------------------
// Certification

struct CertificationCheck {
  std::string name;
  bool passed = true;
  std::size_t checked = 0;
  std::string witness;  // first counterexample, if any
};

struct Certification {
  std::vector<CertificationCheck> checks;
  std::size_t equality_samples = 0;      // f(x) landed in a cell of the same SCC
  std::size_t largest_equality_scc = 0;  // cells in the largest such SCC
  std::size_t escaped_samples = 0;       // f(x) outside the gridded core

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
  const CertificationCheck& check(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return c;
    throw std::out_of_range("no certification check named " + name);
  }
};

namespace detail {

inline void fail_once(CertificationCheck& check, const std::string& witness) {
  if (check.passed) check.witness = witness;
  check.passed = false;
}

}  // namespace detail

/// Checks descent along sampled orbits, constancy and injectivity on chain
/// components, strict decrease across SCC edges, and Cantor-set membership.
inline Certification verify(const LyapunovAssignment& a, const ChainGraph& g, const SystemSpec& spec,
                            std::size_t samples) {
  if (a.cell_values.size() != g.size()) throw std::invalid_argument("assignment does not match graph");
  if (samples == 0) throw std::invalid_argument("need at least one sample per cell");
  const Condensation c = condense(g.adjacency);
  const auto& value = a.cell_values;

  Certification cert;
  CertificationCheck descent{"descent", true, 0, {}};
  CertificationCheck constant{"constant_on_components", true, 0, {}};
  CertificationCheck injective{"injective_on_components", true, 0, {}};
  CertificationCheck order{"strict_decrease_across_components", true, 0, {}};
  CertificationCheck cantor{"cantor_membership", true, 0, {}};

  const Grid& grid = g.grid;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Rational lo = grid.cell_lo(i);
    for (std::size_t k = 0; k < samples; ++k) {
      const Rational x = lo + grid.width() * make_rational(static_cast<long>(2 * k + 1), static_cast<long>(2 * samples));
      const Rational y = eval(spec, x);
      const auto j = grid.cell_of(y);
      if (!j) {
        ++cert.escaped_samples;
        continue;
      }
      ++descent.checked;
      const bool same_scc = c.node_of[i] == c.node_of[*j];
      if (value[*j] < value[i]) continue;
      if (value[*j] == value[i] && same_scc) {
        ++cert.equality_samples;
        cert.largest_equality_scc = std::max(cert.largest_equality_scc, c.members[c.node_of[i]].size());
        continue;
      }
      detail::fail_once(descent, "x=" + to_string(x) + " cell " + std::to_string(i) + " -> f(x)=" + to_string(y) +
                                     " cell " + std::to_string(*j));
    }
  }

  std::vector<std::size_t> cyclic;
  for (std::size_t v = 0; v < c.size(); ++v) {
    const auto& cells = c.members[v];
    for (auto cell : cells) {
      ++constant.checked;
      if (value[cell] != value[cells.front()])
        detail::fail_once(constant, "cells " + std::to_string(cells.front()) + " and " + std::to_string(cell));
    }
    if (c.cyclic[v]) cyclic.push_back(v);
  }
  std::sort(cyclic.begin(), cyclic.end(),
            [&](std::size_t x, std::size_t y) { return value[c.members[x].front()] < value[c.members[y].front()]; });
  for (std::size_t k = 0; k + 1 < cyclic.size(); ++k) {
    ++injective.checked;
    const auto x = c.members[cyclic[k]].front();
    const auto y = c.members[cyclic[k + 1]].front();
    if (value[x] == value[y])
      detail::fail_once(injective, "components at cells " + std::to_string(std::min(x, y)) + " and " +
                                       std::to_string(std::max(x, y)) + " share value " + to_string(value[x]));
  }

  for (std::size_t u = 0; u < g.size(); ++u) {
    for (auto v : g.adjacency[u]) {
      if (c.node_of[u] == c.node_of[v]) continue;
      ++order.checked;
      if (!(value[u] > value[v]))
        detail::fail_once(order, "edge " + std::to_string(u) + " -> " + std::to_string(v));
    }
  }

  for (std::size_t i = 0; i < g.size(); ++i) {
    ++cantor.checked;
    if (!has_cantor_expansion(value[i]))
      detail::fail_once(cantor, "cell " + std::to_string(i) + " value " + to_string(value[i]));
  }

  cert.checks = {std::move(descent), std::move(constant), std::move(injective), std::move(order), std::move(cantor)};
  return cert;
}

}  // namespace chainposet
