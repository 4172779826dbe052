#include <gtest/gtest.h>

#include <random>

#include "bundled_systems.hpp"
#include "chainposet/lyapunov.hpp"

using namespace chainposet;

namespace {

Rational q(long p, long d = 1) { return make_rational(p, d); }

// Sum of 2/3^i over the set bits of rank, read most significant first over k digits.
Rational cantor_oracle(std::size_t rank, std::size_t total) {
  std::size_t k = 0;
  while ((std::size_t{1} << k) < total) ++k;
  Rational v = 0;
  Rational scale = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    scale /= 3;
    if ((rank >> (k - i)) & 1u) v += 2 * scale;
  }
  return v;
}

// Peels ternary digits by multiplying by 3; terminates within `limit` digits
// exactly when the expansion is finite.
bool cantor_expansion_oracle(Rational v, int limit = 200) {
  if (v < 0 || v >= 1) return false;
  for (int i = 0; i < limit && v != 0; ++i) {
    v *= 3;
    const Integer d = floor(v);
    if (d == 1) return false;
    v -= Rational(d);
  }
  return v == 0;
}

ChainGraph build(const SystemSpec& f, std::size_t n) {
  const Grid grid = Grid::for_domain(f.domain(), n);
  return build_chain_graph(f, grid, EpsilonField::constant(2 * grid.width()));
}

std::vector<std::vector<bool>> reachability(const ChainGraph& g) {
  const std::size_t n = g.size();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<std::size_t> stack{s};
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (auto w : g.adjacency[v])
        if (!reach[s][w]) {
          reach[s][w] = true;
          stack.push_back(w);
        }
    }
  }
  return reach;
}

}  // namespace

TEST(Cantor, ValuesMatchOracleAndIncrease) {
  for (std::size_t total : {1u, 2u, 3u, 5u, 8u, 9u, 33u, 100u}) {
    Rational prev = -1;
    for (std::size_t r = 0; r < total; ++r) {
      const Rational v = cantor_value(r, total);
      EXPECT_EQ(v, cantor_oracle(r, total)) << r << "/" << total;
      EXPECT_GT(v, prev);
      EXPECT_LT(v, 1);
      EXPECT_TRUE(has_cantor_expansion(v));
      prev = v;
    }
  }
  EXPECT_EQ(cantor_value(0, 1), 0);
  EXPECT_EQ(cantor_value(1, 2), q(2, 3));
  EXPECT_EQ(cantor_value(2, 4), q(2, 3));
  EXPECT_EQ(cantor_value(3, 4), q(8, 9));
  EXPECT_THROW(cantor_value(4, 4), std::invalid_argument);
  EXPECT_THROW(cantor_value(0, 0), std::invalid_argument);
}

TEST(Cantor, ExpansionTestAgreesWithDigitPeeling) {
  EXPECT_TRUE(has_cantor_expansion(q(2, 9)));
  EXPECT_TRUE(has_cantor_expansion(q(20, 27)));
  EXPECT_FALSE(has_cantor_expansion(q(1, 3)));
  EXPECT_FALSE(has_cantor_expansion(q(1, 4)));  // 0.0202... does not terminate
  EXPECT_FALSE(has_cantor_expansion(q(1)));
  EXPECT_FALSE(has_cantor_expansion(q(-2, 9)));

  std::mt19937 rng(17);
  std::uniform_int_distribution<int> power(0, 7);
  long checked_true = 0;
  for (int i = 0; i < 2000; ++i) {
    long den = 1;
    for (int k = power(rng); k > 0; --k) den *= 3;
    if (i % 5 == 0) den *= 2 + static_cast<long>(rng() % 3);
    const Rational v = q(static_cast<long>(rng() % static_cast<unsigned long>(den + 1)), den);
    const bool expected = cantor_expansion_oracle(v);
    EXPECT_EQ(has_cantor_expansion(v), expected) << to_string(v);
    checked_true += expected ? 1 : 0;
  }
  EXPECT_GT(checked_true, 50);
}

TEST(Lyapunov, SynthesisRespectsReachability) {
  for (const auto& sys : fixtures::bundled_systems()) {
    const ChainGraph g = build(sys.spec, 128);
    const auto a = synthesize(g);
    const auto reach = reachability(g);
    for (std::size_t u = 0; u < g.size(); ++u) {
      EXPECT_TRUE(has_cantor_expansion(a.cell_values[u]));
      for (std::size_t v = 0; v < g.size(); ++v) {
        if (u == v || !reach[u][v]) continue;
        if (reach[v][u]) {
          EXPECT_EQ(a.cell_values[u], a.cell_values[v]) << sys.name;
        } else {
          EXPECT_GT(a.cell_values[u], a.cell_values[v]) << sys.name << " " << u << "->" << v;
        }
      }
    }
    const auto comps = chain_components(g);
    ASSERT_EQ(a.component_values.size(), comps.size());
    for (const auto& c : comps.components()) EXPECT_EQ(a.component_values[c.id], a.cell_values[c.cells.front()]);
    for (const auto& [lo, hi] : comps.order_pairs()) EXPECT_LT(a.component_values[lo], a.component_values[hi]);
  }
}

TEST(Lyapunov, VerifyPassesOnBundledSystems) {
  for (const auto& sys : fixtures::bundled_systems()) {
    for (std::size_t n : {256u, 1024u, 4096u}) {
      const ChainGraph g = build(sys.spec, n);
      const auto cert = verify(synthesize(g), g, sys.spec, 10);
      EXPECT_TRUE(cert.passed()) << sys.name << " n=" << n;
      for (const auto& c : cert.checks) EXPECT_TRUE(c.passed) << sys.name << " " << c.name << ": " << c.witness;
      EXPECT_GT(cert.check("descent").checked, 0u);
    }
  }
}

TEST(Lyapunov, TamperedAssignmentsAreCaught) {
  const auto f = make_ordinal_map(Ordinal::finite(2));
  const ChainGraph g = build(f, 256);
  const auto good = synthesize(g);
  const auto comps = chain_components(g);
  ASSERT_EQ(comps.size(), 3u);

  auto flat = good;
  for (auto& v : flat.cell_values) v = 0;
  const auto flat_cert = verify(flat, g, f, 4);
  EXPECT_FALSE(flat_cert.check("injective_on_components").passed);
  EXPECT_FALSE(flat_cert.check("strict_decrease_across_components").passed);
  EXPECT_FALSE(flat_cert.check("descent").passed);

  auto reversed = good;
  for (std::size_t i = 0; i < g.size(); ++i) reversed.cell_values[i] = good.cell_values[g.size() - 1 - i];
  EXPECT_FALSE(verify(reversed, g, f, 4).check("descent").passed);

  auto split = good;
  const auto& top = comps.component(2).cells;
  ASSERT_GE(top.size(), 2u);
  split.cell_values[top.back()] = cantor_value(0, 1u << 20);
  EXPECT_FALSE(verify(split, g, f, 4).check("constant_on_components").passed);

  auto middle_third = good;
  middle_third.cell_values[0] = q(1, 3);
  const auto cert = verify(middle_third, g, f, 4);
  EXPECT_FALSE(cert.check("cantor_membership").passed);
  EXPECT_EQ(cert.check("cantor_membership").witness, "cell 0 value 1/3");

  auto half = good;
  half.cell_values[5] = q(1, 2);
  EXPECT_FALSE(verify(half, g, f, 4).check("cantor_membership").passed);

  EXPECT_THROW(verify(good, g, f, 0), std::invalid_argument);
  EXPECT_THROW(verify(good, build(f, 128), f, 4), std::invalid_argument);
}
