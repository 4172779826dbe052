#pragma once

// Expected chain-component structure of the bundled constructions, used to
// annotate reports and to diff against computed posets.

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chainposet/ordinal.hpp"
#include "chainposet/rational.hpp"
#include "chainposet/systems.hpp"

namespace chainposet {

struct ModelPrediction {
  std::string order_type;                 // e.g. "5", "w+1", "[0,1]∩Q truncation"
  std::optional<Ordinal> ordinal_type;    // lambda + 1 for ordinal maps
  std::vector<Rational> representatives;  // predicted anchors, ascending
  std::optional<std::size_t> component_count;
  bool dense_expected = false;
  std::string note;
};

namespace detail {

// Fixed points of f_lambda rescaled to [lo, hi]. Recursion stops in blocks
// shorter than `tol`, which then contribute their endpoints only.
inline void collect_fixed_points(const Ordinal& lambda, const Rational& lo, const Rational& hi,
                                 const Rational& tol, std::vector<Rational>& out) {
  if (lambda.is_zero()) {
    out.push_back(lo);
    return;
  }
  out.push_back(lo);
  out.push_back(hi);
  if (hi - lo < tol || lambda == Ordinal::finite(1)) return;

  const Rational len = hi - lo;
  const auto cls = classify(lambda);
  if (cls.kind == OrdinalKind::Successor) {
    collect_fixed_points(cls.predecessor, lo, lo + len / 2, tol, out);
    return;
  }
  const TailSplit split = tail_split(lambda);
  collect_fixed_points(split.head, lo, lo + len / 2, tol, out);
  const Ordinal tail = Ordinal::omega_power(split.tail_exponent);
  for (unsigned long n = 1;; ++n) {
    const Rational a_n = lo + len * make_rational(static_cast<long>(n), static_cast<long>(n + 1));
    if (hi - a_n < tol) break;
    const Rational a_next = lo + len * make_rational(static_cast<long>(n + 1), static_cast<long>(n + 2));
    if (a_next - a_n >= tol) {
      collect_fixed_points(fundamental(tail, n), a_n, a_next, tol, out);
    } else {
      out.push_back(a_n);
    }
  }
}

inline void sort_unique(std::vector<Rational>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace detail

/// Fixed points of f_lambda down to blocks of length `tol`; these are the
/// endpoints of every recursion block, and anchor the chain components.
inline std::vector<Rational> predicted_fixed_points(const Ordinal& lambda, const Rational& tol) {
  std::vector<Rational> out;
  detail::collect_fixed_points(lambda, Rational(0), Rational(1), tol, out);
  detail::sort_unique(out);
  return out;
}

/// Largest gap between consecutive blocks of a dense-block family.
inline Rational largest_block_gap(const std::vector<Interval>& blocks) {
  Rational best = 0;
  for (std::size_t i = 0; i + 1 < blocks.size(); ++i) best = std::max(best, Rational(blocks[i + 1].lo - blocks[i].hi));
  return best;
}

/// `tol` bounds the recursion for ordinal maps (use the cell width).
inline ModelPrediction predict(const SystemSpec& spec, const Rational& tol) {
  ModelPrediction m;
  if (spec.as<IdentityMap>()) {
    m.order_type = "1";
    m.ordinal_type = Ordinal::finite(1);
    m.representatives = {Rational(0)};
    m.component_count = 1;
    m.note = "the whole interval is one chain component";
  } else if (spec.as<SquareMap>()) {
    m.order_type = "2";
    m.ordinal_type = Ordinal::finite(2);
    m.representatives = {Rational(0), Rational(1)};
    m.component_count = 2;
  } else if (const auto* om = spec.as<OrdinalMap>()) {
    const Ordinal type = add(om->lambda, Ordinal::finite(1));
    m.order_type = to_string(type);
    m.ordinal_type = type;
    m.representatives = predicted_fixed_points(om->lambda, tol);
    if (om->lambda.is_finite()) {
      m.component_count = static_cast<std::size_t>(type.finite_value());
    } else {
      m.note = "infinitely many fixed points; representatives truncated at blocks shorter than " + to_string(tol);
    }
  } else if (const auto* ce = spec.as<CantorExample>()) {
    m.order_type = "Cantor set truncation (depth " + std::to_string(ce->depth) + ")";
    m.representatives = {Rational(0), Rational(1)};
    for (const auto& gap : cantor_gaps(ce->depth)) {
      m.representatives.push_back(gap.lo);
      m.representatives.push_back(gap.hi);
    }
    detail::sort_unique(m.representatives);
    m.component_count = std::size_t{1} << ce->depth;
    m.note = "untreated Cantor intervals are fixed pointwise, so each stays one component at finite depth";
  } else if (const auto* db = spec.as<DenseBlocks>()) {
    switch (db->variant) {
      case DenseVariant::WithMax: m.order_type = "[0,1]∩Q truncation"; break;
      case DenseVariant::NoMax: m.order_type = "[0,1)∩Q truncation"; break;
      case DenseVariant::OpenInterval: m.order_type = "(0,1)∩Q truncation"; break;
    }
    for (const auto& b : db->blocks) m.representatives.push_back(b.lo);
    m.component_count = db->blocks.size();
    m.dense_expected = true;
    m.note = "one component per block, at its left endpoint, ordered by position";
  } else if (const auto* cj = spec.as<Conjugated>()) {
    m = predict(*cj->inner, tol);
    for (auto& r : m.representatives) r = cj->h.apply(r);
    detail::sort_unique(m.representatives);
    m.note = "conjugated: representatives mapped through the homeomorphism";
  } else {
    throw std::invalid_argument("no model for this system kind");
  }
  return m;
}

}  // namespace chainposet
