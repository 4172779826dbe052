#pragma once

// Exact interval self-maps built from the ordinal-indexed construction,
// the Cantor-set example and the dense-block step maps, together with
// piecewise-linear conjugations of any of them.

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "chainposet/ordinal.hpp"
#include "chainposet/rational.hpp"

namespace chainposet {

struct Domain {
  Rational lo = 0;
  Rational hi = 1;
  bool lo_closed = true;
  bool hi_closed = true;

  bool closed() const { return lo_closed && hi_closed; }
  bool contains(const Rational& x) const {
    return (lo_closed ? lo <= x : lo < x) && (hi_closed ? x <= hi : x < hi);
  }
  bool contains(const Interval& iv) const { return contains(iv.lo) && contains(iv.hi); }
  friend bool operator==(const Domain&, const Domain&) = default;
};

// ---------------------------------------------------------------------------
// Piecewise-linear homeomorphisms

class PLHomeo {
 public:
  struct Breakpoint {
    Rational x;
    Rational y;
    friend bool operator==(const Breakpoint&, const Breakpoint&) = default;
  };

  explicit PLHomeo(std::vector<Breakpoint> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw std::invalid_argument("homeomorphism needs at least two breakpoints");
    const bool up = points_[1].y > points_[0].y;
    for (std::size_t i = 1; i < points_.size(); ++i) {
      if (!(points_[i].x > points_[i - 1].x))
        throw std::invalid_argument("homeomorphism breakpoint x-values must strictly increase");
      const bool step_up = points_[i].y > points_[i - 1].y;
      if (points_[i].y == points_[i - 1].y || step_up != up)
        throw std::invalid_argument("homeomorphism must be strictly monotone");
    }
  }

  static PLHomeo identity(const Rational& lo = 0, const Rational& hi = 1) {
    return PLHomeo({{lo, lo}, {hi, hi}});
  }

  const std::vector<Breakpoint>& breakpoints() const { return points_; }
  bool increasing() const { return points_.back().y > points_.front().y; }
  Interval domain() const { return {points_.front().x, points_.back().x}; }
  Interval range() const {
    return increasing() ? Interval{points_.front().y, points_.back().y}
                        : Interval{points_.back().y, points_.front().y};
  }

  Rational apply(const Rational& x) const {
    if (x < points_.front().x || x > points_.back().x)
      throw std::out_of_range("point " + to_string(x) + " outside homeomorphism domain");
    auto it = std::upper_bound(points_.begin(), points_.end(), x,
                               [](const Rational& v, const Breakpoint& b) { return v < b.x; });
    if (it == points_.end()) return points_.back().y;
    const Breakpoint& right = *it;
    const Breakpoint& left = *(it - 1);
    return left.y + (right.y - left.y) * (x - left.x) / (right.x - left.x);
  }

  /// Image of a closed interval (monotone, so endpoints suffice).
  Interval apply(const Interval& iv) const {
    Rational a = apply(iv.lo);
    Rational b = apply(iv.hi);
    return a <= b ? Interval{a, b} : Interval{b, a};
  }

 private:
  std::vector<Breakpoint> points_;
};

inline PLHomeo pl_inverse(const PLHomeo& h) {
  std::vector<PLHomeo::Breakpoint> swapped;
  swapped.reserve(h.breakpoints().size());
  for (const auto& b : h.breakpoints()) swapped.push_back({b.y, b.x});
  if (!h.increasing()) std::reverse(swapped.begin(), swapped.end());
  return PLHomeo(std::move(swapped));
}

// ---------------------------------------------------------------------------
// System descriptions

enum class DenseVariant { WithMax, NoMax, OpenInterval };

inline std::string to_string(DenseVariant v) {
  switch (v) {
    case DenseVariant::WithMax: return "with_max";
    case DenseVariant::NoMax: return "no_max";
    case DenseVariant::OpenInterval: return "open_interval";
  }
  return "?";
}

class SystemSpec;

struct IdentityMap {};
struct SquareMap {};
struct OrdinalMap {
  Ordinal lambda;
};
struct CantorExample {
  int depth = 1;
};
struct DenseBlocks {
  int depth = 0;
  DenseVariant variant = DenseVariant::WithMax;
  std::vector<Interval> blocks;  // sorted left to right
};
struct Conjugated {
  std::shared_ptr<const SystemSpec> inner;
  PLHomeo h;
  PLHomeo h_inverse;
};

class SystemSpec {
 public:
  using Body = std::variant<IdentityMap, SquareMap, OrdinalMap, CantorExample, DenseBlocks, Conjugated>;

  SystemSpec(Domain domain, Body body) : domain_(std::move(domain)), body_(std::move(body)) {}

  const Domain& domain() const { return domain_; }
  const Body& body() const { return body_; }

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&body_);
  }

 private:
  Domain domain_;
  Body body_;
};

/// Short human-readable description, e.g. `ordinal(w+1)`.
std::string describe(const SystemSpec& spec);

// ---------------------------------------------------------------------------
// Block families

namespace detail {

inline Interval middle_half(const Rational& lo, const Rational& hi) {
  const Rational quarter = (hi - lo) / 4;
  return {lo + quarter, hi - quarter};
}

// Insert the middle half of every gap between consecutive blocks, plus the
// middle half of the end gaps (toward 0 and/or 1) when the variant asks for it.
inline std::vector<Interval> refine_blocks(const std::vector<Interval>& blocks, bool left_end,
                                           bool right_end) {
  std::vector<Interval> out;
  if (left_end) out.push_back(middle_half(Rational(0), blocks.front().lo));
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    out.push_back(blocks[i]);
    if (i + 1 < blocks.size()) out.push_back(middle_half(blocks[i].hi, blocks[i + 1].lo));
  }
  if (right_end) out.push_back(middle_half(blocks.back().hi, Rational(1)));
  return out;
}

inline int min_dense_depth(DenseVariant v) { return v == DenseVariant::NoMax ? 1 : 0; }

}  // namespace detail

/// Block family L_depth, sorted by position (which is the order <_P).
///   with_max:      L_0 = {[0,1/4],[3/4,1]},              |L_d| = 2^d + 1
///   no_max:        L_1 = {[0,1/4],[7/16,13/16]},          |L_d| = 2^d
///   open_interval: L_0 = {[1/4,3/4]},                     |L_d| = 2^{d+1} - 1
inline std::vector<Interval> dense_block_family(int depth, DenseVariant variant) {
  if (depth < detail::min_dense_depth(variant))
    throw std::invalid_argument("dense block depth too small for variant " + to_string(variant));
  std::vector<Interval> blocks;
  switch (variant) {
    case DenseVariant::WithMax:
      blocks = {{make_rational(0), make_rational(1, 4)}, {make_rational(3, 4), make_rational(1)}};
      for (int d = 0; d < depth; ++d) blocks = detail::refine_blocks(blocks, false, false);
      break;
    case DenseVariant::NoMax:
      blocks = {{make_rational(0), make_rational(1, 4)}};
      blocks.push_back(detail::middle_half(make_rational(1, 4), make_rational(1)));
      for (int d = 1; d < depth; ++d) blocks = detail::refine_blocks(blocks, false, true);
      break;
    case DenseVariant::OpenInterval:
      blocks = {detail::middle_half(make_rational(0), make_rational(1))};
      for (int d = 0; d < depth; ++d) blocks = detail::refine_blocks(blocks, true, true);
      break;
  }
  return blocks;
}

/// Removed middle-third gaps of the Cantor construction up to `depth`, as
/// closed hulls [l, r] of the open gaps (l, r), sorted.
inline std::vector<Interval> cantor_gaps(int depth) {
  std::vector<Interval> gaps;
  std::vector<Interval> pieces{{Rational(0), Rational(1)}};
  for (int d = 0; d < depth; ++d) {
    std::vector<Interval> next;
    for (const auto& p : pieces) {
      const Rational third = p.length() / 3;
      gaps.push_back({p.lo + third, p.hi - third});
      next.push_back({p.lo, p.lo + third});
      next.push_back({p.hi - third, p.hi});
    }
    pieces = std::move(next);
  }
  std::sort(gaps.begin(), gaps.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  return gaps;
}

// ---------------------------------------------------------------------------
// Constructors

inline SystemSpec make_identity() { return SystemSpec(Domain{}, IdentityMap{}); }
inline SystemSpec make_square() { return SystemSpec(Domain{}, SquareMap{}); }

/// f_lambda. Every representable ordinal is below epsilon_0, so any value is accepted.
inline SystemSpec make_ordinal_map(const Ordinal& lambda) {
  if (lambda.is_zero()) return make_identity();
  if (lambda == Ordinal::finite(1)) return make_square();
  return SystemSpec(Domain{}, OrdinalMap{lambda});
}

inline SystemSpec make_cantor_example(int depth) {
  if (depth < 1) throw std::invalid_argument("Cantor example depth must be >= 1");
  return SystemSpec(Domain{}, CantorExample{depth});
}

inline SystemSpec make_dense_blocks(int depth, DenseVariant variant) {
  Domain domain;
  if (variant == DenseVariant::OpenInterval) domain.lo_closed = domain.hi_closed = false;
  return SystemSpec(domain, DenseBlocks{depth, variant, dense_block_family(depth, variant)});
}

/// g = h o f o h^{-1}.
inline SystemSpec conjugate(const SystemSpec& spec, const PLHomeo& h) {
  const Domain& d = spec.domain();
  const Interval hd = h.domain();
  if (hd.lo != d.lo || hd.hi != d.hi || !(h.range() == Interval{d.lo, d.hi}))
    throw std::invalid_argument("homeomorphism is not a bijection of the system's domain");
  Domain image = d;
  if (!h.increasing()) std::swap(image.lo_closed, image.hi_closed);
  return SystemSpec(image, Conjugated{std::make_shared<const SystemSpec>(spec), h, pl_inverse(h)});
}

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

// a_n = n/(n+1) <= x < a_{n+1}  <=>  n = floor(x / (1 - x)), for 0 <= x < 1.
inline Integer limit_block_index(const Rational& x) { return floor(Rational(x / (1 - x))); }

inline Rational limit_block_start(const Integer& n) { return make_rational(n, Integer(n + 1)); }

inline Rational successor_upper_piece(const Rational& x) {
  return x + (x - make_rational(1, 2)) * (x - 1);
}

inline Rational eval_ordinal(const Ordinal& lambda, const Rational& x) {
  if (lambda.is_zero()) return x;
  if (x == 0 || x == 1) return x;
  if (lambda == Ordinal::finite(1)) return x * x;

  const auto cls = classify(lambda);
  if (cls.kind == OrdinalKind::Successor) {
    if (x <= make_rational(1, 2)) return eval_ordinal(cls.predecessor, Rational(2 * x)) / 2;
    return successor_upper_piece(x);
  }

  const Integer n = limit_block_index(x);
  if (n == 0) {
    const TailSplit split = tail_split(lambda);
    return eval_ordinal(split.head, Rational(2 * x)) / 2;
  }
  if (!n.fits_ulong_p()) throw std::overflow_error("limit block index too large");
  const TailSplit split = tail_split(lambda);
  const Ordinal beta = fundamental(Ordinal::omega_power(split.tail_exponent), n.get_ui());
  const Rational a_n = limit_block_start(n);
  const Rational scale((n + 1) * (n + 2));
  return eval_ordinal(beta, Rational(scale * (x - a_n))) / scale + a_n;
}

inline Rational eval_cantor(int depth, const Rational& x) {
  Rational lo = 0;
  Rational len = 1;
  for (int d = 0; d < depth; ++d) {
    const Rational third = len / 3;
    const Rational l = lo + third;
    const Rational r = l + third;
    if (l < x && x < r) return x - (x - l) * (r - x);
    if (x >= r) lo = r;
    len = third;
  }
  return x;
}

// Index of the block containing x, or -1.
inline long find_block(const std::vector<Interval>& blocks, const Rational& x) {
  auto it = std::upper_bound(blocks.begin(), blocks.end(), x,
                             [](const Rational& v, const Interval& b) { return v < b.lo; });
  if (it == blocks.begin()) return -1;
  --it;
  return it->contains(x) ? static_cast<long>(it - blocks.begin()) : -1;
}

// Step value 1/(k+2) on [1/(k+1), 1/k).
inline Rational open_interval_step(const Rational& x) {
  const Integer k = ceil(Rational(1 / x)) - 1;
  return make_rational(Integer(1), Integer(k + 2));
}

inline Rational eval_dense(const DenseBlocks& d, const Rational& x) {
  if (const long i = find_block(d.blocks, x); i >= 0) return d.blocks[static_cast<std::size_t>(i)].lo;
  if (d.variant == DenseVariant::OpenInterval) return open_interval_step(x);
  return 0;
}

}  // namespace detail

/// Exact f(x). Throws std::out_of_range outside the domain.
inline Rational eval(const SystemSpec& spec, const Rational& x) {
  if (!spec.domain().contains(x))
    throw std::out_of_range("point " + to_string(x) + " outside the system's domain");
  return std::visit(
      [&](const auto& body) -> Rational {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, IdentityMap>) {
          return x;
        } else if constexpr (std::is_same_v<T, SquareMap>) {
          return x * x;
        } else if constexpr (std::is_same_v<T, OrdinalMap>) {
          return detail::eval_ordinal(body.lambda, x);
        } else if constexpr (std::is_same_v<T, CantorExample>) {
          return detail::eval_cantor(body.depth, x);
        } else if constexpr (std::is_same_v<T, DenseBlocks>) {
          return detail::eval_dense(body, x);
        } else {
          return body.h.apply(eval(*body.inner, body.h_inverse.apply(x)));
        }
      },
      spec.body());
}

/// True when the map is a continuous non-decreasing self-map of its domain.
inline bool is_continuous_monotone(const SystemSpec& spec) {
  return std::visit(
      [](const auto& body) -> bool {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, DenseBlocks>) {
          return false;
        } else if constexpr (std::is_same_v<T, Conjugated>) {
          return is_continuous_monotone(*body.inner);
        } else {
          return true;
        }
      },
      spec.body());
}

// ---------------------------------------------------------------------------
// Image enclosures

namespace detail {

inline std::vector<Interval> normalize(std::vector<Interval> pieces) {
  std::sort(pieces.begin(), pieces.end(), [](const Interval& a, const Interval& b) {
    return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
  });
  std::vector<Interval> out;
  for (auto& p : pieces) {
    if (!out.empty() && p.lo <= out.back().hi) {
      if (p.hi > out.back().hi) out.back().hi = p.hi;
    } else {
      out.push_back(std::move(p));
    }
  }
  return out;
}

inline std::vector<Interval> enclose_dense(const DenseBlocks& d, const Interval& cell) {
  std::vector<Interval> out;
  bool inside_one_block = false;
  for (const auto& b : d.blocks) {
    if (b.hi < cell.lo) continue;
    if (b.lo > cell.hi) break;
    out.push_back(Interval::point(b.lo));
    if (b.contains(cell)) inside_one_block = true;
  }
  if (inside_one_block) return out;

  // The cell meets the complement of the blocks.
  if (d.variant != DenseVariant::OpenInterval) {
    out.push_back(Interval::point(Rational(0)));
    return normalize(std::move(out));
  }
  // Step map: collect 1/(k+2) for every step [1/(k+1), 1/k) that has
  // uncovered points inside the cell.
  const Integer k_lo = ceil(Rational(1 / cell.hi)) - 1;
  const Integer k_hi = ceil(Rational(1 / cell.lo)) - 1;
  for (Integer k = k_lo; k <= k_hi; ++k) {
    const Rational step_lo = make_rational(Integer(1), Integer(k + 1));
    const Rational step_hi = make_rational(Integer(1), k);  // excluded
    const Rational p = std::max(cell.lo, step_lo);
    const bool upper_closed = cell.hi < step_hi;
    const Rational q = upper_closed ? cell.hi : step_hi;
    if (p > q || (p == q && !upper_closed)) continue;
    // A connected piece is covered by the blocks only if one block covers it.
    const long i = find_block(d.blocks, p);
    const bool covered = i >= 0 && d.blocks[static_cast<std::size_t>(i)].hi >= q;
    if (!covered) out.push_back(Interval::point(make_rational(Integer(1), Integer(k + 2))));
  }
  return normalize(std::move(out));
}

}  // namespace detail

/// Closure of f(cell), as a sorted union of disjoint closed intervals.
inline std::vector<Interval> image_enclosure(const SystemSpec& spec, const Interval& cell) {
  if (!spec.domain().contains(cell))
    throw std::out_of_range("cell " + to_string(cell) + " outside the system's domain");
  return std::visit(
      [&](const auto& body) -> std::vector<Interval> {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, DenseBlocks>) {
          return detail::enclose_dense(body, cell);
        } else if constexpr (std::is_same_v<T, Conjugated>) {
          std::vector<Interval> out;
          for (const auto& piece : image_enclosure(*body.inner, body.h_inverse.apply(cell)))
            out.push_back(body.h.apply(piece));
          return detail::normalize(std::move(out));
        } else {
          // Continuous and non-decreasing: the image is [f(lo), f(hi)].
          return {Interval{eval(spec, cell.lo), eval(spec, cell.hi)}};
        }
      },
      spec.body());
}

/// The block family at `depth` (dense blocks) or the removed gaps up to
/// `depth` (Cantor example).
inline std::vector<Interval> blocks_of(const SystemSpec& spec, int depth) {
  if (const auto* d = spec.as<DenseBlocks>()) {
    if (depth > d->depth) throw std::invalid_argument("requested depth exceeds the system's depth");
    return dense_block_family(depth, d->variant);
  }
  if (const auto* c = spec.as<CantorExample>()) {
    if (depth > c->depth) throw std::invalid_argument("requested depth exceeds the system's depth");
    return cantor_gaps(depth);
  }
  throw std::invalid_argument("blocks_of supports dense-block and Cantor systems only");
}

inline std::string describe(const SystemSpec& spec) {
  return std::visit(
      [](const auto& body) -> std::string {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, IdentityMap>) {
          return "identity";
        } else if constexpr (std::is_same_v<T, SquareMap>) {
          return "square";
        } else if constexpr (std::is_same_v<T, OrdinalMap>) {
          return "ordinal(" + to_string(body.lambda) + ")";
        } else if constexpr (std::is_same_v<T, CantorExample>) {
          return "cantor(depth " + std::to_string(body.depth) + ")";
        } else if constexpr (std::is_same_v<T, DenseBlocks>) {
          return "dense_blocks(depth " + std::to_string(body.depth) + ", " + to_string(body.variant) + ")";
        } else {
          return "conjugated(" + describe(*body.inner) + ")";
        }
      },
      spec.body());
}

}  // namespace chainposet
