#pragma once

// Discretized epsilon-chain graphs over a uniform cell grid, their strongly
// connected components, and the chain-component poset they induce.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "chainposet/rational.hpp"
#include "chainposet/systems.hpp"

namespace chainposet {

inline constexpr std::size_t kMaxCells = std::size_t{1} << 20;

// ---------------------------------------------------------------------------
// Grid

class Grid {
 public:
  Grid(Rational lo, Rational hi, std::size_t cells, bool truncated = false)
      : lo_(std::move(lo)), hi_(std::move(hi)), cells_(cells), truncated_(truncated) {
    if (cells_ == 0) throw std::invalid_argument("grid needs at least one cell");
    if (cells_ > kMaxCells) throw std::invalid_argument("grid cell count exceeds 2^20");
    if (!(lo_ < hi_)) throw std::invalid_argument("grid domain must have lo < hi");
    width_ = (hi_ - lo_) / static_cast<unsigned long>(cells_);
  }

  /// Closed domains are gridded as given. An open end is pulled in by one
  /// cell width, so the cells cover a closed core of the domain.
  static Grid for_domain(const Domain& d, std::size_t cells) {
    const int open_ends = (d.lo_closed ? 0 : 1) + (d.hi_closed ? 0 : 1);
    if (open_ends == 0) return Grid(d.lo, d.hi, cells);
    const Rational eta = (d.hi - d.lo) / static_cast<unsigned long>(cells + open_ends);
    return Grid(d.lo_closed ? d.lo : Rational(d.lo + eta), d.hi_closed ? d.hi : Rational(d.hi - eta),
                cells, true);
  }

  std::size_t size() const { return cells_; }
  const Rational& lo() const { return lo_; }
  const Rational& hi() const { return hi_; }
  const Rational& width() const { return width_; }
  bool truncated() const { return truncated_; }

  Rational cell_lo(std::size_t i) const { return lo_ + width_ * static_cast<unsigned long>(i); }
  Interval cell(std::size_t i) const { return {cell_lo(i), cell_lo(i + 1)}; }
  Rational midpoint(std::size_t i) const { return cell_lo(i) + width_ / 2; }

  /// Cell whose half-open span [lo_i, lo_{i+1}) holds x; the top endpoint maps
  /// to the last cell. Empty outside the grid.
  std::optional<std::size_t> cell_of(const Rational& x) const {
    if (x < lo_ || x > hi_) return std::nullopt;
    if (x == hi_) return cells_ - 1;
    return static_cast<std::size_t>(floor(Rational((x - lo_) / width_)).get_ui());
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.lo_ == b.lo_ && a.hi_ == b.hi_ && a.cells_ == b.cells_;
  }

 private:
  Rational lo_;
  Rational hi_;
  std::size_t cells_;
  bool truncated_;
  Rational width_;
};

// ---------------------------------------------------------------------------
// Step tolerance: a constant, or a positive piecewise-linear function of the
// image point (extended constantly beyond its breakpoints).

class EpsilonField {
 public:
  struct Breakpoint {
    Rational x;
    Rational eps;
  };

  static EpsilonField constant(Rational eps) {
    if (!(eps > 0)) throw std::invalid_argument("epsilon must be positive");
    EpsilonField f;
    f.points_.push_back({Rational(0), std::move(eps)});
    f.constant_ = true;
    return f;
  }

  static EpsilonField piecewise_linear(std::vector<Breakpoint> points) {
    if (points.empty()) throw std::invalid_argument("epsilon field needs breakpoints");
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!(points[i].eps > 0)) throw std::invalid_argument("epsilon field must be positive");
      if (i > 0 && !(points[i].x > points[i - 1].x))
        throw std::invalid_argument("epsilon field breakpoints must strictly increase");
    }
    EpsilonField f;
    f.points_ = std::move(points);
    return f;
  }

  bool is_constant() const { return constant_; }
  const std::vector<Breakpoint>& breakpoints() const { return points_; }

  Rational at(const Rational& x) const {
    if (constant_ || x <= points_.front().x) return points_.front().eps;
    if (x >= points_.back().x) return points_.back().eps;
    auto it = std::upper_bound(points_.begin(), points_.end(), x,
                               [](const Rational& v, const Breakpoint& b) { return v < b.x; });
    const Breakpoint& r = *it;
    const Breakpoint& l = *(it - 1);
    return l.eps + (r.eps - l.eps) * (x - l.x) / (r.x - l.x);
  }

  /// Supremum over a closed interval: attained at an endpoint or a breakpoint.
  Rational sup_over(const Interval& iv) const {
    if (constant_) return points_.front().eps;
    Rational best = std::max(at(iv.lo), at(iv.hi));
    for (const auto& b : points_)
      if (iv.lo < b.x && b.x < iv.hi && b.eps > best) best = b.eps;
    return best;
  }

  Rational min_value() const {
    Rational m = points_.front().eps;
    for (const auto& b : points_) m = std::min(m, b.eps);
    return m;
  }
  Rational max_value() const {
    Rational m = points_.front().eps;
    for (const auto& b : points_) m = std::max(m, b.eps);
    return m;
  }

 private:
  EpsilonField() = default;
  std::vector<Breakpoint> points_;
  bool constant_ = false;
};

// ---------------------------------------------------------------------------
// Chain graph

enum class GraphMode { Enclosure, Sampled };

/// Literal: i -> i whenever the enclosure of cell i comes within eps of it.
/// Certified (continuous maps only): a self-edge whose enclosure does not touch
/// the cell is dropped when the cell provably has no x with
/// |f(x) - x| < eps(f(x)). A chain confined to one cell of a continuous map
/// needs such a point, so dropping the edge removes no genuine cycle.
enum class SelfLoops { Certified, Literal };

inline std::string to_string(GraphMode m) { return m == GraphMode::Enclosure ? "enclosure" : "sampled"; }

struct ChainGraph {
  Grid grid;
  EpsilonField eps;
  GraphMode mode = GraphMode::Enclosure;
  std::vector<std::vector<std::uint32_t>> adjacency;  // sorted ascending
  SelfLoops self_loops = SelfLoops::Certified;

  std::size_t size() const { return adjacency.size(); }
  bool has_edge(std::size_t i, std::size_t j) const {
    const auto& a = adjacency[i];
    return std::binary_search(a.begin(), a.end(), static_cast<std::uint32_t>(j));
  }
  std::size_t edge_count() const {
    std::size_t m = 0;
    for (const auto& a : adjacency) m += a.size();
    return m;
  }
};

namespace detail {

// Cells j with dist(piece, cell_j) < tol, appended to `out`.
inline void cells_within(const Grid& grid, const Interval& piece, const Rational& tol,
                         std::vector<std::uint32_t>& out) {
  const Rational& w = grid.width();
  // dist < tol  <=>  floor((lo - L - tol)/w) <= j <= ceil((hi - L + tol)/w) - 1
  const Integer first = floor(Rational((piece.lo - grid.lo() - tol) / w));
  const Integer last = ceil(Rational((piece.hi - grid.lo() + tol) / w)) - 1;
  const Integer top(static_cast<unsigned long>(grid.size() - 1));
  const Integer from = first < 0 ? Integer(0) : first;
  const Integer to = last > top ? top : last;
  for (Integer j = from; j <= to; ++j) out.push_back(static_cast<std::uint32_t>(j.get_ui()));
}

inline constexpr std::size_t kSelfLoopSearchBudget = 512;

// Branch and bound for a point x in `cell` with |f(x) - x| < eps(f(x)).
// Undecided searches answer true.
inline bool has_near_fixed_point(const SystemSpec& spec, const Interval& cell, const EpsilonField& eps) {
  std::vector<Interval> stack{cell};
  std::size_t visited = 0;
  while (!stack.empty()) {
    const Interval s = stack.back();
    stack.pop_back();
    bool possible = false;
    for (const auto& p : image_enclosure(spec, s))
      if (distance(p, s) < eps.sup_over(p)) possible = true;
    if (!possible) continue;
    const Rational x = (s.lo + s.hi) / 2;
    const Rational y = eval(spec, x);
    if (abs(Rational(y - x)) < eps.at(y)) return true;
    if (++visited >= kSelfLoopSearchBudget) return true;
    stack.push_back({x, s.hi});
    stack.push_back({s.lo, x});
  }
  return false;
}

inline std::vector<std::uint32_t> cell_successors(const SystemSpec& spec, const Grid& grid,
                                                  const EpsilonField& eps, GraphMode mode,
                                                  std::size_t i, SelfLoops self_loops = SelfLoops::Literal) {
  std::vector<Interval> pieces;
  const Interval cell = grid.cell(i);
  if (mode == GraphMode::Enclosure) {
    pieces = image_enclosure(spec, cell);
  } else {
    for (const Rational& x : {cell.lo, grid.midpoint(i), cell.hi})
      pieces.push_back(Interval::point(eval(spec, x)));
  }
  std::vector<std::uint32_t> out;
  for (const auto& p : pieces) cells_within(grid, p, eps.sup_over(p), out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());

  if (self_loops == SelfLoops::Certified && mode == GraphMode::Enclosure && is_continuous_monotone(spec)) {
    const auto self = std::lower_bound(out.begin(), out.end(), static_cast<std::uint32_t>(i));
    const bool touches = std::any_of(pieces.begin(), pieces.end(),
                                     [&](const Interval& p) { return distance(p, cell) == 0; });
    if (self != out.end() && *self == i && !touches && !has_near_fixed_point(spec, cell, eps)) out.erase(self);
  }
  return out;
}

}  // namespace detail

/// Builds the one-step relation: i -> j iff some image piece of cell i lies
/// within (sup of eps over that piece) of cell j. Cells are independent, so
/// construction fans out over `threads` workers (0 = hardware concurrency).
inline ChainGraph build_chain_graph(const SystemSpec& spec, const Grid& grid, const EpsilonField& eps,
                                    GraphMode mode = GraphMode::Enclosure,
                                    SelfLoops self_loops = SelfLoops::Certified, unsigned threads = 0) {
  const Domain& d = spec.domain();
  if (!d.contains(grid.lo()) || !d.contains(grid.hi()))
    throw std::invalid_argument("grid does not lie inside the system's domain");
  if (d.closed() && (grid.lo() != d.lo || grid.hi() != d.hi))
    throw std::invalid_argument("grid must cover the system's closed domain");

  ChainGraph g{grid, eps, mode, std::vector<std::vector<std::uint32_t>>(grid.size()), self_loops};
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, grid.size()));

  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < grid.size(); i += step)
      g.adjacency[i] = detail::cell_successors(spec, grid, eps, mode, i, self_loops);
  };
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          work(t, threads);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return g;
}

/// Every edge of `a` is an edge of `b` (same grid assumed).
inline bool edges_subset(const ChainGraph& a, const ChainGraph& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!std::includes(b.adjacency[i].begin(), b.adjacency[i].end(), a.adjacency[i].begin(),
                       a.adjacency[i].end()))
      return false;
  return true;
}

/// One line per cell, `i: j1 j2 ...`.
inline void dump_graph(const ChainGraph& g, std::ostream& os) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    os << i << ":";
    for (auto j : g.adjacency[i]) os << ' ' << j;
    os << '\n';
  }
}

inline std::string dump_graph(const ChainGraph& g) {
  std::ostringstream os;
  dump_graph(g, os);
  return os.str();
}

// ---------------------------------------------------------------------------
// Strongly connected components and the condensation

struct Condensation {
  std::vector<std::uint32_t> node_of;              // cell -> node
  std::vector<std::vector<std::uint32_t>> members;  // node -> sorted cells
  std::vector<std::vector<std::uint32_t>> successors;  // node -> distinct successor nodes
  std::vector<bool> cyclic;  // node carries a cycle (size >= 2 or a self-edge)
  // Nodes are numbered so that every edge goes from a higher to a lower
  // number: node 0 is a sink.
  std::size_t size() const { return members.size(); }
};

/// Iterative Tarjan; nodes come out in reverse topological order.
inline Condensation condense(const std::vector<std::vector<std::uint32_t>>& adjacency) {
  constexpr std::uint32_t kUnvisited = UINT32_MAX;
  const std::size_t n = adjacency.size();
  std::vector<std::uint32_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::uint32_t> stack;
  std::vector<std::pair<std::uint32_t, std::size_t>> frames;  // (vertex, next edge)
  Condensation c;
  c.node_of.assign(n, 0);
  std::uint32_t counter = 0;

  for (std::uint32_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    frames.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      auto& [v, next] = frames.back();
      if (next < adjacency[v].size()) {
        const std::uint32_t w = adjacency[v][next++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const std::uint32_t done = v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().first] = std::min(low[frames.back().first], low[done]);
      if (low[done] != index[done]) continue;
      const auto node = static_cast<std::uint32_t>(c.members.size());
      std::vector<std::uint32_t> scc;
      std::uint32_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        c.node_of[w] = node;
        scc.push_back(w);
      } while (w != done);
      std::sort(scc.begin(), scc.end());
      c.members.push_back(std::move(scc));
    }
  }

  c.successors.resize(c.members.size());
  c.cyclic.assign(c.members.size(), false);
  for (std::size_t node = 0; node < c.members.size(); ++node) {
    auto& succ = c.successors[node];
    if (c.members[node].size() > 1) c.cyclic[node] = true;
    for (auto v : c.members[node]) {
      for (auto w : adjacency[v]) {
        if (c.node_of[w] == node) {
          if (w == v) c.cyclic[node] = true;
        } else {
          succ.push_back(c.node_of[w]);
        }
      }
    }
    std::sort(succ.begin(), succ.end());
    succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
  }
  return c;
}

/// Cells on a directed cycle, ascending.
inline std::vector<std::size_t> recurrent_cells(const ChainGraph& g) {
  const Condensation c = condense(g.adjacency);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (c.cyclic[c.node_of[i]]) out.push_back(i);
  return out;
}

/// Per cell: some recurrent cell is reachable (a recurrent cell reaches itself).
inline std::vector<bool> reaches_recurrent(const ChainGraph& g) {
  const Condensation c = condense(g.adjacency);
  std::vector<bool> node_reaches(c.size(), false);
  for (std::size_t node = 0; node < c.size(); ++node) {  // sinks first
    bool r = c.cyclic[node];
    for (auto s : c.successors[node]) r = r || node_reaches[s];
    node_reaches[node] = r;
  }
  std::vector<bool> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = node_reaches[c.node_of[i]];
  return out;
}

// ---------------------------------------------------------------------------
// Component poset

/// Dense rows x cols bit matrix.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), words_((cols + 63) / 64), bits_(rows * words_, 0) {}
  explicit BitMatrix(std::size_t n) : BitMatrix(n, n) {}

  std::size_t rows() const { return rows_; }
  bool test(std::size_t r, std::size_t c) const { return (bits_[r * words_ + c / 64] >> (c % 64)) & 1u; }
  void set(std::size_t r, std::size_t c) { bits_[r * words_ + c / 64] |= std::uint64_t{1} << (c % 64); }
  void or_row(std::size_t dst, std::size_t src) {
    for (std::size_t k = 0; k < words_; ++k) bits_[dst * words_ + k] |= bits_[src * words_ + k];
  }
  std::size_t row_count(std::size_t r) const {
    std::size_t total = 0;
    for (std::size_t k = 0; k < words_; ++k) total += static_cast<std::size_t>(__builtin_popcountll(bits_[r * words_ + k]));
    return total;
  }
  friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
};

class ComponentPoset;
inline ComponentPoset chain_components(const ChainGraph& g);
inline ComponentPoset dual(const ComponentPoset& p);

struct ChainComponent {
  std::size_t id = 0;
  std::vector<std::size_t> cells;  // ascending
  Rational representative;         // midpoint of the lowest member cell
  Interval hull;                   // from the lowest cell's lo to the highest cell's hi

  bool contiguous() const { return cells.empty() || cells.back() - cells.front() + 1 == cells.size(); }
};

/// Chain components with the strict order P < Q iff Q reaches P (dynamics
/// flows from larger to smaller components).
class ComponentPoset {
 public:
  ComponentPoset() = default;

  /// Builds from explicit strict relations (p, q) meaning p < q; the
  /// transitive closure is taken. Throws if the relation has a cycle.
  ComponentPoset(std::vector<ChainComponent> components,
                 const std::vector<std::pair<std::size_t, std::size_t>>& less_pairs)
      : components_(std::move(components)), below_(components_.size()) {
    for (std::size_t i = 0; i < components_.size(); ++i) components_[i].id = i;
    for (const auto& [p, q] : less_pairs) {
      if (p >= size() || q >= size()) throw std::out_of_range("relation refers to unknown component");
      below_.set(q, p);
    }
    close();
  }

  std::size_t size() const { return components_.size(); }
  const std::vector<ChainComponent>& components() const { return components_; }
  const ChainComponent& component(std::size_t id) const { return components_.at(id); }

  /// p strictly below q.
  bool less(std::size_t p, std::size_t q) const { return below_.test(q, p); }
  bool comparable(std::size_t p, std::size_t q) const { return less(p, q) || less(q, p); }
  std::size_t count_below(std::size_t q) const { return below_.row_count(q); }
  std::size_t count_above(std::size_t p) const {
    std::size_t n = 0;
    for (std::size_t q = 0; q < size(); ++q) n += less(p, q) ? 1 : 0;
    return n;
  }

  std::vector<std::pair<std::size_t, std::size_t>> order_pairs() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t p = 0; p < size(); ++p)
      for (std::size_t q = 0; q < size(); ++q)
        if (less(p, q)) out.push_back({p, q});
    return out;
  }

  const std::vector<std::size_t>& recurrent_cells() const { return recurrent_cells_; }

  friend bool operator==(const ComponentPoset& a, const ComponentPoset& b) {
    if (a.size() != b.size() || !(a.below_ == b.below_)) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a.components_[i].cells != b.components_[i].cells) return false;
    return true;
  }

 private:
  friend ComponentPoset chain_components(const ChainGraph& g);
  friend ComponentPoset dual(const ComponentPoset& p);

  void close() {
    // Warshall on bits; then reject cycles.
    const std::size_t n = size();
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t q = 0; q < n; ++q)
        if (below_.test(q, k)) below_.or_row(q, k);
    for (std::size_t i = 0; i < n; ++i)
      if (below_.test(i, i)) throw std::invalid_argument("order relation contains a cycle");
  }

  std::vector<ChainComponent> components_;
  BitMatrix below_;  // below_(q, p) set iff p < q
  std::vector<std::size_t> recurrent_cells_;
};

/// SCCs restricted to recurrent cells, ordered by reachability through the
/// whole condensation (transient cells included). Ids follow lowest cell.
inline ComponentPoset chain_components(const ChainGraph& g) {
  const Condensation c = condense(g.adjacency);

  std::vector<std::size_t> cyclic_nodes;
  for (std::size_t node = 0; node < c.size(); ++node)
    if (c.cyclic[node]) cyclic_nodes.push_back(node);
  std::sort(cyclic_nodes.begin(), cyclic_nodes.end(),
            [&](std::size_t a, std::size_t b) { return c.members[a].front() < c.members[b].front(); });

  const std::size_t k = cyclic_nodes.size();
  std::vector<std::size_t> component_of_node(c.size(), SIZE_MAX);
  ComponentPoset poset;
  poset.components_.resize(k);
  for (std::size_t id = 0; id < k; ++id) {
    const auto& cells = c.members[cyclic_nodes[id]];
    component_of_node[cyclic_nodes[id]] = id;
    auto& comp = poset.components_[id];
    comp.id = id;
    comp.cells.assign(cells.begin(), cells.end());
    comp.representative = g.grid.midpoint(cells.front());
    comp.hull = Interval{g.grid.cell_lo(cells.front()), g.grid.cell_lo(cells.back() + 1)};
    poset.recurrent_cells_.insert(poset.recurrent_cells_.end(), cells.begin(), cells.end());
  }
  std::sort(poset.recurrent_cells_.begin(), poset.recurrent_cells_.end());

  // reach(v): components reachable from node v by a path of length >= 1.
  BitMatrix reach(c.size(), k);
  for (std::size_t node = 0; node < c.size(); ++node) {  // sinks first
    for (auto s : c.successors[node]) {
      reach.or_row(node, s);
      if (component_of_node[s] != SIZE_MAX) reach.set(node, component_of_node[s]);
    }
  }
  poset.below_ = BitMatrix(k);
  for (std::size_t q = 0; q < k; ++q)
    for (std::size_t p = 0; p < k; ++p)
      if (p != q && reach.test(cyclic_nodes[q], p)) poset.below_.set(q, p);
  return poset;
}

}  // namespace chainposet
