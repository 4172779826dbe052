#pragma once

// Analysis plans read from `key = value` text. Lines starting with '#' are
// comments; list values use brackets, pairs use parentheses:
//
//   system = conjugated
//   inner = ordinal
//   lambda = 2
//   homeo = [(0,0), (1/3,1/2), (1,1)]
//   resolutions = [1024]
//   eps = auto
//   tasks = [components, lyapunov]

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chainposet/chaingraph.hpp"
#include "chainposet/ordinal.hpp"
#include "chainposet/rational.hpp"
#include "chainposet/systems.hpp"

namespace chainposet {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, std::size_t column, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

enum class Task { Components, Lyapunov, Refine, Signature, Conjugacy };

inline std::string to_string(Task t) {
  switch (t) {
    case Task::Components: return "components";
    case Task::Lyapunov: return "lyapunov";
    case Task::Refine: return "refine";
    case Task::Signature: return "signature";
    case Task::Conjugacy: return "conjugacy";
  }
  return "?";
}

enum class EpsRule {
  Auto,      // 2 * cell width
  Constant,  // fixed rational
  Field,     // piecewise-linear field
  Linking,   // 2 * largest gap between dense blocks at the level's depth
};

/// Everything needed to rebuild the system at another depth.
struct SystemRecipe {
  std::string kind;  // identity | square | ordinal | cantor | dense_blocks
  Ordinal lambda;
  int depth = 1;
  DenseVariant variant = DenseVariant::WithMax;
  std::optional<std::vector<PLHomeo::Breakpoint>> homeo;  // set for conjugated systems
};

struct AnalysisConfig {
  SystemRecipe recipe;
  std::vector<std::size_t> resolutions;
  std::vector<int> depths;  // optional, one per resolution
  EpsRule eps_rule = EpsRule::Auto;
  Rational eps;
  std::vector<EpsilonField::Breakpoint> eps_field;
  GraphMode mode = GraphMode::Enclosure;
  std::vector<Task> tasks;
  std::optional<std::vector<PLHomeo::Breakpoint>> conjugacy;
  std::size_t samples = 10;
  unsigned threads = 0;
  std::optional<std::string> json_path;
  std::optional<std::string> dot_dir;

  bool has_task(Task t) const {
    for (auto x : tasks)
      if (x == t) return true;
    return false;
  }
};

/// Builds the configured system, optionally at another depth.
inline SystemSpec build_system(const SystemRecipe& r, std::optional<int> depth = std::nullopt) {
  const int d = depth.value_or(r.depth);
  SystemSpec base = [&] {
    if (r.kind == "identity") return make_identity();
    if (r.kind == "square") return make_square();
    if (r.kind == "ordinal") return make_ordinal_map(r.lambda);
    if (r.kind == "cantor") return make_cantor_example(d);
    if (r.kind == "dense_blocks") return make_dense_blocks(d, r.variant);
    throw std::invalid_argument("unknown system kind " + r.kind);
  }();
  if (r.homeo) return conjugate(base, PLHomeo(*r.homeo));
  return base;
}

namespace detail {

// Cursor over one value, reporting columns relative to the source line.
class ValueReader {
 public:
  ValueReader(std::string text, std::size_t line, std::size_t column)
      : text_(std::move(text)), line_(line), column_(column) {}

  [[noreturn]] void fail(const std::string& message) const { throw ConfigError(line_, column_ + pos_, message); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }
  bool peek(char c) {
    skip_space();
    return pos_ < text_.size() && text_[pos_] == c;
  }
  void expect(char c) {
    if (!peek(c)) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  void finish() {
    if (!at_end()) fail("unexpected trailing text");
  }

  // Run of characters up to a delimiter.
  std::string atom() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ')' && text_[pos_] != ']' &&
           text_[pos_] != '(' && text_[pos_] != '[' && !std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    if (pos_ == start) fail("expected a value");
    atom_start_ = start;
    return text_.substr(start, pos_ - start);
  }

  Rational rational() {
    const std::string a = atom();
    try {
      return parse_rational(a);
    } catch (const std::exception&) {
      throw ConfigError(line_, column_ + atom_start_, "not a rational number: '" + a + "'");
    }
  }

  std::size_t positive_integer() {
    const std::string a = atom();
    std::size_t value = 0;
    for (char c : a) {
      if (!std::isdigit(static_cast<unsigned char>(c)) || value > (SIZE_MAX - 9) / 10)
        throw ConfigError(line_, column_ + atom_start_, "not a positive integer: '" + a + "'");
      value = value * 10 + static_cast<std::size_t>(c - '0');
    }
    if (value == 0) throw ConfigError(line_, column_ + atom_start_, "must be positive");
    return value;
  }

  template <typename F>
  auto list(F&& element) {
    std::vector<decltype(element())> out;
    expect('[');
    if (peek(']')) {
      ++pos_;
      return out;
    }
    for (;;) {
      out.push_back(element());
      if (peek(',')) {
        ++pos_;
        continue;
      }
      expect(']');
      return out;
    }
  }

  std::pair<Rational, Rational> pair() {
    expect('(');
    Rational a = rational();
    expect(',');
    Rational b = rational();
    expect(')');
    return {std::move(a), std::move(b)};
  }

  std::string rest() {
    skip_space();
    return text_.substr(pos_);
  }
  std::size_t column() const { return column_ + pos_; }
  std::size_t line() const { return line_; }
  std::size_t atom_column() const { return column_ + atom_start_; }

 private:
  std::string text_;
  std::size_t line_;
  std::size_t column_;
  std::size_t pos_ = 0;
  std::size_t atom_start_ = 0;
};

struct Entry {
  std::string value;
  std::size_t line = 0;
  std::size_t key_column = 0;
  std::size_t value_column = 0;
};

inline std::vector<PLHomeo::Breakpoint> read_breakpoints(ValueReader& r) {
  std::vector<PLHomeo::Breakpoint> out;
  for (auto& [x, y] : r.list([&] { return r.pair(); })) out.push_back({x, y});
  return out;
}

}  // namespace detail

/// Parses a configuration; every error carries a line and column.
inline AnalysisConfig parse_config(const std::string& text) {
  using detail::Entry;
  using detail::ValueReader;

  std::map<std::string, Entry> entries;
  std::istringstream in(text);
  std::string raw;
  for (std::size_t line_no = 1; std::getline(in, raw); ++line_no) {
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::size_t start = raw.find_first_not_of(" \t");
    if (start == std::string::npos || raw[start] == '#') continue;
    const auto eq = raw.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, start + 1, "expected 'key = value'");
    std::string key = raw.substr(start, eq - start);
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) key.pop_back();
    if (key.empty()) throw ConfigError(line_no, start + 1, "missing key");
    std::string value = raw.substr(eq + 1);
    if (const auto hash = value.find('#'); hash != std::string::npos) value.erase(hash);
    if (entries.count(key)) throw ConfigError(line_no, start + 1, "duplicate key '" + key + "'");
    entries[key] = Entry{value, line_no, start + 1, eq + 2};
  }

  std::map<std::string, bool> used;
  auto reader = [&](const std::string& key) -> std::optional<ValueReader> {
    const auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    used[key] = true;
    return ValueReader(it->second.value, it->second.line, it->second.value_column);
  };
  auto word = [&](const std::string& key) -> std::optional<std::pair<std::string, ValueReader>> {
    auto r = reader(key);
    if (!r) return std::nullopt;
    std::string w = r->atom();
    const std::size_t col = r->atom_column();
    r->finish();
    return std::make_pair(w, ValueReader(w, r->line(), col));
  };

  AnalysisConfig cfg;

  auto read_kind = [&](const std::string& key) {
    auto w = word(key);
    if (!w) throw ConfigError(1, 1, "missing required key '" + key + "'");
    static const std::vector<std::string> kinds{"identity", "square", "ordinal", "cantor", "dense_blocks"};
    for (const auto& k : kinds)
      if (w->first == k) return w->first;
    w->second.fail("unknown system '" + w->first + "'");
  };

  if (auto w = word("system"); w && w->first == "conjugated") {
    cfg.recipe.kind = read_kind("inner");
    auto h = reader("homeo");
    if (!h) w->second.fail("conjugated systems need 'homeo'");
    cfg.recipe.homeo = detail::read_breakpoints(*h);
    h->finish();
  } else {
    cfg.recipe.kind = read_kind("system");
  }

  if (cfg.recipe.kind == "ordinal") {
    auto r = reader("lambda");
    if (!r) throw ConfigError(entries.at("system").line, 1, "ordinal systems need 'lambda'");
    const std::size_t col = (r->skip_space(), r->column());
    const std::string text = r->rest();
    try {
      cfg.recipe.lambda = parse_ordinal(text);
    } catch (const OrdinalParseError& e) {
      throw ConfigError(r->line(), col + e.position(), e.what());
    }
  }
  if (auto r = reader("depth")) {
    const std::size_t col = (r->skip_space(), r->column());
    const std::string a = r->atom();
    r->finish();
    if (a.find_first_not_of("0123456789") != std::string::npos || a.size() > 2)
      throw ConfigError(r->line(), col, "depth must be a small non-negative integer");
    cfg.recipe.depth = std::stoi(a);
  }
  if (auto w = word("variant")) {
    if (w->first == "with_max") cfg.recipe.variant = DenseVariant::WithMax;
    else if (w->first == "no_max") cfg.recipe.variant = DenseVariant::NoMax;
    else if (w->first == "open_interval") cfg.recipe.variant = DenseVariant::OpenInterval;
    else w->second.fail("unknown variant '" + w->first + "'");
  }

  {
    auto r = reader("resolutions");
    if (!r) throw ConfigError(1, 1, "missing required key 'resolutions'");
    const std::size_t col = (r->skip_space(), r->column());
    cfg.resolutions = r->list([&] {
      const std::size_t n = r->positive_integer();
      if (n > kMaxCells)
        throw ConfigError(r->line(), r->atom_column(),
                          "resolution " + std::to_string(n) + " exceeds the cap of " + std::to_string(kMaxCells) +
                              " cells");
      return n;
    });
    r->finish();
    if (cfg.resolutions.empty()) throw ConfigError(r->line(), col, "at least one resolution is required");
  }

  if (auto r = reader("depths")) {
    const std::size_t col = (r->skip_space(), r->column());
    for (auto d : r->list([&] { return r->positive_integer(); })) cfg.depths.push_back(static_cast<int>(d));
    r->finish();
    if (cfg.depths.size() != cfg.resolutions.size())
      throw ConfigError(r->line(), col, "depths must list one depth per resolution");
    if (cfg.recipe.kind != "cantor" && cfg.recipe.kind != "dense_blocks")
      throw ConfigError(r->line(), col, "depths apply to cantor and dense_blocks systems only");
  }

  if (auto r = reader("eps")) {
    r->skip_space();
    const std::size_t col = r->column();
    const std::string head = r->atom();
    if (head == "auto") {
      cfg.eps_rule = EpsRule::Auto;
    } else if (head == "linking") {
      if (cfg.recipe.kind != "dense_blocks" || cfg.recipe.homeo)
        throw ConfigError(r->line(), col, "eps = linking needs a dense_blocks system");
      cfg.eps_rule = EpsRule::Linking;
    } else if (head == "pl") {
      cfg.eps_rule = EpsRule::Field;
      for (auto& [x, e] : r->list([&] { return r->pair(); })) {
        if (e <= 0) throw ConfigError(r->line(), col, "eps must be positive");
        cfg.eps_field.push_back({x, e});
      }
      if (cfg.eps_field.size() < 2) throw ConfigError(r->line(), col, "a piecewise-linear field needs two breakpoints");
    } else {
      cfg.eps_rule = EpsRule::Constant;
      try {
        cfg.eps = parse_rational(head);
      } catch (const std::exception&) {
        throw ConfigError(r->line(), col, "eps must be auto, linking, pl [...] or a rational");
      }
      if (cfg.eps <= 0) throw ConfigError(r->line(), col, "eps must be positive");
    }
    r->finish();
  }

  if (auto w = word("mode")) {
    if (w->first == "enclosure") cfg.mode = GraphMode::Enclosure;
    else if (w->first == "sampled") cfg.mode = GraphMode::Sampled;
    else w->second.fail("mode must be enclosure or sampled");
  }

  {
    auto r = reader("tasks");
    if (!r) throw ConfigError(1, 1, "missing required key 'tasks'");
    const std::size_t col = (r->skip_space(), r->column());
    const auto names = r->list([&] {
      std::string name = r->atom();
      return std::make_pair(std::move(name), r->atom_column());
    });
    r->finish();
    if (names.empty()) throw ConfigError(r->line(), col, "at least one task is required");
    for (const auto& [name, c] : names) {
      Task t;
      if (name == "components") t = Task::Components;
      else if (name == "lyapunov") t = Task::Lyapunov;
      else if (name == "refine") t = Task::Refine;
      else if (name == "signature") t = Task::Signature;
      else if (name == "conjugacy") t = Task::Conjugacy;
      else throw ConfigError(r->line(), c, "unknown task '" + name + "'");
      if (!cfg.has_task(t)) cfg.tasks.push_back(t);
    }
    if (cfg.has_task(Task::Signature) && cfg.resolutions.size() < 2)
      throw ConfigError(r->line(), col, "the signature task needs at least two resolutions");
  }

  if (auto r = reader("conjugacy")) {
    cfg.conjugacy = detail::read_breakpoints(*r);
    r->finish();
  }
  if (cfg.has_task(Task::Conjugacy) && !cfg.conjugacy)
    throw ConfigError(entries.at("tasks").line, entries.at("tasks").value_column,
                      "the conjugacy task needs a 'conjugacy' homeomorphism");

  if (auto r = reader("samples")) {
    cfg.samples = r->positive_integer();
    r->finish();
  }
  if (auto r = reader("threads")) {
    cfg.threads = static_cast<unsigned>(r->positive_integer());
    r->finish();
  }
  if (auto r = reader("json")) cfg.json_path = r->rest();
  if (auto r = reader("dot_dir")) cfg.dot_dir = r->rest();

  for (const auto& [key, e] : entries)
    if (!used.count(key)) throw ConfigError(e.line, e.key_column, "unknown key '" + key + "'");

  // Validate the system once so construction errors surface as config errors.
  try {
    if (cfg.depths.empty()) {
      build_system(cfg.recipe);
    } else {
      for (int d : cfg.depths) build_system(cfg.recipe, d);
    }
    if (cfg.conjugacy) (void)PLHomeo(*cfg.conjugacy);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    const auto& sys = entries.count("homeo") ? entries.at("homeo") : entries.at("system");
    throw ConfigError(sys.line, sys.value_column, e.what());
  }
  return cfg;
}

inline AnalysisConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace chainposet
