#pragma once

// Countable ordinals below epsilon_0 in iterated Cantor normal form:
//   a = w^{e_1}*c_1 + ... + w^{e_k}*c_k,  e_1 > ... > e_k,  c_i >= 1.
// Exponents are themselves ordinals in the same form, so every value this
// type can hold is below epsilon_0.

#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace chainposet {

class Ordinal {
 public:
  struct Term;

  Ordinal() = default;  // zero

  static Ordinal finite(std::uint64_t n);
  static Ordinal omega();
  /// w^exponent * coefficient
  static Ordinal omega_power(Ordinal exponent, std::uint64_t coefficient = 1);
  /// Validates strictly decreasing exponents and positive coefficients.
  static Ordinal from_terms(std::vector<Term> terms);

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_finite() const;
  /// Value of a finite ordinal; throws otherwise.
  std::uint64_t finite_value() const;
  /// w^g for some g >= 1 (the additively indecomposable infinite ordinals).
  bool is_indecomposable_infinite() const;

  friend std::strong_ordering operator<=>(const Ordinal& a, const Ordinal& b);
  friend bool operator==(const Ordinal& a, const Ordinal& b);

 private:
  std::vector<Term> terms_;
};

struct Ordinal::Term {
  Ordinal exponent;
  std::uint64_t coefficient = 1;
};

// ---------------------------------------------------------------------------

inline std::strong_ordering operator<=>(const Ordinal& a, const Ordinal& b) {
  const auto& x = a.terms_;
  const auto& y = b.terms_;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (auto c = x[i].exponent <=> y[i].exponent; c != 0) return c;
    if (auto c = x[i].coefficient <=> y[i].coefficient; c != 0) return c;
  }
  return x.size() <=> y.size();
}

inline bool operator==(const Ordinal& a, const Ordinal& b) {
  return (a <=> b) == 0;
}

inline Ordinal Ordinal::finite(std::uint64_t n) {
  Ordinal r;
  if (n > 0) r.terms_.push_back(Term{Ordinal{}, n});
  return r;
}

inline Ordinal Ordinal::omega() { return omega_power(finite(1)); }

inline Ordinal Ordinal::omega_power(Ordinal exponent, std::uint64_t coefficient) {
  if (coefficient == 0) return Ordinal{};
  Ordinal r;
  r.terms_.push_back(Term{std::move(exponent), coefficient});
  return r;
}

inline Ordinal Ordinal::from_terms(std::vector<Term> terms) {
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].coefficient == 0)
      throw std::invalid_argument("Cantor normal form coefficient must be >= 1");
    if (i > 0 && !(terms[i].exponent < terms[i - 1].exponent))
      throw std::invalid_argument("Cantor normal form exponents must strictly decrease");
  }
  Ordinal r;
  r.terms_ = std::move(terms);
  return r;
}

inline bool Ordinal::is_finite() const {
  return terms_.empty() || (terms_.size() == 1 && terms_[0].exponent.is_zero());
}

inline std::uint64_t Ordinal::finite_value() const {
  if (!is_finite()) throw std::domain_error("ordinal is not finite");
  return terms_.empty() ? 0 : terms_[0].coefficient;
}

inline bool Ordinal::is_indecomposable_infinite() const {
  return terms_.size() == 1 && terms_[0].coefficient == 1 && !terms_[0].exponent.is_zero();
}

// ---------------------------------------------------------------------------
// Arithmetic

/// Ordinal sum a + b. Terms of a below the leading exponent of b are absorbed.
inline Ordinal add(const Ordinal& a, const Ordinal& b) {
  if (b.is_zero()) return a;
  const auto& lead = b.terms().front();
  std::vector<Ordinal::Term> out;
  for (const auto& t : a.terms()) {
    if (t.exponent > lead.exponent) {
      out.push_back(t);
    } else if (t.exponent == lead.exponent) {
      if (t.coefficient > std::numeric_limits<std::uint64_t>::max() - lead.coefficient)
        throw std::overflow_error("ordinal coefficient overflow");
      out.push_back(Ordinal::Term{t.exponent, t.coefficient + lead.coefficient});
      break;
    } else {
      break;
    }
  }
  const bool merged = !out.empty() && out.back().exponent == lead.exponent;
  for (std::size_t i = merged ? 1 : 0; i < b.terms().size(); ++i) out.push_back(b.terms()[i]);
  return Ordinal::from_terms(std::move(out));
}

inline Ordinal operator+(const Ordinal& a, const Ordinal& b) { return add(a, b); }

enum class OrdinalKind { Zero, Successor, Limit };

struct Classification {
  OrdinalKind kind = OrdinalKind::Zero;
  Ordinal predecessor;  // meaningful for Successor only
};

inline Classification classify(const Ordinal& a) {
  if (a.is_zero()) return {OrdinalKind::Zero, {}};
  const auto& last = a.terms().back();
  if (!last.exponent.is_zero()) return {OrdinalKind::Limit, {}};
  std::vector<Ordinal::Term> terms = a.terms();
  if (--terms.back().coefficient == 0) terms.pop_back();
  return {OrdinalKind::Successor, Ordinal::from_terms(std::move(terms))};
}

/// lambda = head + w^tail_exponent with 1 <= head < lambda.
struct TailSplit {
  Ordinal head;
  Ordinal tail_exponent;
};

inline TailSplit tail_split(const Ordinal& lambda) {
  if (classify(lambda).kind != OrdinalKind::Limit)
    throw std::invalid_argument("tail_split requires a limit ordinal");
  std::vector<Ordinal::Term> terms = lambda.terms();
  Ordinal tail_exponent = terms.back().exponent;
  if (terms.size() == 1 && terms[0].coefficient == 1) {
    // w^g absorbs every smaller summand, so 1 + w^g = w^g.
    return {Ordinal::finite(1), std::move(tail_exponent)};
  }
  if (--terms.back().coefficient == 0) terms.pop_back();
  return {Ordinal::from_terms(std::move(terms)), std::move(tail_exponent)};
}

namespace detail {

// Wainer fundamental sequence for an arbitrary limit ordinal:
//   (d + w^g)[j] = d + w^g[j],  w^{g'+1}[j] = w^{g'}*j,  w^g[j] = w^{g[j]} for limit g.
inline Ordinal fundamental_term(const Ordinal& lambda, std::uint64_t j) {
  const auto& last = lambda.terms().back();
  std::vector<Ordinal::Term> head(lambda.terms().begin(), lambda.terms().end() - 1);
  if (last.coefficient > 1) head.push_back(Ordinal::Term{last.exponent, last.coefficient - 1});
  const Ordinal prefix = Ordinal::from_terms(std::move(head));

  const auto cls = classify(last.exponent);
  Ordinal tail;
  if (cls.kind == OrdinalKind::Successor) {
    tail = Ordinal::omega_power(cls.predecessor, j);
  } else {
    tail = Ordinal::omega_power(fundamental_term(last.exponent, j));
  }
  return add(prefix, tail);
}

}  // namespace detail

/// j-th element (j >= 1) of the fundamental sequence of an indecomposable w^g, g >= 1.
inline Ordinal fundamental(const Ordinal& lambda, std::uint64_t j) {
  if (!lambda.is_indecomposable_infinite())
    throw std::invalid_argument("fundamental sequences are defined here for w^g with g >= 1");
  if (j == 0) throw std::invalid_argument("fundamental sequence index starts at 1");
  Ordinal beta = detail::fundamental_term(lambda, j);
  if (beta.is_zero()) beta = Ordinal::finite(1);
  return beta;
}

// ---------------------------------------------------------------------------
// Text syntax: 0, 5, w, w^2*3+w+1, w^(w+1)

std::string to_string(const Ordinal& a);

namespace detail {

inline std::string exponent_text(const Ordinal& e) {
  if (e.is_finite()) return std::to_string(e.finite_value());
  return "(" + to_string(e) + ")";
}

}  // namespace detail

inline std::string to_string(const Ordinal& a) {
  if (a.is_zero()) return "0";
  std::string out;
  for (const auto& t : a.terms()) {
    if (!out.empty()) out += "+";
    if (t.exponent.is_zero()) {
      out += std::to_string(t.coefficient);
      continue;
    }
    out += "w";
    if (!(t.exponent == Ordinal::finite(1))) out += "^" + detail::exponent_text(t.exponent);
    if (t.coefficient > 1) out += "*" + std::to_string(t.coefficient);
  }
  return out;
}

class OrdinalParseError : public std::runtime_error {
 public:
  OrdinalParseError(std::size_t pos, const std::string& what)
      : std::runtime_error("ordinal syntax error at column " + std::to_string(pos + 1) + ": " + what),
        position_(pos) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

namespace detail {

class OrdinalParser {
 public:
  explicit OrdinalParser(std::string_view text) : text_(text) {}

  Ordinal parse() {
    Ordinal value = sum();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return value;
  }

 private:
  Ordinal sum() {
    Ordinal value = term();
    while (accept('+')) value = add(value, term());
    return value;
  }

  Ordinal term() {
    skip_space();
    if (pos_ < text_.size() && is_digit(text_[pos_])) return Ordinal::finite(number());
    if (!accept('w')) fail("expected a number or 'w'");
    Ordinal exponent = Ordinal::finite(1);
    if (accept('^')) exponent = power();
    std::uint64_t coefficient = 1;
    if (accept('*')) {
      skip_space();
      coefficient = number();
    }
    return Ordinal::omega_power(std::move(exponent), coefficient);
  }

  Ordinal power() {
    skip_space();
    if (accept('(')) {
      Ordinal e = sum();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (accept('w')) return Ordinal::omega();
    if (pos_ < text_.size() && is_digit(text_[pos_])) return Ordinal::finite(number());
    fail("expected an exponent");
  }

  std::uint64_t number() {
    const std::size_t start = pos_;
    std::uint64_t v = 0;
    while (pos_ < text_.size() && is_digit(text_[pos_])) {
      const auto d = static_cast<std::uint64_t>(text_[pos_] - '0');
      if (v > (std::numeric_limits<std::uint64_t>::max() - d) / 10) fail("number too large");
      v = v * 10 + d;
      ++pos_;
    }
    if (pos_ == start) {
      pos_ = start;
      fail("expected a number");
    }
    return v;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  static bool is_digit(char c) { return c >= '0' && c <= '9'; }

  [[noreturn]] void fail(const std::string& what) const { throw OrdinalParseError(pos_, what); }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Ordinal parse_ordinal(std::string_view text) { return detail::OrdinalParser(text).parse(); }

}  // namespace chainposet
