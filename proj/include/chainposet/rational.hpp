#pragma once

// Exact rationals for point values, cell bounds and Lyapunov values.
// Backed by GMP's mpq_class; everything here is a thin helper layer.

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace chainposet {

using Rational = mpq_class;
using Integer = mpz_class;

inline Rational make_rational(long num, long den = 1) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline Rational make_rational(const Integer& num, const Integer& den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

/// Largest integer <= q.
inline Integer floor(const Rational& q) {
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

/// Smallest integer >= q.
inline Integer ceil(const Rational& q) {
  Integer r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

inline Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

/// Renders `p/q`, or `p` for integers.
inline std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

/// Accepts `p`, `p/q`, `-p/q` and plain decimals like `0.25`.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto trim = [](std::string& t) {
    const auto b = t.find_first_not_of(" \t");
    const auto e = t.find_last_not_of(" \t");
    t = (b == std::string::npos) ? std::string{} : t.substr(b, e - b + 1);
  };
  trim(s);
  if (s.empty()) throw std::invalid_argument("empty rational");

  auto parse_int = [](const std::string& t) {
    if (t.empty() || t.find_first_not_of("+-0123456789") != std::string::npos)
      throw std::invalid_argument("malformed integer '" + t + "'");
    Integer z;
    if (z.set_str(t[0] == '+' ? t.substr(1) : t, 10) != 0)
      throw std::invalid_argument("malformed integer '" + t + "'");
    return z;
  };

  if (const auto dot = s.find('.'); dot != std::string::npos) {
    const std::string whole = s.substr(0, dot);
    const std::string frac = s.substr(dot + 1);
    if (frac.empty() || frac.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("malformed decimal '" + s + "'");
    const bool negative = !whole.empty() && whole[0] == '-';
    Integer w = (whole.empty() || whole == "-" || whole == "+") ? Integer(0) : parse_int(whole);
    Integer scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
    Integer f = parse_int(frac);
    if (negative) f = -f;
    return make_rational(Integer(w * scale + f), scale);
  }

  if (const auto slash = s.find('/'); slash != std::string::npos) {
    std::string num = s.substr(0, slash);
    std::string den = s.substr(slash + 1);
    trim(num);
    trim(den);
    return make_rational(parse_int(num), parse_int(den));
  }
  return Rational(parse_int(s));
}

inline double to_double(const Rational& q) { return q.get_d(); }

/// Closed interval with rational endpoints, lo <= hi.
struct Interval {
  Rational lo;
  Rational hi;

  Interval() = default;
  Interval(Rational l, Rational h) : lo(std::move(l)), hi(std::move(h)) {
    if (hi < lo) throw std::invalid_argument("interval with hi < lo");
  }
  static Interval point(const Rational& x) { return {x, x}; }

  bool contains(const Rational& x) const { return lo <= x && x <= hi; }
  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
  Rational length() const { return hi - lo; }

  friend bool operator==(const Interval& a, const Interval& b) {
    return a.lo == b.lo && a.hi == b.hi;
  }
};

/// Infimum distance between two closed intervals.
inline Rational distance(const Interval& a, const Interval& b) {
  if (a.hi < b.lo) return b.lo - a.hi;
  if (b.hi < a.lo) return a.lo - b.hi;
  return 0;
}

inline std::string to_string(const Interval& iv) {
  return "[" + to_string(iv.lo) + ", " + to_string(iv.hi) + "]";
}

}  // namespace chainposet
