// numbers.hpp
// Exact rational arithmetic and elements a + b*sqrt(d) of a real quadratic
// field Q(sqrt(d)).  All predicates used elsewhere (sign, zero, floor,
// comparison) are decided exactly; doubles appear only on explicit request.

#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace mblab {

struct ArithmeticOverflow : std::runtime_error {
  explicit ArithmeticOverflow(const std::string& what)
      : std::runtime_error("arithmetic overflow: " + what) {}
};

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what)
      : std::runtime_error("parse error: " + what) {}
};

namespace detail {

using i128 = __int128;

// Fits-check after exact i128 computation; keeps products of two reduced
// values inside i128 for the cross-multiplication comparisons below.
inline long long narrow(i128 v, const char* ctx) {
  constexpr i128 lim = (i128(1) << 62);
  if (v >= lim || v <= -lim) throw ArithmeticOverflow(ctx);
  return static_cast<long long>(v);
}

inline i128 iabs(i128 v) { return v < 0 ? -v : v; }

inline i128 igcd(i128 a, i128 b) {
  a = iabs(a);
  b = iabs(b);
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

}  // namespace detail

class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(long long n) : num_(n), den_(1) {}  // NOLINT(runtime/explicit)
  Rational(long long n, long long d) { assign(n, d); }

  long long num() const { return num_; }
  long long den() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }
  int sign() const { return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0); }

  friend Rational operator+(const Rational& x, const Rational& y) {
    return make(detail::i128(x.num_) * y.den_ + detail::i128(y.num_) * x.den_,
                detail::i128(x.den_) * y.den_);
  }
  friend Rational operator-(const Rational& x, const Rational& y) {
    return make(detail::i128(x.num_) * y.den_ - detail::i128(y.num_) * x.den_,
                detail::i128(x.den_) * y.den_);
  }
  friend Rational operator*(const Rational& x, const Rational& y) {
    return make(detail::i128(x.num_) * y.num_, detail::i128(x.den_) * y.den_);
  }
  friend Rational operator/(const Rational& x, const Rational& y) {
    if (y.num_ == 0) throw std::domain_error("rational division by zero");
    return make(detail::i128(x.num_) * y.den_, detail::i128(x.den_) * y.num_);
  }
  Rational operator-() const {
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
  }
  Rational& operator+=(const Rational& y) { return *this = *this + y; }
  Rational& operator-=(const Rational& y) { return *this = *this - y; }
  Rational& operator*=(const Rational& y) { return *this = *this * y; }
  Rational& operator/=(const Rational& y) { return *this = *this / y; }

  friend bool operator==(const Rational& x, const Rational& y) {
    return x.num_ == y.num_ && x.den_ == y.den_;
  }
  friend bool operator!=(const Rational& x, const Rational& y) { return !(x == y); }
  friend bool operator<(const Rational& x, const Rational& y) {
    return detail::i128(x.num_) * y.den_ < detail::i128(y.num_) * x.den_;
  }
  friend bool operator>(const Rational& x, const Rational& y) { return y < x; }
  friend bool operator<=(const Rational& x, const Rational& y) { return !(y < x); }
  friend bool operator>=(const Rational& x, const Rational& y) { return !(x < y); }

  long long floor() const {
    long long q = num_ / den_;
    if (num_ % den_ != 0 && num_ < 0) --q;
    return q;
  }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

 private:
  static Rational make(detail::i128 n, detail::i128 d) {
    Rational r;
    r.assign128(n, d);
    return r;
  }
  void assign(long long n, long long d) { assign128(n, d); }
  void assign128(detail::i128 n, detail::i128 d) {
    if (d == 0) throw std::domain_error("rational with zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    detail::i128 g = detail::igcd(n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    num_ = detail::narrow(n, "rational numerator");
    den_ = detail::narrow(d, "rational denominator");
  }

  long long num_;
  long long den_;
};

// Removes the square part of d, folding it into the coefficient; returns the
// square-free remainder (0 and 1 collapse to "no surd").
inline long long squarefree_part(long long d, long long& scale_out) {
  if (d < 0) throw std::domain_error("negative radicand");
  long long scale = 1;
  for (long long p = 2; p * p <= d; ++p) {
    while (d % (p * p) == 0) {
      d /= p * p;
      scale *= p;
    }
  }
  scale_out = scale;
  return d;
}

// Element a + b*sqrt(d) with a, b exact rationals and d a square-free
// non-negative integer.  d == 0 marks exact rationals; values with different
// nonzero radicands do not mix (one field per run).
class QuadraticNumber {
 public:
  QuadraticNumber() : a_(0), b_(0), d_(0) {}
  QuadraticNumber(const Rational& a) : a_(a), b_(0), d_(0) {}  // NOLINT
  QuadraticNumber(long long a) : a_(a), b_(0), d_(0) {}        // NOLINT
  QuadraticNumber(const Rational& a, const Rational& b, long long d) : a_(a), b_(b), d_(d) {
    normalize();
  }

  const Rational& rational_part() const { return a_; }
  const Rational& surd_part() const { return b_; }
  long long radicand() const { return d_; }

  bool is_rational() const { return d_ == 0; }
  bool is_zero() const { return a_.is_zero() && b_.is_zero(); }

  int sign() const {
    if (b_.is_zero()) return a_.sign();
    if (a_.is_zero()) return b_.sign();
    int sa = a_.sign(), sb = b_.sign();
    if (sa == sb) return sa;
    // sign(a + b sqrt(d)) with a, b of opposite signs: compare a^2 vs b^2 d.
    Rational lhs = a_ * a_;
    Rational rhs = b_ * b_ * Rational(d_);
    if (lhs == rhs) return 0;  // cannot happen for square-free d >= 2
    return (lhs > rhs) ? sa : sb;
  }

  friend QuadraticNumber operator+(const QuadraticNumber& x, const QuadraticNumber& y) {
    long long d = merge_radicand(x, y);
    return QuadraticNumber(x.a_ + y.a_, x.b_ + y.b_, d);
  }
  friend QuadraticNumber operator-(const QuadraticNumber& x, const QuadraticNumber& y) {
    long long d = merge_radicand(x, y);
    return QuadraticNumber(x.a_ - y.a_, x.b_ - y.b_, d);
  }
  friend QuadraticNumber operator*(const QuadraticNumber& x, const QuadraticNumber& y) {
    long long d = merge_radicand(x, y);
    return QuadraticNumber(x.a_ * y.a_ + x.b_ * y.b_ * Rational(d),
                           x.a_ * y.b_ + x.b_ * y.a_, d);
  }
  friend QuadraticNumber operator/(const QuadraticNumber& x, const QuadraticNumber& y) {
    if (y.is_zero()) throw std::domain_error("quadratic number division by zero");
    long long d = merge_radicand(x, y);
    // multiply by the conjugate of y
    Rational denom = y.a_ * y.a_ - y.b_ * y.b_ * Rational(d);
    return QuadraticNumber((x.a_ * y.a_ - x.b_ * y.b_ * Rational(d)) / denom,
                           (x.b_ * y.a_ - x.a_ * y.b_) / denom, d);
  }
  QuadraticNumber operator-() const { return QuadraticNumber(-a_, -b_, d_); }

  friend bool operator==(const QuadraticNumber& x, const QuadraticNumber& y) {
    return (x - y).is_zero();
  }
  friend bool operator!=(const QuadraticNumber& x, const QuadraticNumber& y) {
    return !(x == y);
  }
  friend bool operator<(const QuadraticNumber& x, const QuadraticNumber& y) {
    return (x - y).sign() < 0;
  }
  friend bool operator>(const QuadraticNumber& x, const QuadraticNumber& y) { return y < x; }
  friend bool operator<=(const QuadraticNumber& x, const QuadraticNumber& y) {
    return !(y < x);
  }
  friend bool operator>=(const QuadraticNumber& x, const QuadraticNumber& y) {
    return !(x < y);
  }

  long long floor() const {
    if (b_.is_zero()) return a_.floor();
    long long guess = static_cast<long long>(std::llround(std::floor(to_double())));
    // the double estimate is off by at most 1 at our scales; fix exactly
    while (*this < QuadraticNumber(Rational(guess))) --guess;
    while (*this >= QuadraticNumber(Rational(guess + 1))) ++guess;
    return guess;
  }

  double to_double() const {
    double s = d_ > 0 ? std::sqrt(static_cast<double>(d_)) : 0.0;
    return a_.to_double() + b_.to_double() * s;
  }

  std::string str() const {
    if (b_.is_zero()) return a_.str();
    std::string surd = b_.str() + "*sqrt(" + std::to_string(d_) + ")";
    if (a_.is_zero()) return surd;
    if (b_.sign() > 0) return a_.str() + " + " + surd;
    return a_.str() + " - " + (-b_).str() + "*sqrt(" + std::to_string(d_) + ")";
  }

 private:
  static long long merge_radicand(const QuadraticNumber& x, const QuadraticNumber& y) {
    if (x.d_ == 0 || x.b_.is_zero()) return (y.b_.is_zero()) ? 0 : y.d_;
    if (y.d_ == 0 || y.b_.is_zero()) return x.d_;
    if (x.d_ != y.d_)
      throw std::domain_error("mixing distinct quadratic fields sqrt(" +
                              std::to_string(x.d_) + ") and sqrt(" + std::to_string(y.d_) +
                              ")");
    return x.d_;
  }

  void normalize() {
    if (d_ < 0) throw std::domain_error("negative radicand");
    if (d_ != 0) {
      long long scale = 1;
      d_ = squarefree_part(d_, scale);
      if (scale != 1) b_ *= Rational(scale);
    }
    if (d_ <= 1) {  // sqrt(0) = 0, sqrt(1) = 1
      if (d_ == 1) a_ += b_;
      b_ = Rational(0);
      d_ = 0;
    }
    if (b_.is_zero()) d_ = 0;
  }

  Rational a_;
  Rational b_;
  long long d_;
};

// Parses "a/b + c/e*sqrt(d)" (either part optional, signs allowed, spaces
// ignored).  Examples: "1/2", "-3", "sqrt(2)", "1/2 + 1/2*sqrt(5)".
inline QuadraticNumber parse_quadratic(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw ParseError("empty rotation entry");

  auto parse_rational = [](const std::string& tok) -> Rational {
    if (tok.empty()) throw ParseError("empty rational token");
    size_t slash = tok.find('/');
    try {
      if (slash == std::string::npos) return Rational(std::stoll(tok));
      return Rational(std::stoll(tok.substr(0, slash)), std::stoll(tok.substr(slash + 1)));
    } catch (const std::invalid_argument&) {
      throw ParseError("bad rational '" + tok + "'");
    } catch (const std::out_of_range&) {
      throw ParseError("rational out of range '" + tok + "'");
    }
  };

  // split on top-level + / - (not the leading sign)
  std::vector<std::string> parts;
  size_t start = 0;
  for (size_t i = 1; i < s.size(); ++i) {
    if ((s[i] == '+' || s[i] == '-') && s[i - 1] != '(' && s[i - 1] != '*' &&
        s[i - 1] != '/' && s[i - 1] != '+' && s[i - 1] != '-') {
      parts.push_back(s.substr(start, i - start));
      start = i;
    }
  }
  parts.push_back(s.substr(start));

  Rational a(0), b(0);
  long long d = 0;
  for (std::string part : parts) {
    int sgn = 1;
    if (!part.empty() && (part[0] == '+' || part[0] == '-')) {
      if (part[0] == '-') sgn = -1;
      part = part.substr(1);
    }
    size_t sq = part.find("sqrt(");
    if (sq == std::string::npos) {
      a += Rational(sgn) * parse_rational(part);
      continue;
    }
    size_t close = part.find(')', sq);
    if (close == std::string::npos) throw ParseError("unbalanced sqrt in '" + text + "'");
    long long dd;
    try {
      dd = std::stoll(part.substr(sq + 5, close - sq - 5));
    } catch (...) {
      throw ParseError("bad radicand in '" + text + "'");
    }
    Rational coeff(1);
    if (sq > 0) {
      if (part[sq - 1] != '*') throw ParseError("expected '*' before sqrt in '" + text + "'");
      coeff = parse_rational(part.substr(0, sq - 1));
    }
    if (close + 1 != part.size()) throw ParseError("trailing text after sqrt in '" + text + "'");
    long long scale = 1;
    long long dfree = squarefree_part(dd, scale);
    coeff *= Rational(scale);
    if (dfree <= 1) {
      a += Rational(sgn) * coeff * Rational(dfree == 1 ? 1 : 0);
      continue;
    }
    if (d != 0 && d != dfree)
      throw ParseError("mixed radicands in '" + text + "'");
    d = dfree;
    b += Rational(sgn) * coeff;
  }
  return QuadraticNumber(a, b, d);
}

}  // namespace mblab
