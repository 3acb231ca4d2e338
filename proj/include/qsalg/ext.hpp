#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qsalg/errors.hpp"
#include "qsalg/interval.hpp"
#include "qsalg/rational.hpp"

namespace qsalg {

// Element of the quadratic-extension field Q(sqrt(k1), sqrt(k2), ...):
// a finite sum  sum_i c_i * sqrt(k_i)  with rational c_i and distinct
// square-free integer radicands k_i (k = 1 is the rational part). The
// representation is canonical, so equality and the zero test are exact.
class Ext {
 public:
  struct Term {
    Integer radicand;  // square-free, >= 1
    Rational coeff;
  };

  Ext() = default;
  Ext(const Rational& q) {
    if (q != 0) terms_.push_back({Integer(1), q});
  }
  Ext(long v) : Ext(Rational(v)) {}

  static Ext sqrt_of_integer(const Integer& n) {
    if (n < 0) fail(ErrorCode::UsageError, "sqrt of negative integer");
    if (n == 0) return Ext();
    auto [s, k] = split_square(n);
    Ext e;
    e.terms_.push_back({k, Rational(s)});
    e.normalize();
    return e;
  }

  // Exact sqrt of a nonnegative rational: sqrt(p/q) = sqrt(p*q)/q.
  static Ext sqrt_of_rational(const Rational& q) {
    if (q < 0) fail(ErrorCode::UsageError, "sqrt of negative rational");
    if (q == 0) return Ext();
    Integer pq = q.get_num() * q.get_den();
    Ext root = sqrt_of_integer(pq);
    for (auto& t : root.terms_) t.coeff /= q.get_den();
    return root;
  }

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_rational() const {
    return terms_.empty() || (terms_.size() == 1 && terms_[0].radicand == 1);
  }
  Rational rational_value() const {
    if (terms_.empty()) return Rational(0);
    if (!is_rational()) fail(ErrorCode::UsageError, "extension element is irrational");
    return terms_[0].coeff;
  }

  size_t term_count() const { return terms_.size(); }

  friend bool operator==(const Ext& a, const Ext& b) {
    if (a.terms_.size() != b.terms_.size()) return false;
    for (size_t i = 0; i < a.terms_.size(); ++i)
      if (a.terms_[i].radicand != b.terms_[i].radicand || a.terms_[i].coeff != b.terms_[i].coeff)
        return false;
    return true;
  }
  friend bool operator!=(const Ext& a, const Ext& b) { return !(a == b); }

  Ext operator-() const {
    Ext r = *this;
    for (auto& t : r.terms_) t.coeff = -t.coeff;
    return r;
  }

  friend Ext operator+(const Ext& a, const Ext& b) {
    Ext r;
    r.terms_.reserve(a.terms_.size() + b.terms_.size());
    size_t i = 0, j = 0;
    while (i < a.terms_.size() || j < b.terms_.size()) {
      if (j == b.terms_.size() ||
          (i < a.terms_.size() && a.terms_[i].radicand < b.terms_[j].radicand)) {
        r.terms_.push_back(a.terms_[i++]);
      } else if (i == a.terms_.size() || b.terms_[j].radicand < a.terms_[i].radicand) {
        r.terms_.push_back(b.terms_[j++]);
      } else {
        Rational c = a.terms_[i].coeff + b.terms_[j].coeff;
        if (c != 0) r.terms_.push_back({a.terms_[i].radicand, c});
        ++i;
        ++j;
      }
    }
    return r;
  }

  friend Ext operator-(const Ext& a, const Ext& b) { return a + (-b); }

  friend Ext operator*(const Ext& a, const Ext& b) {
    std::map<Integer, Rational> acc;
    for (const auto& ta : a.terms_)
      for (const auto& tb : b.terms_) {
        // sqrt(k1)*sqrt(k2) = g*sqrt((k1/g)(k2/g)) with g = gcd(k1,k2);
        // square-free inputs keep the product radicand square-free.
        Integer g;
        mpz_gcd(g.get_mpz_t(), ta.radicand.get_mpz_t(), tb.radicand.get_mpz_t());
        Integer rad = (ta.radicand / g) * (tb.radicand / g);
        Rational c = ta.coeff * tb.coeff * Rational(g);
        auto it = acc.find(rad);
        if (it == acc.end())
          acc.emplace(rad, c);
        else
          it->second += c;
      }
    Ext r;
    for (auto& [rad, c] : acc)
      if (c != 0) r.terms_.push_back({rad, c});
    return r;
  }

  Ext& operator+=(const Ext& o) { return *this = *this + o; }
  Ext& operator-=(const Ext& o) { return *this = *this - o; }
  Ext& operator*=(const Ext& o) { return *this = *this * o; }

  // Field inverse by iterated conjugation: pick a prime p dividing some
  // radicand, write x = A + sqrt(p)*B with A, B free of p, and reduce
  // 1/x = (A - sqrt(p)B) / (A^2 - p B^2); the denominator drops p from the
  // prime support, so the recursion terminates.
  Ext inverse() const {
    if (is_zero()) fail(ErrorCode::DivisionByZero, "inverse of zero");
    if (is_rational()) return Ext(Rational(1) / terms_[0].coeff);
    Integer p = smallest_radicand_prime();
    Ext a, b;  // *this = a + sqrt(p) * b
    for (const auto& t : terms_) {
      if (t.radicand % p == 0) {
        b.terms_.push_back({t.radicand / p, t.coeff});
      } else {
        a.terms_.push_back({t.radicand, t.coeff});
      }
    }
    a.normalize();
    b.normalize();
    Ext sqrt_p;
    sqrt_p.terms_.push_back({p, Rational(1)});
    Ext conj = a - sqrt_p * b;
    Ext denom = a * a - Ext(Rational(p)) * (b * b);
    return conj * denom.inverse();
  }

  friend Ext operator/(const Ext& a, const Ext& b) { return a * b.inverse(); }

  // Exact sign: the canonical form makes the zero test trivial; nonzero
  // elements are resolved by interval evaluation at increasing precision.
  int sign() const {
    if (terms_.empty()) return 0;
    if (terms_.size() == 1) return sgn(terms_[0].coeff);
    for (mpfr_prec_t prec = 128; prec <= kMaxPrecision; prec *= 2) {
      Interval v = to_interval(prec);
      int s = v.certain_sign();
      if (s != 0) return s;
    }
    fail(ErrorCode::PrecisionExhausted, "sign of extension element unresolved");
  }

  friend bool operator<(const Ext& a, const Ext& b) { return (a - b).sign() < 0; }
  friend bool operator>(const Ext& a, const Ext& b) { return (a - b).sign() > 0; }
  friend bool operator<=(const Ext& a, const Ext& b) { return (a - b).sign() <= 0; }
  friend bool operator>=(const Ext& a, const Ext& b) { return (a - b).sign() >= 0; }

  Ext abs() const { return sign() < 0 ? -*this : *this; }

  Interval to_interval(mpfr_prec_t prec = 0) const {
    if (prec == 0) prec = ambient_precision();
    Interval acc(prec);
    for (const auto& t : terms_) {
      Interval term = Interval::from_rational(t.coeff, prec);
      if (t.radicand != 1) term = term * Interval::sqrt_integer(t.radicand, prec);
      acc = acc + term;
    }
    return acc;
  }

  double to_double() const { return to_interval(64).mid_double(); }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (size_t i = 0; i < terms_.size(); ++i) {
      const auto& t = terms_[i];
      if (i) out += " + ";
      out += t.coeff.get_str();
      if (t.radicand != 1) out += "*sqrt(" + t.radicand.get_str() + ")";
    }
    return out;
  }

 private:
  void normalize() {
    std::sort(terms_.begin(), terms_.end(),
              [](const Term& a, const Term& b) { return a.radicand < b.radicand; });
    std::vector<Term> merged;
    for (auto& t : terms_) {
      if (!merged.empty() && merged.back().radicand == t.radicand)
        merged.back().coeff += t.coeff;
      else
        merged.push_back(t);
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(),
                                [](const Term& t) { return t.coeff == 0; }),
                 merged.end());
    terms_ = std::move(merged);
  }

  Integer smallest_radicand_prime() const {
    for (const auto& t : terms_) {
      if (t.radicand == 1) continue;
      Integer n = t.radicand;
      for (unsigned long p = 2;; p += (p == 2) ? 1 : 2) {
        if (Integer(p) * p > n) return n;  // n itself is prime
        if (n % p == 0) return Integer(p);
      }
    }
    fail(ErrorCode::UsageError, "no radicand prime in rational element");
  }

  std::vector<Term> terms_;  // sorted by radicand, nonzero coefficients
};

}  // namespace qsalg
