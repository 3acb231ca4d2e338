#pragma once

#include <string>
#include <utility>
#include <variant>

#include "qsalg/ext.hpp"
#include "qsalg/interval.hpp"

namespace qsalg {

// Scalar over the computable ordered field: either an exact quadratic-
// extension element or a certified interval. Exact operands stay exact as
// long as the operation is closed in the extension field; otherwise the
// result degrades to a conservative interval at ambient precision.
class Scalar {
 public:
  static constexpr size_t kMaxExactTerms = 64;

  Scalar() : v_(Ext()) {}
  Scalar(const Rational& q) : v_(Ext(q)) {}
  Scalar(long n) : v_(Ext(Rational(n))) {}
  Scalar(Ext e) : v_(std::move(e)) {}
  Scalar(Interval iv) : v_(std::move(iv)) {}

  static Scalar sqrt_rational(const Rational& q) { return Scalar(Ext::sqrt_of_rational(q)); }

  bool is_exact() const { return std::holds_alternative<Ext>(v_); }
  const Ext& exact() const { return std::get<Ext>(v_); }
  const Interval& interval() const { return std::get<Interval>(v_); }

  bool is_exact_zero() const { return is_exact() && exact().is_zero(); }
  bool is_rational() const { return is_exact() && exact().is_rational(); }
  Rational rational_value() const { return exact().rational_value(); }

  Interval to_interval(mpfr_prec_t prec = 0) const {
    if (is_exact()) return exact().to_interval(prec);
    return interval();
  }

  double to_double() const {
    if (is_exact()) return exact().to_double();
    return interval().mid_double();
  }

  friend Scalar operator+(const Scalar& a, const Scalar& b) {
    if (a.is_exact() && b.is_exact()) {
      Ext r = a.exact() + b.exact();
      if (r.term_count() <= kMaxExactTerms) return Scalar(std::move(r));
      return Scalar(r.to_interval());
    }
    return Scalar(a.to_interval() + b.to_interval());
  }

  friend Scalar operator-(const Scalar& a, const Scalar& b) {
    if (a.is_exact() && b.is_exact()) {
      Ext r = a.exact() - b.exact();
      if (r.term_count() <= kMaxExactTerms) return Scalar(std::move(r));
      return Scalar(r.to_interval());
    }
    return Scalar(a.to_interval() - b.to_interval());
  }

  friend Scalar operator*(const Scalar& a, const Scalar& b) {
    if (a.is_exact() && b.is_exact()) {
      try {
        Ext r = a.exact() * b.exact();
        if (r.term_count() <= kMaxExactTerms) return Scalar(std::move(r));
        return Scalar(r.to_interval());
      } catch (const Error& e) {
        if (e.code() != ErrorCode::PrecisionExhausted) throw;
      }
    }
    return Scalar(a.to_interval() * b.to_interval());
  }

  friend Scalar operator/(const Scalar& a, const Scalar& b) {
    if (a.is_exact() && b.is_exact()) {
      if (b.exact().is_zero()) fail(ErrorCode::DivisionByZero, "division by exact zero");
      try {
        Ext r = a.exact() / b.exact();
        if (r.term_count() <= kMaxExactTerms) return Scalar(std::move(r));
        return Scalar(r.to_interval());
      } catch (const Error& e) {
        if (e.code() != ErrorCode::PrecisionExhausted) throw;
      }
    }
    return Scalar(a.to_interval() / b.to_interval());
  }

  Scalar operator-() const {
    if (is_exact()) return Scalar(-exact());
    return Scalar(-interval());
  }

  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
  Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }
  Scalar& operator/=(const Scalar& o) { return *this = *this / o; }

  // Exact in the extension field only for nonnegative rationals whose
  // radicand canonicalizes; everything else falls back to a certified
  // interval square root.
  Scalar sqrt() const {
    if (is_exact()) {
      const Ext& e = exact();
      if (e.is_rational()) {
        Rational q = e.rational_value();
        if (q < 0) fail(ErrorCode::UsageError, "sqrt of negative scalar");
        try {
          return Scalar(Ext::sqrt_of_rational(q));
        } catch (const Error& err) {
          if (err.code() != ErrorCode::PrecisionExhausted) throw;
        }
      }
      return Scalar(e.to_interval().sqrt());
    }
    return Scalar(interval().sqrt());
  }

  Scalar abs() const {
    if (is_exact()) return Scalar(exact().abs());
    return Scalar(interval().abs());
  }

  // +1 / -1 / 0 (exact zero) when certain; interval straddling zero fails
  // with PrecisionExhausted if `strict`, otherwise returns 0.
  int certain_sign() const {
    if (is_exact()) return exact().sign();
    return interval().certain_sign();
  }

  bool certainly_positive() const {
    if (is_exact()) return exact().sign() > 0;
    return interval().is_positive();
  }
  bool certainly_negative() const {
    if (is_exact()) return exact().sign() < 0;
    return interval().is_negative();
  }
  bool certainly_nonneg() const {
    if (is_exact()) return exact().sign() >= 0;
    return mpfr_sgn(interval().lo()) >= 0;
  }

  // Exact equality; only meaningful for exact scalars.
  friend bool operator==(const Scalar& a, const Scalar& b) {
    if (a.is_exact() && b.is_exact()) return a.exact() == b.exact();
    return false;
  }

  std::string str() const {
    if (is_exact()) return exact().str();
    return interval().str();
  }

 private:
  std::variant<Ext, Interval> v_;
};

inline Scalar operator*(const Rational& q, const Scalar& s) { return Scalar(q) * s; }

// Complex scalar: pair of real Scalars.
struct CScalar {
  Scalar re;
  Scalar im;

  CScalar() = default;
  CScalar(Scalar r) : re(std::move(r)) {}
  CScalar(Scalar r, Scalar i) : re(std::move(r)), im(std::move(i)) {}
  CScalar(const Rational& r) : re(r) {}
  CScalar(long r) : re(r) {}
  CScalar(const Rational& r, const Rational& i) : re(r), im(i) {}

  static CScalar i() { return CScalar(Scalar(Rational(0)), Scalar(Rational(1))); }

  bool is_exact() const { return re.is_exact() && im.is_exact(); }
  bool is_exact_zero() const { return re.is_exact_zero() && im.is_exact_zero(); }
  bool is_real_exact() const { return im.is_exact_zero(); }

  CScalar conj() const { return CScalar(re, -im); }

  Scalar abs2() const { return re * re + im * im; }

  friend CScalar operator+(const CScalar& a, const CScalar& b) {
    return CScalar(a.re + b.re, a.im + b.im);
  }
  friend CScalar operator-(const CScalar& a, const CScalar& b) {
    return CScalar(a.re - b.re, a.im - b.im);
  }
  friend CScalar operator*(const CScalar& a, const CScalar& b) {
    return CScalar(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
  }
  friend CScalar operator/(const CScalar& a, const CScalar& b) {
    Scalar d = b.abs2();
    CScalar num = a * b.conj();
    return CScalar(num.re / d, num.im / d);
  }
  CScalar operator-() const { return CScalar(-re, -im); }

  CScalar& operator+=(const CScalar& o) { return *this = *this + o; }
  CScalar& operator-=(const CScalar& o) { return *this = *this - o; }
  CScalar& operator*=(const CScalar& o) { return *this = *this * o; }

  friend bool operator==(const CScalar& a, const CScalar& b) {
    return a.re == b.re && a.im == b.im;
  }

  std::string str() const { return "(" + re.str() + ", " + im.str() + ")"; }
};

inline CScalar operator*(const Scalar& s, const CScalar& z) { return CScalar(s) * z; }

}  // namespace qsalg
