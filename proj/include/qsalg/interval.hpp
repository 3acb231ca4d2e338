#pragma once

#include <mpfr.h>

#include <algorithm>
#include <string>
#include <utility>

#include "qsalg/errors.hpp"
#include "qsalg/precision.hpp"
#include "qsalg/rational.hpp"

namespace qsalg {

// Closed interval [lo, hi] of mpfr reals with outward rounding. Every
// operation is conservative: the exact value of the expression lies in the
// computed interval.
class Interval {
 public:
  Interval() : Interval(ambient_precision()) { set_zero(); }

  explicit Interval(mpfr_prec_t prec) {
    mpfr_init2(lo_, prec);
    mpfr_init2(hi_, prec);
    mpfr_set_zero(lo_, 1);
    mpfr_set_zero(hi_, 1);
  }

  Interval(const Interval& o) {
    mpfr_init2(lo_, mpfr_get_prec(o.lo_));
    mpfr_init2(hi_, mpfr_get_prec(o.hi_));
    mpfr_set(lo_, o.lo_, MPFR_RNDD);
    mpfr_set(hi_, o.hi_, MPFR_RNDU);
  }

  Interval(Interval&& o) noexcept {
    mpfr_init2(lo_, 2);
    mpfr_init2(hi_, 2);
    mpfr_swap(lo_, o.lo_);
    mpfr_swap(hi_, o.hi_);
  }

  Interval& operator=(const Interval& o) {
    if (this != &o) {
      mpfr_set_prec(lo_, mpfr_get_prec(o.lo_));
      mpfr_set_prec(hi_, mpfr_get_prec(o.hi_));
      mpfr_set(lo_, o.lo_, MPFR_RNDD);
      mpfr_set(hi_, o.hi_, MPFR_RNDU);
    }
    return *this;
  }

  Interval& operator=(Interval&& o) noexcept {
    mpfr_swap(lo_, o.lo_);
    mpfr_swap(hi_, o.hi_);
    return *this;
  }

  ~Interval() {
    mpfr_clear(lo_);
    mpfr_clear(hi_);
  }

  static Interval from_rational(const Rational& q, mpfr_prec_t prec = 0) {
    Interval r(prec ? prec : ambient_precision());
    mpfr_set_q(r.lo_, q.get_mpq_t(), MPFR_RNDD);
    mpfr_set_q(r.hi_, q.get_mpq_t(), MPFR_RNDU);
    return r;
  }

  static Interval from_long(long v, mpfr_prec_t prec = 0) {
    Interval r(prec ? prec : ambient_precision());
    mpfr_set_si(r.lo_, v, MPFR_RNDD);
    mpfr_set_si(r.hi_, v, MPFR_RNDU);
    return r;
  }

  static Interval from_double(double v, mpfr_prec_t prec = 0) {
    Interval r(prec ? prec : ambient_precision());
    mpfr_set_d(r.lo_, v, MPFR_RNDD);
    mpfr_set_d(r.hi_, v, MPFR_RNDU);
    return r;
  }

  // sqrt(k) for a nonnegative integer radicand.
  static Interval sqrt_integer(const Integer& k, mpfr_prec_t prec = 0) {
    Interval r(prec ? prec : ambient_precision());
    mpfr_t tmp;
    mpfr_init2(tmp, mpfr_get_prec(r.lo_) + 8);
    mpfr_set_z(tmp, k.get_mpz_t(), MPFR_RNDD);
    mpfr_sqrt(r.lo_, tmp, MPFR_RNDD);
    mpfr_set_z(tmp, k.get_mpz_t(), MPFR_RNDU);
    mpfr_sqrt(r.hi_, tmp, MPFR_RNDU);
    mpfr_clear(tmp);
    return r;
  }

  void set_zero() {
    mpfr_set_zero(lo_, 1);
    mpfr_set_zero(hi_, 1);
  }

  mpfr_prec_t precision() const { return std::max(mpfr_get_prec(lo_), mpfr_get_prec(hi_)); }

  const mpfr_t& lo() const { return lo_; }
  const mpfr_t& hi() const { return hi_; }

  bool is_point() const { return mpfr_equal_p(lo_, hi_); }
  bool contains_zero() const { return mpfr_sgn(lo_) <= 0 && mpfr_sgn(hi_) >= 0; }
  bool is_positive() const { return mpfr_sgn(lo_) > 0; }
  bool is_negative() const { return mpfr_sgn(hi_) < 0; }

  bool contains(const Rational& q) const {
    return mpfr_cmp_q(lo_, q.get_mpq_t()) <= 0 && mpfr_cmp_q(hi_, q.get_mpq_t()) >= 0;
  }

  // +1 / -1 when the sign is certain, 0 when the interval straddles zero.
  int certain_sign() const {
    if (is_positive()) return 1;
    if (is_negative()) return -1;
    return 0;
  }

  Interval operator-() const {
    Interval r(precision());
    mpfr_neg(r.lo_, hi_, MPFR_RNDD);
    mpfr_neg(r.hi_, lo_, MPFR_RNDU);
    return r;
  }

  friend Interval operator+(const Interval& a, const Interval& b) {
    Interval r(std::max(a.precision(), b.precision()));
    mpfr_add(r.lo_, a.lo_, b.lo_, MPFR_RNDD);
    mpfr_add(r.hi_, a.hi_, b.hi_, MPFR_RNDU);
    return r;
  }

  friend Interval operator-(const Interval& a, const Interval& b) {
    Interval r(std::max(a.precision(), b.precision()));
    mpfr_sub(r.lo_, a.lo_, b.hi_, MPFR_RNDD);
    mpfr_sub(r.hi_, a.hi_, b.lo_, MPFR_RNDU);
    return r;
  }

  friend Interval operator*(const Interval& a, const Interval& b) {
    mpfr_prec_t prec = std::max(a.precision(), b.precision());
    Interval r(prec);
    mpfr_t t;
    mpfr_init2(t, prec);
    // lo: min of the four products rounded down.
    bool first = true;
    const mpfr_t* as[2] = {&a.lo_, &a.hi_};
    const mpfr_t* bs[2] = {&b.lo_, &b.hi_};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        mpfr_mul(t, *as[i], *bs[j], MPFR_RNDD);
        if (first || mpfr_less_p(t, r.lo_)) mpfr_set(r.lo_, t, MPFR_RNDD);
        mpfr_mul(t, *as[i], *bs[j], MPFR_RNDU);
        if (first || mpfr_greater_p(t, r.hi_)) mpfr_set(r.hi_, t, MPFR_RNDU);
        first = false;
      }
    mpfr_clear(t);
    return r;
  }

  friend Interval operator/(const Interval& a, const Interval& b) {
    if (b.contains_zero()) fail(ErrorCode::DivisionByZero, "interval divisor straddles zero");
    mpfr_prec_t prec = std::max(a.precision(), b.precision());
    Interval r(prec);
    mpfr_t t;
    mpfr_init2(t, prec);
    bool first = true;
    const mpfr_t* as[2] = {&a.lo_, &a.hi_};
    const mpfr_t* bs[2] = {&b.lo_, &b.hi_};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        mpfr_div(t, *as[i], *bs[j], MPFR_RNDD);
        if (first || mpfr_less_p(t, r.lo_)) mpfr_set(r.lo_, t, MPFR_RNDD);
        mpfr_div(t, *as[i], *bs[j], MPFR_RNDU);
        if (first || mpfr_greater_p(t, r.hi_)) mpfr_set(r.hi_, t, MPFR_RNDU);
        first = false;
      }
    mpfr_clear(t);
    return r;
  }

  Interval& operator+=(const Interval& o) { return *this = *this + o; }
  Interval& operator-=(const Interval& o) { return *this = *this - o; }
  Interval& operator*=(const Interval& o) { return *this = *this * o; }

  // Square root; requires hi >= 0. Negative lo is clamped to zero, which is
  // conservative for values known to be nonnegative.
  Interval sqrt() const {
    if (mpfr_sgn(hi_) < 0) fail(ErrorCode::UsageError, "sqrt of negative interval");
    Interval r(precision());
    if (mpfr_sgn(lo_) <= 0)
      mpfr_set_zero(r.lo_, 1);
    else
      mpfr_sqrt(r.lo_, lo_, MPFR_RNDD);
    mpfr_sqrt(r.hi_, hi_, MPFR_RNDU);
    return r;
  }

  Interval abs() const {
    Interval r(precision());
    if (mpfr_sgn(lo_) >= 0) return *this;
    if (mpfr_sgn(hi_) <= 0) return -*this;
    mpfr_set_zero(r.lo_, 1);
    mpfr_t t;
    mpfr_init2(t, precision());
    mpfr_neg(t, lo_, MPFR_RNDU);
    if (mpfr_greater_p(t, hi_))
      mpfr_set(r.hi_, t, MPFR_RNDU);
    else
      mpfr_set(r.hi_, hi_, MPFR_RNDU);
    mpfr_clear(t);
    return r;
  }

  Interval hull(const Interval& o) const {
    Interval r(std::max(precision(), o.precision()));
    mpfr_min(r.lo_, lo_, o.lo_, MPFR_RNDD);
    mpfr_max(r.hi_, hi_, o.hi_, MPFR_RNDU);
    return r;
  }

  Interval width() const {
    Interval r(precision());
    mpfr_sub(r.lo_, hi_, lo_, MPFR_RNDD);
    mpfr_sub(r.hi_, hi_, lo_, MPFR_RNDU);
    return r;
  }

  bool width_below(const Rational& bound) const {
    mpfr_t w;
    mpfr_init2(w, precision());
    mpfr_sub(w, hi_, lo_, MPFR_RNDU);
    bool ok = mpfr_cmp_q(w, bound.get_mpq_t()) <= 0;
    mpfr_clear(w);
    return ok;
  }

  Interval midpoint() const {
    Interval r(precision());
    mpfr_add(r.lo_, lo_, hi_, MPFR_RNDN);
    mpfr_div_2ui(r.lo_, r.lo_, 1, MPFR_RNDN);
    mpfr_set(r.hi_, r.lo_, MPFR_RNDN);
    return r;
  }

  // Exact rational value of the midpoint (mpfr values are dyadic).
  Rational midpoint_rational() const {
    mpfr_t m;
    mpfr_init2(m, precision());
    mpfr_add(m, lo_, hi_, MPFR_RNDN);
    mpfr_div_2ui(m, m, 1, MPFR_RNDN);
    Rational q;
    mpfr_get_q(q.get_mpq_t(), m);
    mpfr_clear(m);
    q.canonicalize();
    return q;
  }

  Rational lo_rational() const {
    Rational q;
    mpfr_get_q(q.get_mpq_t(), lo_);
    q.canonicalize();
    return q;
  }

  Rational hi_rational() const {
    Rational q;
    mpfr_get_q(q.get_mpq_t(), hi_);
    q.canonicalize();
    return q;
  }

  double lo_double() const { return mpfr_get_d(lo_, MPFR_RNDD); }
  double hi_double() const { return mpfr_get_d(hi_, MPFR_RNDU); }
  double mid_double() const { return (lo_double() + hi_double()) / 2; }

  bool certainly_less(const Interval& o) const { return mpfr_less_p(hi_, o.lo_); }
  bool certainly_greater(const Interval& o) const { return mpfr_greater_p(lo_, o.hi_); }

  std::string str(size_t digits = 20) const {
    char* ls = nullptr;
    char* hs = nullptr;
    mpfr_asprintf(&ls, "%.*Rg", (int)digits, lo_);
    mpfr_asprintf(&hs, "%.*Rg", (int)digits, hi_);
    std::string out = std::string("[") + ls + ", " + hs + "]";
    mpfr_free_str(ls);
    mpfr_free_str(hs);
    return out;
  }

 private:
  mpfr_t lo_;
  mpfr_t hi_;
};

}  // namespace qsalg
