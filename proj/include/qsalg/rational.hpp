#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

#include "qsalg/errors.hpp"

namespace qsalg {

using Rational = mpq_class;
using Integer = mpz_class;

inline Rational rational_of(long num, long den = 1) {
  if (den == 0) fail(ErrorCode::DivisionByZero, "rational with zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

// Accepts "p", "p/q" and plain decimal strings like "-0.125".
inline Rational parse_rational(const std::string& s) {
  if (s.empty()) fail(ErrorCode::ParseError, "empty rational literal");
  auto dot = s.find('.');
  if (dot != std::string::npos) {
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    size_t frac_len = s.size() - dot - 1;
    Integer num;
    if (num.set_str(digits, 10) != 0) fail(ErrorCode::ParseError, "bad rational literal: " + s);
    Integer den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac_len);
    Rational q(num, den);
    q.canonicalize();
    return q;
  }
  Rational q;
  if (q.set_str(s, 10) != 0) fail(ErrorCode::ParseError, "bad rational literal: " + s);
  if (q.get_den() == 0) fail(ErrorCode::DivisionByZero, "rational with zero denominator");
  q.canonicalize();
  return q;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

inline int sign(const Rational& q) { return sgn(q); }

// Writes n = s^2 * k with k square-free; returns (s, k).
// Trial division up to 10^6, then perfect-square check on the cofactor.
// Radicands beyond that range cannot be canonicalized and are rejected;
// callers fall back to certified intervals.
inline std::pair<Integer, Integer> split_square(const Integer& n_in) {
  if (n_in < 0) fail(ErrorCode::UsageError, "split_square of negative integer");
  if (n_in <= 1) return {Integer(1), n_in};
  Integer s = 1, rad = 1, rem = n_in;
  const unsigned long kTrialBound = 1000000;
  for (unsigned long p = 2; p <= kTrialBound; p += (p == 2) ? 1 : 2) {
    if (Integer(p) * p > rem) break;
    if (rem % p == 0) {
      unsigned count = 0;
      while (rem % p == 0) {
        rem /= p;
        ++count;
      }
      for (unsigned i = 0; i + 1 < count; i += 2) s *= p;
      if (count % 2 == 1) rad *= p;
    }
  }
  if (rem > 1) {
    if (mpz_perfect_square_p(rem.get_mpz_t())) {
      Integer r;
      mpz_sqrt(r.get_mpz_t(), rem.get_mpz_t());
      s *= r;
    } else if (rem <= Integer(kTrialBound) * kTrialBound) {
      rad *= rem;  // fully factored: rem is prime
    } else {
      fail(ErrorCode::PrecisionExhausted, "radicand too large to canonicalize: " + n_in.get_str());
    }
  }
  return {s, rad};
}

}  // namespace qsalg
