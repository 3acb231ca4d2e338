#include <random>

#include "doctest.h"
#include "qsalg/ext.hpp"
#include "qsalg/interval.hpp"
#include "qsalg/rational.hpp"
#include "qsalg/scalar.hpp"

using namespace qsalg;

TEST_CASE("rational parsing") {
  CHECK(parse_rational("3/4") == Rational(3, 4));
  CHECK(parse_rational("-7") == Rational(-7));
  CHECK(parse_rational("0.125") == Rational(1, 8));
  CHECK(parse_rational("-0.5") == Rational(-1, 2));
  CHECK_THROWS_AS(parse_rational("abc"), Error);
}

TEST_CASE("square-free splitting") {
  auto [s1, k1] = split_square(Integer(8));
  CHECK(s1 == 2);
  CHECK(k1 == 2);
  auto [s2, k2] = split_square(Integer(49));
  CHECK(s2 == 7);
  CHECK(k2 == 1);
  auto [s3, k3] = split_square(Integer(360));  // 36 * 10
  CHECK(s3 == 6);
  CHECK(k3 == 10);
  auto [s4, k4] = split_square(Integer(1));
  CHECK(s4 == 1);
  CHECK(k4 == 1);
}

TEST_CASE("extension field arithmetic") {
  Ext r2 = Ext::sqrt_of_integer(2);
  Ext r3 = Ext::sqrt_of_integer(3);
  CHECK(r2 * r2 == Ext(Rational(2)));
  CHECK(r2 * r3 == Ext::sqrt_of_integer(6));
  CHECK(Ext::sqrt_of_integer(8) == Ext(Rational(2)) * r2);
  CHECK(Ext::sqrt_of_rational(Rational(1, 2)) * Ext(Rational(2)) == r2);

  // (1 + sqrt 2)(1 - sqrt 2) = -1
  Ext a = Ext(Rational(1)) + r2;
  Ext b = Ext(Rational(1)) - r2;
  CHECK(a * b == Ext(Rational(-1)));

  // field inverse with two radicals
  Ext x = Ext(Rational(1)) + r2 + r3;
  Ext inv = x.inverse();
  CHECK(x * inv == Ext(Rational(1)));

  CHECK((r2 - Ext(Rational(1))).sign() > 0);
  CHECK((r2 - Ext(Rational(3, 2))).sign() < 0);
  CHECK((r2 * r2 - Ext(Rational(2))).sign() == 0);
}

TEST_CASE("interval outward rounding") {
  Interval third = Interval::from_rational(Rational(1, 3), 64);
  CHECK(third.contains(Rational(1, 3)));
  CHECK(mpfr_cmp(third.lo(), third.hi()) < 0);  // 1/3 is not dyadic

  Interval r2 = Interval::sqrt_integer(2, 128);
  Interval prod = r2 * r2;
  CHECK(prod.contains(Rational(2)));
  CHECK(prod.width_below(Rational(1, Integer(1) << 100)));
}

TEST_CASE("scalar contagion and sqrt fallback") {
  Scalar a(Rational(2));
  Scalar b = a.sqrt();
  CHECK(b.is_exact());  // sqrt(2) stays exact in the extension
  Scalar c = (b + Scalar(Rational(1))).sqrt();  // sqrt(1 + sqrt 2): interval fallback
  CHECK(!c.is_exact());
  Interval cc = c.to_interval() * c.to_interval();
  Interval target = Scalar(Rational(1)).to_interval() + b.to_interval();
  CHECK(!(cc.certainly_less(target)));
  CHECK(!(target.certainly_less(cc)));
}

TEST_CASE("interval containment on random expression trees") {
  std::mt19937_64 rng(12345);
  std::uniform_int_distribution<int> op_pick(0, 3);
  std::uniform_int_distribution<long> leaf_num(-6, 6);
  std::uniform_int_distribution<long> leaf_den(1, 5);
  for (int trial = 0; trial < 1000; ++trial) {
    // random tree of depth <= 4 evaluated both exactly and in intervals
    std::function<std::pair<Rational, Interval>(int)> gen = [&](int depth)
        -> std::pair<Rational, Interval> {
      if (depth == 0 || op_pick(rng) == 3) {
        Rational q(leaf_num(rng), leaf_den(rng));
        q.canonicalize();
        return {q, Interval::from_rational(q, 64)};
      }
      auto [ql, il] = gen(depth - 1);
      auto [qr, ir] = gen(depth - 1);
      switch (op_pick(rng)) {
        case 0:
          return {ql + qr, il + ir};
        case 1:
          return {ql - qr, il - ir};
        default:
          return {ql * qr, il * ir};
      }
    };
    auto [exact, box] = gen(4);
    CHECK(box.contains(exact));
  }
}

TEST_CASE("extension field fuzz: inverses and signs agree with intervals") {
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<long> coef(-5, 5);
  std::uniform_int_distribution<long> den(1, 4);
  std::uniform_int_distribution<int> rad_pick(0, 4);
  const long radicands[5] = {1, 2, 3, 5, 6};
  for (int trial = 0; trial < 200; ++trial) {
    Ext x;
    for (int t = 0; t < 3; ++t) {
      Rational q = rational_of(coef(rng), den(rng));
      x += Ext(q) * Ext::sqrt_of_integer(radicands[rad_pick(rng)]);
    }
    // sign agrees with a certified interval evaluation
    int s = x.sign();
    Interval iv = x.to_interval(256);
    if (s > 0) CHECK(!iv.is_negative());
    if (s < 0) CHECK(!iv.is_positive());
    if (s == 0) CHECK(x.is_zero());
    if (!x.is_zero()) {
      Ext inv = x.inverse();
      CHECK(x * inv == Ext(Rational(1)));
      // interval of the inverse contains the exact value
      CHECK(!(inv.to_interval(128) * iv).certainly_less(Interval::from_long(1)));
    }
  }
}

TEST_CASE("complex scalar basics") {
  CScalar i = CScalar::i();
  CHECK((i * i).re == Scalar(Rational(-1)));
  CHECK((i * i).im.is_exact_zero());
  CScalar z(Rational(3), Rational(4));
  CHECK(z.abs2() == Scalar(Rational(25)));
  CScalar w = z / z;
  CHECK(w.re == Scalar(Rational(1)));
  CHECK(w.im.is_exact_zero());
}
