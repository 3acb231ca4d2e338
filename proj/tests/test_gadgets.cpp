#include <random>

#include "doctest.h"
#include "qsalg/gadgets.hpp"

using namespace qsalg;

namespace {

Word random_word(std::mt19937_64& rng, unsigned m, size_t max_len, bool allow_empty = true) {
  std::uniform_int_distribution<size_t> len(allow_empty ? 0 : 1, max_len);
  std::uniform_int_distribution<unsigned> letter(1, m);
  Word w(len(rng));
  for (auto& l : w) l = letter(rng);
  return w;
}

Rational ten_pow(int k) {
  Integer p;
  mpz_ui_pow_ui(p.get_mpz_t(), 10, k);
  return Rational(1, p);
}

CMatrix rational_matrix(const std::vector<std::vector<long>>& rows) {
  CMatrix m(rows.size(), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) m.at(i, j) = CScalar(Rational(rows[i][j]));
  return m;
}

}  // namespace

TEST_CASE("m-adic word value") {
  CHECK(sigma({}, 3) == 0);
  CHECK(sigma({1, 2}, 3) == 5);
  CHECK_THROWS_AS(sigma({4}, 3), Error);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    Word u = random_word(rng, 3, 6), w = random_word(rng, 3, 6);
    Integer mw;
    mpz_ui_pow_ui(mw.get_mpz_t(), 3, w.size());
    CHECK(sigma(concat(u, w), 3) == mw * sigma(u, 3) + sigma(w, 3));
  }
}

TEST_CASE("word-pair embedding morphism law and bilinear form") {
  CHECK(gamma({}, {}, 3) == IMatrix::identity(3));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    Word u = random_word(rng, 3, 5), u2 = random_word(rng, 3, 5);
    Word w = random_word(rng, 3, 5), w2 = random_word(rng, 3, 5);
    CHECK(gamma(concat(u, u2), concat(w, w2), 3) == gamma(u, w, 3) * gamma(u2, w2, 3));
    CHECK(bilinear_form(gamma_y(), gamma(u, w, 3), gamma_x()) ==
          Rational(sigma(u, 3) - sigma(w, 3)));
  }
  CHECK(bilinear_form(gamma_y(), gamma({1}, {1}, 3), gamma_x()) == 0);
}

TEST_CASE("squared encoding is nonnegative and detects equality") {
  CHECK(bilinear_form(gamma_square_y(), gamma_square({1}, {1}, 3), gamma_square_x()) == 0);
  CHECK(bilinear_form(gamma_square_y(), gamma_square({1}, {2}, 3), gamma_square_x()) == 1);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 200; ++i) {
    Word u = random_word(rng, 3, 4), u2 = random_word(rng, 3, 4);
    Word w = random_word(rng, 3, 4), w2 = random_word(rng, 3, 4);
    CHECK(gamma_square(concat(u, u2), concat(w, w2), 3) ==
          gamma_square(u, w, 3) * gamma_square(u2, w2, 3));
    Rational q = bilinear_form(gamma_square_y(), gamma_square(u, w, 3), gamma_square_x());
    Rational s = Rational(sigma(u, 3) - sigma(w, 3));
    CHECK(q == s * s);
    CHECK(q >= 0);
  }
}

TEST_CASE("bilinear gamma form separates words exhaustively up to length 4") {
  std::vector<Word> words = {{}};
  for (size_t len = 1; len <= 4; ++len) {
    size_t count = 1;
    for (size_t i = 0; i < len; ++i) count *= 3;
    for (size_t code = 0; code < count; ++code) {
      Word w(len);
      size_t c = code;
      for (size_t i = 0; i < len; ++i) {
        w[i] = unsigned(c % 3) + 1;
        c /= 3;
      }
      words.push_back(w);
    }
  }
  for (const auto& u : words)
    for (const auto& w : words) {
      bool zero = bilinear_form(gamma_y(), gamma(u, w, 3), gamma_x()) == 0;
      CHECK(zero == (u == w));
    }
}

TEST_CASE("kraus normalization fixtures") {
  // identity family stays the identity
  auto id_family = kraus_normalize({CMatrix::identity(2)});
  CHECK(id_family.size() == 1);
  CHECK(kraus_residual(id_family) == 0);

  // hand-solved fixed point for {diag(1,0), antidiag(0,1)}: lambda = 1, X = I
  CMatrix m1 = rational_matrix({{1, 0}, {0, 0}});
  CMatrix m2 = rational_matrix({{0, 0}, {1, 0}});
  auto exact = kraus_normalize({m1, m2}, Rational(1), CMatrix::identity(2));
  CHECK(kraus_residual(exact) == 0);

  // the solver path reaches the same residual bound
  auto solved = kraus_normalize({m1, m2});
  CHECK(kraus_residual(solved) <= ten_pow(20));

  // nilpotent singleton has spectral radius 0
  CHECK_THROWS_AS(kraus_normalize({rational_matrix({{0, 1}, {0, 0}})}), Error);
}

TEST_CASE("channel lift: zero block at nu = 0 is the depolarizing channel") {
  CMatrix psi = rational_matrix({{1, 0}, {0, 0}});
  auto basis = std::make_shared<HermitianBasis>(hermitian_basis(2, psi));
  CMatrix zero(2, 2);
  ChannelLift lift = lift_matrix_family(zero, Scalar(Rational(0)), psi, basis);
  CHECK(lift.eps_star > 0);
  Channel at_zero = lift.channel_at(Rational(0));
  Channel dep = depolarizing_channel(basis);
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = 0; j < 4; ++j)
      CHECK(at_zero.transfer().at(i, j) == dep.transfer().at(i, j));
  CHECK(is_completely_positive(lift.channel_at(lift.eps_star)).verdict == Cert3::yes);
}

TEST_CASE("channel lift rejects nu at the open boundary") {
  CMatrix psi = rational_matrix({{1, 0}, {0, 0}});
  auto basis = std::make_shared<HermitianBasis>(hermitian_basis(2, psi));
  CMatrix zero(2, 2);
  // d = 2: interval is (-1, 1)
  CHECK_THROWS_AS(lift_matrix_family(zero, Scalar(Rational(-1)), psi, basis), Error);
  CHECK_THROWS_AS(lift_matrix_family(zero, Scalar(Rational(1)), psi, basis), Error);
  try {
    lift_matrix_family(zero, Scalar(Rational(1)), psi, basis);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NuOutOfRange);
  }
}

TEST_CASE("channel lift certifies CP at the returned bound (d = 3)") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<long> entry(-2, 2);
  CMatrix psi(3, 3);
  psi.at(0, 0) = CScalar(Rational(1));
  auto basis = std::make_shared<HermitianBasis>(hermitian_basis(3, psi));
  for (int trial = 0; trial < 3; ++trial) {
    CMatrix m(7, 7);
    for (size_t i = 0; i < 7; ++i)
      for (size_t j = 0; j < 7; ++j) m.at(i, j) = CScalar(Rational(entry(rng)));
    Scalar nu = Scalar(Rational(trial - 1, 2));  // -1/2, 0, 1/2 all inside (-sqrt2, 1/sqrt2)
    ChannelLift lift = lift_matrix_family(m, nu, psi, basis);
    CHECK(lift.eps_star > 0);
    Channel ch = lift.channel_at(lift.eps_star);
    CHECK(is_trace_preserving_exact(ch));
    CHECK(is_completely_positive(ch).verdict == Cert3::yes);
  }
}

TEST_CASE("gadget construction for the k=1 identity family") {
  std::vector<CScalar> phi = {CScalar(Rational(1)), CScalar(Rational(0))};
  std::vector<Rational> x = {Rational(1), Rational(0)};
  GadgetBundle b =
      build_gadget(Rational(1, 2), phi, {CMatrix::identity(2)}, x, x);
  BundleCheck check = verify_bundle(b);
  for (const auto& msg : check.failures) MESSAGE(msg);
  CHECK(check.ok);
  // lambda = 1/2, d = 2: t = 0 branch gives c = 1/2, nu = 0
  CHECK(b.c == Rational(1, 2));
  CHECK(b.nu.is_exact_zero());

  // length-1 word: overlap = lambda + delta*eps * <x|I|y> = lambda + delta*eps > lambda
  GadgetIdentity id1 = verify_gadget_identity(b, {1});
  CHECK(id1.difference.contains(Rational(0)));
  CHECK(id1.difference.width_below(ten_pow(20)));
  CHECK((id1.lhs - Scalar(b.lambda)).certainly_positive());

  // words up to length 4 all satisfy the identity
  for (size_t len = 2; len <= 4; ++len) {
    Word w(len, 1);
    GadgetIdentity idn = verify_gadget_identity(b, w);
    CHECK(idn.difference.contains(Rational(0)));
    CHECK(idn.difference.width_below(ten_pow(20)));
  }
}

TEST_CASE("gadget construction rejects zero alignment vectors") {
  std::vector<CScalar> phi = {CScalar(Rational(1)), CScalar(Rational(0))};
  std::vector<Rational> zero = {Rational(0), Rational(0)};
  std::vector<Rational> x = {Rational(1), Rational(0)};
  CHECK_THROWS_AS(build_gadget(Rational(1, 2), phi, {CMatrix::identity(2)}, zero, x), Error);
  CHECK_THROWS_AS(build_gadget(Rational(1, 2), phi, {CMatrix::identity(2)}, x, zero), Error);
}

TEST_CASE("gadget identity with a zero matrix keeps the overlap at lambda") {
  std::vector<CScalar> phi = {CScalar(Rational(1)), CScalar(Rational(0))};
  std::vector<Rational> x = {Rational(1), Rational(0)};
  GadgetBundle b = build_gadget(Rational(1, 4), phi, {CMatrix(2, 2)}, x, x);
  CHECK(verify_bundle(b).ok);
  GadgetIdentity id1 = verify_gadget_identity(b, {1});
  CHECK((id1.rhs - Scalar(b.lambda)).is_exact_zero());
  Interval gap = (id1.lhs - Scalar(b.lambda)).to_interval();
  CHECK(gap.contains(Rational(0)));
}

TEST_CASE("block product structure of composed lifts") {
  std::vector<CScalar> phi = {CScalar(Rational(1)), CScalar(Rational(0))};
  std::vector<Rational> x = {Rational(1), Rational(0)};
  CMatrix m1 = rational_matrix({{1, 2}, {0, 1}});
  CMatrix m2 = rational_matrix({{1, 0}, {-1, 1}});
  GadgetBundle b = build_gadget(Rational(3, 4), phi, {m1, m2}, x, x);
  CHECK(verify_bundle(b).ok);
  Channel prod = compose(b.channels[0], b.channels[1]);
  const CMatrix& t = prod.transfer();
  // top-left block stays [[1,0],[nu,0]]
  CHECK(t.at(0, 0).re == Scalar(Rational(1)));
  CHECK(t.at(0, 1).is_exact_zero());
  CHECK(t.at(1, 0).re == b.nu);
  CHECK(t.at(1, 1).is_exact_zero());
  // tail block is eps^2 M1 M2
  CMatrix tail = m1 * m2;
  Scalar eps2 = Scalar(b.eps) * Scalar(b.eps);
  for (size_t i = 0; i < 2; ++i)
    for (size_t j = 0; j < 2; ++j)
      CHECK(t.at(i + 2, j + 2).re == eps2 * tail.at(i, j).re);
  // cross blocks vanish
  CHECK(t.at(0, 2).is_exact_zero());
  CHECK(t.at(2, 0).is_exact_zero());
  // identity holds for mixed words
  for (const Word& w : {Word{1, 2}, Word{2, 1}, Word{1, 2, 2, 1}}) {
    GadgetIdentity id = verify_gadget_identity(b, w);
    CHECK(id.difference.contains(Rational(0)));
    CHECK(id.difference.width_below(ten_pow(20)));
  }
}

TEST_CASE("lambda sweep across the open interval") {
  std::vector<Rational> lambdas = {Rational(1, 10), Rational(1, 2), Rational(9, 10)};
  for (size_t d : {size_t(2), size_t(3)}) {
    std::vector<CScalar> phi(d);
    phi[0] = CScalar(Rational(1));
    size_t n = d * d - 2;
    std::vector<Rational> x(n, Rational(0));
    x[0] = 1;
    std::vector<Rational> y(n, Rational(0));
    y[n - 1] = 1;
    CMatrix m(n, n);
    for (size_t i = 0; i < n; ++i) m.at(i, i) = CScalar(Rational(1));
    for (const auto& lam : lambdas) {
      GadgetBundle b = build_gadget(lam, phi, {m}, x, y);
      BundleCheck check = verify_bundle(b);
      for (const auto& msg : check.failures) MESSAGE("d=", d, " lambda=", lam.get_str(), ": ", msg);
      CHECK(check.ok);
      GadgetIdentity id = verify_gadget_identity(b, {1});
      CHECK(id.difference.contains(Rational(0)));
      CHECK(id.difference.width_below(ten_pow(20)));
    }
  }
}
