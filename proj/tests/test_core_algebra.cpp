#include <random>

#include "doctest.h"
#include "qsalg/basis.hpp"
#include "qsalg/linalg.hpp"
#include "qsalg/perron.hpp"

using namespace qsalg;

namespace {

CMatrix mat2(const Rational& a, const Rational& b, const Rational& c, const Rational& d) {
  CMatrix m(2, 2);
  m.at(0, 0) = CScalar(a);
  m.at(0, 1) = CScalar(b);
  m.at(1, 0) = CScalar(c);
  m.at(1, 1) = CScalar(d);
  return m;
}

Rational tiny(int bits) { return Rational(1, Integer(1) << bits); }

CMatrix random_hermitian(std::mt19937_64& rng, size_t d) {
  std::uniform_int_distribution<long> num(-4, 4);
  std::uniform_int_distribution<long> den(1, 3);
  CMatrix m(d, d);
  for (size_t i = 0; i < d; ++i) {
    m.at(i, i) = CScalar(rational_of(num(rng), den(rng)));
    for (size_t j = i + 1; j < d; ++j) {
      Rational re = rational_of(num(rng), den(rng));
      Rational im = rational_of(num(rng), den(rng));
      m.at(i, j) = CScalar(re, im);
      m.at(j, i) = CScalar(re, -im);
    }
  }
  return m;
}

}  // namespace

TEST_CASE("principal minors of fixtures") {
  auto minors_id = principal_minors(CMatrix::identity(2));
  REQUIRE(minors_id.size() == 3);
  CHECK(minors_id[0] == Scalar(Rational(1)));
  CHECK(minors_id[1] == Scalar(Rational(1)));
  CHECK(minors_id[2] == Scalar(Rational(1)));

  auto minors_a = principal_minors(mat2(2, 1, 1, 1));
  CHECK(minors_a[0] == Scalar(Rational(2)));
  CHECK(minors_a[1] == Scalar(Rational(1)));
  CHECK(minors_a[2] == Scalar(Rational(1)));

  auto minors_b = principal_minors(mat2(0, 1, 1, 0));
  CHECK(minors_b[0] == Scalar(Rational(0)));
  CHECK(minors_b[1] == Scalar(Rational(0)));
  CHECK(minors_b[2] == Scalar(Rational(-1)));

  CHECK_THROWS_AS(principal_minors(mat2(0, 1, 2, 0)), Error);  // not Hermitian
}

TEST_CASE("minimum eigenvalue intervals") {
  MinEigOptions opts;
  Interval id3 = min_eigenvalue_interval(CMatrix::identity(3), opts);
  CHECK(id3.contains(Rational(1)));
  CHECK(id3.width_below(tiny(99)));  // 1e-30 target

  CMatrix diag(2, 2);
  diag.at(0, 0) = CScalar(Rational(2));
  diag.at(1, 1) = CScalar(Rational(-5));
  Interval dd = min_eigenvalue_interval(diag, opts);
  CHECK(dd.contains(Rational(-5)));
  CHECK(dd.width_below(tiny(99)));

  Interval off = min_eigenvalue_interval(mat2(0, 1, 1, 0), opts);
  CHECK(off.contains(Rational(-1)));
}

TEST_CASE("psd certification routes agree on random matrices") {
  std::mt19937_64 rng(777);
  for (int trial = 0; trial < 120; ++trial) {
    size_t d = 2 + (trial % 3);
    CMatrix h = random_hermitian(rng, d);
    auto minors = principal_minors(h);
    bool psd_minors = true;
    for (const auto& m : minors)
      if (m.certain_sign() < 0) psd_minors = false;
    Cert3 elim = psd_by_elimination(h);
    REQUIRE(elim != Cert3::unknown);
    CHECK(psd_minors == (elim == Cert3::yes));

    MinEigOptions opts;
    opts.sign_only = true;
    Interval ev = min_eigenvalue_interval(h, opts);
    // the eigenvalue route certifies the same verdict
    if (psd_minors)
      CHECK(mpfr_sgn(ev.hi()) >= 0);
    else
      CHECK(ev.is_negative());
  }
}

TEST_CASE("perron pair fixtures") {
  PerronPair p1 = perron_pair({CMatrix::identity(2)});
  CHECK(p1.lambda == Rational(1));
  CHECK(psd_by_elimination(p1.x - Rational(1, 1000) * CMatrix::identity(2)) == Cert3::yes);

  CMatrix nilpotent = mat2(0, 1, 0, 0);
  CHECK_THROWS_AS(perron_pair({nilpotent}), Error);
  try {
    perron_pair({nilpotent});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoPositiveEigenvector);
    CHECK(std::string(e.what()).find("irreducible") != std::string::npos);
  }

  CMatrix e00 = mat2(1, 0, 0, 0);
  CMatrix e11 = mat2(0, 0, 0, 1);
  PerronPair p2 = perron_pair({e00, e11});
  CHECK(p2.lambda == Rational(1));
  CHECK(p2.x.at(0, 1).is_exact_zero());
  CHECK(p2.x.at(1, 0).is_exact_zero());
}

TEST_CASE("canonical hermitian basis is exactly orthonormal") {
  for (size_t d = 2; d <= 4; ++d) {
    HermitianBasis basis = hermitian_basis(d);
    REQUIRE(basis.size() == d * d);
    CHECK(basis.all_exact());
    for (size_t i = 0; i < basis.size(); ++i)
      for (size_t j = i; j < basis.size(); ++j) {
        Scalar g = CMatrix::trace_product(basis.ops[i], basis.ops[j]).re;
        CHECK(g == Scalar(Rational(i == j ? 1 : 0)));
      }
    for (size_t i = 1; i < basis.size(); ++i)
      CHECK(basis.ops[i].trace().re.is_exact_zero());
  }
}

TEST_CASE("anchored basis pins H2") {
  CMatrix psi = mat2(1, 0, 0, 0);  // |0><0|
  HermitianBasis basis = hermitian_basis(2, psi);
  // H2 = (I - 2 psi)/sqrt(2) = diag(-1, 1)/sqrt(2)
  Scalar expect = Scalar::sqrt_rational(Rational(1, 2));
  CHECK(basis.ops[1].at(0, 0).re == -expect);
  CHECK(basis.ops[1].at(1, 1).re == expect);
  CHECK(basis.ops[1].at(0, 1).is_exact_zero());
  CHECK(basis.orthonormality_defect() < tiny(64));
}

TEST_CASE("aligned basis realizes the overlap pattern") {
  CMatrix phi = mat2(1, 0, 0, 0);
  CMatrix psi = mat2(Rational(1, 2), Rational(1, 2), Rational(1, 2), Rational(1, 2));  // |+><+|
  BasisAlignment align{phi, {Rational(1), Rational(0)}};
  HermitianBasis basis = hermitian_basis(2, psi, align);
  // r = 1 - 1/2 - 0 = 1/2, ||x|| = 1, so delta1 = sqrt(1/2)
  CHECK(basis.delta1 == Scalar::sqrt_rational(Rational(1, 2)));
  Scalar o3 = CMatrix::trace_product(phi, basis.ops[2]).re;
  Scalar o4 = CMatrix::trace_product(phi, basis.ops[3]).re;
  Interval diff = (o3 - basis.delta1).to_interval().abs();
  CHECK(diff.hi_rational() < tiny(64));
  CHECK(o4.to_interval().abs().hi_rational() < tiny(64));
  CHECK(basis.orthonormality_defect() < tiny(64));
}

TEST_CASE("alignment error cases") {
  CMatrix phi = mat2(1, 0, 0, 0);
  // psi = phi forces r = 0
  CHECK_THROWS_AS(hermitian_basis(2, phi, BasisAlignment{phi, {Rational(1), Rational(0)}}),
                  Error);
  try {
    hermitian_basis(2, phi, BasisAlignment{phi, {Rational(1), Rational(0)}});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateAlignment);
  }
  CMatrix psi = mat2(Rational(1, 2), Rational(1, 2), Rational(1, 2), Rational(1, 2));
  CHECK_THROWS_AS(hermitian_basis(2, psi, BasisAlignment{phi, {Rational(0), Rational(0)}}),
                  Error);
}
