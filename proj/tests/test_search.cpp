#include "doctest.h"
#include "qsalg/search.hpp"

using namespace qsalg;

namespace {

// Sipser's four-tile instance over {a,b,c} -> {1,2,3}
PcpInstance sipser_instance() {
  PcpInstance inst;
  inst.alphabet_size = 3;
  inst.tiles = {
      {{2}, {3, 1}},        // (b,  ca)
      {{1}, {1, 2}},        // (a,  ab)
      {{3, 1}, {1}},        // (ca, a)
      {{1, 2, 3}, {3}},     // (abc, c)
  };
  return inst;
}

// Claus-shaped instance over {a,b} with minimal solution (1, 2, 3)
PcpInstance claus_instance() {
  PcpInstance inst;
  inst.alphabet_size = 2;
  inst.tiles = {
      {{1, 1, 2}, {1}},     // (aab, a)
      {{2}, {1, 2}},        // (b,   ab)
      {{1}, {2, 1}},        // (a,   ba)
  };
  inst.claus = true;
  return inst;
}

IMatrix imatrix(const std::vector<std::vector<long>>& rows) {
  IMatrix m(rows.size(), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) m.at(i, j) = rows[i][j];
  return m;
}

GadgetBundle identity_bundle(const Rational& lambda) {
  std::vector<CScalar> phi = {CScalar(Rational(1)), CScalar(Rational(0))};
  std::vector<Rational> x = {Rational(1), Rational(0)};
  return build_gadget(lambda, phi, {CMatrix::identity(2)}, x, x);
}

}  // namespace

TEST_CASE("pcp search finds the Sipser witness") {
  SearchOutcome out = pcp_search(sipser_instance(), 16, 8, false);
  REQUIRE(out.verdict == SearchOutcome::Verdict::witness);
  CHECK(out.witness == Word{2, 1, 3, 2, 4});
  auto [top, bottom] = pcp_apply(sipser_instance(), out.witness);
  CHECK(top == bottom);
  CHECK(top == Word{1, 2, 3, 1, 1, 1, 2, 3});  // "abcaaabc"
}

TEST_CASE("pcp trivial fixtures") {
  PcpInstance single;
  single.alphabet_size = 1;
  single.tiles = {{{1}, {1}}};
  SearchOutcome hit = pcp_search(single, 8, 4, false);
  CHECK(hit.verdict == SearchOutcome::Verdict::witness);
  CHECK(hit.witness == Word{1});

  PcpInstance mismatch;
  mismatch.alphabet_size = 2;
  mismatch.tiles = {{{1}, {1, 2}}};
  SearchOutcome miss = pcp_search(mismatch, 8, 6, false);
  CHECK(miss.verdict == SearchOutcome::Verdict::exhausted);
  CHECK(miss.depth == 6);
}

TEST_CASE("claus search respects the 1wk shape") {
  PcpInstance inst = claus_instance();
  SearchOutcome out = pcp_search(inst, 16, 8, true);
  REQUIRE(out.verdict == SearchOutcome::Verdict::witness);
  CHECK(out.witness == Word{1, 2, 3});
  CHECK(out.witness.front() == 1);
  CHECK(out.witness.back() == inst.tiles.size());
  for (size_t i = 1; i + 1 < out.witness.size(); ++i) {
    CHECK(out.witness[i] >= 2);
    CHECK(out.witness[i] + 1 <= inst.tiles.size());
  }
  auto [top, bottom] = pcp_apply(inst, out.witness);
  CHECK(top == bottom);

  // the unconstrained search agrees on this instance
  SearchOutcome plain = pcp_search(inst, 16, 8, false);
  CHECK(plain.verdict == SearchOutcome::Verdict::witness);
}

TEST_CASE("tile matrix families track the correspondence") {
  PcpInstance inst = sipser_instance();
  auto family = gamma_family(inst.tiles, inst.alphabet_size);
  auto family_sq = gamma_square_family(inst.tiles, inst.alphabet_size);
  Word witness = {2, 1, 3, 2, 4};
  IMatrix prod = IMatrix::identity(3), prod_sq = IMatrix::identity(9);
  for (unsigned i : witness) {
    prod = prod * family[i - 1];
    prod_sq = prod_sq * family_sq[i - 1];
  }
  CHECK(bilinear_form(gamma_y(), prod, gamma_x()) == 0);
  CHECK(bilinear_form(gamma_square_y(), prod_sq, gamma_square_x()) == 0);
  // a non-solution word gives a nonzero (positive, in the squared form) value
  IMatrix bad = family[0] * family[1];
  IMatrix bad_sq = family_sq[0] * family_sq[1];
  CHECK(bilinear_form(gamma_y(), bad, gamma_x()) != 0);
  CHECK(bilinear_form(gamma_square_y(), bad_sq, gamma_square_x()) > 0);
}

TEST_CASE("mortality search fixtures") {
  SearchOutcome nil = mortality_search({imatrix({{0, 1}, {0, 0}})}, 4);
  REQUIRE(nil.verdict == SearchOutcome::Verdict::witness);
  CHECK(nil.witness == Word{1, 1});

  SearchOutcome id = mortality_search({imatrix({{1, 0}, {0, 1}})}, 6);
  CHECK(id.verdict == SearchOutcome::Verdict::exhausted);

  // two-matrix family with a length-2 zero product
  SearchOutcome pair =
      mortality_search({imatrix({{0, 2}, {0, 0}}), imatrix({{0, 0}, {3, 0}})}, 4);
  REQUIRE(pair.verdict == SearchOutcome::Verdict::witness);
  CHECK(pair.witness.size() == 2);
}

TEST_CASE("kraus normalization preserves mortality witnesses numerically") {
  CMatrix m1(2, 2), m2(2, 2);
  m1.at(0, 1) = CScalar(Rational(2));
  m2.at(1, 0) = CScalar(Rational(3));
  auto normalized = kraus_normalize({m1, m2});
  CHECK(kraus_residual(normalized) <= Rational(1, Integer(1) << 66));
  // witness (1,1): M1*M1 = 0, so the normalized product vanishes too
  CMatrix prod = normalized[0] * normalized[0];
  for (size_t i = 0; i < 2; ++i)
    for (size_t j = 0; j < 2; ++j) {
      CHECK(prod.at(i, j).re.to_interval().abs().hi_rational() < Rational(1, Integer(1) << 64));
      CHECK(prod.at(i, j).im.to_interval().abs().hi_rational() < Rational(1, Integer(1) << 64));
    }
}

TEST_CASE("threshold search on gadget bundles") {
  GadgetBundle b = identity_bundle(Rational(1, 2));
  ThresholdProblem p = threshold_problem(b);
  SearchOutcome hit = threshold_search(p, true, 3);
  REQUIRE(hit.verdict == SearchOutcome::Verdict::witness);
  CHECK(hit.witness == Word{1});

  // zero matrix: overlap stays exactly at lambda
  std::vector<CScalar> phi = {CScalar(Rational(1)), CScalar(Rational(0))};
  std::vector<Rational> x = {Rational(1), Rational(0)};
  GadgetBundle zb = build_gadget(Rational(1, 2), phi, {CMatrix(2, 2)}, x, x);
  ThresholdProblem zp = threshold_problem(zb);
  SearchOutcome strict_miss = threshold_search(zp, true, 3);
  CHECK(strict_miss.verdict == SearchOutcome::Verdict::exhausted);
  SearchOutcome nonstrict_hit = threshold_search(zp, false, 3);
  REQUIRE(nonstrict_hit.verdict == SearchOutcome::Verdict::witness);
  CHECK(nonstrict_hit.witness == Word{1});
}

TEST_CASE("threshold search agrees with the brute-force oracle") {
  std::vector<CScalar> phi = {CScalar(Rational(1)), CScalar(Rational(0))};
  std::vector<Rational> x = {Rational(1), Rational(0)};
  std::vector<Rational> y = {Rational(0), Rational(1)};
  CMatrix m1(2, 2), m2(2, 2);
  // m1 maps y-direction toward x only after two letters; m2 flips sign
  m1.at(0, 1) = CScalar(Rational(1));
  m1.at(1, 0) = CScalar(Rational(1));
  m2.at(0, 0) = CScalar(Rational(-1));
  m2.at(1, 1) = CScalar(Rational(1));
  GadgetBundle b = build_gadget(Rational(1, 2), phi, {m1, m2}, x, y);
  REQUIRE(verify_bundle(b).ok);
  ThresholdProblem p = threshold_problem(b);

  SearchOutcome search = threshold_search(p, true, 4);
  auto oracle = bruteforce_oracle(p, 4);
  // oracle verdict: first word whose interval certifies overlap > lambda
  std::optional<size_t> oracle_min;
  for (const auto& [w, iv] : oracle) {
    Interval gap = iv - Interval::from_rational(b.lambda);
    if (gap.is_positive() && !oracle_min) oracle_min = w.size();
  }
  if (search.verdict == SearchOutcome::Verdict::witness) {
    REQUIRE(oracle_min.has_value());
    CHECK(search.witness.size() == *oracle_min);
  } else {
    CHECK(!oracle_min.has_value());
  }
}

TEST_CASE("oracle enumerates k + k^2 + ... words and rejects depth 0") {
  GadgetBundle b = identity_bundle(Rational(1, 4));
  ThresholdProblem p = threshold_problem(b);
  auto words3 = bruteforce_oracle(p, 3);
  CHECK(words3.size() == 3);  // k = 1
  CHECK(bruteforce_oracle(p, 0).empty());

  std::vector<CScalar> phi = {CScalar(Rational(1)), CScalar(Rational(0))};
  std::vector<Rational> x = {Rational(1), Rational(0)};
  GadgetBundle b2 =
      build_gadget(Rational(1, 4), phi, {CMatrix::identity(2), CMatrix(2, 2)}, x, x);
  auto words = bruteforce_oracle(threshold_problem(b2), 3);
  CHECK(words.size() == 14);  // 2 + 4 + 8
  CHECK_THROWS_AS(bruteforce_oracle(threshold_problem(b2), 30), Error);
}

TEST_CASE("generic threshold search without a bundle") {
  auto basis = std::make_shared<HermitianBasis>(hermitian_basis(2));
  CMatrix u(2, 2);
  u.at(0, 0) = CScalar(Rational(3, 5));
  u.at(0, 1) = CScalar(Rational(4, 5));
  u.at(1, 0) = CScalar(Rational(-4, 5));
  u.at(1, 1) = CScalar(Rational(3, 5));
  ThresholdProblem p;
  p.channels = {depolarizing_channel(basis), unitary_channel(basis, u)};
  CMatrix rho(2, 2);
  rho.at(0, 0) = CScalar(Rational(1));
  p.rho = rho;
  CMatrix phi(2, 2);
  phi.at(1, 1) = CScalar(Rational(1));
  p.phi = phi;
  p.lambda = Rational(3, 5);
  // depolarizing gives 1/2 < 3/5; the rotation on |0><0| gives |U10|^2 = 16/25 > 3/5
  SearchOutcome out = threshold_search(p, true, 2);
  REQUIRE(out.verdict == SearchOutcome::Verdict::witness);
  CHECK(out.witness == Word{2});

  // determinism: identical runs give identical outcomes and statistics
  SearchOutcome again = threshold_search(p, true, 2);
  CHECK(again.witness == out.witness);
  CHECK(again.stats.nodes == out.stats.nodes);
  CHECK(again.stats.deduped == out.stats.deduped);
}
