#include <random>

#include "doctest.h"
#include "qsalg/formula.hpp"
#include "qsalg/linalg.hpp"
#include "qsalg/numeric_search.hpp"
#include "qsalg/smtlib.hpp"
#include "qsalg/witness.hpp"

using namespace qsalg;

namespace {

size_t count_body_atoms(const Formula& f) {
  std::vector<char> seen(f.atoms.size(), 0);
  collect_atoms(f.body, seen);
  size_t n = 0;
  for (char c : seen) n += c;
  return n;
}

}  // namespace

TEST_CASE("psd membership for a 2x2 variable") {
  Formula f;
  const MatrixVar& v = f.vars[f.add_var("X", 2, 2, DomainTag::psd, Quant::exists)];
  Body mem = encode_membership(f, v);
  f.body = mem;
  // 4 Hermiticity equalities + 3 principal-minor inequalities
  CHECK(f.atoms.size() == 7);
  size_t eq = 0, ge = 0;
  for (const auto& a : f.atoms) {
    if (a.rel == Rel::eq) ++eq;
    if (a.rel == Rel::ge) ++ge;
  }
  CHECK(eq == 4);
  CHECK(ge == 3);
  // the 2x2 minor is x00*x11 - a^2 - b^2 with off-diagonal a + ib
  Poly expect = Poly::variable(v.re(0, 0)) * Poly::variable(v.re(1, 1)) -
                Poly::variable(v.re(0, 1)) * Poly::variable(v.re(0, 1)) -
                Poly::variable(v.im(0, 1)) * Poly::variable(v.im(0, 1));
  bool found = false;
  for (const auto& a : f.atoms)
    if (a.rel == Rel::ge && a.poly == expect) found = true;
  CHECK(found);
}

TEST_CASE("1x1 density flattens to one real with two atoms") {
  Formula f;
  const MatrixVar& v = f.vars[f.add_var("rho", 1, 1, DomainTag::density, Quant::exists)];
  CHECK(v.reals.size() == 1);
  f.body = encode_membership(f, v);
  CHECK(f.atoms.size() == 2);
  CHECK(f.atoms[0].rel == Rel::ge);
  CHECK(f.atoms[1].rel == Rel::eq);
}

TEST_CASE("rank-0 membership forces the zero matrix") {
  Formula f;
  const MatrixVar& v = f.vars[f.add_var("Y", 2, 2, DomainTag::rank_exact, Quant::exists, 0)];
  f.body = encode_membership(f, v);
  CHECK(f.atoms.size() == 8);  // re and im of each entry
  for (const auto& a : f.atoms) CHECK(a.rel == Rel::eq);
}

TEST_CASE("odd p norm ball is rejected") {
  Formula f;
  const MatrixVar& v = f.vars[f.add_var("X", 2, 2, DomainTag::norm_ball_p, Quant::exists, 3)];
  CHECK_THROWS_AS(encode_membership(f, v), Error);
  try {
    Formula g;
    const MatrixVar& w = g.vars[g.add_var("X", 2, 2, DomainTag::norm_ball_p, Quant::exists, 3)];
    encode_membership(g, w);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedDomain);
  }
}

TEST_CASE("prenex is idempotent and preserves the prefix") {
  Formula f;
  f.add_var("X", 2, 2, DomainTag::psd, Quant::forall);
  uint32_t x00 = f.vars[0].re(0, 0);
  f.body = Body::atom_ref(f.add_atom(Poly::variable(x00), Rel::ge));
  Formula p = prenex(f);
  CHECK(p.prenexed);
  CHECK(p.quants == f.quants);
  // universal membership becomes an implication premise: or(not(mem), core)
  CHECK(p.body.kind == Body::Kind::or_);
  CHECK(p.body.kids[0].kind == Body::Kind::not_);
  Formula pp = prenex(p);
  CHECK(structurally_equal(p, pp));
}

TEST_CASE("prenex of an existential density formula") {
  // exists rho in density(2x2): tr[rho A] > 0 with A = diag(1,-1)
  Formula f;
  const MatrixVar& rho = f.vars[f.add_var("rho", 2, 2, DomainTag::density, Quant::exists)];
  Poly core = Poly::variable(rho.re(0, 0)) - Poly::variable(rho.re(1, 1));
  f.body = Body::atom_ref(f.add_atom(core, Rel::gt));
  Formula p = prenex(f);
  FormulaStats stats = formula_stats(p);
  CHECK(stats.real_variables == 8);
  CHECK(p.body.kind == Body::Kind::and_);
  // witness rho = |0><0| satisfies it
  Assignment a;
  for (const auto& name : p.real_names) a[name] = Ext(Rational(0));
  a["rho_0_0_re"] = Ext(Rational(1));
  CHECK(check_witness(p, a));
  // maximally mixed state does not (strictness respected)
  a["rho_0_0_re"] = Ext(Rational(1, 2));
  a["rho_1_1_re"] = Ext(Rational(1, 2));
  CHECK(!check_witness(p, a));
}

TEST_CASE("prenex preserves pointwise truth on random existential formulas") {
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<long> coef(-3, 3);
  std::uniform_int_distribution<int> relpick(0, 2);
  for (int trial = 0; trial < 100; ++trial) {
    Formula f;
    size_t lam_idx = f.add_var("l", 3, 1, DomainTag::prob_simplex, Quant::exists);
    size_t rho_idx = f.add_var("r", 1, 1, DomainTag::density, Quant::exists);
    const MatrixVar& lam = f.vars[lam_idx];
    const MatrixVar& rho = f.vars[rho_idx];
    // random core atom over the four reals
    Poly core;
    std::vector<uint32_t> all = {lam.rv(0, 0), lam.rv(1, 0), lam.rv(2, 0), rho.reals[0]};
    for (uint32_t v : all) core += Rational(coef(rng)) * Poly::variable(v);
    Rel rel = relpick(rng) == 0 ? Rel::gt : (relpick(rng) == 1 ? Rel::ge : Rel::eq);
    f.body = Body::atom_ref(f.add_atom(core, rel));
    Formula p = prenex(f);

    std::uniform_int_distribution<long> num(-1, 3);
    for (int pt = 0; pt < 20; ++pt) {
      // random rational point
      std::vector<Rational> vals;
      for (int i = 0; i < 4; ++i) vals.push_back(rational_of(num(rng), 2));
      // independent membership oracle
      bool member = vals[0] >= 0 && vals[1] >= 0 && vals[2] >= 0 &&
                    vals[0] + vals[1] + vals[2] == 1 && vals[3] >= 0 && vals[3] == 1;
      Ext cv = core.eval<Ext>({Ext(vals[0]), Ext(vals[1]), Ext(vals[2]), Ext(vals[3])});
      bool body_true = rel == Rel::gt ? cv.sign() > 0 : rel == Rel::ge ? cv.sign() >= 0
                                                                        : cv.is_zero();
      Assignment a;
      a["l_0_0"] = Ext(vals[0]);
      a["l_1_0"] = Ext(vals[1]);
      a["l_2_0"] = Ext(vals[2]);
      a["r_0_0"] = Ext(vals[3]);
      CHECK(check_witness(p, a) == (member && body_true));
    }
  }
}

TEST_CASE("psd membership formula agrees with the eigenvalue certificate") {
  std::mt19937_64 rng(909);
  std::uniform_int_distribution<long> num(-3, 3);
  std::uniform_int_distribution<long> den(1, 2);
  for (int trial = 0; trial < 150; ++trial) {
    size_t d = 2 + (trial % 2);
    CMatrix h(d, d);
    for (size_t i = 0; i < d; ++i) {
      h.at(i, i) = CScalar(rational_of(num(rng), den(rng)));
      for (size_t j = i + 1; j < d; ++j) {
        Rational re = rational_of(num(rng), den(rng));
        Rational im = rational_of(num(rng), den(rng));
        h.at(i, j) = CScalar(re, im);
        h.at(j, i) = CScalar(re, -im);
      }
    }
    Formula f;
    const MatrixVar& v = f.vars[f.add_var("X", d, d, DomainTag::psd, Quant::exists)];
    f.body = encode_membership(f, v);
    f.prenexed = true;
    Assignment a;
    for (size_t i = 0; i < d; ++i)
      for (size_t j = 0; j < d; ++j) {
        a[f.real_names[v.re(i, j)]] = h.at(i, j).re.exact();
        a[f.real_names[v.im(i, j)]] = h.at(i, j).im.exact();
      }
    bool by_formula = check_witness(f, a);
    Cert3 oracle = psd_by_elimination(h);
    REQUIRE(oracle != Cert3::unknown);
    CHECK(by_formula == (oracle == Cert3::yes));
  }
}

TEST_CASE("formula stats") {
  // variable-free formula
  Formula f0;
  f0.body = Body::atom_ref(f0.add_atom(Poly::constant(Rational(1)), Rel::gt));
  f0.prenexed = true;
  CHECK(formula_stats(f0).real_variables == 0);

  // exists/forall alternations
  Formula f;
  f.add_var("a", 1, 1, DomainTag::free_reals, Quant::exists);
  f.add_var("b", 1, 1, DomainTag::free_reals, Quant::forall);
  f.add_var("c", 1, 1, DomainTag::free_reals, Quant::exists);
  f.add_var("d", 1, 1, DomainTag::free_reals, Quant::forall);
  f.body = Body::truth();
  Formula p = prenex(f);
  CHECK(formula_stats(p).quantifier_alternations == 3);
}

TEST_CASE("smt export and round trip") {
  Formula f;
  const MatrixVar& x = f.vars[f.add_var("x", 1, 1, DomainTag::free_reals, Quant::exists)];
  Poly p = Poly::variable(x.rv(0, 0)) * Poly::variable(x.rv(0, 0)) - Poly::constant(Rational(2));
  f.body = Body::atom_ref(f.add_atom(p, Rel::eq));
  Formula pf = prenex(f);
  std::string script = export_smt(pf);
  CHECK(script.find("(set-logic NRA)") != std::string::npos);
  CHECK(script.find("(exists ((x_0_0 Real))") != std::string::npos);
  CHECK(script.find("(check-sat)") != std::string::npos);
  Formula back = parse_smt(script);
  CHECK(structurally_equal(pf, back));
  CHECK(formula_stats(back).real_variables == formula_stats(pf).real_variables);

  // a density formula round-trips too
  Formula g;
  const MatrixVar& rho = g.vars[g.add_var("rho", 2, 2, DomainTag::density, Quant::exists)];
  g.body = Body::atom_ref(
      g.add_atom(Poly::variable(rho.re(0, 0)) - Poly::variable(rho.re(1, 1)), Rel::gt));
  Formula pg = prenex(g);
  Formula gback = parse_smt(export_smt(pg));
  CHECK(structurally_equal(pg, gback));
  CHECK(count_body_atoms(gback) == count_body_atoms(pg));
}

TEST_CASE("rational numerals appear exactly") {
  Formula f;
  const MatrixVar& x = f.vars[f.add_var("x", 1, 1, DomainTag::free_reals, Quant::exists)];
  Poly p = Rational(-7, 3) * Poly::variable(x.rv(0, 0)) + Poly::constant(Rational(1, 6));
  f.body = Body::atom_ref(f.add_atom(p, Rel::ge));
  std::string script = export_smt(prenex(f));
  CHECK(script.find("(/ 1 6)") != std::string::npos);
  CHECK(script.find("(- (/ 7 3))") != std::string::npos);
}

TEST_CASE("check_witness basics") {
  Formula f;
  const MatrixVar& x = f.vars[f.add_var("x", 1, 1, DomainTag::free_reals, Quant::exists)];
  f.body = Body::atom_ref(f.add_atom(Poly::variable(x.rv(0, 0)), Rel::ge));
  Formula p = prenex(f);
  CHECK(check_witness(p, {{"x_0_0", Ext(Rational(1))}}));

  Formula g;
  const MatrixVar& y = g.vars[g.add_var("x", 1, 1, DomainTag::free_reals, Quant::exists)];
  g.body = Body::atom_ref(g.add_atom(Poly::variable(y.rv(0, 0)), Rel::gt));
  Formula pg = prenex(g);
  CHECK(!check_witness(pg, {{"x_0_0", Ext(Rational(0))}}));
  CHECK_THROWS_AS(check_witness(pg, {}), Error);
}

TEST_CASE("numeric search finds and validates exact witnesses") {
  // exists x: x^2 = 4 and x > 0  ->  x = 2
  Formula f;
  const MatrixVar& x = f.vars[f.add_var("x", 1, 1, DomainTag::free_reals, Quant::exists)];
  uint32_t xv = x.rv(0, 0);
  Poly sq = Poly::variable(xv) * Poly::variable(xv) - Poly::constant(Rational(4));
  f.body = Body::conj({Body::atom_ref(f.add_atom(sq, Rel::eq)),
                       Body::atom_ref(f.add_atom(Poly::variable(xv), Rel::gt))});
  Formula p = prenex(f);
  NumericSearchResult res = numeric_search(p);
  REQUIRE(res.found);
  CHECK(res.witness.at("x_0_0") == Ext(Rational(2)));
  CHECK(check_witness(p, res.witness));

  // exists x: x^2 < 0 is unsatisfiable -> unknown
  Formula g;
  const MatrixVar& y = g.vars[g.add_var("x", 1, 1, DomainTag::free_reals, Quant::exists)];
  uint32_t yv = y.rv(0, 0);
  Poly negsq = -(Poly::variable(yv) * Poly::variable(yv));
  g.body = Body::atom_ref(g.add_atom(negsq, Rel::gt));
  SearchBudget small;
  small.restarts = 4;
  small.max_sweeps = 60;
  NumericSearchResult unsat = numeric_search(prenex(g), small);
  CHECK(!unsat.found);
}
