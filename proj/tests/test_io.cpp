#include <cstdlib>

#include "doctest.h"
#include "qsalg/io.hpp"
#include "qsalg/smtlib.hpp"

using namespace qsalg;

#ifndef QSALG_CLI_PATH
#define QSALG_CLI_PATH ""
#endif
#ifndef QSALG_FIXTURES
#define QSALG_FIXTURES "fixtures"
#endif

namespace {

int run_cli(const std::string& args) {
  std::string cmd = std::string(QSALG_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string fixture(const std::string& name) {
  return std::string(QSALG_FIXTURES) + "/" + name;
}

}  // namespace

TEST_CASE("scalar serialization round trips exactly") {
  Scalar exact = Scalar(Rational(3, 7)) + Scalar::sqrt_rational(Rational(2)) * Scalar(Rational(-1, 5));
  Scalar back = io::scalar_from_json(io::scalar_to_json(exact));
  CHECK(back.is_exact());
  CHECK((back - exact).is_exact_zero());

  Scalar iv = Scalar(Interval::from_rational(Rational(1, 3), 128));
  Scalar iv_back = io::scalar_from_json(io::scalar_to_json(iv));
  CHECK(!iv_back.is_exact());
  CHECK(mpfr_equal_p(iv_back.interval().lo(), iv.interval().lo()));
  CHECK(mpfr_equal_p(iv_back.interval().hi(), iv.interval().hi()));
}

TEST_CASE("instance files round trip to structurally equal formulas") {
  for (const char* name : {"separability_product.json", "zero_error_identity.json",
                           "lhv_pr_box.json", "birkhoff_rotation.json", "additivity_inf.json"}) {
    json original = load_json(fixture(name));
    InstanceFile parsed = parse_instance(original);
    REQUIRE(parsed.problem.has_value());
    json rewritten = instance_to_json(parsed);
    InstanceFile reparsed = parse_instance(rewritten);
    Formula f1 = encode(*parsed.problem);
    Formula f2 = encode(*reparsed.problem);
    CHECK(structurally_equal(f1, f2));
  }
}

TEST_CASE("pcp and mortality instances round trip") {
  InstanceFile pcp = parse_instance(load_json(fixture("pcp_sipser.json")));
  REQUIRE(pcp.pcp.has_value());
  InstanceFile pcp2 = parse_instance(instance_to_json(pcp));
  CHECK(pcp2.pcp->tiles == pcp.pcp->tiles);
  CHECK(pcp2.pcp->alphabet_size == pcp.pcp->alphabet_size);

  InstanceFile mort = parse_instance(load_json(fixture("mortality_nilpotent.json")));
  REQUIRE(mort.mortality.has_value());
  InstanceFile mort2 = parse_instance(instance_to_json(mort));
  CHECK((*mort2.mortality)[0] == (*mort.mortality)[0]);
}

TEST_CASE("gadget bundles serialize and re-verify") {
  std::vector<CScalar> phi = {CScalar(Rational(1)), CScalar(Rational(0))};
  std::vector<Rational> x = {Rational(1), Rational(0)};
  GadgetBundle b = build_gadget(Rational(1, 2), phi, {CMatrix::identity(2)}, x, x);
  json j = bundle_to_json(b);
  GadgetBundle back = bundle_from_json(j);
  CHECK(back.d == b.d);
  CHECK(back.lambda == b.lambda);
  CHECK(back.eps == b.eps);
  CHECK(verify_bundle(back).ok);
  GadgetIdentity id = verify_gadget_identity(back, {1, 1});
  CHECK(id.difference.contains(Rational(0)));
  Rational tol(1, Integer("100000000000000000000"));
  CHECK(id.difference.width_below(tol));
}

TEST_CASE("a d=3 bundle with interval basis entries survives serialization") {
  std::vector<CScalar> phi = {CScalar(Rational(2, 3)), CScalar(Rational(1, 3), Rational(1, 3)),
                              CScalar(Rational(0))};
  std::vector<Rational> x = {Rational(1), Rational(-1), Rational(0), Rational(2),
                             Rational(0), Rational(0), Rational(1)};
  std::vector<Rational> y = {Rational(0), Rational(1), Rational(1), Rational(0),
                             Rational(-1), Rational(0), Rational(0)};
  CMatrix m(7, 7);
  for (size_t i = 0; i < 7; ++i) m.at(i, (i + 1) % 7) = CScalar(Rational(1));
  GadgetBundle b = build_gadget(Rational(1, 3), phi, {m}, x, y);
  REQUIRE(verify_bundle(b).ok);
  GadgetBundle back = bundle_from_json(bundle_to_json(b));
  CHECK(verify_bundle(back).ok);
  Rational tol(1, Integer("100000000000000000000"));
  for (const Word& w : {Word{1}, Word{1, 1}, Word{1, 1, 1}}) {
    GadgetIdentity id = verify_gadget_identity(back, w);
    CHECK(id.difference.contains(Rational(0)));
    CHECK(id.difference.width_below(tol));
  }
}

TEST_CASE("witness assignments round trip") {
  Assignment a;
  a["x"] = Ext(Rational(2, 3));
  a["y"] = Ext::sqrt_of_integer(5);
  json j = assignment_to_json(a);
  Assignment back = assignment_from_json(j);
  CHECK(back.at("x") == a.at("x"));
  CHECK(back.at("y") == a.at("y"));
}

TEST_CASE("cli exit codes follow the 0/2/1 contract") {
  REQUIRE(std::string(QSALG_CLI_PATH).size() > 0);
  // witness / true -> 0
  CHECK(run_cli("search " + fixture("pcp_sipser.json") + " --depth 8") == 0);
  CHECK(run_cli("search " + fixture("mortality_nilpotent.json") + " --depth 4") == 0);
  CHECK(run_cli("search " + fixture("threshold_rotation.json") + " --depth 2") == 0);
  CHECK(run_cli("check " + fixture("separability_product.json") + " " +
                fixture("separability_product_witness.json")) == 0);
  // exhausted / unknown -> 2
  CHECK(run_cli("search " + fixture("zero_error_depolarizing.json") +
                " --restarts 2 --sweeps 40") == 2);
  CHECK(run_cli("sweep " + fixture("zero_error_depolarizing.json") +
                " --n-max 1 --backend numeric") == 2);
  // errors -> 1
  CHECK(run_cli("encode " + fixture("additivity_odd_p.json") + " --stats") == 1);
  CHECK(run_cli("encode " + fixture("pcp_sipser.json")) == 1);
  CHECK(run_cli("sweep " + fixture("separability_product.json") + " --n-max 1") == 1);
  CHECK(run_cli("search /nonexistent.json") == 1);
}

TEST_CASE("cli encode writes formula json and smt") {
  REQUIRE(std::string(QSALG_CLI_PATH).size() > 0);
  std::string out = "/tmp/qsalg_test_formula.json";
  std::string smt = "/tmp/qsalg_test_formula.smt2";
  CHECK(run_cli("encode " + fixture("zero_error_identity.json") + " --out " + out + " --smt " +
                smt) == 0);
  json fj = load_json(out);
  CHECK(fj.contains("atoms"));
  CHECK(fj["prenexed"].get<bool>());
  std::ifstream smt_in(smt);
  std::string text((std::istreambuf_iterator<char>(smt_in)), std::istreambuf_iterator<char>());
  Formula parsed = parse_smt(text);
  InstanceFile inst = parse_instance(load_json(fixture("zero_error_identity.json")));
  Formula direct = encode(*inst.problem);
  CHECK(structurally_equal(parsed, direct));
}

TEST_CASE("cli gadget build and verify round trip") {
  REQUIRE(std::string(QSALG_CLI_PATH).size() > 0);
  std::string bundle = "/tmp/qsalg_test_bundle.json";
  CHECK(run_cli("gadget build " + fixture("gadget_identity.json") + " --out " + bundle) == 0);
  CHECK(run_cli("gadget verify " + bundle + " --max-len 3") == 0);
  CHECK(run_cli("search " + fixture("gadget_identity.json") + " --depth 2") == 0);
}
