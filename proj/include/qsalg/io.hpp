#pragma once

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qsalg/encoders.hpp"
#include "qsalg/search.hpp"

namespace qsalg {

using nlohmann::json;

// All exact scalars are serialized as strings ("p/q"), never floating
// literals. Complex entries are ["re", "im"] pairs; matrices are flat
// row-major arrays whose dimensions follow from the instance parameters.
// Interval scalars serialize as bit-exact hex mpfr bounds.

namespace io {

inline json scalar_to_json(const Scalar& s) {
  if (s.is_exact()) {
    json terms = json::array();
    for (const auto& t : s.exact().terms())
      terms.push_back({t.coeff.get_str(), t.radicand.get_str()});
    return json{{"terms", terms}};
  }
  const Interval& iv = s.interval();
  char* lo = nullptr;
  char* hi = nullptr;
  mpfr_asprintf(&lo, "%Ra", iv.lo());
  mpfr_asprintf(&hi, "%Ra", iv.hi());
  json out{{"lo", std::string(lo)}, {"hi", std::string(hi)},
           {"precision", long(iv.precision())}};
  mpfr_free_str(lo);
  mpfr_free_str(hi);
  return out;
}

inline Scalar scalar_from_json(const json& j) {
  if (j.is_string()) return Scalar(parse_rational(j.get<std::string>()));
  if (j.contains("terms")) {
    Ext acc;
    for (const auto& t : j["terms"]) {
      Rational coeff = parse_rational(t[0].get<std::string>());
      Integer rad(t[1].get<std::string>());
      Ext term = Ext::sqrt_of_integer(rad);
      acc += Ext(coeff) * term;
    }
    return Scalar(acc);
  }
  mpfr_prec_t prec = j.value("precision", 256L);
  mpfr_t lo, hi;
  mpfr_init2(lo, prec);
  mpfr_init2(hi, prec);
  if (mpfr_set_str(lo, j["lo"].get<std::string>().c_str(), 0, MPFR_RNDD) != 0 ||
      mpfr_set_str(hi, j["hi"].get<std::string>().c_str(), 0, MPFR_RNDU) != 0) {
    mpfr_clear(lo);
    mpfr_clear(hi);
    fail(ErrorCode::ParseError, "bad interval literal");
  }
  Rational qlo, qhi;
  mpfr_get_q(qlo.get_mpq_t(), lo);
  mpfr_get_q(qhi.get_mpq_t(), hi);
  mpfr_clear(lo);
  mpfr_clear(hi);
  // rebuild conservatively from the exact dyadic bounds
  Interval out = Interval::from_rational(qlo, prec).hull(Interval::from_rational(qhi, prec));
  return Scalar(out);
}

inline json cscalar_to_json(const CScalar& z) {
  if (z.re.is_rational() && z.im.is_rational())
    return json::array({z.re.rational_value().get_str(), z.im.rational_value().get_str()});
  return json{{"re", scalar_to_json(z.re)}, {"im", scalar_to_json(z.im)}};
}

inline CScalar cscalar_from_json(const json& j) {
  if (j.is_array()) {
    if (j.size() != 2) fail(ErrorCode::ParseError, "complex entry needs [re, im]");
    return CScalar(parse_rational(j[0].get<std::string>()),
                   parse_rational(j[1].get<std::string>()));
  }
  return CScalar(scalar_from_json(j["re"]), scalar_from_json(j["im"]));
}

inline json matrix_to_json(const CMatrix& m) {
  json entries = json::array();
  for (size_t i = 0; i < m.rows(); ++i)
    for (size_t j = 0; j < m.cols(); ++j) entries.push_back(cscalar_to_json(m.at(i, j)));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", entries}};
}

inline CMatrix matrix_from_json(const json& j, std::optional<size_t> expect_rows = {},
                                std::optional<size_t> expect_cols = {}) {
  size_t rows, cols;
  const json* entries;
  if (j.is_array()) {
    // flat row-major array; dimensions must be supplied
    if (!expect_rows || !expect_cols)
      fail(ErrorCode::ParseError, "flat matrix needs explicit dimensions");
    rows = *expect_rows;
    cols = *expect_cols;
    entries = &j;
  } else {
    rows = j.at("rows").get<size_t>();
    cols = j.at("cols").get<size_t>();
    entries = &j.at("entries");
  }
  if (expect_rows && rows != *expect_rows)
    fail(ErrorCode::DimensionMismatch, "matrix row count mismatch");
  if (expect_cols && cols != *expect_cols)
    fail(ErrorCode::DimensionMismatch, "matrix column count mismatch");
  if (entries->size() != rows * cols)
    fail(ErrorCode::ParseError, "matrix entry count mismatch");
  CMatrix m(rows, cols);
  for (size_t i = 0; i < rows; ++i)
    for (size_t jx = 0; jx < cols; ++jx) m.at(i, jx) = cscalar_from_json((*entries)[i * cols + jx]);
  return m;
}

inline std::vector<Rational> rationals_from_json(const json& j) {
  std::vector<Rational> out;
  for (const auto& e : j) out.push_back(parse_rational(e.get<std::string>()));
  return out;
}

inline json rationals_to_json(const std::vector<Rational>& v) {
  json out = json::array();
  for (const auto& q : v) out.push_back(q.get_str());
  return out;
}

inline Word word_from_json(const json& j) {
  Word w;
  for (const auto& e : j) w.push_back(e.get<unsigned>());
  return w;
}

}  // namespace io

// ---------------------------------------------------------------------------
// Instance files.

struct GadgetSpec {
  size_t d = 2;
  Rational lambda;
  std::vector<CScalar> phi;     // target vector, normalized on load
  std::vector<Rational> x, y;
  std::vector<CMatrix> matrices;
};

struct ThresholdSpec {
  std::vector<CMatrix> superops;  // natural representations
  CMatrix rho;
  std::vector<CScalar> phi;       // target vector
  Rational lambda;
  bool strict = true;
};

struct InstanceFile {
  std::string kind;
  std::optional<ProblemInstance> problem;
  std::optional<PcpInstance> pcp;
  std::optional<std::vector<IMatrix>> mortality;
  std::optional<GadgetSpec> gadget;
  std::optional<ThresholdSpec> threshold;
};

inline InstanceFile parse_instance(const json& j) {
  InstanceFile f;
  f.kind = j.at("kind").get<std::string>();
  const json& params = j.contains("params") ? j.at("params") : json::object();
  auto opt_bound = [&]() -> std::optional<size_t> {
    if (params.contains("carath_bound")) return params["carath_bound"].get<size_t>();
    return std::nullopt;
  };
  if (f.kind == "separability") {
    SeparabilityInstance inst;
    inst.d = params.at("d").get<size_t>();
    inst.n = params.at("n").get<size_t>();
    inst.carath_bound = opt_bound();
    size_t dim = enc::ipow(inst.d, inst.n);
    inst.rho = io::matrix_from_json(j.at("rho"), dim, dim);
    f.problem = inst;
  } else if (f.kind == "distillability") {
    DistillabilityInstance inst;
    inst.d = params.at("d").get<size_t>();
    inst.n = params.at("n").get<size_t>();
    inst.rho = io::matrix_from_json(j.at("rho"), inst.d * inst.d, inst.d * inst.d);
    f.problem = inst;
  } else if (f.kind == "lhv") {
    LhvDistributionInstance inst;
    inst.n = params.at("n").get<size_t>();
    inst.m = params.at("m").get<size_t>();
    inst.p = io::rationals_from_json(j.at("P"));
    f.problem = inst;
  } else if (f.kind == "state_lhv") {
    StateLhvInstance inst;
    inst.d = params.at("d").get<size_t>();
    inst.n = params.at("n").get<size_t>();
    inst.m = params.at("m").get<size_t>();
    inst.rho = io::matrix_from_json(j.at("rho"), inst.d * inst.d, inst.d * inst.d);
    f.problem = inst;
  } else if (f.kind == "quantum_representation") {
    QuantumRepresentationInstance inst;
    inst.n = params.at("n").get<size_t>();
    inst.m = params.at("m").get<size_t>();
    inst.d = params.at("d").get<size_t>();
    inst.p = io::rationals_from_json(j.at("P"));
    f.problem = inst;
  } else if (f.kind == "birkhoff") {
    BirkhoffInstance inst;
    inst.d = params.at("d").get<size_t>();
    inst.n = params.at("n").get<size_t>();
    inst.carath_bound = opt_bound();
    inst.natural = io::matrix_from_json(j.at("superop"), inst.d * inst.d, inst.d * inst.d);
    f.problem = inst;
  } else if (f.kind == "zero_error") {
    ZeroErrorInstance inst;
    inst.d = params.at("d").get<size_t>();
    inst.n = params.at("n").get<size_t>();
    inst.m = params.at("m").get<size_t>();
    inst.natural = io::matrix_from_json(j.at("superop"), inst.d * inst.d, inst.d * inst.d);
    f.problem = inst;
  } else if (f.kind == "additivity") {
    AdditivityInstance inst;
    inst.d = params.at("d").get<size_t>();
    inst.d_prime = params.at("d_prime").get<size_t>();
    const json& p = params.at("p");
    if (p.is_string() && (p == "inf" || p == "infinity")) {
      inst.p_inf = true;
    } else {
      inst.p = p.get<long>();
    }
    inst.natural = io::matrix_from_json(j.at("superop"), inst.d * inst.d, inst.d * inst.d);
    f.problem = inst;
  } else if (f.kind == "pcp") {
    PcpInstance inst;
    inst.alphabet_size = params.at("m").get<unsigned>();
    inst.claus = params.value("claus", false);
    for (const auto& tile : j.at("tiles"))
      inst.tiles.emplace_back(io::word_from_json(tile.at(0)), io::word_from_json(tile.at(1)));
    inst.validate();
    f.pcp = inst;
  } else if (f.kind == "mortality") {
    std::vector<IMatrix> mats;
    for (const auto& mj : j.at("matrices")) {
      const json& entries = mj.is_object() ? mj.at("entries") : mj;
      size_t dim = 0;
      while (dim * dim < entries.size()) ++dim;
      if (dim * dim != entries.size())
        fail(ErrorCode::ParseError, "mortality matrices must be square");
      IMatrix m(dim, dim);
      for (size_t i = 0; i < dim; ++i)
        for (size_t jx = 0; jx < dim; ++jx)
          m.at(i, jx) = Integer(entries[i * dim + jx].get<std::string>());
      mats.push_back(std::move(m));
    }
    f.mortality = std::move(mats);
  } else if (f.kind == "gadget") {
    GadgetSpec spec;
    spec.d = params.at("d").get<size_t>();
    spec.lambda = parse_rational(params.at("lambda").get<std::string>());
    for (const auto& e : j.at("phi")) spec.phi.push_back(io::cscalar_from_json(e));
    spec.x = io::rationals_from_json(j.at("x"));
    spec.y = io::rationals_from_json(j.at("y"));
    size_t n = spec.d * spec.d - 2;
    for (const auto& mj : j.at("matrices"))
      spec.matrices.push_back(io::matrix_from_json(mj, n, n));
    f.gadget = spec;
  } else if (f.kind == "threshold") {
    ThresholdSpec spec;
    spec.lambda = parse_rational(params.at("lambda").get<std::string>());
    spec.strict = params.value("strict", true);
    size_t d = params.at("d").get<size_t>();
    for (const auto& mj : j.at("superops"))
      spec.superops.push_back(io::matrix_from_json(mj, d * d, d * d));
    spec.rho = io::matrix_from_json(j.at("rho"), d, d);
    for (const auto& e : j.at("phi")) spec.phi.push_back(io::cscalar_from_json(e));
    f.threshold = spec;
  } else {
    fail(ErrorCode::UsageError, "unknown instance kind: " + f.kind);
  }
  return f;
}

inline InstanceFile load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::UsageError, "cannot open instance file: " + path);
  json j;
  in >> j;
  return parse_instance(j);
}

inline json instance_to_json(const InstanceFile& f) {
  json j;
  j["kind"] = f.kind;
  json params = json::object();
  if (f.problem) {
    std::visit(
        [&](const auto& inst) {
          using T = std::decay_t<decltype(inst)>;
          if constexpr (std::is_same_v<T, SeparabilityInstance>) {
            params["d"] = inst.d;
            params["n"] = inst.n;
            if (inst.carath_bound) params["carath_bound"] = *inst.carath_bound;
            j["rho"] = io::matrix_to_json(inst.rho);
          } else if constexpr (std::is_same_v<T, DistillabilityInstance>) {
            params["d"] = inst.d;
            params["n"] = inst.n;
            j["rho"] = io::matrix_to_json(inst.rho);
          } else if constexpr (std::is_same_v<T, LhvDistributionInstance>) {
            params["n"] = inst.n;
            params["m"] = inst.m;
            j["P"] = io::rationals_to_json(inst.p);
          } else if constexpr (std::is_same_v<T, StateLhvInstance>) {
            params["d"] = inst.d;
            params["n"] = inst.n;
            params["m"] = inst.m;
            j["rho"] = io::matrix_to_json(inst.rho);
          } else if constexpr (std::is_same_v<T, QuantumRepresentationInstance>) {
            params["n"] = inst.n;
            params["m"] = inst.m;
            params["d"] = inst.d;
            j["P"] = io::rationals_to_json(inst.p);
          } else if constexpr (std::is_same_v<T, BirkhoffInstance>) {
            params["d"] = inst.d;
            params["n"] = inst.n;
            if (inst.carath_bound) params["carath_bound"] = *inst.carath_bound;
            j["superop"] = io::matrix_to_json(inst.natural);
          } else if constexpr (std::is_same_v<T, ZeroErrorInstance>) {
            params["d"] = inst.d;
            params["n"] = inst.n;
            params["m"] = inst.m;
            j["superop"] = io::matrix_to_json(inst.natural);
          } else {
            params["d"] = inst.d;
            params["d_prime"] = inst.d_prime;
            if (inst.p_inf)
              params["p"] = "inf";
            else
              params["p"] = inst.p;
            j["superop"] = io::matrix_to_json(inst.natural);
          }
        },
        *f.problem);
  } else if (f.pcp) {
    params["m"] = f.pcp->alphabet_size;
    params["claus"] = f.pcp->claus;
    json tiles = json::array();
    for (const auto& [top, bottom] : f.pcp->tiles) {
      json t = json::array({json(top), json(bottom)});
      tiles.push_back(t);
    }
    j["tiles"] = tiles;
  } else if (f.mortality) {
    json mats = json::array();
    for (const auto& m : *f.mortality) {
      json entries = json::array();
      for (size_t i = 0; i < m.rows(); ++i)
        for (size_t jx = 0; jx < m.cols(); ++jx) entries.push_back(m.at(i, jx).get_str());
      mats.push_back(entries);
    }
    j["matrices"] = mats;
  } else if (f.gadget) {
    params["d"] = f.gadget->d;
    params["lambda"] = f.gadget->lambda.get_str();
    json phi = json::array();
    for (const auto& z : f.gadget->phi) phi.push_back(io::cscalar_to_json(z));
    j["phi"] = phi;
    j["x"] = io::rationals_to_json(f.gadget->x);
    j["y"] = io::rationals_to_json(f.gadget->y);
    json mats = json::array();
    for (const auto& m : f.gadget->matrices) mats.push_back(io::matrix_to_json(m));
    j["matrices"] = mats;
  } else if (f.threshold) {
    params["lambda"] = f.threshold->lambda.get_str();
    params["strict"] = f.threshold->strict;
    params["d"] = f.threshold->rho.rows();
    json sups = json::array();
    for (const auto& m : f.threshold->superops) sups.push_back(io::matrix_to_json(m));
    j["superops"] = sups;
    j["rho"] = io::matrix_to_json(f.threshold->rho);
    json phi = json::array();
    for (const auto& z : f.threshold->phi) phi.push_back(io::cscalar_to_json(z));
    j["phi"] = phi;
  }
  j["params"] = params;
  return j;
}

// ---------------------------------------------------------------------------
// Witness assignments and search certificates.

inline Assignment assignment_from_json(const json& j) {
  Assignment a;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const json& v = it.value();
    if (v.is_string()) {
      a[it.key()] = Ext(parse_rational(v.get<std::string>()));
    } else {
      Scalar s = io::scalar_from_json(v);
      if (!s.is_exact()) fail(ErrorCode::UsageError, "witness values must be exact");
      a[it.key()] = s.exact();
    }
  }
  return a;
}

inline json assignment_to_json(const Assignment& a) {
  json j = json::object();
  for (const auto& [name, value] : a) {
    if (value.is_rational())
      j[name] = value.rational_value().get_str();
    else
      j[name] = io::scalar_to_json(Scalar(value));
  }
  return j;
}

inline json outcome_to_json(const SearchOutcome& out) {
  json j;
  switch (out.verdict) {
    case SearchOutcome::Verdict::witness: j["verdict"] = "witness"; break;
    case SearchOutcome::Verdict::exhausted: j["verdict"] = "exhausted"; break;
    case SearchOutcome::Verdict::budget_exceeded: j["verdict"] = "budget-exceeded"; break;
  }
  j["depth"] = out.depth;
  j["word"] = out.witness;
  j["stats"] = {{"nodes", out.stats.nodes}, {"deduped", out.stats.deduped}};
  return j;
}

// threshold witness certificate with both evaluation paths
inline json threshold_certificate(const ThresholdProblem& p, const SearchOutcome& out,
                                  mpfr_prec_t precision) {
  json j = outcome_to_json(out);
  j["precision"] = long(precision);
  if (out.verdict == SearchOutcome::Verdict::witness) {
    CMatrix state = p.rho;
    for (size_t k = out.witness.size(); k-- > 0;)
      state = apply(p.channels[out.witness[k] - 1], state);
    Interval lhs = fidelity_overlap(p.phi, state).to_interval();
    j["overlap_interval"] = {lhs.str(40)};
    j["lambda"] = p.lambda.get_str();
    if (p.bundle) {
      GadgetIdentity id = verify_gadget_identity(*p.bundle, out.witness);
      j["block_path"] = io::scalar_to_json(id.rhs);
      j["matrix_path_interval"] = id.lhs.to_interval().str(40);
    }
  }
  return j;
}

// ---------------------------------------------------------------------------
// Gadget bundle serialization.

inline json bundle_to_json(const GadgetBundle& b) {
  json j;
  j["d"] = b.d;
  j["lambda"] = b.lambda.get_str();
  j["nu"] = io::scalar_to_json(b.nu);
  j["c"] = b.c.get_str();
  j["delta1"] = io::scalar_to_json(b.delta1);
  j["delta2"] = b.delta2.get_str();
  j["eps"] = b.eps.get_str();
  j["x"] = io::rationals_to_json(b.x);
  j["y"] = io::rationals_to_json(b.y);
  json phi = json::array();
  for (const auto& z : b.phi_vec) phi.push_back(io::cscalar_to_json(z));
  j["phi_vec"] = phi;
  j["psi"] = io::matrix_to_json(b.psi);
  json mats = json::array();
  for (const auto& m : b.m) mats.push_back(io::matrix_to_json(m));
  j["matrices"] = mats;
  json basis = json::array();
  for (const auto& h : b.basis->ops) basis.push_back(io::matrix_to_json(h));
  j["basis"] = basis;
  json transfers = json::array();
  for (const auto& ch : b.channels) transfers.push_back(io::matrix_to_json(ch.transfer()));
  j["transfers"] = transfers;
  j["rho"] = io::matrix_to_json(b.rho);
  return j;
}

inline GadgetBundle bundle_from_json(const json& j) {
  GadgetBundle b;
  b.d = j.at("d").get<size_t>();
  b.lambda = parse_rational(j.at("lambda").get<std::string>());
  b.nu = io::scalar_from_json(j.at("nu"));
  b.c = parse_rational(j.at("c").get<std::string>());
  b.delta2 = parse_rational(j.at("delta2").get<std::string>());
  b.eps = parse_rational(j.at("eps").get<std::string>());
  b.x = io::rationals_from_json(j.at("x"));
  b.y = io::rationals_from_json(j.at("y"));
  for (const auto& e : j.at("phi_vec")) b.phi_vec.push_back(io::cscalar_from_json(e));
  b.phi = detail::projector_of(b.phi_vec);
  b.psi = io::matrix_from_json(j.at("psi"), b.d, b.d);
  size_t n = b.d * b.d - 2;
  for (const auto& mj : j.at("matrices")) b.m.push_back(io::matrix_from_json(mj, n, n));
  auto basis = std::make_shared<HermitianBasis>();
  basis->dim = b.d;
  for (const auto& hj : j.at("basis"))
    basis->ops.push_back(io::matrix_from_json(hj, b.d, b.d));
  basis->anchor = b.psi;
  basis->delta1 = io::scalar_from_json(j.at("delta1"));
  b.delta1 = basis->delta1;
  b.delta = b.delta1 * Scalar(b.delta2);
  b.basis = basis;
  for (const auto& tj : j.at("transfers"))
    b.channels.push_back(
        Channel::from_transfer(b.basis, io::matrix_from_json(tj, b.d * b.d, b.d * b.d)));
  b.rho = io::matrix_from_json(j.at("rho"), b.d, b.d);
  return b;
}

// ---------------------------------------------------------------------------
// Formula JSON (structural serialization for cmd_encode --out).

inline json formula_to_json(const Formula& f) {
  json j;
  j["prenexed"] = f.prenexed;
  j["reals"] = f.real_names;
  json vars = json::array();
  for (size_t i = 0; i < f.vars.size(); ++i) {
    const MatrixVar& v = f.vars[i];
    vars.push_back({{"name", v.name},
                    {"rows", v.rows},
                    {"cols", v.cols},
                    {"tag", domain_tag_name(v.tag)},
                    {"param", v.param},
                    {"quant", f.quants[i] == Quant::exists ? "exists" : "forall"},
                    {"reals", v.reals}});
  }
  j["vars"] = vars;
  json atoms = json::array();
  for (const auto& a : f.atoms) {
    json terms = json::array();
    for (const auto& [mono, coeff] : a.poly.terms()) {
      json m = json::array();
      for (auto [var, exp] : mono) m.push_back({var, exp});
      terms.push_back({{"coeff", coeff.get_str()}, {"monomial", m}});
    }
    atoms.push_back({{"rel", a.rel == Rel::gt ? ">" : a.rel == Rel::ge ? ">=" : "="},
                     {"poly", terms}});
  }
  j["atoms"] = atoms;
  std::function<json(const Body&)> body_json = [&](const Body& b) -> json {
    switch (b.kind) {
      case Body::Kind::true_: return json{{"op", "true"}};
      case Body::Kind::atom: return json{{"op", "atom"}, {"atom", b.atom}};
      case Body::Kind::not_: return json{{"op", "not"}, {"kid", body_json(b.kids[0])}};
      default: {
        json kids = json::array();
        for (const auto& k : b.kids) kids.push_back(body_json(k));
        return json{{"op", b.kind == Body::Kind::and_ ? "and" : "or"}, {"kids", kids}};
      }
    }
  };
  j["body"] = body_json(f.body);
  json notes = json::array();
  for (const auto& [k, v] : f.notes) notes.push_back({k, v});
  j["notes"] = notes;
  return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::UsageError, "cannot write file: " + path);
  out << text;
}

inline void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(1) + "\n");
}

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::UsageError, "cannot open file: " + path);
  json j;
  in >> j;
  return j;
}

}  // namespace qsalg
