#pragma once

#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "qsalg/formula.hpp"

namespace qsalg {

namespace smt {

inline std::string rational_term(const Rational& q) {
  bool neg = q < 0;
  Rational a = neg ? Rational(-q) : q;
  std::string core;
  if (a.get_den() == 1)
    core = a.get_num().get_str();
  else
    core = "(/ " + a.get_num().get_str() + " " + a.get_den().get_str() + ")";
  return neg ? "(- " + core + ")" : core;
}

inline std::string poly_term(const Poly& p, const std::vector<std::string>& names) {
  if (p.is_zero()) return "0";
  std::vector<std::string> terms;
  for (const auto& [m, c] : p.terms()) {
    if (m.empty()) {
      terms.push_back(rational_term(c));
      continue;
    }
    std::vector<std::string> factors;
    if (c != 1) factors.push_back(rational_term(c));
    for (auto [v, e] : m)
      for (uint32_t k = 0; k < e; ++k) factors.push_back(names[v]);
    if (factors.size() == 1)
      terms.push_back(factors[0]);
    else {
      std::string s = "(*";
      for (const auto& f : factors) s += " " + f;
      s += ")";
      terms.push_back(s);
    }
  }
  if (terms.size() == 1) return terms[0];
  std::string s = "(+";
  for (const auto& t : terms) s += " " + t;
  s += ")";
  return s;
}

inline std::string body_term(const Body& b, const Formula& f) {
  switch (b.kind) {
    case Body::Kind::true_:
      return "true";
    case Body::Kind::atom: {
      const PolyAtom& a = f.atoms[b.atom];
      const char* rel = a.rel == Rel::gt ? ">" : (a.rel == Rel::ge ? ">=" : "=");
      return std::string("(") + rel + " " + poly_term(a.poly, f.real_names) + " 0)";
    }
    case Body::Kind::and_:
    case Body::Kind::or_: {
      std::string s = b.kind == Body::Kind::and_ ? "(and" : "(or";
      for (const auto& k : b.kids) s += " " + body_term(k, f);
      s += ")";
      return s;
    }
    case Body::Kind::not_:
      return "(not " + body_term(b.kids[0], f) + ")";
  }
  return "true";
}

}  // namespace smt

// SMT-LIB2 script for a prenexed formula: nonlinear real arithmetic with
// nested binders, exact rational numerals, deterministic variable naming.
inline std::string export_smt(const Formula& f) {
  if (!f.prenexed) fail(ErrorCode::UsageError, "export_smt requires a prenexed formula");
  if (!f.closed()) fail(ErrorCode::UsageError, "export_smt requires a closed formula");
  std::string term = smt::body_term(f.body, f);
  for (size_t i = f.vars.size(); i-- > 0;) {
    const MatrixVar& v = f.vars[i];
    if (v.reals.empty()) continue;
    std::string binder = f.quants[i] == Quant::exists ? "exists" : "forall";
    std::string decl;
    for (uint32_t rv : v.reals) decl += "(" + f.real_names[rv] + " Real) ";
    if (!decl.empty()) decl.pop_back();
    term = "(" + binder + " (" + decl + ") " + term + ")";
  }
  std::string out;
  out += "(set-logic NRA)\n";
  out += "(assert " + term + ")\n";
  out += "(check-sat)\n";
  return out;
}

// ---------------------------------------------------------------------------
// Parser for the exported subset.

namespace smt {

struct Sexp {
  std::string atom;  // nonempty for leaves
  std::vector<Sexp> kids;
  bool is_atom() const { return !atom.empty(); }
};

inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> toks;
  std::string cur;
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == ';') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (c == '(' || c == ')') {
      if (!cur.empty()) {
        toks.push_back(cur);
        cur.clear();
      }
      toks.push_back(std::string(1, c));
    } else if (isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) {
        toks.push_back(cur);
        cur.clear();
      }
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) toks.push_back(cur);
  return toks;
}

inline Sexp parse_sexp(const std::vector<std::string>& toks, size_t& pos) {
  if (pos >= toks.size()) fail(ErrorCode::ParseError, "unexpected end of SMT input");
  if (toks[pos] == "(") {
    ++pos;
    Sexp s;
    while (pos < toks.size() && toks[pos] != ")") s.kids.push_back(parse_sexp(toks, pos));
    if (pos >= toks.size()) fail(ErrorCode::ParseError, "missing closing paren");
    ++pos;
    return s;
  }
  Sexp s;
  s.atom = toks[pos++];
  return s;
}

inline Poly parse_term(const Sexp& s, const std::map<std::string, uint32_t>& vars) {
  if (s.is_atom()) {
    auto it = vars.find(s.atom);
    if (it != vars.end()) return Poly::variable(it->second);
    return Poly::constant(parse_rational(s.atom));
  }
  if (s.kids.empty() || !s.kids[0].is_atom()) fail(ErrorCode::ParseError, "bad arithmetic term");
  const std::string& op = s.kids[0].atom;
  if (op == "+") {
    Poly acc;
    for (size_t i = 1; i < s.kids.size(); ++i) acc += parse_term(s.kids[i], vars);
    return acc;
  }
  if (op == "*") {
    Poly acc = Poly::constant(Rational(1));
    for (size_t i = 1; i < s.kids.size(); ++i) acc *= parse_term(s.kids[i], vars);
    return acc;
  }
  if (op == "-") {
    if (s.kids.size() == 2) return -parse_term(s.kids[1], vars);
    Poly acc = parse_term(s.kids[1], vars);
    for (size_t i = 2; i < s.kids.size(); ++i) acc -= parse_term(s.kids[i], vars);
    return acc;
  }
  if (op == "/") {
    if (s.kids.size() != 3 || !s.kids[1].is_atom() || !s.kids[2].is_atom())
      fail(ErrorCode::ParseError, "(/ p q) expects numerals");
    // numerator may itself be negative via an enclosing (- ...)
    Rational num = parse_rational(s.kids[1].atom);
    Rational den = parse_rational(s.kids[2].atom);
    return Poly::constant(num / den);
  }
  fail(ErrorCode::ParseError, "unsupported arithmetic operator: " + op);
}

inline Body parse_body(const Sexp& s, Formula& f, const std::map<std::string, uint32_t>& vars) {
  if (s.is_atom()) {
    if (s.atom == "true") return Body::truth();
    fail(ErrorCode::ParseError, "unexpected Boolean atom: " + s.atom);
  }
  if (s.kids.empty() || !s.kids[0].is_atom()) fail(ErrorCode::ParseError, "bad Boolean term");
  const std::string& op = s.kids[0].atom;
  if (op == "and" || op == "or") {
    std::vector<Body> kids;
    for (size_t i = 1; i < s.kids.size(); ++i) kids.push_back(parse_body(s.kids[i], f, vars));
    if (op == "and") return Body::conj(std::move(kids));
    return Body::disj(std::move(kids));
  }
  if (op == "not") return Body::neg(parse_body(s.kids[1], f, vars));
  if (op == ">" || op == ">=" || op == "=") {
    if (s.kids.size() != 3) fail(ErrorCode::ParseError, "relational atom arity");
    Poly lhs = parse_term(s.kids[1], vars);
    Poly rhs = parse_term(s.kids[2], vars);
    Rel rel = op == ">" ? Rel::gt : (op == ">=" ? Rel::ge : Rel::eq);
    return Body::atom_ref(f.add_atom(lhs - rhs, rel));
  }
  fail(ErrorCode::ParseError, "unsupported Boolean operator: " + op);
}

}  // namespace smt

// Parses a script produced by export_smt back into a (prenexed) Formula.
// Matrix-variable structure is recovered at the binder level: each binder
// block becomes one variable group.
inline Formula parse_smt(const std::string& text) {
  auto toks = smt::tokenize(text);
  size_t pos = 0;
  Formula f;
  f.prenexed = true;
  std::map<std::string, uint32_t> vars;
  bool saw_assert = false;
  while (pos < toks.size()) {
    smt::Sexp s = smt::parse_sexp(toks, pos);
    if (s.is_atom() || s.kids.empty() || !s.kids[0].is_atom()) continue;
    const std::string& cmd = s.kids[0].atom;
    if (cmd == "set-logic" || cmd == "check-sat") continue;
    if (cmd != "assert") fail(ErrorCode::ParseError, "unsupported command: " + cmd);
    if (saw_assert) fail(ErrorCode::ParseError, "expected a single assert");
    saw_assert = true;
    // peel binders
    const smt::Sexp* cur = &s.kids[1];
    while (!cur->is_atom() && !cur->kids.empty() && cur->kids[0].is_atom() &&
           (cur->kids[0].atom == "exists" || cur->kids[0].atom == "forall")) {
      Quant q = cur->kids[0].atom == "exists" ? Quant::exists : Quant::forall;
      MatrixVar v;
      v.name = "block" + std::to_string(f.vars.size());
      v.tag = DomainTag::free_reals;
      for (const auto& decl : cur->kids[1].kids) {
        if (decl.kids.size() != 2 || !decl.kids[0].is_atom())
          fail(ErrorCode::ParseError, "bad binder declaration");
        uint32_t idx = f.add_real(decl.kids[0].atom);
        vars[decl.kids[0].atom] = idx;
        v.reals.push_back(idx);
      }
      v.rows = v.reals.size();
      v.cols = 1;
      f.vars.push_back(std::move(v));
      f.quants.push_back(q);
      cur = &cur->kids[2];
    }
    f.body = smt::parse_body(*cur, f, vars);
  }
  if (!saw_assert) fail(ErrorCode::ParseError, "no assert in SMT input");
  return f;
}

// Canonical serialization at the real-variable level: quantifier blocks with
// their variable names plus the body with atoms inlined. Matrix-variable
// metadata (tags, shapes) does not survive an SMT round trip and is excluded.
inline std::string canonical_key(const Formula& f) {
  std::ostringstream out;
  for (size_t i = 0; i < f.vars.size(); ++i) {
    if (f.vars[i].reals.empty()) continue;
    out << (f.quants[i] == Quant::exists ? "E" : "A") << "[";
    for (uint32_t rv : f.vars[i].reals) out << f.real_names[rv] << " ";
    out << "]";
  }
  out << "|";
  std::function<void(const Body&)> rec = [&](const Body& b) {
    switch (b.kind) {
      case Body::Kind::true_:
        out << "T";
        return;
      case Body::Kind::atom: {
        const PolyAtom& a = f.atoms[b.atom];
        out << "(" << (a.rel == Rel::gt ? ">" : a.rel == Rel::ge ? ">=" : "=") << " "
            << a.poly.str(f.real_names) << ")";
        return;
      }
      case Body::Kind::and_:
      case Body::Kind::or_: {
        out << (b.kind == Body::Kind::and_ ? "(and" : "(or");
        for (const auto& k : b.kids) {
          out << " ";
          rec(k);
        }
        out << ")";
        return;
      }
      case Body::Kind::not_:
        out << "(not ";
        rec(b.kids[0]);
        out << ")";
        return;
    }
  };
  rec(f.body);
  return out.str();
}

inline bool structurally_equal(const Formula& a, const Formula& b) {
  return canonical_key(a) == canonical_key(b);
}

}  // namespace qsalg
