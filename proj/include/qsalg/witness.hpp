#pragma once

#include <map>
#include <string>

#include "qsalg/formula.hpp"

namespace qsalg {

using Assignment = std::map<std::string, Ext>;

namespace detail {

inline bool eval_atom_exact(const PolyAtom& a, const std::vector<Ext>& values) {
  Ext v = a.poly.eval<Ext>(values);
  switch (a.rel) {
    case Rel::gt: return v.sign() > 0;
    case Rel::ge: return v.sign() >= 0;
    case Rel::eq: return v.is_zero();
  }
  return false;
}

inline bool eval_body_exact(const Body& b, const Formula& f, const std::vector<Ext>& values) {
  switch (b.kind) {
    case Body::Kind::true_:
      return true;
    case Body::Kind::atom:
      return eval_atom_exact(f.atoms[b.atom], values);
    case Body::Kind::and_:
      for (const auto& k : b.kids)
        if (!eval_body_exact(k, f, values)) return false;
      return true;
    case Body::Kind::or_:
      for (const auto& k : b.kids)
        if (eval_body_exact(k, f, values)) return true;
      return false;
    case Body::Kind::not_:
      return !eval_body_exact(b.kids[0], f, values);
  }
  return false;
}

}  // namespace detail

// Exact Boolean evaluation of a purely existential prenexed formula under an
// exact assignment of every bound variable; true certifies satisfiability.
inline bool check_witness(const Formula& f_in, const Assignment& assignment) {
  Formula f = f_in.prenexed ? f_in : prenex(f_in);
  for (Quant q : f.quants)
    if (q != Quant::exists)
      fail(ErrorCode::UsageError, "check_witness requires a purely existential formula");
  std::vector<Ext> values(f.real_names.size());
  for (size_t i = 0; i < f.real_names.size(); ++i) {
    auto it = assignment.find(f.real_names[i]);
    if (it == assignment.end())
      fail(ErrorCode::IncompleteAssignment, "missing value for " + f.real_names[i]);
    values[i] = it->second;
  }
  return detail::eval_body_exact(f.body, f, values);
}

}  // namespace qsalg
