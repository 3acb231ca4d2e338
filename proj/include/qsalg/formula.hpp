#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qsalg/polynomial.hpp"

namespace qsalg {

enum class Rel { gt, ge, eq };

struct PolyAtom {
  Poly poly;  // atom reads: poly REL 0
  Rel rel = Rel::ge;
};

enum class Quant { exists, forall };

enum class DomainTag {
  hermitian,      // unconstrained Hermitian
  psd,            // positive semidefinite
  density,        // PSD with unit trace
  unitary,        // X^dagger X = I
  norm_ball_inf,  // Hermitian, ||X||_inf <= 1
  norm_ball_p,    // Hermitian, ||X||_p <= 1, even p
  rank_exact,     // rank(X) = r via minors
  rank_at_most,   // rank(X) <= r via sum of r outer products
  channel_choi,   // Choi matrix of a CPTP map: PSD + partial-trace equalities
  povm,           // param Hermitian PSD d x d effects summing to the identity
  prob_simplex,   // real vector, entries >= 0 summing to 1
  nonneg_matrix,  // real entries >= 0
  free_reals,     // unconstrained auxiliary reals
};

inline bool domain_is_complex(DomainTag t) {
  switch (t) {
    case DomainTag::prob_simplex:
    case DomainTag::nonneg_matrix:
    case DomainTag::free_reals:
      return false;
    default:
      return true;
  }
}

inline bool domain_is_hermitian(DomainTag t) {
  switch (t) {
    case DomainTag::hermitian:
    case DomainTag::psd:
    case DomainTag::density:
    case DomainTag::norm_ball_inf:
    case DomainTag::norm_ball_p:
    case DomainTag::channel_choi:
      return true;
    default:
      return false;
  }
}

inline const char* domain_tag_name(DomainTag t) {
  switch (t) {
    case DomainTag::hermitian: return "hermitian";
    case DomainTag::psd: return "psd";
    case DomainTag::density: return "density";
    case DomainTag::unitary: return "unitary";
    case DomainTag::norm_ball_inf: return "norm-ball-inf";
    case DomainTag::norm_ball_p: return "norm-ball-p";
    case DomainTag::rank_exact: return "rank";
    case DomainTag::rank_at_most: return "rank-at-most";
    case DomainTag::channel_choi: return "channel-choi";
    case DomainTag::povm: return "povm";
    case DomainTag::prob_simplex: return "probability-simplex";
    case DomainTag::nonneg_matrix: return "nonneg-matrix";
    case DomainTag::free_reals: return "reals";
  }
  return "?";
}

// Quantified matrix variable with its flattening into real variables.
// Complex d1 x d2 variables flatten to 2*d1*d2 reals (re/im per entry,
// row-major); real-tagged variables to d1*d2; a 1x1 Hermitian-tagged variable
// is a single real. rank_at_most variables are carried by their factor
// entries: r pairs of complex vectors (u_s in C^rows, v_s in C^cols) with
// X = sum_s u_s v_s^T.
struct MatrixVar {
  std::string name;
  size_t rows = 1, cols = 1;
  DomainTag tag = DomainTag::free_reals;
  long param = 0;  // p for norm_ball_p, r for rank tags
  std::vector<uint32_t> reals;

  bool scalar_hermitian() const {
    return rows == 1 && cols == 1 && domain_is_hermitian(tag);
  }

  uint32_t re(size_t i, size_t j) const {
    if (scalar_hermitian()) return reals[0];
    return reals[2 * (i * cols + j)];
  }
  uint32_t im(size_t i, size_t j) const { return reals[2 * (i * cols + j) + 1]; }
  uint32_t rv(size_t i, size_t j) const { return reals[i * cols + j]; }
};

struct Body {
  enum class Kind { true_, atom, and_, or_, not_ };
  Kind kind = Kind::true_;
  size_t atom = 0;
  std::vector<Body> kids;

  static Body truth() { return Body{}; }
  static Body atom_ref(size_t i) {
    Body b;
    b.kind = Kind::atom;
    b.atom = i;
    return b;
  }
  static Body conj(std::vector<Body> kids) {
    std::vector<Body> keep;
    for (auto& k : kids)
      if (k.kind != Kind::true_) keep.push_back(std::move(k));
    if (keep.empty()) return truth();
    if (keep.size() == 1) return keep[0];
    Body b;
    b.kind = Kind::and_;
    b.kids = std::move(keep);
    return b;
  }
  static Body disj(std::vector<Body> kids) {
    Body b;
    b.kind = Kind::or_;
    b.kids = std::move(kids);
    return b;
  }
  static Body neg(Body k) {
    Body b;
    b.kind = Kind::not_;
    b.kids.push_back(std::move(k));
    return b;
  }
};

// Closed quantified Boolean combination of polynomial atoms over flattened
// matrix variables. Before prenexing, domain memberships live implicitly in
// the quantifier prefix; prenex() folds them into the body.
struct Formula {
  std::vector<std::string> real_names;
  std::vector<MatrixVar> vars;   // prefix order
  std::vector<Quant> quants;     // parallel to vars
  std::vector<PolyAtom> atoms;
  Body body;
  bool prenexed = false;
  std::vector<std::pair<std::string, std::string>> notes;  // parameter bindings etc.

  uint32_t add_real(const std::string& name) {
    real_names.push_back(name);
    return uint32_t(real_names.size() - 1);
  }

  // returns the index of the new variable (references into vars are
  // invalidated by subsequent calls)
  size_t add_var(const std::string& name, size_t rows, size_t cols, DomainTag tag,
                 Quant quant, long param = 0) {
    MatrixVar v;
    v.name = name;
    v.rows = rows;
    v.cols = cols;
    v.tag = tag;
    v.param = param;
    if (tag == DomainTag::povm) {
      for (long e = 0; e < param; ++e)
        for (size_t i = 0; i < rows; ++i)
          for (size_t j = 0; j < cols; ++j) {
            std::string base = name + "_e" + std::to_string(e) + "_" + std::to_string(i) + "_" +
                               std::to_string(j);
            v.reals.push_back(add_real(base + "_re"));
            v.reals.push_back(add_real(base + "_im"));
          }
    } else if (tag == DomainTag::rank_at_most) {
      // matrix entries first, then the outer-product factor entries
      for (size_t i = 0; i < rows; ++i)
        for (size_t j = 0; j < cols; ++j) {
          std::string base = name + "_" + std::to_string(i) + "_" + std::to_string(j);
          v.reals.push_back(add_real(base + "_re"));
          v.reals.push_back(add_real(base + "_im"));
        }
      for (long s = 0; s < param; ++s) {
        for (size_t i = 0; i < rows; ++i) {
          v.reals.push_back(add_real(name + "_u" + std::to_string(s) + "_" + std::to_string(i) + "_re"));
          v.reals.push_back(add_real(name + "_u" + std::to_string(s) + "_" + std::to_string(i) + "_im"));
        }
        for (size_t j = 0; j < cols; ++j) {
          v.reals.push_back(add_real(name + "_v" + std::to_string(s) + "_" + std::to_string(j) + "_re"));
          v.reals.push_back(add_real(name + "_v" + std::to_string(s) + "_" + std::to_string(j) + "_im"));
        }
      }
    } else if (v.scalar_hermitian()) {
      v.reals.push_back(add_real(name + "_0_0"));
    } else if (domain_is_complex(tag)) {
      for (size_t i = 0; i < rows; ++i)
        for (size_t j = 0; j < cols; ++j) {
          std::string base = name + "_" + std::to_string(i) + "_" + std::to_string(j);
          v.reals.push_back(add_real(base + "_re"));
          v.reals.push_back(add_real(base + "_im"));
        }
    } else {
      for (size_t i = 0; i < rows; ++i)
        for (size_t j = 0; j < cols; ++j)
          v.reals.push_back(add_real(name + "_" + std::to_string(i) + "_" + std::to_string(j)));
    }
    vars.push_back(std::move(v));
    quants.push_back(quant);
    return vars.size() - 1;
  }

  size_t add_atom(Poly p, Rel rel) {
    atoms.push_back(PolyAtom{std::move(p), rel});
    return atoms.size() - 1;
  }

  bool closed() const {
    std::vector<uint32_t> used;
    for (const auto& a : atoms) a.poly.collect_variables(used);
    for (uint32_t v : used)
      if (v >= real_names.size()) return false;
    return true;
  }
};

// Hermitian-structured symbolic matrix of one POVM effect block.
inline SymMatrix sym_povm_block(const MatrixVar& v, size_t block) {
  if (v.tag != DomainTag::povm) fail(ErrorCode::UsageError, "not a povm variable");
  size_t d = v.rows;
  auto re_idx = [&](size_t i, size_t j) { return v.reals[2 * ((block * d + i) * d + j)]; };
  auto im_idx = [&](size_t i, size_t j) { return v.reals[2 * ((block * d + i) * d + j) + 1]; };
  SymMatrix x(d, d);
  for (size_t i = 0; i < d; ++i) {
    x.at(i, i) = CPoly(Poly::variable(re_idx(i, i)));
    for (size_t j = i + 1; j < d; ++j) {
      CPoly upper(Poly::variable(re_idx(i, j)), Poly::variable(im_idx(i, j)));
      x.at(i, j) = upper;
      x.at(j, i) = upper.conj();
    }
  }
  return x;
}

// Symbolic matrix of a variable with its structural substitutions applied
// (Hermitian conjugacy, outer-product factors, real entries).
// outer-product factor sum of a rank_at_most variable
inline SymMatrix sym_rank_factors(const MatrixVar& v) {
  if (v.tag != DomainTag::rank_at_most) fail(ErrorCode::UsageError, "not a rank-at-most variable");
  SymMatrix x(v.rows, v.cols);
  size_t offset = 2 * v.rows * v.cols;
  size_t stride = 2 * (v.rows + v.cols);
  for (long s = 0; s < v.param; ++s) {
    size_t base = offset + size_t(s) * stride;
    for (size_t i = 0; i < v.rows; ++i) {
      CPoly ui(Poly::variable(v.reals[base + 2 * i]), Poly::variable(v.reals[base + 2 * i + 1]));
      for (size_t j = 0; j < v.cols; ++j) {
        CPoly vj(Poly::variable(v.reals[base + 2 * v.rows + 2 * j]),
                 Poly::variable(v.reals[base + 2 * v.rows + 2 * j + 1]));
        x.at(i, j) += ui * vj;
      }
    }
  }
  return x;
}

inline SymMatrix sym_from_var(const MatrixVar& v) {
  if (v.tag == DomainTag::povm)
    fail(ErrorCode::UsageError, "use sym_povm_block for povm variables");
  SymMatrix x(v.rows, v.cols);
  if (v.scalar_hermitian()) {
    x.at(0, 0) = CPoly(Poly::variable(v.reals[0]));
    return x;
  }
  if (!domain_is_complex(v.tag)) {
    for (size_t i = 0; i < v.rows; ++i)
      for (size_t j = 0; j < v.cols; ++j) x.at(i, j) = CPoly(Poly::variable(v.rv(i, j)));
    return x;
  }
  if (domain_is_hermitian(v.tag)) {
    for (size_t i = 0; i < v.rows; ++i) {
      x.at(i, i) = CPoly(Poly::variable(v.re(i, i)));
      for (size_t j = i + 1; j < v.cols; ++j) {
        CPoly upper(Poly::variable(v.re(i, j)), Poly::variable(v.im(i, j)));
        x.at(i, j) = upper;
        x.at(j, i) = upper.conj();
      }
    }
    return x;
  }
  for (size_t i = 0; i < v.rows; ++i)
    for (size_t j = 0; j < v.cols; ++j)
      x.at(i, j) = CPoly(Poly::variable(v.re(i, j)), Poly::variable(v.im(i, j)));
  return x;
}

namespace detail {

inline void append_hermiticity_atoms(Formula& f, const MatrixVar& v, std::vector<Body>& parts) {
  if (v.scalar_hermitian()) return;
  for (size_t i = 0; i < v.rows; ++i) {
    parts.push_back(Body::atom_ref(f.add_atom(Poly::variable(v.im(i, i)), Rel::eq)));
    for (size_t j = i + 1; j < v.cols; ++j) {
      parts.push_back(Body::atom_ref(
          f.add_atom(Poly::variable(v.re(i, j)) - Poly::variable(v.re(j, i)), Rel::eq)));
      parts.push_back(Body::atom_ref(
          f.add_atom(Poly::variable(v.im(i, j)) + Poly::variable(v.im(j, i)), Rel::eq)));
    }
  }
}

inline void append_psd_minor_atoms(Formula& f, const SymMatrix& x, std::vector<Body>& parts) {
  size_t d = x.rows();
  if (d > 6) fail(ErrorCode::CapExceeded, "principal-minor PSD encoding limited to d <= 6");
  for (uint32_t mask = 1; mask < (1u << d); ++mask) {
    std::vector<size_t> idx;
    for (size_t i = 0; i < d; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    CPoly minor = x.submatrix(idx, idx).det();
    // principal minors of a Hermitian symbolic matrix are real polynomials
    if (!minor.im.is_zero())
      fail(ErrorCode::NotHermitian, "principal minor with nonzero imaginary part");
    parts.push_back(Body::atom_ref(f.add_atom(minor.re, Rel::ge)));
  }
}

}  // namespace detail

// Boolean combination of polynomial atoms equivalent to "var lies in its
// tagged semialgebraic domain". Atoms are appended to the formula.
inline Body encode_membership(Formula& f, const MatrixVar& v) {
  std::vector<Body> parts;
  switch (v.tag) {
    case DomainTag::free_reals:
      return Body::truth();
    case DomainTag::rank_at_most: {
      SymMatrix entries = sym_from_var(v);
      SymMatrix factored = sym_rank_factors(v);
      for (size_t i = 0; i < v.rows; ++i)
        for (size_t j = 0; j < v.cols; ++j) {
          CPoly gap = entries.at(i, j) - factored.at(i, j);
          parts.push_back(Body::atom_ref(f.add_atom(gap.re, Rel::eq)));
          parts.push_back(Body::atom_ref(f.add_atom(gap.im, Rel::eq)));
        }
      return Body::conj(std::move(parts));
    }
    case DomainTag::hermitian:
      detail::append_hermiticity_atoms(f, v, parts);
      return Body::conj(std::move(parts));
    case DomainTag::psd: {
      detail::append_hermiticity_atoms(f, v, parts);
      detail::append_psd_minor_atoms(f, sym_from_var(v), parts);
      return Body::conj(std::move(parts));
    }
    case DomainTag::density: {
      detail::append_hermiticity_atoms(f, v, parts);
      SymMatrix x = sym_from_var(v);
      detail::append_psd_minor_atoms(f, x, parts);
      parts.push_back(Body::atom_ref(
          f.add_atom(x.trace().re - Poly::constant(Rational(1)), Rel::eq)));
      return Body::conj(std::move(parts));
    }
    case DomainTag::unitary: {
      SymMatrix x = sym_from_var(v);
      SymMatrix g = x.adjoint() * x;
      for (size_t i = 0; i < v.rows; ++i) {
        parts.push_back(Body::atom_ref(
            f.add_atom(g.at(i, i).re - Poly::constant(Rational(1)), Rel::eq)));
        for (size_t j = i + 1; j < v.cols; ++j) {
          parts.push_back(Body::atom_ref(f.add_atom(g.at(i, j).re, Rel::eq)));
          parts.push_back(Body::atom_ref(f.add_atom(g.at(i, j).im, Rel::eq)));
        }
      }
      return Body::conj(std::move(parts));
    }
    case DomainTag::norm_ball_inf: {
      detail::append_hermiticity_atoms(f, v, parts);
      SymMatrix x = sym_from_var(v);
      SymMatrix gap = SymMatrix::identity(v.rows) - x.adjoint() * x;
      detail::append_psd_minor_atoms(f, gap, parts);
      return Body::conj(std::move(parts));
    }
    case DomainTag::norm_ball_p: {
      if (v.param < 2 || v.param % 2 != 0)
        fail(ErrorCode::UnsupportedDomain,
             "norm-ball supports p = infinity and even p; odd p is rejected");
      detail::append_hermiticity_atoms(f, v, parts);
      SymMatrix x = sym_from_var(v);
      SymMatrix pw = x;
      for (long k = 1; k < v.param; ++k) pw = pw * x;
      parts.push_back(Body::atom_ref(
          f.add_atom(Poly::constant(Rational(1)) - pw.trace().re, Rel::ge)));
      return Body::conj(std::move(parts));
    }
    case DomainTag::rank_exact: {
      long r = v.param;
      SymMatrix x = sym_from_var(v);
      size_t n = std::min(v.rows, v.cols);
      if (r < 0 || size_t(r) > n) fail(ErrorCode::UsageError, "rank parameter out of range");
      // all (r+1)-minors vanish
      auto subsets = [](size_t total, size_t k) {
        std::vector<std::vector<size_t>> out;
        std::vector<size_t> cur(k);
        std::function<void(size_t, size_t)> rec = [&](size_t start, size_t depth) {
          if (depth == k) {
            out.push_back(cur);
            return;
          }
          for (size_t i = start; i + (k - depth) <= total; ++i) {
            cur[depth] = i;
            rec(i + 1, depth + 1);
          }
        };
        rec(0, 0);
        return out;
      };
      if (size_t(r) < n) {
        for (const auto& rs : subsets(v.rows, r + 1))
          for (const auto& cs : subsets(v.cols, r + 1)) {
            CPoly minor = x.submatrix(rs, cs).det();
            parts.push_back(Body::atom_ref(f.add_atom(minor.re, Rel::eq)));
            parts.push_back(Body::atom_ref(f.add_atom(minor.im, Rel::eq)));
          }
      }
      // some r-minor does not vanish (|minor|^2 > 0); trivial for r = 0
      if (r > 0) {
        std::vector<Body> any;
        for (const auto& rs : subsets(v.rows, r))
          for (const auto& cs : subsets(v.cols, r)) {
            CPoly minor = x.submatrix(rs, cs).det();
            any.push_back(Body::atom_ref(
                f.add_atom(minor.re * minor.re + minor.im * minor.im, Rel::gt)));
          }
        parts.push_back(Body::disj(std::move(any)));
      }
      return Body::conj(std::move(parts));
    }
    case DomainTag::channel_choi: {
      detail::append_hermiticity_atoms(f, v, parts);
      SymMatrix x = sym_from_var(v);
      detail::append_psd_minor_atoms(f, x, parts);
      // partial trace over the output factor equals I/d_in
      size_t d2 = v.rows;
      size_t din = 0;
      while (din * din < d2) ++din;
      if (din * din != d2) fail(ErrorCode::DimensionMismatch, "Choi dimension not a square");
      for (size_t c = 0; c < din; ++c)
        for (size_t e = c; e < din; ++e) {
          CPoly acc;
          for (size_t a = 0; a < din; ++a) acc += x.at(a * din + c, a * din + e);
          Rational target = (c == e) ? Rational(1, long(din)) : Rational(0);
          parts.push_back(Body::atom_ref(
              f.add_atom(acc.re - Poly::constant(target), Rel::eq)));
          if (c != e) parts.push_back(Body::atom_ref(f.add_atom(acc.im, Rel::eq)));
        }
      return Body::conj(std::move(parts));
    }
    case DomainTag::povm: {
      size_t d = v.rows;
      long m_eff = v.param;
      auto re_idx = [&](long e, size_t i, size_t j) {
        return v.reals[2 * ((size_t(e) * d + i) * d + j)];
      };
      auto im_idx = [&](long e, size_t i, size_t j) {
        return v.reals[2 * ((size_t(e) * d + i) * d + j) + 1];
      };
      for (long e = 0; e < m_eff; ++e) {
        for (size_t i = 0; i < d; ++i) {
          parts.push_back(Body::atom_ref(f.add_atom(Poly::variable(im_idx(e, i, i)), Rel::eq)));
          for (size_t j = i + 1; j < d; ++j) {
            parts.push_back(Body::atom_ref(f.add_atom(
                Poly::variable(re_idx(e, i, j)) - Poly::variable(re_idx(e, j, i)), Rel::eq)));
            parts.push_back(Body::atom_ref(f.add_atom(
                Poly::variable(im_idx(e, i, j)) + Poly::variable(im_idx(e, j, i)), Rel::eq)));
          }
        }
        detail::append_psd_minor_atoms(f, sym_povm_block(v, size_t(e)), parts);
      }
      // completeness: effects sum to the identity
      for (size_t i = 0; i < d; ++i)
        for (size_t j = i; j < d; ++j) {
          Poly re_sum, im_sum;
          for (long e = 0; e < m_eff; ++e) {
            re_sum += Poly::variable(re_idx(e, i, j));
            im_sum += Poly::variable(im_idx(e, i, j));
          }
          parts.push_back(Body::atom_ref(f.add_atom(
              re_sum - Poly::constant(Rational(i == j ? 1 : 0)), Rel::eq)));
          if (i != j) parts.push_back(Body::atom_ref(f.add_atom(im_sum, Rel::eq)));
        }
      return Body::conj(std::move(parts));
    }
    case DomainTag::prob_simplex: {
      Poly sum;
      for (uint32_t rv : v.reals) {
        parts.push_back(Body::atom_ref(f.add_atom(Poly::variable(rv), Rel::ge)));
        sum += Poly::variable(rv);
      }
      parts.push_back(Body::atom_ref(
          f.add_atom(sum - Poly::constant(Rational(1)), Rel::eq)));
      return Body::conj(std::move(parts));
    }
    case DomainTag::nonneg_matrix: {
      for (uint32_t rv : v.reals)
        parts.push_back(Body::atom_ref(f.add_atom(Poly::variable(rv), Rel::ge)));
      return Body::conj(std::move(parts));
    }
  }
  fail(ErrorCode::UnsupportedDomain, "unknown domain tag");
}

// Prenex normal form: quantifier order is preserved (quantifiers already
// lead); memberships of existential variables are conjoined into the body,
// memberships of universal variables become implication premises, nested
// inside-out.
inline Formula prenex(const Formula& f_in) {
  if (f_in.prenexed) return f_in;
  Formula f = f_in;
  Body acc = f.body;
  for (size_t i = f.vars.size(); i-- > 0;) {
    Body mem = encode_membership(f, f.vars[i]);
    if (mem.kind == Body::Kind::true_) continue;
    if (f.quants[i] == Quant::exists)
      acc = Body::conj({std::move(mem), std::move(acc)});
    else
      acc = Body::disj({Body::neg(std::move(mem)), std::move(acc)});
  }
  f.body = std::move(acc);
  f.prenexed = true;
  return f;
}

struct FormulaStats {
  size_t real_variables = 0;
  size_t atoms = 0;
  size_t max_total_degree = 0;
  size_t quantifier_alternations = 0;
};

inline void collect_atoms(const Body& b, std::vector<char>& seen) {
  switch (b.kind) {
    case Body::Kind::atom:
      seen[b.atom] = 1;
      break;
    case Body::Kind::true_:
      break;
    default:
      for (const auto& k : b.kids) collect_atoms(k, seen);
  }
}

inline FormulaStats formula_stats(const Formula& f) {
  if (!f.prenexed) fail(ErrorCode::UsageError, "formula_stats requires a prenexed formula");
  FormulaStats s;
  for (const auto& v : f.vars) s.real_variables += v.reals.size();
  std::vector<char> seen(f.atoms.size(), 0);
  collect_atoms(f.body, seen);
  for (size_t i = 0; i < f.atoms.size(); ++i)
    if (seen[i]) {
      ++s.atoms;
      s.max_total_degree = std::max(s.max_total_degree, f.atoms[i].poly.total_degree());
    }
  for (size_t i = 1; i < f.quants.size(); ++i)
    if (f.quants[i] != f.quants[i - 1]) ++s.quantifier_alternations;
  return s;
}

}  // namespace qsalg
