#pragma once

#include <set>
#include <variant>

#include "qsalg/channels.hpp"
#include "qsalg/formula.hpp"
#include "qsalg/numeric_search.hpp"

namespace qsalg {

// ---------------------------------------------------------------------------
// Problem instances. Channels enter as the entrywise ("natural") d^2 x d^2
// superoperator matrix with exact entries; conditional distributions
// P(i,j|k,l) are stored flat with index ((k*n + l)*m + i)*m + j, all 0-based.

struct SeparabilityInstance {
  CMatrix rho;  // on (C^d)^(x n)
  size_t d = 2, n = 2;
  std::optional<size_t> carath_bound;  // defaults to d^(2n)
};

struct DistillabilityInstance {
  CMatrix rho;  // bipartite on C^d (x) C^d
  size_t d = 2, n = 1;
};

struct LhvDistributionInstance {
  std::vector<Rational> p;
  size_t n = 2, m = 2;
};

struct StateLhvInstance {
  CMatrix rho;  // bipartite on C^d (x) C^d
  size_t d = 2, n = 2, m = 2;
};

struct QuantumRepresentationInstance {
  std::vector<Rational> p;
  size_t n = 2, m = 2, d = 2;
};

struct BirkhoffInstance {
  CMatrix natural;  // superoperator of T
  size_t d = 2, n = 1;
  std::optional<size_t> carath_bound;  // defaults to d^(4n)
};

struct ZeroErrorInstance {
  CMatrix natural;
  size_t d = 2, n = 1, m = 2;
};

struct AdditivityInstance {
  CMatrix natural;
  size_t d = 2;
  long p = 2;          // even; ignored when p_inf
  bool p_inf = false;  // p = infinity
  size_t d_prime = 1;
};

using ProblemInstance =
    std::variant<SeparabilityInstance, DistillabilityInstance, LhvDistributionInstance,
                 StateLhvInstance, QuantumRepresentationInstance, BirkhoffInstance,
                 ZeroErrorInstance, AdditivityInstance>;

// ---------------------------------------------------------------------------
// Shared helpers.

namespace enc {

inline size_t ipow(size_t base, size_t exp) {
  size_t r = 1;
  while (exp--) r *= base;
  return r;
}

// Exact parameters over the extension field enter polynomial atoms through
// auxiliary radical variables s_k with s_k^2 = k and s_k > 0, bound by a
// leading existential block.
class RadicalPool {
 public:
  void collect(const Scalar& s) {
    if (!s.is_exact())
      fail(ErrorCode::UsageError, "encoder parameters must be exact scalars");
    for (const auto& t : s.exact().terms())
      if (t.radicand != 1) radicands_.insert(t.radicand);
  }
  void collect(const CMatrix& m) {
    for (size_t i = 0; i < m.rows(); ++i)
      for (size_t j = 0; j < m.cols(); ++j) {
        collect(m.at(i, j).re);
        collect(m.at(i, j).im);
      }
  }

  // must run before any other variable is added so the block leads the prefix
  void bind(Formula& f) {
    if (radicands_.empty()) return;
    size_t idx = f.add_var("sqrt", radicands_.size(), 1, DomainTag::free_reals, Quant::exists);
    size_t slot = 0;
    for (const auto& k : radicands_) vars_[k] = f.vars[idx].reals[slot++];
  }

  Poly lower(const Rational& q) const { return Poly::constant(q); }

  Poly lower(const Scalar& s) const {
    Poly out;
    for (const auto& t : s.exact().terms()) {
      if (t.radicand == 1) {
        out += Poly::constant(t.coeff);
      } else {
        out += t.coeff * Poly::variable(vars_.at(t.radicand));
      }
    }
    return out;
  }

  CPoly lower(const CScalar& z) const { return CPoly(lower(z.re), lower(z.im)); }

  SymMatrix lower(const CMatrix& m) const {
    SymMatrix out(m.rows(), m.cols());
    for (size_t i = 0; i < m.rows(); ++i)
      for (size_t j = 0; j < m.cols(); ++j) out.at(i, j) = lower(m.at(i, j));
    return out;
  }

  void defining_atoms(Formula& f, std::vector<Body>& parts) const {
    for (const auto& [k, var] : vars_) {
      Poly sq = Poly::variable(var) * Poly::variable(var) - Poly::constant(Rational(k));
      parts.push_back(Body::atom_ref(f.add_atom(sq, Rel::eq)));
      parts.push_back(Body::atom_ref(f.add_atom(Poly::variable(var), Rel::gt)));
    }
  }

  // exact values for check_witness / numeric seeds
  void witness_values(Assignment& a, const Formula& f) const {
    for (const auto& [k, var] : vars_) a[f.real_names[var]] = Ext::sqrt_of_integer(k);
  }

  bool empty() const { return radicands_.empty(); }

 private:
  std::set<Integer> radicands_;
  std::map<Integer, uint32_t> vars_;
};

inline void require_density(const CMatrix& rho, size_t dim, const char* what) {
  if (rho.rows() != dim || rho.cols() != dim)
    fail(ErrorCode::DimensionMismatch, std::string(what) + ": dimension mismatch");
  if (!rho.all_exact()) fail(ErrorCode::UsageError, std::string(what) + ": entries must be exact");
  if (!rho.is_hermitian_exact())
    fail(ErrorCode::NotHermitian, std::string(what) + ": not Hermitian");
  Scalar tr = rho.trace().re - Scalar(Rational(1));
  if (!tr.is_exact_zero()) fail(ErrorCode::UsageError, std::string(what) + ": trace is not 1");
  if (psd_by_elimination(rho) == Cert3::no)
    fail(ErrorCode::UsageError, std::string(what) + ": not positive semidefinite");
}

inline void require_rational(const CMatrix& m, const char* what) {
  for (size_t i = 0; i < m.rows(); ++i)
    for (size_t j = 0; j < m.cols(); ++j)
      if (!m.at(i, j).re.is_rational() || !m.at(i, j).im.is_rational())
        fail(ErrorCode::UsageError, std::string(what) + ": entries must be rational");
}

inline void require_superop(const CMatrix& nat, size_t d, const char* what) {
  if (nat.rows() != d * d || nat.cols() != d * d)
    fail(ErrorCode::DimensionMismatch, std::string(what) + ": superoperator must be d^2 x d^2");
  require_rational(nat, what);
  // trace preservation: sum_a N_{(aa)(cd)} = delta_cd
  for (size_t c = 0; c < d; ++c)
    for (size_t e = 0; e < d; ++e) {
      CScalar acc;
      for (size_t a = 0; a < d; ++a) acc += nat.at(a * d + a, c * d + e);
      CScalar expect(Rational(c == e ? 1 : 0));
      if (!(acc == expect))
        fail(ErrorCode::UsageError, std::string(what) + ": superoperator not trace-preserving");
    }
  // complete positivity: the reshuffled Choi matrix is PSD (exact entries)
  CMatrix choi(d * d, d * d);
  Rational inv_d(1, long(d));
  for (size_t a = 0; a < d; ++a)
    for (size_t b = 0; b < d; ++b)
      for (size_t c = 0; c < d; ++c)
        for (size_t e = 0; e < d; ++e)
          choi.at(a * d + c, b * d + e) = CScalar(inv_d) * nat.at(a * d + b, c * d + e);
  if (psd_by_elimination(choi) != Cert3::yes)
    fail(ErrorCode::UsageError, std::string(what) + ": superoperator not completely positive");
}

// natural rep of T1 (x) T2 on composite row-major indices
inline CMatrix natural_tensor(const CMatrix& n1, size_t d1, const CMatrix& n2, size_t d2) {
  size_t d = d1 * d2;
  CMatrix out(d * d, d * d);
  for (size_t a1 = 0; a1 < d1; ++a1)
    for (size_t a2 = 0; a2 < d2; ++a2)
      for (size_t b1 = 0; b1 < d1; ++b1)
        for (size_t b2 = 0; b2 < d2; ++b2)
          for (size_t c1 = 0; c1 < d1; ++c1)
            for (size_t c2 = 0; c2 < d2; ++c2)
              for (size_t e1 = 0; e1 < d1; ++e1)
                for (size_t e2 = 0; e2 < d2; ++e2) {
                  size_t row = (a1 * d2 + a2) * d + (b1 * d2 + b2);
                  size_t col = (c1 * d2 + c2) * d + (e1 * d2 + e2);
                  out.at(row, col) =
                      n1.at(a1 * d1 + b1, c1 * d1 + e1) * n2.at(a2 * d2 + b2, c2 * d2 + e2);
                }
  return out;
}

inline CMatrix natural_power(const CMatrix& nat, size_t d, size_t n) {
  CMatrix acc = nat;
  size_t dim = d;
  for (size_t k = 1; k < n; ++k) {
    acc = natural_tensor(acc, dim, nat, d);
    dim *= d;
  }
  return acc;
}

// symbolic image of a symbolic state under a rational superoperator
inline SymMatrix apply_natural(const CMatrix& nat, const SymMatrix& rho) {
  size_t d = rho.rows();
  SymMatrix out(d, d);
  for (size_t a = 0; a < d; ++a)
    for (size_t b = 0; b < d; ++b) {
      CPoly acc;
      for (size_t c = 0; c < d; ++c)
        for (size_t e = 0; e < d; ++e) {
          const CScalar& w = nat.at(a * d + b, c * d + e);
          if (w.is_exact_zero()) continue;
          acc += CPoly::constant(w.re.rational_value(), w.im.rational_value()) * rho.at(c, e);
        }
      out.at(a, b) = acc;
    }
  return out;
}

// symbolic superoperator (e.g. from a Choi variable) applied to a symbolic state
inline SymMatrix apply_natural_sym(const SymMatrix& nat, const SymMatrix& rho) {
  size_t d = rho.rows();
  SymMatrix out(d, d);
  for (size_t a = 0; a < d; ++a)
    for (size_t b = 0; b < d; ++b) {
      CPoly acc;
      for (size_t c = 0; c < d; ++c)
        for (size_t e = 0; e < d; ++e) acc += nat.at(a * d + b, c * d + e) * rho.at(c, e);
      out.at(a, b) = acc;
    }
  return out;
}

// (T1 (x) T2)(rho12) with T1 rational and T2 symbolic
inline SymMatrix apply_tensor_natural(const CMatrix& n1, size_t d1, const SymMatrix& n2,
                                      size_t d2, const SymMatrix& rho12) {
  size_t d = d1 * d2;
  SymMatrix out(d, d);
  for (size_t a1 = 0; a1 < d1; ++a1)
    for (size_t a2 = 0; a2 < d2; ++a2)
      for (size_t b1 = 0; b1 < d1; ++b1)
        for (size_t b2 = 0; b2 < d2; ++b2) {
          CPoly acc;
          for (size_t c1 = 0; c1 < d1; ++c1)
            for (size_t e1 = 0; e1 < d1; ++e1) {
              const CScalar& w1 = n1.at(a1 * d1 + b1, c1 * d1 + e1);
              if (w1.is_exact_zero()) continue;
              CPoly w1p = CPoly::constant(w1.re.rational_value(), w1.im.rational_value());
              for (size_t c2 = 0; c2 < d2; ++c2)
                for (size_t e2 = 0; e2 < d2; ++e2) {
                  const CPoly& w2 = n2.at(a2 * d2 + b2, c2 * d2 + e2);
                  if (w2.is_zero()) continue;
                  acc += w1p * w2 * rho12.at((c1 * d2 + c2), (e1 * d2 + e2));
                }
            }
          out.at(a1 * d2 + a2, b1 * d2 + b2) = acc;
        }
  return out;
}

inline CPoly trace_product_sym(const SymMatrix& a, const SymMatrix& b) {
  CPoly acc;
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t k = 0; k < a.cols(); ++k) acc += a.at(i, k) * b.at(k, i);
  return acc;
}

inline const Rational& p_at(const std::vector<Rational>& p, size_t n, size_t m, size_t k,
                            size_t l, size_t i, size_t j) {
  return p.at(((k * n + l) * m + i) * m + j);
}

inline void require_distribution(const std::vector<Rational>& p, size_t n, size_t m) {
  if (p.size() != n * n * m * m)
    fail(ErrorCode::DimensionMismatch, "distribution needs n^2 m^2 entries");
  for (const auto& q : p)
    if (q < 0) fail(ErrorCode::UsageError, "probabilities must be nonnegative");
  for (size_t k = 0; k < n; ++k)
    for (size_t l = 0; l < n; ++l) {
      Rational total(0);
      for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < m; ++j) total += p_at(p, n, m, k, l, i, j);
      if (total != 1) fail(ErrorCode::UsageError, "conditional distribution does not sum to 1");
    }
}

}  // namespace enc

// ---------------------------------------------------------------------------
// Encoders. Each returns a closed prenexed Formula whose quantifier
// structure matches the problem's defining statement.

inline Formula encode_separability(const SeparabilityInstance& inst) {
  size_t dim = enc::ipow(inst.d, inst.n);
  enc::require_density(inst.rho, dim, "separability rho");
  size_t bound = inst.carath_bound.value_or(enc::ipow(inst.d, 2 * inst.n));
  Formula f;
  enc::RadicalPool pool;
  pool.collect(inst.rho);
  pool.bind(f);
  if (inst.carath_bound && *inst.carath_bound < enc::ipow(inst.d, 2 * inst.n))
    f.notes.emplace_back("carath_bound",
                         "lowered below d^(2n); the encoder is only a sufficient condition");
  f.notes.emplace_back("terms", std::to_string(bound));

  size_t lam = f.add_var("l", bound, 1, DomainTag::prob_simplex, Quant::exists);
  std::vector<std::vector<size_t>> parties(bound);
  for (size_t i = 0; i < bound; ++i)
    for (size_t a = 0; a < inst.n; ++a)
      parties[i].push_back(f.add_var("rho" + std::to_string(i) + "_" + std::to_string(a), inst.d,
                                     inst.d, DomainTag::density, Quant::exists));

  std::vector<Body> parts;
  pool.defining_atoms(f, parts);
  SymMatrix target = pool.lower(inst.rho);
  // sum_i lambda_i rho_i^(1) (x) ... (x) rho_i^(n) = rho entrywise
  for (size_t r = 0; r < dim; ++r)
    for (size_t c = r; c < dim; ++c) {
      // digits of r, c in base d identify each party's entry
      CPoly acc;
      for (size_t i = 0; i < bound; ++i) {
        CPoly term(Poly::variable(f.vars[lam].rv(i, 0)));
        size_t rr = r, cc = c;
        for (size_t a = inst.n; a-- > 0;) {
          size_t ra = rr % inst.d, ca = cc % inst.d;
          rr /= inst.d;
          cc /= inst.d;
          term = term * sym_from_var(f.vars[parties[i][a]]).at(ra, ca);
        }
        acc += term;
      }
      CPoly gap = acc - target.at(r, c);
      if (!gap.re.is_zero() || r == c) parts.push_back(Body::atom_ref(f.add_atom(gap.re, Rel::eq)));
      if (r != c && !gap.im.is_zero())
        parts.push_back(Body::atom_ref(f.add_atom(gap.im, Rel::eq)));
    }
  f.body = Body::conj(std::move(parts));
  return prenex(f);
}

inline Formula encode_n_distillable(const DistillabilityInstance& inst) {
  enc::require_density(inst.rho, inst.d * inst.d, "distillability rho");
  size_t dn = enc::ipow(inst.d, inst.n);
  // rho^(x n) on A1 B1 ... An Bn, regrouped to (A1..An)(B1..Bn), then the
  // partial transpose over the composite first party
  CMatrix big = inst.rho;
  for (size_t k = 1; k < inst.n; ++k) big = CMatrix::kron(big, inst.rho);
  std::vector<size_t> dims(2 * inst.n, inst.d);
  std::vector<size_t> perm(2 * inst.n);
  for (size_t t = 0; t < inst.n; ++t) {
    perm[t] = 2 * t;               // A_t
    perm[inst.n + t] = 2 * t + 1;  // B_t
  }
  CMatrix grouped = big.permute_factors(dims, perm);
  CMatrix pt = partial_transpose_first(grouped, dn, dn);

  Formula f;
  enc::RadicalPool pool;
  pool.collect(pt);
  pool.bind(f);
  size_t yvar = f.add_var("Y", dn, dn, DomainTag::rank_at_most, Quant::exists, 2);
  SymMatrix y = sym_from_var(f.vars[yvar]);
  SymMatrix pt_sym = pool.lower(pt);
  // <y| M |y> with |y> = sum_kl Y_kl |k,l>: index (k,l) -> k*dn + l
  CPoly quad;
  for (size_t k = 0; k < dn; ++k)
    for (size_t l = 0; l < dn; ++l)
      for (size_t k2 = 0; k2 < dn; ++k2)
        for (size_t l2 = 0; l2 < dn; ++l2) {
          const CPoly& m = pt_sym.at(k * dn + l, k2 * dn + l2);
          if (m.is_zero()) continue;
          quad += y.at(k, l).conj() * m * y.at(k2, l2);
        }
  std::vector<Body> parts;
  pool.defining_atoms(f, parts);
  if (!quad.im.is_zero() && pool.empty())
    fail(ErrorCode::NotHermitian, "distillability quadratic form has an imaginary part");
  parts.push_back(Body::atom_ref(f.add_atom(-quad.re, Rel::gt)));  // <y|..|y> < 0
  if (!quad.im.is_zero())
    parts.push_back(Body::atom_ref(f.add_atom(quad.im, Rel::eq)));
  f.body = Body::conj(std::move(parts));
  return prenex(f);
}

inline Formula encode_lhv_distribution(const LhvDistributionInstance& inst) {
  enc::require_distribution(inst.p, inst.n, inst.m);
  size_t strategies = enc::ipow(inst.m, inst.n);
  Formula f;
  size_t lam = f.add_var("L", strategies, strategies, DomainTag::nonneg_matrix, Quant::exists);
  std::vector<Body> parts;
  // normalization: sum Lambda = 1
  Poly total;
  for (uint32_t rv : f.vars[lam].reals) total += Poly::variable(rv);
  parts.push_back(Body::atom_ref(f.add_atom(total - Poly::constant(Rational(1)), Rel::eq)));
  // response of strategy a to setting k (both 0-based): base-m digit n-1-k
  auto respond = [&](size_t a, size_t k) {
    for (size_t t = inst.n - 1; t > k; --t) a /= inst.m;
    return a % inst.m;
  };
  for (size_t k = 0; k < inst.n; ++k)
    for (size_t l = 0; l < inst.n; ++l)
      for (size_t i = 0; i < inst.m; ++i)
        for (size_t j = 0; j < inst.m; ++j) {
          Poly acc;
          for (size_t a = 0; a < strategies; ++a) {
            if (respond(a, k) != i) continue;
            for (size_t b = 0; b < strategies; ++b) {
              if (respond(b, l) != j) continue;
              acc += Poly::variable(f.vars[lam].rv(a, b));
            }
          }
          parts.push_back(Body::atom_ref(f.add_atom(
              acc - Poly::constant(enc::p_at(inst.p, inst.n, inst.m, k, l, i, j)), Rel::eq)));
        }
  f.body = Body::conj(std::move(parts));
  return prenex(f);
}

inline Formula encode_state_lhv(const StateLhvInstance& inst) {
  enc::require_density(inst.rho, inst.d * inst.d, "state-lhv rho");
  enc::require_rational(inst.rho, "state-lhv rho");
  Formula f;
  size_t strategies = enc::ipow(inst.m, inst.n);
  // forall POVMs {Q^(k)}, {P^(l)} ... exists Lambda
  std::vector<size_t> qvars, pvars;
  for (size_t k = 0; k < inst.n; ++k)
    qvars.push_back(
        f.add_var("Q" + std::to_string(k), inst.d, inst.d, DomainTag::povm, Quant::forall,
                  long(inst.m)));
  for (size_t l = 0; l < inst.n; ++l)
    pvars.push_back(
        f.add_var("P" + std::to_string(l), inst.d, inst.d, DomainTag::povm, Quant::forall,
                  long(inst.m)));
  size_t lam = f.add_var("L", strategies, strategies, DomainTag::nonneg_matrix, Quant::exists);

  std::vector<Body> parts;
  Poly total;
  for (uint32_t rv : f.vars[lam].reals) total += Poly::variable(rv);
  parts.push_back(Body::atom_ref(f.add_atom(total - Poly::constant(Rational(1)), Rel::eq)));
  auto respond = [&](size_t a, size_t k) {
    for (size_t t = inst.n - 1; t > k; --t) a /= inst.m;
    return a % inst.m;
  };
  for (size_t k = 0; k < inst.n; ++k)
    for (size_t l = 0; l < inst.n; ++l)
      for (size_t i = 0; i < inst.m; ++i)
        for (size_t j = 0; j < inst.m; ++j) {
          // tr[rho (Q_i^(k) (x) P_j^(l))]
          SymMatrix q = sym_povm_block(f.vars[qvars[k]], i);
          SymMatrix p = sym_povm_block(f.vars[pvars[l]], j);
          CPoly born;
          for (size_t a1 = 0; a1 < inst.d; ++a1)
            for (size_t a2 = 0; a2 < inst.d; ++a2)
              for (size_t b1 = 0; b1 < inst.d; ++b1)
                for (size_t b2 = 0; b2 < inst.d; ++b2) {
                  const CScalar& rz = inst.rho.at(a1 * inst.d + a2, b1 * inst.d + b2);
                  if (rz.is_exact_zero()) continue;
                  born += CPoly::constant(rz.re.rational_value(), rz.im.rational_value()) *
                          q.at(b1, a1) * p.at(b2, a2);
                }
          Poly acc;
          for (size_t a = 0; a < strategies; ++a) {
            if (respond(a, k) != i) continue;
            for (size_t b = 0; b < strategies; ++b) {
              if (respond(b, l) != j) continue;
              acc += Poly::variable(f.vars[lam].rv(a, b));
            }
          }
          parts.push_back(Body::atom_ref(f.add_atom(acc - born.re, Rel::eq)));
          if (!born.im.is_zero())
            parts.push_back(Body::atom_ref(f.add_atom(born.im, Rel::eq)));
        }
  f.body = Body::conj(std::move(parts));
  return prenex(f);
}

inline Formula encode_quantum_representation(const QuantumRepresentationInstance& inst) {
  enc::require_distribution(inst.p, inst.n, inst.m);
  Formula f;
  size_t rho = f.add_var("rho", inst.d * inst.d, inst.d * inst.d, DomainTag::density,
                         Quant::exists);
  std::vector<size_t> qvars, pvars;
  for (size_t k = 0; k < inst.n; ++k)
    qvars.push_back(f.add_var("Q" + std::to_string(k), inst.d, inst.d, DomainTag::povm,
                              Quant::exists, long(inst.m)));
  for (size_t l = 0; l < inst.n; ++l)
    pvars.push_back(f.add_var("P" + std::to_string(l), inst.d, inst.d, DomainTag::povm,
                              Quant::exists, long(inst.m)));
  SymMatrix rho_sym = sym_from_var(f.vars[rho]);
  std::vector<Body> parts;
  for (size_t k = 0; k < inst.n; ++k)
    for (size_t l = 0; l < inst.n; ++l)
      for (size_t i = 0; i < inst.m; ++i)
        for (size_t j = 0; j < inst.m; ++j) {
          SymMatrix q = sym_povm_block(f.vars[qvars[k]], i);
          SymMatrix p = sym_povm_block(f.vars[pvars[l]], j);
          CPoly born;
          for (size_t a1 = 0; a1 < inst.d; ++a1)
            for (size_t a2 = 0; a2 < inst.d; ++a2)
              for (size_t b1 = 0; b1 < inst.d; ++b1)
                for (size_t b2 = 0; b2 < inst.d; ++b2)
                  born += rho_sym.at(a1 * inst.d + a2, b1 * inst.d + b2) * q.at(b1, a1) *
                          p.at(b2, a2);
          Rational target = enc::p_at(inst.p, inst.n, inst.m, k, l, i, j);
          parts.push_back(
              Body::atom_ref(f.add_atom(born.re - Poly::constant(target), Rel::eq)));
          if (!born.im.is_zero())
            parts.push_back(Body::atom_ref(f.add_atom(born.im, Rel::eq)));
        }
  f.body = Body::conj(std::move(parts));
  return prenex(f);
}

inline Formula encode_birkhoff(const BirkhoffInstance& inst) {
  enc::require_superop(inst.natural, inst.d, "birkhoff channel");
  // unitality: T(I) = I, i.e. sum_c N_{(ab)(cc)} = delta_ab
  for (size_t a = 0; a < inst.d; ++a)
    for (size_t b = 0; b < inst.d; ++b) {
      CScalar acc;
      for (size_t c = 0; c < inst.d; ++c) acc += inst.natural.at(a * inst.d + b, c * inst.d + c);
      CScalar expect(Rational(a == b ? 1 : 0));
      if (!(acc == expect)) fail(ErrorCode::NotUnital, "channel is not unital");
    }
  size_t dn = enc::ipow(inst.d, inst.n);
  CMatrix target = enc::natural_power(inst.natural, inst.d, inst.n);
  size_t bound = inst.carath_bound.value_or(enc::ipow(inst.d, 4 * inst.n));
  Formula f;
  if (inst.carath_bound && *inst.carath_bound < enc::ipow(inst.d, 4 * inst.n))
    f.notes.emplace_back("carath_bound",
                         "lowered below d^(4n); the encoder is only a sufficient condition");
  size_t lam = f.add_var("l", bound, 1, DomainTag::prob_simplex, Quant::exists);
  std::vector<size_t> uvars;
  for (size_t i = 0; i < bound; ++i)
    uvars.push_back(f.add_var("U" + std::to_string(i), dn, dn, DomainTag::unitary, Quant::exists));

  std::vector<Body> parts;
  std::vector<SymMatrix> usyms;
  for (size_t i = 0; i < bound; ++i) usyms.push_back(sym_from_var(f.vars[uvars[i]]));
  // transfer equality as maps: sum_i l_i U_i[a,c] conj(U_i[b,e]) = N^(x n)_{(ab)(ce)}
  for (size_t a = 0; a < dn; ++a)
    for (size_t b = 0; b < dn; ++b)
      for (size_t c = 0; c < dn; ++c)
        for (size_t e = 0; e < dn; ++e) {
          CPoly acc;
          for (size_t i = 0; i < bound; ++i) {
            const SymMatrix& u = usyms[i];
            acc += CPoly(Poly::variable(f.vars[lam].rv(i, 0))) * u.at(a, c) * u.at(b, e).conj();
          }
          const CScalar& t = target.at(a * dn + b, c * dn + e);
          acc -= CPoly::constant(t.re.rational_value(), t.im.rational_value());
          if (!acc.re.is_zero()) parts.push_back(Body::atom_ref(f.add_atom(acc.re, Rel::eq)));
          if (!acc.im.is_zero()) parts.push_back(Body::atom_ref(f.add_atom(acc.im, Rel::eq)));
        }
  f.body = Body::conj(std::move(parts));
  return prenex(f);
}

inline Formula encode_zero_error(const ZeroErrorInstance& inst) {
  enc::require_superop(inst.natural, inst.d, "zero-error channel");
  if (inst.m < 1) fail(ErrorCode::UsageError, "m must be >= 1");
  size_t dn = enc::ipow(inst.d, inst.n);
  CMatrix tn = enc::natural_power(inst.natural, inst.d, inst.n);
  Formula f;
  std::vector<size_t> rhos;
  for (size_t i = 0; i < inst.m; ++i)
    rhos.push_back(f.add_var("rho" + std::to_string(i), dn, dn, DomainTag::density,
                             Quant::exists));
  std::vector<Body> parts;
  std::vector<SymMatrix> outs;
  for (size_t i = 0; i < inst.m; ++i)
    outs.push_back(enc::apply_natural(tn, sym_from_var(f.vars[rhos[i]])));
  for (size_t i = 0; i < inst.m; ++i)
    for (size_t j = i + 1; j < inst.m; ++j) {
      CPoly tr = enc::trace_product_sym(outs[i], outs[j]);
      if (!tr.im.is_zero())
        fail(ErrorCode::NotHermitian, "zero-error trace form has an imaginary part");
      parts.push_back(Body::atom_ref(f.add_atom(tr.re, Rel::eq)));
    }
  f.body = Body::conj(std::move(parts));
  return prenex(f);
}

inline Formula encode_additivity(const AdditivityInstance& inst) {
  enc::require_superop(inst.natural, inst.d, "additivity channel");
  if (!inst.p_inf && (inst.p < 2 || inst.p % 2 != 0))
    fail(ErrorCode::UnsupportedDomain,
         "additivity norms support p = infinity and even p; odd p is rejected");
  size_t d = inst.d, dp = inst.d_prime;
  Formula f;
  size_t rho1 = f.add_var("rho1", d, d, DomainTag::density, Quant::exists);
  size_t choi = f.add_var("C", dp * dp, dp * dp, DomainTag::channel_choi, Quant::forall);
  size_t rho2 = f.add_var("rho2", dp, dp, DomainTag::density, Quant::exists);
  size_t aux = f.add_var("nu", 2, 1, DomainTag::free_reals, Quant::exists);
  size_t rho12 = f.add_var("rho12", d * dp, d * dp, DomainTag::density, Quant::forall);

  // symbolic natural rep of T' from its Choi variable: N'_{(ab)(ce)} = dp * C_{(ac)(be)}
  SymMatrix choi_sym = sym_from_var(f.vars[choi]);
  SymMatrix nat2(dp * dp, dp * dp);
  for (size_t a = 0; a < dp; ++a)
    for (size_t b = 0; b < dp; ++b)
      for (size_t c = 0; c < dp; ++c)
        for (size_t e = 0; e < dp; ++e)
          nat2.at(a * dp + b, c * dp + e) =
              CPoly::constant(Rational(long(dp))) * choi_sym.at(a * dp + c, b * dp + e);

  SymMatrix out1 = enc::apply_natural(inst.natural, sym_from_var(f.vars[rho1]));
  SymMatrix out2 = enc::apply_natural_sym(nat2, sym_from_var(f.vars[rho2]));
  SymMatrix out12 =
      enc::apply_tensor_natural(inst.natural, d, nat2, dp, sym_from_var(f.vars[rho12]));

  Poly nu1 = Poly::variable(f.vars[aux].rv(0, 0));
  Poly nu2 = Poly::variable(f.vars[aux].rv(1, 0));
  std::vector<Body> parts;
  parts.push_back(Body::atom_ref(f.add_atom(nu1, Rel::ge)));
  parts.push_back(Body::atom_ref(f.add_atom(nu2, Rel::ge)));

  if (!inst.p_inf) {
    long p = inst.p;
    auto matrix_power_trace = [&](const SymMatrix& x) {
      SymMatrix pw = x;
      for (long k = 1; k < p; ++k) pw = pw * x;
      return pw.trace();
    };
    auto poly_power = [&](const Poly& base) {
      Poly acc = Poly::constant(Rational(1));
      for (long k = 0; k < p; ++k) acc *= base;
      return acc;
    };
    CPoly t1 = matrix_power_trace(out1);
    CPoly t2 = matrix_power_trace(out2);
    CPoly t12 = matrix_power_trace(out12);
    parts.push_back(Body::atom_ref(f.add_atom(poly_power(nu1) - t1.re, Rel::eq)));
    parts.push_back(Body::atom_ref(f.add_atom(poly_power(nu2) - t2.re, Rel::eq)));
    // || (T (x) T')(rho12) ||_p^p <= nu1^p nu2^p
    parts.push_back(Body::atom_ref(
        f.add_atom(poly_power(nu1) * poly_power(nu2) - t12.re, Rel::ge)));
  } else {
    // p = infinity: nu_i is exactly || output ||_inf via
    // PSD(nu I - X) and not PD(nu I - X); outputs of densities are PSD.
    auto slack = [&](const Poly& nu, const SymMatrix& x) {
      size_t dd = x.rows();
      SymMatrix gap(dd, dd);
      for (size_t i = 0; i < dd; ++i)
        for (size_t j = 0; j < dd; ++j) {
          gap.at(i, j) = -x.at(i, j);
          if (i == j) gap.at(i, j) += CPoly(nu);
        }
      return gap;
    };
    auto psd_parts = [&](const SymMatrix& gap, std::vector<Body>& into) {
      detail::append_psd_minor_atoms(f, gap, into);
    };
    auto not_pd = [&](const SymMatrix& gap) {
      // negation of Sylvester's leading-minor criterion
      std::vector<Body> leading;
      size_t dd = gap.rows();
      for (size_t k = 1; k <= dd; ++k) {
        std::vector<size_t> idx(k);
        for (size_t i = 0; i < k; ++i) idx[i] = i;
        CPoly minor = gap.submatrix(idx, idx).det();
        leading.push_back(Body::atom_ref(f.add_atom(minor.re, Rel::gt)));
      }
      return Body::neg(Body::conj(std::move(leading)));
    };
    SymMatrix gap1 = slack(nu1, out1);
    SymMatrix gap2 = slack(nu2, out2);
    psd_parts(gap1, parts);
    parts.push_back(not_pd(gap1));
    psd_parts(gap2, parts);
    parts.push_back(not_pd(gap2));
    // final comparison: nu1 nu2 I - (T (x) T')(rho12) PSD
    size_t dd = d * dp;
    SymMatrix gap12(dd, dd);
    Poly prod = nu1 * nu2;
    for (size_t i = 0; i < dd; ++i)
      for (size_t j = 0; j < dd; ++j) {
        gap12.at(i, j) = -out12.at(i, j);
        if (i == j) gap12.at(i, j) += CPoly(prod);
      }
    psd_parts(gap12, parts);
  }
  f.body = Body::conj(std::move(parts));
  return prenex(f);
}

inline Formula encode(const ProblemInstance& inst) {
  return std::visit(
      [](const auto& i) -> Formula {
        using T = std::decay_t<decltype(i)>;
        if constexpr (std::is_same_v<T, SeparabilityInstance>) return encode_separability(i);
        else if constexpr (std::is_same_v<T, DistillabilityInstance>) return encode_n_distillable(i);
        else if constexpr (std::is_same_v<T, LhvDistributionInstance>)
          return encode_lhv_distribution(i);
        else if constexpr (std::is_same_v<T, StateLhvInstance>) return encode_state_lhv(i);
        else if constexpr (std::is_same_v<T, QuantumRepresentationInstance>)
          return encode_quantum_representation(i);
        else if constexpr (std::is_same_v<T, BirkhoffInstance>) return encode_birkhoff(i);
        else if constexpr (std::is_same_v<T, ZeroErrorInstance>) return encode_zero_error(i);
        else return encode_additivity(i);
      },
      inst);
}

// ---------------------------------------------------------------------------
// Sweep over the integer parameter n = 1..n_max for the encoders that have
// one. Never claims a negative answer to the unbounded problem.

struct SweepEntry {
  size_t n = 0;
  enum class Outcome { witness, unknown, exported } outcome = Outcome::unknown;
  Assignment witness;
  double best_residual = 0;
  Formula formula;
};

enum class SweepBackend { numeric, export_only };

inline std::vector<SweepEntry> sweep(const ProblemInstance& inst, size_t n_max,
                                     SweepBackend backend, SearchBudget budget = {}) {
  std::vector<SweepEntry> report;
  for (size_t n = 1; n <= n_max; ++n) {
    ProblemInstance step = inst;
    bool supported = std::visit(
        [&](auto& i) {
          using T = std::decay_t<decltype(i)>;
          if constexpr (std::is_same_v<T, DistillabilityInstance> ||
                        std::is_same_v<T, BirkhoffInstance> ||
                        std::is_same_v<T, ZeroErrorInstance>) {
            i.n = n;
            return true;
          } else {
            return false;
          }
        },
        step);
    if (!supported)
      fail(ErrorCode::UsageError, "sweep requires a problem with an integer parameter n "
                                  "(distillability, birkhoff, zero-error)");
    SweepEntry entry;
    entry.n = n;
    entry.formula = encode(step);
    if (backend == SweepBackend::export_only) {
      entry.outcome = SweepEntry::Outcome::exported;
    } else {
      NumericSearchResult res = numeric_search(entry.formula, budget);
      entry.best_residual = res.best_residual;
      if (res.found) {
        entry.outcome = SweepEntry::Outcome::witness;
        entry.witness = res.witness;
      } else {
        entry.outcome = SweepEntry::Outcome::unknown;
      }
    }
    report.push_back(std::move(entry));
  }
  return report;
}

}  // namespace qsalg
