#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "qsalg/linalg.hpp"

namespace qsalg {

// Orthonormal Hermitian operator basis {H_1..H_{d^2}} of M_d(C) with
// H_1 = I/sqrt(d); when anchored at a rank-1 projector psi additionally
// H_2 = (I - d psi)/sqrt(d^2-d), and all H_i for i >= 2 are traceless.
struct HermitianBasis {
  size_t dim = 0;
  std::vector<CMatrix> ops;           // d^2 operators
  std::optional<CMatrix> anchor;      // psi, when anchored
  Scalar delta1 = Scalar(Rational(0));  // alignment factor, nonzero when aligned

  size_t size() const { return ops.size(); }

  // real coordinates tr[H_i X] of a Hermitian operator
  std::vector<Scalar> flatten(const CMatrix& x) const {
    std::vector<Scalar> v;
    v.reserve(ops.size());
    for (const auto& h : ops) v.push_back(CMatrix::trace_product(h, x).re);
    return v;
  }

  CMatrix unflatten(const std::vector<Scalar>& coords) const {
    if (coords.size() != ops.size()) fail(ErrorCode::DimensionMismatch, "coordinate count");
    CMatrix acc(dim, dim);
    for (size_t i = 0; i < ops.size(); ++i) acc = acc + CScalar(coords[i]) * ops[i];
    return acc;
  }

  bool all_exact() const {
    for (const auto& h : ops)
      if (!h.all_exact()) return false;
    return true;
  }

  // max |tr[H_i H_j] - delta_ij| upper bound (certified)
  Rational orthonormality_defect() const {
    Rational worst(0);
    for (size_t i = 0; i < ops.size(); ++i)
      for (size_t j = i; j < ops.size(); ++j) {
        Scalar g = CMatrix::trace_product(ops[i], ops[j]).re - Scalar(Rational(i == j ? 1 : 0));
        Rational w = g.to_interval().abs().hi_rational();
        if (w > worst) worst = w;
      }
    return worst;
  }
};

namespace detail {

// Deterministic Hermitian spanning set with rational entries:
// E_ii, (E_jk + E_kj), i(E_kj - E_jk).
inline std::vector<CMatrix> hermitian_units(size_t d) {
  std::vector<CMatrix> units;
  for (size_t i = 0; i < d; ++i) {
    CMatrix e(d, d);
    e.at(i, i) = CScalar(Rational(1));
    units.push_back(e);
  }
  for (size_t j = 0; j < d; ++j)
    for (size_t k = j + 1; k < d; ++k) {
      CMatrix s(d, d);
      s.at(j, k) = CScalar(Rational(1));
      s.at(k, j) = CScalar(Rational(1));
      units.push_back(s);
      CMatrix a(d, d);
      a.at(j, k) = CScalar(Rational(0), Rational(-1));
      a.at(k, j) = CScalar(Rational(0), Rational(1));
      units.push_back(a);
    }
  return units;
}

inline Scalar hs_inner(const CMatrix& a, const CMatrix& b) {
  return CMatrix::trace_product(a, b).re;
}

}  // namespace detail

struct BasisAlignment {
  CMatrix phi;               // rank-1 target projector
  std::vector<Rational> x;   // alignment vector, length d^2 - 2
};

// Canonical orthonormal Hermitian basis (generalized Gell-Mann), exact.
inline HermitianBasis hermitian_basis(size_t d) {
  if (d < 1) fail(ErrorCode::UsageError, "basis dimension must be >= 1");
  HermitianBasis basis;
  basis.dim = d;
  Scalar inv_sqrt_d = Scalar::sqrt_rational(Rational(1, long(d)));
  basis.ops.push_back(CScalar(inv_sqrt_d) * CMatrix::identity(d));
  // diagonal family
  for (size_t k = 1; k < d; ++k) {
    CMatrix m(d, d);
    for (size_t j = 0; j < k; ++j) m.at(j, j) = CScalar(Rational(1));
    m.at(k, k) = CScalar(Rational(-long(k)));
    Scalar norm = Scalar::sqrt_rational(Rational(1, long(k * (k + 1))));
    basis.ops.push_back(CScalar(norm) * m);
  }
  // off-diagonal pairs
  Scalar inv_sqrt_2 = Scalar::sqrt_rational(Rational(1, 2));
  for (size_t j = 0; j < d; ++j)
    for (size_t k = j + 1; k < d; ++k) {
      CMatrix s(d, d);
      s.at(j, k) = CScalar(Rational(1));
      s.at(k, j) = CScalar(Rational(1));
      basis.ops.push_back(CScalar(inv_sqrt_2) * s);
      CMatrix a(d, d);
      a.at(j, k) = CScalar(Rational(0), Rational(-1));
      a.at(k, j) = CScalar(Rational(0), Rational(1));
      basis.ops.push_back(CScalar(inv_sqrt_2) * a);
    }
  return basis;
}

// Anchored (and optionally aligned) basis. With an anchor psi the second
// element is pinned to (I - d psi)/sqrt(d^2-d); the remaining d^2-2 elements
// complete the basis by unnormalized Gram-Schmidt (field operations only),
// normalized at the end. With an alignment (phi, x) the completion is
// reflected inside the orthocomplement W = span{H_1,H_2}^perp so that
// tr[phi H_{i+2}] = delta1 * x_i with delta1 = sqrt(r)/||x||_2 and
// r = ||P_W(phi)||^2 = 1 - 1/d - (1 - d tr[psi phi])^2 / (d^2 - d).
inline HermitianBasis hermitian_basis(size_t d, const CMatrix& psi,
                                      const std::optional<BasisAlignment>& align = std::nullopt) {
  if (d < 2) fail(ErrorCode::UsageError, "anchored basis needs d >= 2");
  if (psi.rows() != d || psi.cols() != d)
    fail(ErrorCode::DimensionMismatch, "anchor projector dimension");

  HermitianBasis basis;
  basis.dim = d;
  Scalar inv_sqrt_d = Scalar::sqrt_rational(Rational(1, long(d)));
  CMatrix h1 = CScalar(inv_sqrt_d) * CMatrix::identity(d);
  Scalar inv_norm2 = Scalar::sqrt_rational(Rational(1, long(d * d - d)));
  CMatrix h2 = CScalar(inv_norm2) * (CMatrix::identity(d) - Rational(long(d)) * psi);
  basis.ops.push_back(h1);
  basis.ops.push_back(h2);
  basis.anchor = psi;

  // unnormalized orthogonal completion of span{H1, H2}
  std::vector<CMatrix> ortho;       // pairwise orthogonal, orthogonal to H1, H2
  std::vector<Scalar> norm2;        // their squared HS norms
  auto project_out = [&](CMatrix a) {
    a = a - CScalar(detail::hs_inner(h1, a)) * h1;
    a = a - CScalar(detail::hs_inner(h2, a)) * h2;
    for (size_t i = 0; i < ortho.size(); ++i)
      a = a - CScalar(detail::hs_inner(ortho[i], a) / norm2[i]) * ortho[i];
    return a;
  };
  for (const auto& seed : detail::hermitian_units(d)) {
    if (ortho.size() + 2 == d * d) break;
    CMatrix b = project_out(seed);
    Scalar n2 = detail::hs_inner(b, b);
    bool keep;
    if (n2.is_exact()) {
      keep = !n2.exact().is_zero();
    } else {
      Interval iv = n2.interval();
      if (iv.is_positive())
        keep = true;
      else if (iv.abs().hi_rational() < Rational(1, Integer(1) << 64))
        keep = false;
      else
        fail(ErrorCode::PrecisionExhausted, "Gram-Schmidt pivot undecidable");
    }
    if (keep) {
      ortho.push_back(b);
      norm2.push_back(n2);
    }
  }
  if (ortho.size() + 2 != d * d)
    fail(ErrorCode::PrecisionExhausted, "basis completion found too few directions");

  std::vector<CMatrix> completion;
  for (size_t i = 0; i < ortho.size(); ++i)
    completion.push_back(CScalar(Scalar(Rational(1)) / norm2[i].sqrt()) * ortho[i]);

  if (align) {
    const CMatrix& phi = align->phi;
    const std::vector<Rational>& x = align->x;
    if (x.size() != d * d - 2) fail(ErrorCode::DimensionMismatch, "alignment vector length");
    Rational x_norm2(0);
    for (const auto& xi : x) x_norm2 += xi * xi;
    if (x_norm2 == 0) fail(ErrorCode::ZeroVector, "alignment vector x must be nonzero");

    Scalar overlap = CMatrix::trace_product(psi, phi).re;  // tr[psi phi]
    Scalar one{Rational(1)};
    Scalar dd{Rational(long(d))};
    Scalar t = one - dd * overlap;
    Scalar r = one - Scalar(Rational(1, long(d))) - t * t / Scalar(Rational(long(d * d - d)));
    int rs = r.certain_sign();
    if (rs < 0 || (rs == 0 && r.is_exact()))
      fail(ErrorCode::DegenerateAlignment, "phi lies in span(identity, psi); residual r = 0");
    if (rs == 0) fail(ErrorCode::PrecisionExhausted, "alignment residual sign undecidable");

    Scalar delta1 = (r / Scalar(x_norm2)).sqrt();
    basis.delta1 = delta1;

    // G = projection of phi onto W; reflect the completion so that the
    // coordinates of G become delta1 * x.
    CMatrix g = phi - CScalar(detail::hs_inner(h1, phi)) * h1 -
                CScalar(detail::hs_inner(h2, phi)) * h2;
    CMatrix target(d, d);
    for (size_t i = 0; i < completion.size(); ++i)
      target = target + CScalar(delta1 * Scalar(x[i])) * completion[i];
    CMatrix u = g - target;
    Scalar uu = detail::hs_inner(u, u);
    bool skip_reflection;
    if (uu.is_exact()) {
      skip_reflection = uu.exact().is_zero();
    } else if (uu.interval().is_positive()) {
      skip_reflection = false;
    } else if (uu.interval().abs().hi_rational() < Rational(1, Integer(1) << 64)) {
      skip_reflection = true;
    } else {
      fail(ErrorCode::PrecisionExhausted, "alignment reflection undecidable");
    }
    if (!skip_reflection) {
      Scalar two(Rational(2));
      for (auto& f : completion)
        f = f - CScalar(two * detail::hs_inner(u, f) / uu) * u;
    }
  }

  for (auto& f : completion) basis.ops.push_back(std::move(f));
  return basis;
}

// Product basis for tensor products of channels: H_{(i,j)} = A_i (x) B_j with
// composite index i * dimB^2 + j, so index 0 is again the scaled identity.
inline HermitianBasis product_basis(const HermitianBasis& a, const HermitianBasis& b) {
  HermitianBasis basis;
  basis.dim = a.dim * b.dim;
  basis.ops.reserve(a.size() * b.size());
  for (const auto& ha : a.ops)
    for (const auto& hb : b.ops) basis.ops.push_back(CMatrix::kron(ha, hb));
  return basis;
}

}  // namespace qsalg
