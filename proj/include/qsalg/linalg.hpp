#pragma once

#include <optional>
#include <vector>

#include "qsalg/matrix.hpp"

namespace qsalg {

enum class Cert3 { yes, no, unknown };

inline CMatrix materialize_intervals(const CMatrix& m, mpfr_prec_t prec) {
  CMatrix r(m.rows(), m.cols());
  for (size_t i = 0; i < m.rows(); ++i)
    for (size_t j = 0; j < m.cols(); ++j)
      r.at(i, j) = CScalar(Scalar(m.at(i, j).re.to_interval(prec)),
                           Scalar(m.at(i, j).im.to_interval(prec)));
  return r;
}

// Determinant by Laplace expansion with memoization over column subsets.
// No divisions, so it is safe for interval entries; use only for small n.
inline CScalar det_laplace(const CMatrix& m) {
  size_t n = m.rows();
  if (n != m.cols()) fail(ErrorCode::DimensionMismatch, "determinant of non-square matrix");
  if (n == 0) return CScalar(Rational(1));
  if (n > 16) fail(ErrorCode::CapExceeded, "det_laplace dimension too large");
  std::vector<std::optional<CScalar>> memo(size_t(1) << n);
  // dets over column subsets using the top |S| rows
  std::function<CScalar(uint32_t)> rec = [&](uint32_t mask) -> CScalar {
    if (mask == 0) return CScalar(Rational(1));
    if (memo[mask]) return *memo[mask];
    size_t row = n - size_t(__builtin_popcount(mask));
    CScalar acc;
    int parity = 0;
    for (size_t j = 0; j < n; ++j) {
      if (!(mask & (1u << j))) continue;
      CScalar term = m.at(row, j) * rec(mask & ~(1u << j));
      acc = (parity % 2 == 0) ? acc + term : acc - term;
      ++parity;
    }
    memo[mask] = acc;
    return acc;
  };
  return rec((n == 32) ? ~0u : ((1u << n) - 1));
}

// Determinant by Gaussian elimination with partial pivoting. Pivots must be
// certainly nonzero; with exact entries that is decidable, with intervals an
// ambiguous pivot falls back to Laplace for small n and fails otherwise.
inline CScalar det_gauss(const CMatrix& m_in) {
  size_t n = m_in.rows();
  if (n != m_in.cols()) fail(ErrorCode::DimensionMismatch, "determinant of non-square matrix");
  if (n == 0) return CScalar(Rational(1));
  CMatrix m = m_in;
  CScalar det(Rational(1));
  for (size_t col = 0; col < n; ++col) {
    // choose the pivot with the largest midpoint magnitude that is certainly nonzero
    size_t pivot = n;
    double best = -1;
    bool any_uncertain = false;
    for (size_t r = col; r < n; ++r) {
      const CScalar& z = m.at(r, col);
      Scalar a2 = z.abs2();
      if (a2.is_exact()) {
        if (a2.exact().is_zero()) continue;
        double mag = a2.to_double();
        if (mag > best) {
          best = mag;
          pivot = r;
        }
      } else {
        if (a2.interval().is_positive()) {
          double mag = a2.to_double();
          if (mag > best) {
            best = mag;
            pivot = r;
          }
        } else {
          any_uncertain = true;
        }
      }
    }
    if (pivot == n) {
      if (!any_uncertain) return CScalar(Rational(0));  // column certainly zero below
      if (n <= 12) return det_laplace(m_in);
      fail(ErrorCode::PrecisionExhausted, "ambiguous pivot in interval elimination");
    }
    if (pivot != col) {
      for (size_t j = 0; j < n; ++j) std::swap(m.at(pivot, j), m.at(col, j));
      det = -det;
    }
    det = det * m.at(col, col);
    for (size_t r = col + 1; r < n; ++r) {
      if (m.at(r, col).is_exact_zero()) continue;
      CScalar f = m.at(r, col) / m.at(col, col);
      for (size_t j = col; j < n; ++j) m.at(r, j) = m.at(r, j) - f * m.at(col, j);
    }
  }
  return det;
}

inline CScalar det(const CMatrix& m) {
  if (m.rows() <= 4) return det_laplace(m);
  return det_gauss(m);
}

// All principal minors of a Hermitian matrix, one per nonempty index subset,
// ordered by increasing subset bitmask (bit i = row/column i). For Hermitian
// input every minor is real; the real part is returned.
inline std::vector<Scalar> principal_minors(const CMatrix& x) {
  if (!x.is_square()) fail(ErrorCode::DimensionMismatch, "principal minors of non-square matrix");
  if (x.all_exact() && !x.is_hermitian_exact())
    fail(ErrorCode::NotHermitian, "principal_minors requires a Hermitian matrix");
  size_t d = x.rows();
  if (d > 16) fail(ErrorCode::CapExceeded, "principal minors limited to d <= 16");
  std::vector<Scalar> out;
  out.reserve((size_t(1) << d) - 1);
  for (uint32_t mask = 1; mask < (1u << d); ++mask) {
    std::vector<size_t> idx;
    for (size_t i = 0; i < d; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    out.push_back(det(x.submatrix(idx)).re);
  }
  return out;
}

// Monic characteristic polynomial det(tI - A) by Faddeev-LeVerrier.
// Returns coefficients c[0..n] with c[n] = 1 (c[k] multiplies t^k).
inline std::vector<Scalar> char_poly(const CMatrix& a) {
  size_t n = a.rows();
  if (n != a.cols()) fail(ErrorCode::DimensionMismatch, "char_poly of non-square matrix");
  std::vector<Scalar> c(n + 1, Scalar(Rational(0)));
  c[n] = Scalar(Rational(1));
  CMatrix m = CMatrix::identity(n);
  for (size_t k = 1; k <= n; ++k) {
    m = a * m;
    Scalar ck = -(m.trace().re / Scalar(Rational(long(k))));
    c[n - k] = ck;
    for (size_t i = 0; i < n; ++i) m.at(i, i) = m.at(i, i) + CScalar(ck);
  }
  return c;
}

// Horner evaluation of a real-coefficient polynomial at a rational point.
inline Scalar eval_poly(const std::vector<Scalar>& coeffs, const Rational& t) {
  Scalar acc(Rational(0));
  Scalar tv(t);
  for (size_t k = coeffs.size(); k-- > 0;) acc = acc * tv + coeffs[k];
  return acc;
}

struct MinEigOptions {
  Rational width_target = Rational(1, Integer("1000000000000000000000000000000"));  // 1e-30
  bool sign_only = false;          // stop once sign(lambda_min) is certified
  mpfr_prec_t max_precision = kMaxPrecision;
};

namespace detail {

// Sign of det(H_k - tI) for all leading k: +1 if every determinant is
// certainly positive (t below the spectrum of every leading block), -1 if
// some determinant is certainly negative (t above lambda_min by Cauchy
// interlacing), 0 if undecidable at this precision.
inline int leading_minor_predicate(const std::vector<std::vector<Scalar>>& polys,
                                   const Rational& t) {
  bool all_pos = true;
  for (size_t k = 1; k <= polys.size(); ++k) {
    Scalar q = eval_poly(polys[k - 1], t);  // det(tI - H_k)
    if (k % 2 == 1) q = -q;                 // det(H_k - tI) = (-1)^k det(tI - H_k)
    int s = q.certain_sign();
    if (s < 0) return -1;
    if (s == 0) {
      if (q.is_exact_zero()) return 0;  // hit a root exactly; perturb
      all_pos = false;                  // interval noise
    }
  }
  return all_pos ? 1 : 0;
}

}  // namespace detail

// Certified interval containing lambda_min of a Hermitian matrix, computed
// from the characteristic polynomials of the leading principal submatrices
// and sign-change bisection (Sylvester + Cauchy interlacing).
inline Interval min_eigenvalue_interval(const CMatrix& h_in, MinEigOptions opts = {}) {
  if (!h_in.is_square()) fail(ErrorCode::DimensionMismatch, "min eigenvalue of non-square matrix");
  size_t d = h_in.rows();
  if (h_in.all_exact()) {
    if (!h_in.is_hermitian_exact())
      fail(ErrorCode::NotHermitian, "min_eigenvalue_interval requires Hermitian input");
  } else if (!h_in.is_hermitian_certified(Rational(1, Integer(1) << 48))) {
    fail(ErrorCode::NotHermitian, "matrix not Hermitian within certified tolerance");
  }
  if (d == 1) return h_in.at(0, 0).re.to_interval();

  bool exact_entries = h_in.all_exact() && d <= 8;
  mpfr_prec_t prec = ambient_precision();

  while (true) {
    CMatrix h = exact_entries ? h_in : materialize_intervals(h_in, prec);

    // char polys of all leading blocks
    std::vector<std::vector<Scalar>> polys;
    polys.reserve(d);
    for (size_t k = 1; k <= d; ++k) {
      std::vector<size_t> idx(k);
      for (size_t i = 0; i < k; ++i) idx[i] = i;
      polys.push_back(char_poly(h.submatrix(idx)));
    }

    // initial enclosure: Gershgorin lower bound, min-diagonal upper bound
    Rational a, b;
    for (size_t i = 0; i < d; ++i) {
      Interval row = h.at(i, i).re.to_interval(prec);
      for (size_t j = 0; j < d; ++j) {
        if (j == i) continue;
        row = row - h.at(i, j).abs2().to_interval(prec).sqrt();
      }
      Rational lo = row.lo_rational();
      Rational ub = h.at(i, i).re.to_interval(prec).hi_rational();
      if (i == 0 || lo < a) a = lo;
      if (i == 0 || ub < b) b = ub;
    }
    a -= 1;  // keep the invariant a < lambda_min strict
    if (b <= a) b = a + 1;

    bool stuck = false;
    bool tried_zero = false;
    while (!stuck) {
      if (opts.sign_only && (a > 0 || b < 0)) break;
      if (b - a <= opts.width_target) break;
      // query point: try 0 first when it lies strictly inside
      Rational t;
      if (!tried_zero && a < 0 && 0 < b) {
        t = 0;
        tried_zero = true;
      } else {
        t = (a + b) / 2;
      }
      int verdict = 0;
      Rational step = (b - a) / 4;
      for (int attempt = 0; attempt < 64; ++attempt) {
        verdict = detail::leading_minor_predicate(polys, t);
        if (verdict != 0) break;
        // perturb the query point away from roots / noisy spots
        step /= 2;
        t = (attempt % 2 == 0) ? Rational(t + step) : Rational(t - 3 * step);
        if (t <= a || t >= b) t = a + (b - a) * rational_of(1 + attempt, 2 * (attempt + 2));
      }
      if (verdict > 0)
        a = t;
      else if (verdict < 0)
        b = t;
      else
        stuck = true;
    }

    bool done = (b - a <= opts.width_target) || (opts.sign_only && (a > 0 || b < 0));
    if (done) {
      Interval out(prec);
      Interval ia = Interval::from_rational(a, prec);
      Interval ib = Interval::from_rational(b, prec);
      return ia.hull(ib);
    }
    if (exact_entries) {
      // exact signs cannot get stuck except on repeated root hits; give up
      // only when the width target is unreachable
      fail(ErrorCode::PrecisionExhausted, "bisection stalled on exact input");
    }
    if (prec >= opts.max_precision)
      fail(ErrorCode::PrecisionExhausted, "eigenvalue interval wider than requested at max precision");
    prec *= 2;
  }
}

// Elimination-based PSD certificate (Cholesky-style with exact or interval
// pivots): recursively pivot on a certainly-positive diagonal entry and take
// the Schur complement.
inline Cert3 psd_by_elimination(CMatrix h) {
  size_t n = h.rows();
  while (n > 0) {
    size_t pivot = n;
    bool any_uncertain = false;
    for (size_t i = 0; i < n; ++i) {
      int s;
      const Scalar& dii = h.at(i, i).re;
      if (dii.is_exact())
        s = dii.exact().sign();
      else
        s = dii.interval().certain_sign();
      if (s < 0) return Cert3::no;
      if (s > 0 && pivot == n) pivot = i;
      if (s == 0 && !dii.is_exact_zero() && !dii.is_exact()) any_uncertain = true;
    }
    if (pivot == n) {
      // no strictly positive diagonal entry
      bool all_zero = true;
      for (size_t i = 0; i < n && all_zero; ++i)
        for (size_t j = 0; j < n && all_zero; ++j)
          if (!h.at(i, j).is_exact_zero()) all_zero = false;
      if (all_zero) return Cert3::yes;
      if (any_uncertain) return Cert3::unknown;
      // diagonal certainly zero somewhere with a nonzero row: check exactly
      for (size_t i = 0; i < n; ++i) {
        if (!h.at(i, i).re.is_exact_zero()) continue;
        for (size_t j = 0; j < n; ++j)
          if (!h.at(i, j).is_exact_zero()) {
            if (h.at(i, j).is_exact()) return Cert3::no;  // |H_ij|^2 <= H_ii H_jj violated
            return Cert3::unknown;
          }
      }
      // zero rows for all zero-diagonal entries: drop them
      std::vector<size_t> keep;
      for (size_t i = 0; i < n; ++i)
        if (!h.at(i, i).re.is_exact_zero()) keep.push_back(i);
      if (keep.empty()) return Cert3::yes;
      h = h.submatrix(keep);
      n = h.rows();
      continue;
    }
    // Schur complement on the pivot
    std::vector<size_t> rest;
    for (size_t i = 0; i < n; ++i)
      if (i != pivot) rest.push_back(i);
    CMatrix next(rest.size(), rest.size());
    const CScalar& p = h.at(pivot, pivot);
    for (size_t i = 0; i < rest.size(); ++i)
      for (size_t j = 0; j < rest.size(); ++j)
        next.at(i, j) =
            h.at(rest[i], rest[j]) - h.at(rest[i], pivot) * h.at(pivot, rest[j]) / p;
    h = std::move(next);
    n = h.rows();
  }
  return Cert3::yes;
}

// Three-valued PSD certification. Exact Hermitian input is decided exactly;
// interval input may be unknown when the spectrum straddles zero within the
// achievable width.
inline Cert3 psd_certify(const CMatrix& h) {
  if (h.all_exact()) {
    Cert3 e = psd_by_elimination(h);
    if (e != Cert3::unknown) return e;
  }
  Interval iv = [&] {
    MinEigOptions o;
    o.sign_only = true;
    return min_eigenvalue_interval(h, o);
  }();
  if (mpfr_sgn(iv.lo()) >= 0) return Cert3::yes;
  if (iv.is_negative()) return Cert3::no;
  return Cert3::unknown;
}

// Exact inverse by Gauss-Jordan; entries must be exact.
inline CMatrix inverse_exact(const CMatrix& m_in) {
  size_t n = m_in.rows();
  if (n != m_in.cols()) fail(ErrorCode::DimensionMismatch, "inverse of non-square matrix");
  CMatrix m = m_in;
  CMatrix inv = CMatrix::identity(n);
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = n;
    for (size_t r = col; r < n; ++r)
      if (!m.at(r, col).is_exact_zero()) {
        pivot = r;
        break;
      }
    if (pivot == n) fail(ErrorCode::DivisionByZero, "singular matrix in inverse_exact");
    if (pivot != col)
      for (size_t j = 0; j < n; ++j) {
        std::swap(m.at(pivot, j), m.at(col, j));
        std::swap(inv.at(pivot, j), inv.at(col, j));
      }
    CScalar p = m.at(col, col);
    for (size_t j = 0; j < n; ++j) {
      m.at(col, j) = m.at(col, j) / p;
      inv.at(col, j) = inv.at(col, j) / p;
    }
    for (size_t r = 0; r < n; ++r) {
      if (r == col || m.at(r, col).is_exact_zero()) continue;
      CScalar f = m.at(r, col);
      for (size_t j = 0; j < n; ++j) {
        m.at(r, j) = m.at(r, j) - f * m.at(col, j);
        inv.at(r, j) = inv.at(r, j) - f * inv.at(col, j);
      }
    }
  }
  return inv;
}

}  // namespace qsalg
