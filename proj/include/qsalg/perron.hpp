#pragma once

#include <vector>

#include "qsalg/linalg.hpp"

namespace qsalg {

// Round a rational to the dyadic grid with `prec` significant bits.
inline Rational dyadic_round(const Rational& q, mpfr_prec_t prec) {
  mpfr_t t;
  mpfr_init2(t, prec);
  mpfr_set_q(t, q.get_mpq_t(), MPFR_RNDN);
  Rational r;
  mpfr_get_q(r.get_mpq_t(), t);
  mpfr_clear(t);
  r.canonicalize();
  return r;
}

inline Scalar dyadic_round(const Scalar& s, mpfr_prec_t prec) {
  if (s.is_exact() && s.exact().is_rational()) return Scalar(dyadic_round(s.rational_value(), prec));
  return Scalar(dyadic_round(s.to_interval(prec).midpoint_rational(), prec));
}

inline CMatrix dyadic_round(const CMatrix& m, mpfr_prec_t prec) {
  CMatrix r(m.rows(), m.cols());
  for (size_t i = 0; i < m.rows(); ++i)
    for (size_t j = 0; j < m.cols(); ++j)
      r.at(i, j) = CScalar(dyadic_round(m.at(i, j).re, prec), dyadic_round(m.at(i, j).im, prec));
  return r;
}

// max over entries of max(|re|, |im|) for rational-entried matrices
inline Rational entry_sup(const CMatrix& m) {
  Rational best(0);
  for (size_t i = 0; i < m.rows(); ++i)
    for (size_t j = 0; j < m.cols(); ++j) {
      Rational re = abs(m.at(i, j).re.rational_value());
      Rational im = abs(m.at(i, j).im.rational_value());
      if (re > best) best = re;
      if (im > best) best = im;
    }
  return best;
}

struct PerronOptions {
  Rational residual_tol = Rational(1, Integer("1000000000000000000000000000000"));  // 1e-30
  size_t max_iterations = 100000;
  mpfr_prec_t work_precision = 512;
};

struct PerronPair {
  Rational lambda;  // positive eigenvalue of Y -> sum_i M_i Y M_i^dagger
  CMatrix x;        // Hermitian positive definite with sum_i M_i X^2 M_i^dagger ~ lambda X^2
};

namespace detail {

// Principal square root of a Hermitian positive definite rational matrix by
// the Denman-Beavers iteration with dyadic rounding.
inline CMatrix matrix_sqrt_dyadic(const CMatrix& a, mpfr_prec_t prec) {
  size_t d = a.rows();
  CMatrix y = a, z = CMatrix::identity(d);
  Rational tol(1, Integer(1) << (prec / 2));
  for (int iter = 0; iter < 200; ++iter) {
    CMatrix zi, yi;
    try {
      zi = inverse_exact(z);
      yi = inverse_exact(y);
    } catch (const Error&) {
      fail(ErrorCode::NoPositiveEigenvector,
           "fixed point is singular; the positive map appears reducible — restrict the matrices "
           "to irreducible blocks and retry");
    }
    CMatrix y_next = dyadic_round(Rational(1, 2) * (y + zi), prec);
    CMatrix z_next = dyadic_round(Rational(1, 2) * (z + yi), prec);
    Rational delta = entry_sup(y_next - y);
    y = std::move(y_next);
    z = std::move(z_next);
    if (delta <= tol) break;
  }
  // exact symmetrization
  return Rational(1, 2) * (y + y.adjoint());
}

}  // namespace detail

// Positive fixed point of Y -> sum_i M_i Y M_i^dagger by power iteration from
// the identity, with an exact a-posteriori residual certificate.
inline PerronPair perron_pair(const std::vector<CMatrix>& maps, PerronOptions opts = {}) {
  if (maps.empty()) fail(ErrorCode::UsageError, "perron_pair needs at least one matrix");
  size_t d = maps[0].rows();
  for (const auto& m : maps)
    if (m.rows() != d || m.cols() != d)
      fail(ErrorCode::DimensionMismatch, "perron_pair matrices must be square and equal size");

  // iteration runs on dyadic-rounded rational copies of the maps
  std::vector<CMatrix> mr, mr_adj;
  for (const auto& m : maps) {
    CMatrix r = dyadic_round(m, opts.work_precision);
    mr.push_back(r);
    mr_adj.push_back(r.adjoint());
  }
  auto apply_map = [&](const CMatrix& y) {
    CMatrix acc(d, d);
    for (size_t i = 0; i < mr.size(); ++i) acc = acc + mr[i] * y * mr_adj[i];
    return acc;
  };

  mpfr_prec_t prec = opts.work_precision;
  Rational conv_tol(1, Integer(1) << (prec / 2));
  CMatrix y = CMatrix::identity(d);
  bool converged = false;

  // phase 1: plain power iteration from the identity. Nilpotent maps hit an
  // exact zero here (spectral radius 0).
  size_t plain_budget = std::min<size_t>(opts.max_iterations, 256);
  for (size_t iter = 0; iter < plain_budget; ++iter) {
    CMatrix z = dyadic_round(apply_map(y), prec);
    Rational s = entry_sup(z);
    if (s == 0)
      fail(ErrorCode::NoPositiveEigenvector,
           "iterates vanish (spectral radius 0); the map has no positive eigenvector — restrict "
           "the matrices to irreducible blocks and retry");
    CMatrix y_next = dyadic_round(Rational(1) / s * z, prec);
    Rational delta = entry_sup(y_next - y);
    y = std::move(y_next);
    if (delta <= conv_tol) {
      converged = true;
      break;
    }
  }

  // phase 2: peripheral eigenvalues of modulus lambda (periodic irreducible
  // maps) stall phase 1; damping with a positive multiple of the identity
  // map leaves the fixed point unchanged and breaks the oscillation.
  if (!converged) {
    Rational shift(1);
    {
      CMatrix fy = apply_map(y);
      Rational num = CMatrix::trace_product(y.adjoint(), fy).re.rational_value();
      Rational den = CMatrix::trace_product(y.adjoint(), y).re.rational_value();
      if (den > 0 && num > 0) shift = dyadic_round(num / den, 64);
      if (shift <= 0) shift = 1;
    }
    for (size_t iter = plain_budget; iter < opts.max_iterations; ++iter) {
      CMatrix z = dyadic_round(apply_map(y) + shift * y, prec);
      Rational s = entry_sup(z);
      if (s == 0)
        fail(ErrorCode::NoPositiveEigenvector,
             "iterates vanish; the map has no positive eigenvector — restrict the matrices to "
             "irreducible blocks and retry");
      CMatrix y_next = dyadic_round(Rational(1) / s * z, prec);
      Rational delta = entry_sup(y_next - y);
      y = std::move(y_next);
      if (delta <= conv_tol) {
        converged = true;
        break;
      }
    }
  }
  if (!converged)
    fail(ErrorCode::PrecisionExhausted, "perron power iteration did not converge within budget");

  y = Rational(1, 2) * (y + y.adjoint());
  // Rayleigh quotient <Y, Phi(Y)> / <Y, Y> over the Hilbert-Schmidt inner product
  CMatrix fy = apply_map(y);
  Rational num = CMatrix::trace_product(y.adjoint(), fy).re.rational_value();
  Rational den = CMatrix::trace_product(y.adjoint(), y).re.rational_value();
  if (den == 0 || num <= 0)
    fail(ErrorCode::NoPositiveEigenvector,
         "no positive eigenvalue; the map has no positive eigenvector — restrict the matrices to "
         "irreducible blocks and retry");
  Rational lambda = dyadic_round(num / den, prec);

  CMatrix x = detail::matrix_sqrt_dyadic(y, prec);

  // positive definiteness of X with an exact margin
  Rational margin(1, Integer(1) << 80);
  CMatrix shifted = x - margin * CMatrix::identity(d);
  if (psd_by_elimination(shifted) != Cert3::yes)
    fail(ErrorCode::NoPositiveEigenvector,
         "fixed point not positive definite; the map appears reducible — restrict the matrices "
         "to irreducible blocks and retry");

  // exact residual certificate on the original (unrounded) matrices
  CMatrix x2 = x * x;
  CMatrix res(d, d);
  for (const auto& m : maps) res = res + m * x2 * m.adjoint();
  res = res - CScalar(Scalar(lambda)) * x2;
  Rational bound(0);
  for (size_t i = 0; i < d; ++i) {
    Rational row(0);
    for (size_t j = 0; j < d; ++j) {
      row += res.at(i, j).re.to_interval().abs().hi_rational();
      row += res.at(i, j).im.to_interval().abs().hi_rational();
    }
    if (row > bound) bound = row;
  }
  if (bound > opts.residual_tol)
    fail(ErrorCode::PrecisionExhausted,
         "perron residual " + bound.get_str() + " exceeds tolerance");

  return PerronPair{lambda, x};
}

}  // namespace qsalg
