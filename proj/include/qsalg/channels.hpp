#pragma once

#include <memory>
#include <vector>

#include "qsalg/basis.hpp"
#include "qsalg/linalg.hpp"

namespace qsalg {

struct CpVerdict {
  Cert3 verdict = Cert3::unknown;  // certified-true / certified-false / indeterminate
  Interval lambda_min;             // certified interval for the smallest Choi eigenvalue
};

// Completely positive trace-preserving map candidate, stored as the transfer
// matrix  T_hat[i][j] = tr[H_i T(H_j)]  in a Hermitian operator basis. The
// entrywise ("natural") representation N with vec(T(X)) = N vec(X) (row-major
// vec) and the Choi matrix C = (T (x) id)(|Omega><Omega|), |Omega> =
// sum_i |ii>/sqrt(d), are derived views.
class Channel {
 public:
  Channel() = default;

  static Channel from_transfer(std::shared_ptr<const HermitianBasis> basis, CMatrix transfer) {
    Channel ch;
    ch.basis_ = std::move(basis);
    size_t d2 = ch.basis_->size();
    if (transfer.rows() != d2 || transfer.cols() != d2)
      fail(ErrorCode::DimensionMismatch, "transfer matrix must be d^2 x d^2");
    ch.transfer_ = std::move(transfer);
    return ch;
  }

  // N_{(ab),(cd)} = T(E_cd)_{ab}
  static Channel from_natural(std::shared_ptr<const HermitianBasis> basis,
                              const CMatrix& natural) {
    size_t d = basis->dim;
    if (natural.rows() != d * d || natural.cols() != d * d)
      fail(ErrorCode::DimensionMismatch, "natural rep must be d^2 x d^2");
    // T_hat[i][j] = sum_{ab,cd} (H_i)_ba N_{(ab)(cd)} (H_j)_cd
    CMatrix bmat(d * d, d * d), dmat(d * d, d * d);
    for (size_t i = 0; i < d * d; ++i)
      for (size_t a = 0; a < d; ++a)
        for (size_t b = 0; b < d; ++b) {
          bmat.at(a * d + b, i) = basis->ops[i].at(b, a);  // (H_i)_ba
          dmat.at(a * d + b, i) = basis->ops[i].at(a, b);  // (H_i)_ab
        }
    CMatrix that = bmat.transpose() * natural * dmat;
    // the transfer matrix of a Hermiticity-preserving map is real
    CMatrix real_that(d * d, d * d);
    Rational tol(1, Integer(1) << 64);
    for (size_t i = 0; i < d * d; ++i)
      for (size_t j = 0; j < d * d; ++j) {
        const Scalar& im = that.at(i, j).im;
        bool zero = im.is_exact() ? im.exact().is_zero()
                                  : im.to_interval().abs().hi_rational() <= tol;
        if (!zero)
          fail(ErrorCode::NotHermitian, "map is not Hermiticity-preserving");
        real_that.at(i, j) = CScalar(that.at(i, j).re);
      }
    Channel ch;
    ch.basis_ = std::move(basis);
    ch.transfer_ = std::move(real_that);
    return ch;
  }

  static Channel from_choi(std::shared_ptr<const HermitianBasis> basis, const CMatrix& choi) {
    size_t d = basis->dim;
    if (choi.rows() != d * d || choi.cols() != d * d)
      fail(ErrorCode::DimensionMismatch, "Choi matrix must be d^2 x d^2");
    CMatrix natural(d * d, d * d);
    Scalar dd{Rational(long(d))};
    for (size_t a = 0; a < d; ++a)
      for (size_t b = 0; b < d; ++b)
        for (size_t c = 0; c < d; ++c)
          for (size_t e = 0; e < d; ++e)
            natural.at(a * d + b, c * d + e) = CScalar(dd) * choi.at(a * d + c, b * d + e);
    return from_natural(std::move(basis), natural);
  }

  size_t dim() const { return basis_->dim; }
  const HermitianBasis& basis() const { return *basis_; }
  const std::shared_ptr<const HermitianBasis>& basis_ptr() const { return basis_; }
  const CMatrix& transfer() const { return transfer_; }

  const CMatrix& natural() const {
    if (!natural_cache_) {
      size_t d = dim();
      CMatrix bmat(d * d, d * d), dmat(d * d, d * d);
      for (size_t i = 0; i < d * d; ++i)
        for (size_t a = 0; a < d; ++a)
          for (size_t b = 0; b < d; ++b) {
            bmat.at(a * d + b, i) = basis_->ops[i].at(a, b);
            dmat.at(a * d + b, i) = basis_->ops[i].at(b, a);  // (H_j)_dc at row (cd)
          }
      natural_cache_ = std::make_shared<CMatrix>(bmat * transfer_ * dmat.transpose());
    }
    return *natural_cache_;
  }

  const CMatrix& choi() const {
    if (!choi_cache_) {
      size_t d = dim();
      const CMatrix& n = natural();
      CMatrix c(d * d, d * d);
      Scalar inv_d{Rational(1, long(d))};
      for (size_t a = 0; a < d; ++a)
        for (size_t b = 0; b < d; ++b)
          for (size_t cc = 0; cc < d; ++cc)
            for (size_t e = 0; e < d; ++e)
              c.at(a * d + cc, b * d + e) = CScalar(inv_d) * n.at(a * d + b, cc * d + e);
      choi_cache_ = std::make_shared<CMatrix>(std::move(c));
    }
    return *choi_cache_;
  }

 private:
  std::shared_ptr<const HermitianBasis> basis_;
  CMatrix transfer_;
  mutable std::shared_ptr<CMatrix> natural_cache_;
  mutable std::shared_ptr<CMatrix> choi_cache_;
};

// trace preservation <=> first transfer row is (1, 0, ..., 0)
inline bool is_trace_preserving_exact(const Channel& ch) {
  const CMatrix& t = ch.transfer();
  if (!t.all_exact()) return false;
  for (size_t j = 0; j < t.cols(); ++j) {
    Scalar expect{Rational(j == 0 ? 1 : 0)};
    if (!(t.at(0, j).re == expect) || !t.at(0, j).im.is_exact_zero()) return false;
  }
  return true;
}

inline bool is_trace_preserving_certified(const Channel& ch, const Rational& tol) {
  const CMatrix& t = ch.transfer();
  for (size_t j = 0; j < t.cols(); ++j) {
    Rational expect = (j == 0) ? Rational(1) : Rational(0);
    Scalar gap = t.at(0, j).re - Scalar(expect);
    if (gap.to_interval().abs().hi_rational() > tol) return false;
    if (t.at(0, j).im.to_interval().abs().hi_rational() > tol) return false;
  }
  return true;
}

// unitality <=> first transfer column is (1, 0, ..., 0)^T
inline bool is_unital_exact(const Channel& ch) {
  const CMatrix& t = ch.transfer();
  if (!t.all_exact()) return false;
  for (size_t i = 0; i < t.rows(); ++i) {
    Scalar expect{Rational(i == 0 ? 1 : 0)};
    if (!(t.at(i, 0).re == expect) || !t.at(i, 0).im.is_exact_zero()) return false;
  }
  return true;
}

// complete positivity via a certified interval for lambda_min of the Choi
inline CpVerdict is_completely_positive(const Channel& ch, MinEigOptions opts = [] {
  MinEigOptions o;
  o.sign_only = true;
  return o;
}()) {
  CpVerdict out;
  const CMatrix& choi = ch.choi();
  if (choi.all_exact()) {
    Cert3 e = psd_by_elimination(choi);
    if (e != Cert3::unknown) {
      out.verdict = e;
      out.lambda_min = min_eigenvalue_interval(choi, opts);
      return out;
    }
  }
  out.lambda_min = min_eigenvalue_interval(choi, opts);
  if (mpfr_sgn(out.lambda_min.lo()) > 0)
    out.verdict = Cert3::yes;
  else if (out.lambda_min.is_negative())
    out.verdict = Cert3::no;
  else
    out.verdict = Cert3::unknown;
  return out;
}

inline CMatrix apply(const Channel& ch, const CMatrix& rho) {
  if (rho.rows() != ch.dim() || rho.cols() != ch.dim())
    fail(ErrorCode::DimensionMismatch, "apply: state dimension mismatch");
  std::vector<Scalar> coords = ch.basis().flatten(rho);
  const CMatrix& t = ch.transfer();
  std::vector<Scalar> image(coords.size(), Scalar(Rational(0)));
  for (size_t i = 0; i < t.rows(); ++i) {
    Scalar acc{Rational(0)};
    for (size_t j = 0; j < t.cols(); ++j) acc += t.at(i, j).re * coords[j];
    image[i] = acc;
  }
  return ch.basis().unflatten(image);
}

// compose(T1, T2): first T2, then T1 (transfer product T1_hat * T2_hat)
inline Channel compose(const Channel& t1, const Channel& t2) {
  if (t1.basis_ptr() != t2.basis_ptr())
    fail(ErrorCode::DimensionMismatch, "compose requires a shared operator basis");
  return Channel::from_transfer(t1.basis_ptr(), t1.transfer() * t2.transfer());
}

inline Channel tensor(const Channel& t1, const Channel& t2) {
  auto pb = std::make_shared<HermitianBasis>(product_basis(t1.basis(), t2.basis()));
  return Channel::from_transfer(std::move(pb), CMatrix::kron(t1.transfer(), t2.transfer()));
}

// <phi| rho |phi> for a rank-1 projector phi = |phi><phi|
inline Scalar fidelity_overlap(const CMatrix& phi_projector, const CMatrix& rho) {
  if (phi_projector.rows() != rho.rows() || phi_projector.cols() != rho.cols())
    fail(ErrorCode::DimensionMismatch, "fidelity_overlap dimension mismatch");
  return CMatrix::trace_product(phi_projector, rho).re;
}

inline Channel identity_channel(std::shared_ptr<const HermitianBasis> basis) {
  size_t d2 = basis->size();
  return Channel::from_transfer(std::move(basis), CMatrix::identity(d2));
}

// T(X) = tr[X] I / d
inline Channel depolarizing_channel(std::shared_ptr<const HermitianBasis> basis) {
  size_t d2 = basis->size();
  CMatrix t(d2, d2);
  t.at(0, 0) = CScalar(Rational(1));
  return Channel::from_transfer(std::move(basis), t);
}

// T(X) = U X U^dagger
inline Channel unitary_channel(std::shared_ptr<const HermitianBasis> basis, const CMatrix& u) {
  size_t d = basis->dim;
  if (u.rows() != d || u.cols() != d)
    fail(ErrorCode::DimensionMismatch, "unitary dimension mismatch");
  CMatrix natural(d * d, d * d);
  for (size_t a = 0; a < d; ++a)
    for (size_t b = 0; b < d; ++b)
      for (size_t c = 0; c < d; ++c)
        for (size_t e = 0; e < d; ++e)
          natural.at(a * d + b, c * d + e) = u.at(a, c) * u.at(b, e).conj();
  return Channel::from_natural(std::move(basis), natural);
}

// T(X) = X^T (Hermiticity-preserving, trace-preserving, not CP)
inline Channel transpose_map(std::shared_ptr<const HermitianBasis> basis) {
  size_t d = basis->dim;
  CMatrix natural(d * d, d * d);
  for (size_t a = 0; a < d; ++a)
    for (size_t b = 0; b < d; ++b) natural.at(a * d + b, b * d + a) = CScalar(Rational(1));
  return Channel::from_natural(std::move(basis), natural);
}

// overlap of phi with T_{w_1} ... T_{w_n}(rho) computed on transfer vectors
inline Scalar overlap_via_transfer(const std::vector<Channel>& channels,
                                   const std::vector<size_t>& word, const CMatrix& rho,
                                   const CMatrix& phi_projector) {
  if (channels.empty()) fail(ErrorCode::UsageError, "no channels");
  const HermitianBasis& basis = channels[0].basis();
  std::vector<Scalar> coords = basis.flatten(rho);
  // innermost channel is the last letter
  for (size_t k = word.size(); k-- > 0;) {
    const CMatrix& t = channels.at(word[k]).transfer();
    std::vector<Scalar> next(coords.size(), Scalar(Rational(0)));
    for (size_t i = 0; i < t.rows(); ++i) {
      Scalar acc{Rational(0)};
      for (size_t j = 0; j < t.cols(); ++j) acc += t.at(i, j).re * coords[j];
      next[i] = acc;
    }
    coords = std::move(next);
  }
  std::vector<Scalar> phi_coords = basis.flatten(phi_projector);
  Scalar acc{Rational(0)};
  for (size_t i = 0; i < coords.size(); ++i) acc += phi_coords[i] * coords[i];
  return acc;
}

}  // namespace qsalg
