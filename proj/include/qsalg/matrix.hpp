#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "qsalg/scalar.hpp"

namespace qsalg {

// Dense complex matrix over Scalar entries; the universal carrier for
// states, channels and gadget matrices.
class CMatrix {
 public:
  CMatrix() : rows_(0), cols_(0) {}
  CMatrix(size_t rows, size_t cols) : rows_(rows), cols_(cols), e_(rows * cols) {}

  static CMatrix identity(size_t d) {
    CMatrix m(d, d);
    for (size_t i = 0; i < d; ++i) m.at(i, i) = CScalar(Rational(1));
    return m;
  }

  static CMatrix zero(size_t rows, size_t cols) { return CMatrix(rows, cols); }

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  CScalar& at(size_t i, size_t j) { return e_[i * cols_ + j]; }
  const CScalar& at(size_t i, size_t j) const { return e_[i * cols_ + j]; }

  bool all_exact() const {
    for (const auto& z : e_)
      if (!z.is_exact()) return false;
    return true;
  }

  friend CMatrix operator+(const CMatrix& a, const CMatrix& b) {
    require_same_shape(a, b);
    CMatrix r(a.rows_, a.cols_);
    for (size_t k = 0; k < a.e_.size(); ++k) r.e_[k] = a.e_[k] + b.e_[k];
    return r;
  }

  friend CMatrix operator-(const CMatrix& a, const CMatrix& b) {
    require_same_shape(a, b);
    CMatrix r(a.rows_, a.cols_);
    for (size_t k = 0; k < a.e_.size(); ++k) r.e_[k] = a.e_[k] - b.e_[k];
    return r;
  }

  friend CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    if (a.cols_ != b.rows_) fail(ErrorCode::DimensionMismatch, "matrix product shape");
    CMatrix r(a.rows_, b.cols_);
    for (size_t i = 0; i < a.rows_; ++i)
      for (size_t j = 0; j < b.cols_; ++j) {
        CScalar acc;
        for (size_t k = 0; k < a.cols_; ++k) acc += a.at(i, k) * b.at(k, j);
        r.at(i, j) = acc;
      }
    return r;
  }

  friend CMatrix operator*(const CScalar& s, const CMatrix& m) {
    CMatrix r(m.rows_, m.cols_);
    for (size_t k = 0; k < m.e_.size(); ++k) r.e_[k] = s * m.e_[k];
    return r;
  }

  friend CMatrix operator*(const Scalar& s, const CMatrix& m) { return CScalar(s) * m; }
  friend CMatrix operator*(const Rational& q, const CMatrix& m) { return CScalar(q) * m; }

  CMatrix operator-() const {
    CMatrix r(rows_, cols_);
    for (size_t k = 0; k < e_.size(); ++k) r.e_[k] = -e_[k];
    return r;
  }

  CMatrix transpose() const {
    CMatrix r(cols_, rows_);
    for (size_t i = 0; i < rows_; ++i)
      for (size_t j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
    return r;
  }

  CMatrix conjugate() const {
    CMatrix r(rows_, cols_);
    for (size_t k = 0; k < e_.size(); ++k) r.e_[k] = e_[k].conj();
    return r;
  }

  CMatrix adjoint() const { return transpose().conjugate(); }

  CScalar trace() const {
    if (!is_square()) fail(ErrorCode::DimensionMismatch, "trace of non-square matrix");
    CScalar acc;
    for (size_t i = 0; i < rows_; ++i) acc += at(i, i);
    return acc;
  }

  // tr[A B]
  static CScalar trace_product(const CMatrix& a, const CMatrix& b) {
    if (a.cols_ != b.rows_ || a.rows_ != b.cols_)
      fail(ErrorCode::DimensionMismatch, "trace_product shape");
    CScalar acc;
    for (size_t i = 0; i < a.rows_; ++i)
      for (size_t k = 0; k < a.cols_; ++k) acc += a.at(i, k) * b.at(k, i);
    return acc;
  }

  static CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix r(a.rows_ * b.rows_, a.cols_ * b.cols_);
    for (size_t i = 0; i < a.rows_; ++i)
      for (size_t j = 0; j < a.cols_; ++j)
        for (size_t k = 0; k < b.rows_; ++k)
          for (size_t l = 0; l < b.cols_; ++l)
            r.at(i * b.rows_ + k, j * b.cols_ + l) = a.at(i, j) * b.at(k, l);
    return r;
  }

  // Exact Hermiticity test; requires exact entries.
  bool is_hermitian_exact() const {
    if (!is_square() || !all_exact()) return false;
    for (size_t i = 0; i < rows_; ++i) {
      if (!at(i, i).im.is_exact_zero()) return false;
      for (size_t j = i + 1; j < cols_; ++j)
        if (!(at(i, j) == at(j, i).conj())) return false;
    }
    return true;
  }

  // Hermiticity within tolerance: every entry of X - X^dagger has certified
  // magnitude at most tol.
  bool is_hermitian_certified(const Rational& tol) const {
    if (!is_square()) return false;
    for (size_t i = 0; i < rows_; ++i)
      for (size_t j = 0; j < cols_; ++j) {
        CScalar d = at(i, j) - at(j, i).conj();
        if (d.re.to_interval().abs().hi_rational() > tol) return false;
        if (d.im.to_interval().abs().hi_rational() > tol) return false;
      }
    return true;
  }

  CMatrix submatrix(const std::vector<size_t>& idx) const {
    CMatrix r(idx.size(), idx.size());
    for (size_t i = 0; i < idx.size(); ++i)
      for (size_t j = 0; j < idx.size(); ++j) r.at(i, j) = at(idx[i], idx[j]);
    return r;
  }

  // Frobenius norm as an interval (upper bounds the operator norm).
  Interval frobenius_norm() const {
    Interval acc(ambient_precision());
    for (const auto& z : e_) {
      acc = acc + z.re.to_interval() * z.re.to_interval() +
            z.im.to_interval() * z.im.to_interval();
    }
    return acc.sqrt();
  }

  // Reorders tensor factors: entry indices are mixed-radix words over `dims`;
  // factor t of the result is factor perm[t] of the input.
  CMatrix permute_factors(const std::vector<size_t>& dims, const std::vector<size_t>& perm) const {
    size_t total = 1;
    for (size_t d : dims) total *= d;
    if (total != rows_ || total != cols_) fail(ErrorCode::BadGrouping, "factor dims mismatch");
    std::vector<size_t> out_dims(dims.size());
    for (size_t t = 0; t < dims.size(); ++t) out_dims[t] = dims[perm[t]];
    auto decode = [](size_t x, const std::vector<size_t>& ds) {
      std::vector<size_t> digit(ds.size());
      for (size_t t = ds.size(); t-- > 0;) {
        digit[t] = x % ds[t];
        x /= ds[t];
      }
      return digit;
    };
    auto encode = [](const std::vector<size_t>& digit, const std::vector<size_t>& ds) {
      size_t x = 0;
      for (size_t t = 0; t < ds.size(); ++t) x = x * ds[t] + digit[t];
      return x;
    };
    CMatrix r(total, total);
    for (size_t i = 0; i < total; ++i) {
      auto di = decode(i, out_dims);
      std::vector<size_t> si(dims.size());
      for (size_t t = 0; t < dims.size(); ++t) si[perm[t]] = di[t];
      size_t ii = encode(si, dims);
      for (size_t j = 0; j < total; ++j) {
        auto dj = decode(j, out_dims);
        std::vector<size_t> sj(dims.size());
        for (size_t t = 0; t < dims.size(); ++t) sj[perm[t]] = dj[t];
        r.at(i, j) = at(ii, encode(sj, dims));
      }
    }
    return r;
  }

  std::string str() const {
    std::string out;
    for (size_t i = 0; i < rows_; ++i) {
      out += "[ ";
      for (size_t j = 0; j < cols_; ++j) out += at(i, j).str() + " ";
      out += "]\n";
    }
    return out;
  }

 private:
  static void require_same_shape(const CMatrix& a, const CMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
      fail(ErrorCode::DimensionMismatch, "matrix shapes differ");
  }

  size_t rows_, cols_;
  std::vector<CScalar> e_;
};

// Transpose of the first tensor factor of an operator on C^{dA} (x) C^{dB}.
inline CMatrix partial_transpose_first(const CMatrix& m, size_t da, size_t db) {
  if (m.rows() != da * db || m.cols() != da * db)
    fail(ErrorCode::BadGrouping, "partial transpose dims mismatch");
  CMatrix r(da * db, da * db);
  for (size_t a = 0; a < da; ++a)
    for (size_t b = 0; b < db; ++b)
      for (size_t c = 0; c < da; ++c)
        for (size_t d = 0; d < db; ++d)
          r.at(c * db + b, a * db + d) = m.at(a * db + b, c * db + d);
  return r;
}

// Trace over the second tensor factor of an operator on C^{dA} (x) C^{dB}.
inline CMatrix partial_trace_second(const CMatrix& m, size_t da, size_t db) {
  if (m.rows() != da * db || m.cols() != da * db)
    fail(ErrorCode::BadGrouping, "partial trace dims mismatch");
  CMatrix r(da, da);
  for (size_t a = 0; a < da; ++a)
    for (size_t c = 0; c < da; ++c) {
      CScalar acc;
      for (size_t b = 0; b < db; ++b) acc += m.at(a * db + b, c * db + b);
      r.at(a, c) = acc;
    }
  return r;
}

// Trace over the first tensor factor.
inline CMatrix partial_trace_first(const CMatrix& m, size_t da, size_t db) {
  if (m.rows() != da * db || m.cols() != da * db)
    fail(ErrorCode::BadGrouping, "partial trace dims mismatch");
  CMatrix r(db, db);
  for (size_t b = 0; b < db; ++b)
    for (size_t d = 0; d < db; ++d) {
      CScalar acc;
      for (size_t a = 0; a < da; ++a) acc += m.at(a * db + b, a * db + d);
      r.at(b, d) = acc;
    }
  return r;
}

// Dense integer matrix for word encodings and mortality search.
class IMatrix {
 public:
  IMatrix() : rows_(0), cols_(0) {}
  IMatrix(size_t rows, size_t cols) : rows_(rows), cols_(cols), e_(rows * cols, Integer(0)) {}

  static IMatrix identity(size_t d) {
    IMatrix m(d, d);
    for (size_t i = 0; i < d; ++i) m.at(i, i) = 1;
    return m;
  }

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }

  Integer& at(size_t i, size_t j) { return e_[i * cols_ + j]; }
  const Integer& at(size_t i, size_t j) const { return e_[i * cols_ + j]; }

  bool is_zero() const {
    for (const auto& x : e_)
      if (x != 0) return false;
    return true;
  }

  friend IMatrix operator*(const IMatrix& a, const IMatrix& b) {
    if (a.cols_ != b.rows_) fail(ErrorCode::DimensionMismatch, "integer matrix product shape");
    IMatrix r(a.rows_, b.cols_);
    for (size_t i = 0; i < a.rows_; ++i)
      for (size_t k = 0; k < a.cols_; ++k) {
        if (a.at(i, k) == 0) continue;
        for (size_t j = 0; j < b.cols_; ++j) r.at(i, j) += a.at(i, k) * b.at(k, j);
      }
    return r;
  }

  static IMatrix kron(const IMatrix& a, const IMatrix& b) {
    IMatrix r(a.rows_ * b.rows_, a.cols_ * b.cols_);
    for (size_t i = 0; i < a.rows_; ++i)
      for (size_t j = 0; j < a.cols_; ++j)
        for (size_t k = 0; k < b.rows_; ++k)
          for (size_t l = 0; l < b.cols_; ++l)
            r.at(i * b.rows_ + k, j * b.cols_ + l) = a.at(i, j) * b.at(k, l);
    return r;
  }

  friend bool operator==(const IMatrix& a, const IMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.e_ == b.e_;
  }

  std::string key() const {
    std::string out = std::to_string(rows_) + "x" + std::to_string(cols_) + ":";
    for (const auto& x : e_) {
      out += x.get_str();
      out += ',';
    }
    return out;
  }

 private:
  size_t rows_, cols_;
  std::vector<Integer> e_;
};

// <y| M |x> for integer/rational vectors.
inline Rational bilinear_form(const std::vector<Rational>& y, const IMatrix& m,
                              const std::vector<Rational>& x) {
  if (y.size() != m.rows() || x.size() != m.cols())
    fail(ErrorCode::DimensionMismatch, "bilinear form shape");
  Rational acc(0);
  for (size_t i = 0; i < m.rows(); ++i) {
    if (y[i] == 0) continue;
    Rational row(0);
    for (size_t j = 0; j < m.cols(); ++j) row += Rational(m.at(i, j)) * x[j];
    acc += y[i] * row;
  }
  return acc;
}

}  // namespace qsalg
