#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qsalg/ext.hpp"
#include "qsalg/rational.hpp"

namespace qsalg {

// Sparse multivariate polynomial over Q with variables identified by index.
class Poly {
 public:
  // monomial: sorted (variable, exponent) pairs with positive exponents
  using Monomial = std::vector<std::pair<uint32_t, uint32_t>>;

  Poly() = default;

  static Poly constant(const Rational& c) {
    Poly p;
    if (c != 0) p.terms_[{}] = c;
    return p;
  }

  static Poly variable(uint32_t v) {
    Poly p;
    p.terms_[{{v, 1}}] = Rational(1);
    return p;
  }

  bool is_zero() const { return terms_.empty(); }

  bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
  }

  Rational constant_value() const {
    if (terms_.empty()) return Rational(0);
    auto it = terms_.find({});
    return it == terms_.end() ? Rational(0) : it->second;
  }

  size_t total_degree() const {
    size_t deg = 0;
    for (const auto& [m, c] : terms_) {
      size_t d = 0;
      for (auto [v, e] : m) d += e;
      deg = std::max(deg, d);
    }
    return deg;
  }

  void collect_variables(std::vector<uint32_t>& out) const {
    for (const auto& [m, c] : terms_)
      for (auto [v, e] : m) out.push_back(v);
  }

  friend Poly operator+(const Poly& a, const Poly& b) {
    Poly r = a;
    for (const auto& [m, c] : b.terms_) {
      auto it = r.terms_.find(m);
      if (it == r.terms_.end()) {
        r.terms_.emplace(m, c);
      } else {
        it->second += c;
        if (it->second == 0) r.terms_.erase(it);
      }
    }
    return r;
  }

  friend Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }

  Poly operator-() const {
    Poly r = *this;
    for (auto& [m, c] : r.terms_) c = -c;
    return r;
  }

  friend Poly operator*(const Poly& a, const Poly& b) {
    Poly r;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) {
        Monomial m;
        m.reserve(ma.size() + mb.size());
        size_t i = 0, j = 0;
        while (i < ma.size() || j < mb.size()) {
          if (j == mb.size() || (i < ma.size() && ma[i].first < mb[j].first))
            m.push_back(ma[i++]);
          else if (i == ma.size() || mb[j].first < ma[i].first)
            m.push_back(mb[j++]);
          else {
            m.push_back({ma[i].first, ma[i].second + mb[j].second});
            ++i;
            ++j;
          }
        }
        Rational c = ca * cb;
        auto it = r.terms_.find(m);
        if (it == r.terms_.end()) {
          r.terms_.emplace(std::move(m), c);
        } else {
          it->second += c;
          if (it->second == 0) r.terms_.erase(it);
        }
      }
    return r;
  }

  friend Poly operator*(const Rational& c, const Poly& p) { return Poly::constant(c) * p; }

  Poly& operator+=(const Poly& o) { return *this = *this + o; }
  Poly& operator-=(const Poly& o) { return *this = *this - o; }
  Poly& operator*=(const Poly& o) { return *this = *this * o; }

  friend bool operator==(const Poly& a, const Poly& b) { return a.terms_ == b.terms_; }

  // exact evaluation over any field with Rational coefficients
  template <typename T>
  T eval(const std::vector<T>& values) const {
    T acc = T(Rational(0));
    for (const auto& [m, c] : terms_) {
      T term = T(c);
      for (auto [v, e] : m) {
        if (v >= values.size()) fail(ErrorCode::IncompleteAssignment, "unbound variable in poly");
        for (uint32_t k = 0; k < e; ++k) term = term * values[v];
      }
      acc = acc + term;
    }
    return acc;
  }

  double eval_double(const std::vector<double>& values) const {
    double acc = 0;
    for (const auto& [m, c] : terms_) {
      double term = c.get_d();
      for (auto [v, e] : m)
        for (uint32_t k = 0; k < e; ++k) term *= values[v];
      acc += term;
    }
    return acc;
  }

  const std::map<Monomial, Rational>& terms() const { return terms_; }

  std::string str(const std::vector<std::string>& names) const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [m, c] : terms_) {
      if (!first) out += " + ";
      first = false;
      out += c.get_str();
      for (auto [v, e] : m) {
        out += "*" + (v < names.size() ? names[v] : "v" + std::to_string(v));
        if (e > 1) out += "^" + std::to_string(e);
      }
    }
    return out;
  }

 private:
  std::map<Monomial, Rational> terms_;
};

// Complex polynomial: pair of real polynomials over real variables.
struct CPoly {
  Poly re, im;

  CPoly() = default;
  CPoly(Poly r) : re(std::move(r)) {}
  CPoly(Poly r, Poly i) : re(std::move(r)), im(std::move(i)) {}

  static CPoly constant(const Rational& r, const Rational& i = Rational(0)) {
    return CPoly(Poly::constant(r), Poly::constant(i));
  }

  bool is_zero() const { return re.is_zero() && im.is_zero(); }

  CPoly conj() const { return CPoly(re, -im); }

  friend CPoly operator+(const CPoly& a, const CPoly& b) {
    return CPoly(a.re + b.re, a.im + b.im);
  }
  friend CPoly operator-(const CPoly& a, const CPoly& b) {
    return CPoly(a.re - b.re, a.im - b.im);
  }
  friend CPoly operator*(const CPoly& a, const CPoly& b) {
    return CPoly(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
  }
  CPoly operator-() const { return CPoly(-re, -im); }
  CPoly& operator+=(const CPoly& o) { return *this = *this + o; }
  CPoly& operator-=(const CPoly& o) { return *this = *this - o; }
};

// Dense matrix of complex polynomials for symbolic channel/state algebra.
class SymMatrix {
 public:
  SymMatrix() : rows_(0), cols_(0) {}
  SymMatrix(size_t rows, size_t cols) : rows_(rows), cols_(cols), e_(rows * cols) {}

  static SymMatrix identity(size_t d) {
    SymMatrix m(d, d);
    for (size_t i = 0; i < d; ++i) m.at(i, i) = CPoly::constant(Rational(1));
    return m;
  }

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  CPoly& at(size_t i, size_t j) { return e_[i * cols_ + j]; }
  const CPoly& at(size_t i, size_t j) const { return e_[i * cols_ + j]; }

  friend SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
    SymMatrix r(a.rows_, a.cols_);
    for (size_t k = 0; k < a.e_.size(); ++k) r.e_[k] = a.e_[k] + b.e_[k];
    return r;
  }
  friend SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
    SymMatrix r(a.rows_, a.cols_);
    for (size_t k = 0; k < a.e_.size(); ++k) r.e_[k] = a.e_[k] - b.e_[k];
    return r;
  }
  friend SymMatrix operator*(const SymMatrix& a, const SymMatrix& b) {
    if (a.cols_ != b.rows_) fail(ErrorCode::DimensionMismatch, "symbolic product shape");
    SymMatrix r(a.rows_, b.cols_);
    for (size_t i = 0; i < a.rows_; ++i)
      for (size_t j = 0; j < b.cols_; ++j) {
        CPoly acc;
        for (size_t k = 0; k < a.cols_; ++k) acc += a.at(i, k) * b.at(k, j);
        r.at(i, j) = acc;
      }
    return r;
  }
  friend SymMatrix operator*(const CPoly& s, const SymMatrix& m) {
    SymMatrix r(m.rows_, m.cols_);
    for (size_t k = 0; k < m.e_.size(); ++k) r.e_[k] = s * m.e_[k];
    return r;
  }

  SymMatrix adjoint() const {
    SymMatrix r(cols_, rows_);
    for (size_t i = 0; i < rows_; ++i)
      for (size_t j = 0; j < cols_; ++j) r.at(j, i) = at(i, j).conj();
    return r;
  }

  static SymMatrix kron(const SymMatrix& a, const SymMatrix& b) {
    SymMatrix r(a.rows_ * b.rows_, a.cols_ * b.cols_);
    for (size_t i = 0; i < a.rows_; ++i)
      for (size_t j = 0; j < a.cols_; ++j)
        for (size_t k = 0; k < b.rows_; ++k)
          for (size_t l = 0; l < b.cols_; ++l)
            r.at(i * b.rows_ + k, j * b.cols_ + l) = a.at(i, j) * b.at(k, l);
    return r;
  }

  CPoly trace() const {
    CPoly acc;
    for (size_t i = 0; i < rows_; ++i) acc += at(i, i);
    return acc;
  }

  SymMatrix submatrix(const std::vector<size_t>& rows, const std::vector<size_t>& cols) const {
    SymMatrix r(rows.size(), cols.size());
    for (size_t i = 0; i < rows.size(); ++i)
      for (size_t j = 0; j < cols.size(); ++j) r.at(i, j) = at(rows[i], cols[j]);
    return r;
  }

  // Laplace-expansion determinant (no divisions; exponential, small n only)
  CPoly det() const {
    if (rows_ != cols_) fail(ErrorCode::DimensionMismatch, "symbolic det shape");
    size_t n = rows_;
    if (n == 0) return CPoly::constant(Rational(1));
    if (n > 8) fail(ErrorCode::CapExceeded, "symbolic determinant limited to n <= 8");
    std::vector<CPoly> memo(size_t(1) << n);
    std::vector<bool> have(size_t(1) << n, false);
    std::function<CPoly(uint32_t)> rec = [&](uint32_t mask) -> CPoly {
      if (mask == 0) return CPoly::constant(Rational(1));
      if (have[mask]) return memo[mask];
      size_t row = n - size_t(__builtin_popcount(mask));
      CPoly acc;
      int parity = 0;
      for (size_t j = 0; j < n; ++j) {
        if (!(mask & (1u << j))) continue;
        if (!at(row, j).is_zero()) {
          CPoly term = at(row, j) * rec(mask & ~(1u << j));
          acc = (parity % 2 == 0) ? acc + term : acc - term;
        }
        ++parity;
      }
      have[mask] = true;
      memo[mask] = acc;
      return acc;
    };
    return rec((1u << n) - 1);
  }

 private:
  size_t rows_, cols_;
  std::vector<CPoly> e_;
};

}  // namespace qsalg
