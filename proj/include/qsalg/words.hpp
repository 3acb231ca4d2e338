#pragma once

#include <vector>

#include "qsalg/matrix.hpp"

namespace qsalg {

// Words carry 1-based letters (alphabet {1..m}) or 1-based tile indices.
using Word = std::vector<unsigned>;

// m-adic value of a word: sigma(w) = sum_j w_j m^(|w|-j); empty word -> 0.
// Satisfies sigma(uw) = m^|w| sigma(u) + sigma(w).
inline Integer sigma(const Word& w, unsigned m) {
  Integer acc = 0;
  for (unsigned letter : w) {
    if (letter < 1 || letter > m)
      fail(ErrorCode::LetterOutOfRange, "letter " + std::to_string(letter) + " outside 1.." +
                                            std::to_string(m));
    acc = acc * m + letter;
  }
  return acc;
}

// Monoid embedding of word pairs into 3x3 integer matrices:
//   diag(m^|u|, m^|w|, 1) with bottom row (sigma(u), sigma(w), 1).
inline IMatrix gamma(const Word& u, const Word& w, unsigned m) {
  IMatrix g(3, 3);
  Integer mu, mw;
  mpz_ui_pow_ui(mu.get_mpz_t(), m, u.size());
  mpz_ui_pow_ui(mw.get_mpz_t(), m, w.size());
  g.at(0, 0) = mu;
  g.at(1, 1) = mw;
  g.at(2, 0) = sigma(u, m);
  g.at(2, 1) = sigma(w, m);
  g.at(2, 2) = 1;
  return g;
}

// <y| gamma(u,w) |x> = sigma(u) - sigma(w) for x = (1,-1,0)^T, y = (0,0,1).
inline std::vector<Rational> gamma_x() { return {Rational(1), Rational(-1), Rational(0)}; }
inline std::vector<Rational> gamma_y() { return {Rational(0), Rational(0), Rational(1)}; }

// Squared encoding gamma (x) gamma with X = x (x) x, Y = y (x) y:
// <Y| (gamma(x)gamma)(u,w) |X> = (sigma(u) - sigma(w))^2.
inline IMatrix gamma_square(const Word& u, const Word& w, unsigned m) {
  IMatrix g = gamma(u, w, m);
  return IMatrix::kron(g, g);
}

inline std::vector<Rational> kron_vector(const std::vector<Rational>& a,
                                         const std::vector<Rational>& b) {
  std::vector<Rational> out;
  out.reserve(a.size() * b.size());
  for (const auto& ai : a)
    for (const auto& bi : b) out.push_back(ai * bi);
  return out;
}

inline std::vector<Rational> gamma_square_x() { return kron_vector(gamma_x(), gamma_x()); }
inline std::vector<Rational> gamma_square_y() { return kron_vector(gamma_y(), gamma_y()); }

inline Word concat(const Word& a, const Word& b) {
  Word out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

// Matrix family of a tile set: products over index words track the paired
// concatenations, gamma(X(w), Y(w)) = gamma(X_w1,Y_w1) ... gamma(X_wn,Y_wn),
// so an index word solves the correspondence iff <y| product |x> = 0.
template <typename TileList>
std::vector<IMatrix> gamma_family(const TileList& tiles, unsigned m) {
  std::vector<IMatrix> out;
  out.reserve(tiles.size());
  for (const auto& [top, bottom] : tiles) out.push_back(gamma(top, bottom, m));
  return out;
}

// Squared variant: <Y| product |X> = (sigma(X(w)) - sigma(Y(w)))^2 >= 0.
template <typename TileList>
std::vector<IMatrix> gamma_square_family(const TileList& tiles, unsigned m) {
  std::vector<IMatrix> out;
  out.reserve(tiles.size());
  for (const auto& [top, bottom] : tiles) out.push_back(gamma_square(top, bottom, m));
  return out;
}

}  // namespace qsalg
