#pragma once

#include <optional>
#include <vector>

#include "qsalg/channels.hpp"
#include "qsalg/perron.hpp"
#include "qsalg/words.hpp"

namespace qsalg {

// --------------------------------------------------------------------------
// Kraus normalization: M_i' = X^{-1} M_i X / sqrt(lambda) with (lambda, X)
// the positive fixed point of Y -> sum_i M_i Y M_i^dagger. A word annihilates
// {M_i'} iff it annihilates {M_i} (similarity preserves zero products).

inline std::vector<CMatrix> kraus_normalize(const std::vector<CMatrix>& maps,
                                            const Rational& lambda, const CMatrix& x) {
  if (lambda <= 0) fail(ErrorCode::NoPositiveEigenvector, "lambda must be positive");
  CMatrix xinv = inverse_exact(x);
  Scalar inv_sqrt_lambda = Scalar(Rational(1)) / Scalar(lambda).sqrt();
  std::vector<CMatrix> out;
  out.reserve(maps.size());
  for (const auto& m : maps) out.push_back(CScalar(inv_sqrt_lambda) * (xinv * m * x));
  return out;
}

inline std::vector<CMatrix> kraus_normalize(const std::vector<CMatrix>& maps,
                                            PerronOptions opts = {}) {
  PerronPair p = perron_pair(maps, opts);
  return kraus_normalize(maps, p.lambda, p.x);
}

// certified upper bound on || sum_i K_i K_i^dagger - I ||_max
inline Rational kraus_residual(const std::vector<CMatrix>& kraus) {
  if (kraus.empty()) fail(ErrorCode::UsageError, "empty Kraus family");
  size_t d = kraus[0].rows();
  CMatrix acc(d, d);
  for (const auto& k : kraus) acc = acc + k * k.adjoint();
  acc = acc - CMatrix::identity(d);
  Rational worst(0);
  for (size_t i = 0; i < d; ++i)
    for (size_t j = 0; j < d; ++j) {
      Rational re = acc.at(i, j).re.to_interval().abs().hi_rational();
      Rational im = acc.at(i, j).im.to_interval().abs().hi_rational();
      if (re > worst) worst = re;
      if (im > worst) worst = im;
    }
  return worst;
}

// --------------------------------------------------------------------------
// Base-map lift: T_hat = [[1,0],[nu,0]] (+) eps*M in a basis anchored at psi.
// For nu strictly inside (-sqrt(d-1), 1/sqrt(d-1)) the eps = 0 Choi matrix is
// positive definite, so a computable eps > 0 keeps the lift CP.

struct ChannelLift {
  std::shared_ptr<const HermitianBasis> basis;
  Scalar nu;
  CMatrix m;          // real (d^2-2) x (d^2-2)
  Rational eps_star;  // certified CP-feasible bound

  CMatrix transfer_at(const Rational& eps) const {
    size_t d2 = basis->size();
    CMatrix t(d2, d2);
    t.at(0, 0) = CScalar(Rational(1));
    t.at(1, 0) = CScalar(nu);
    for (size_t i = 0; i < d2 - 2; ++i)
      for (size_t j = 0; j < d2 - 2; ++j) t.at(i + 2, j + 2) = CScalar(Scalar(eps)) * m.at(i, j);
    return t;
  }

  Channel channel_at(const Rational& eps) const {
    return Channel::from_transfer(basis, transfer_at(eps));
  }
};

namespace detail {

// admissible range: nu in (-sqrt(d-1), 1/sqrt(d-1)), strict
inline bool nu_in_range(const Scalar& nu, size_t d) {
  Scalar sq = Scalar::sqrt_rational(Rational(long(d - 1)));
  Scalar low_gap = nu + sq;           // must be > 0
  Scalar high_gap = Scalar(Rational(1)) / sq - nu;  // must be > 0
  return low_gap.certainly_positive() && high_gap.certainly_positive();
}

}  // namespace detail

inline ChannelLift lift_matrix_family(const CMatrix& m, const Scalar& nu, const CMatrix& psi,
                              std::shared_ptr<const HermitianBasis> basis) {
  size_t d = basis->dim;
  if (d < 2) fail(ErrorCode::UsageError, "lift needs d >= 2");
  if (m.rows() != d * d - 2 || m.cols() != d * d - 2)
    fail(ErrorCode::DimensionMismatch, "M must be (d^2-2) x (d^2-2)");
  if (!basis->anchor)
    fail(ErrorCode::UsageError, "lift requires a basis anchored at psi");
  if (!detail::nu_in_range(nu, d))
    fail(ErrorCode::NuOutOfRange, "nu must lie strictly inside (-sqrt(d-1), 1/sqrt(d-1))");
  (void)psi;

  // lambda_min of the eps = 0 Choi in closed form:
  //   (1/d^2) * min(1 - nu*sqrt(d-1), 1 + nu/sqrt(d-1))
  Scalar sq = Scalar::sqrt_rational(Rational(long(d - 1)));
  Scalar one{Rational(1)};
  Scalar eig_psi = one - nu * sq;
  Scalar eig_perp = one + nu / sq;
  Scalar mu_exact = (eig_psi - eig_perp).certainly_positive() ? eig_perp : eig_psi;
  mu_exact = mu_exact * Scalar(Rational(1, long(d * d)));
  // short dyadic bounds keep the downstream rationals small
  Rational mu = mu_exact.to_interval(64).lo_rational();
  if (mu <= 0) fail(ErrorCode::PrecisionExhausted, "could not certify the base Choi gap");

  // Choi image of the M-block perturbation at eps = 1
  ChannelLift probe{basis, nu, m, Rational(0)};
  CMatrix base = probe.transfer_at(Rational(0));
  CMatrix with_m = probe.transfer_at(Rational(1));
  Channel delta = Channel::from_transfer(basis, with_m - base);
  Rational delta_norm =
      Interval::from_rational(delta.choi().frobenius_norm().hi_rational(), 64).hi_rational();
  Rational denom = delta_norm > 1 ? delta_norm : Rational(1);

  Rational eps_star = Interval::from_rational(mu / (2 * denom), 64).lo_rational();
  if (eps_star <= 0) fail(ErrorCode::PrecisionExhausted, "CP-feasible eps underflow");
  ChannelLift lift{std::move(basis), nu, m, eps_star};
  return lift;
}

// --------------------------------------------------------------------------
// Full reachability gadget: channels {T_i}, state rho and constants with
//   tr[phi T_{i_1} ... T_{i_n}(rho)] = lambda + delta * eps^n <x| M_{i_1} ... M_{i_n} |y>.

struct GadgetBundle {
  size_t d = 0;
  Rational lambda;
  std::vector<CMatrix> m;         // source matrices, (d^2-2) square
  std::vector<Rational> x, y;
  std::vector<CScalar> phi_vec;   // normalized target vector
  CMatrix phi;                    // rank-1 target projector
  Scalar nu;
  Rational c;                     // |<psi|phi>|^2
  CMatrix psi;                    // anchor projector
  std::shared_ptr<const HermitianBasis> basis;
  Scalar delta1;
  Rational delta2;
  Scalar delta;                   // delta1 * delta2
  Rational eps;
  std::vector<Channel> channels;
  CMatrix rho;
};

namespace detail {

// deterministic unit vector orthogonal to phi: first standard basis vector
// with nonzero residual, orthogonalized and normalized
inline std::vector<CScalar> orthogonal_unit(const std::vector<CScalar>& phi) {
  size_t d = phi.size();
  for (size_t j = 0; j < d; ++j) {
    std::vector<CScalar> v(d);
    CScalar overlap = phi[j].conj();  // <phi|e_j>
    for (size_t i = 0; i < d; ++i) {
      v[i] = (i == j ? CScalar(Rational(1)) : CScalar()) - overlap * phi[i];
    }
    Scalar n2{Rational(0)};
    for (const auto& vi : v) n2 += vi.abs2();
    if (n2.is_exact() ? !n2.exact().is_zero() : n2.interval().is_positive()) {
      Scalar inv = Scalar(Rational(1)) / n2.sqrt();
      for (auto& vi : v) vi = CScalar(inv) * vi;
      return v;
    }
  }
  fail(ErrorCode::ZeroVector, "no orthogonal direction found");
}

inline CMatrix projector_of(const std::vector<CScalar>& v) {
  size_t d = v.size();
  CMatrix p(d, d);
  for (size_t i = 0; i < d; ++i)
    for (size_t j = 0; j < d; ++j) p.at(i, j) = v[i] * v[j].conj();
  return p;
}

struct NuC {
  Scalar nu;
  Rational c;
};

// Deterministic (nu, c) selection: hits the target threshold lambda with nu
// strictly inside the CP-admissible interval, c in [0, 1) and a positive
// alignment residual. For
// t = lambda*d - 1 < 0 the offset eta is capped at (1 - |t|)/2 so the lower
// nu bound stays strict (a fixed eta = 1/4 fails for t <= -3/4).
inline NuC select_nu_c(const Rational& lambda, size_t d) {
  Rational t = lambda * long(d) - 1;
  Scalar sq = Scalar::sqrt_rational(Rational(long(d - 1)));
  if (t == 0) return {Scalar(Rational(0)), Rational(1, long(d))};
  if (t > 0) {
    Rational eta = (1 - t / long(d - 1)) / 2;
    Rational c = (1 + Rational(long(d - 1)) * (1 - eta)) / long(d);
    Scalar nu = Scalar(-t / (1 - eta)) / sq;
    return {nu, c};
  }
  Rational abs_t = -t;
  Rational eta0 = Rational(1, 4);
  Rational cap = (1 - abs_t) / 2;
  if (cap < eta0) eta0 = cap;
  Rational c = eta0 / long(d);
  Scalar nu = Scalar(t / (1 - eta0)) * sq;
  return {nu, c};
}

}  // namespace detail

inline GadgetBundle build_gadget(const Rational& lambda, const std::vector<CScalar>& phi_in,
                                const std::vector<CMatrix>& matrices,
                                const std::vector<Rational>& x, const std::vector<Rational>& y) {
  GadgetBundle b;
  b.d = phi_in.size();
  size_t d = b.d;
  if (d < 2) fail(ErrorCode::UsageError, "target dimension must be >= 2");
  if (!(lambda > 0 && lambda < 1))
    fail(ErrorCode::UsageError, "lambda must lie in the open interval (0,1)");
  if (matrices.empty()) fail(ErrorCode::UsageError, "at least one matrix required");
  size_t n = d * d - 2;
  for (const auto& m : matrices)
    if (m.rows() != n || m.cols() != n)
      fail(ErrorCode::DimensionMismatch, "matrices must be (d^2-2) square");
  if (x.size() != n || y.size() != n)
    fail(ErrorCode::DimensionMismatch, "x and y must have length d^2-2");
  bool x_zero = true, y_zero = true;
  for (const auto& v : x) x_zero &= (v == 0);
  for (const auto& v : y) y_zero &= (v == 0);
  if (x_zero) fail(ErrorCode::ZeroVector, "x must be nonzero");
  if (y_zero) fail(ErrorCode::ZeroVector, "y must be nonzero");
  b.lambda = lambda;
  b.m = matrices;
  b.x = x;
  b.y = y;

  // normalize the target vector exactly (norm^2 is rational for rational input)
  Scalar norm2{Rational(0)};
  for (const auto& z : phi_in) norm2 += z.abs2();
  if (norm2.is_exact() && norm2.exact().is_zero())
    fail(ErrorCode::ZeroVector, "phi must be nonzero");
  Scalar inv_norm = Scalar(Rational(1)) / norm2.sqrt();
  b.phi_vec.reserve(d);
  for (const auto& z : phi_in) b.phi_vec.push_back(CScalar(inv_norm) * z);
  b.phi = detail::projector_of(b.phi_vec);

  // (nu, c) selection and constraint asserts (C1)-(C4)
  auto [nu, c] = detail::select_nu_c(lambda, d);
  b.nu = nu;
  b.c = c;
  Scalar sq = Scalar::sqrt_rational(Rational(long(d - 1)));
  Scalar lhs_c1 = Scalar(Rational(1, long(d))) *
                  (Scalar(Rational(1)) + nu * Scalar(1 - Rational(long(d)) * c) / sq);
  if (!(lhs_c1 - Scalar(lambda)).is_exact_zero())
    fail(ErrorCode::InfeasibleParameters, "(C1) threshold identity violated");
  if (!detail::nu_in_range(nu, d))
    fail(ErrorCode::InfeasibleParameters, "(C2) nu outside the admissible interval");
  if (!(c >= 0 && c < 1)) fail(ErrorCode::InfeasibleParameters, "(C3) c outside [0,1)");
  Rational one_minus_dc = 1 - Rational(long(d)) * c;
  Rational r = 1 - Rational(1, long(d)) -
               one_minus_dc * one_minus_dc / Rational(long(d * d - d));
  if (!(r > 0)) fail(ErrorCode::InfeasibleParameters, "(C4) alignment residual not positive");

  // psi with |<psi|phi>|^2 = c
  std::vector<CScalar> phi_perp = detail::orthogonal_unit(b.phi_vec);
  Scalar rc = Scalar::sqrt_rational(c);
  Scalar rcb = Scalar::sqrt_rational(1 - c);
  std::vector<CScalar> psi_vec(d);
  for (size_t i = 0; i < d; ++i)
    psi_vec[i] = CScalar(rc) * b.phi_vec[i] + CScalar(rcb) * phi_perp[i];
  b.psi = detail::projector_of(psi_vec);
  Scalar overlap_check = CMatrix::trace_product(b.psi, b.phi).re - Scalar(c);
  if (overlap_check.is_exact() && !overlap_check.is_exact_zero())
    fail(ErrorCode::InfeasibleParameters, "psi construction missed the overlap target");

  // aligned basis and the alignment factor delta1 = sqrt(r)/||x||
  b.basis = std::make_shared<HermitianBasis>(
      hermitian_basis(d, b.psi, BasisAlignment{b.phi, x}));
  b.delta1 = b.basis->delta1;

  // delta2 keeps rho = unflatten(1/sqrt(d), 0, delta2*y) >= I/(2d)
  Rational y_norm2(0);
  for (const auto& yi : y) y_norm2 += yi * yi;
  Rational y_bound = Scalar::sqrt_rational(y_norm2).to_interval(64).hi_rational();
  b.delta2 = Interval::from_rational(1 / (2 * Rational(long(d)) * y_bound), 64).lo_rational();
  if (b.delta2 <= 0) fail(ErrorCode::PrecisionExhausted, "delta2 underflow");
  b.delta = b.delta1 * Scalar(b.delta2);

  std::vector<Scalar> coords(d * d, Scalar(Rational(0)));
  coords[0] = Scalar::sqrt_rational(Rational(1, long(d)));
  for (size_t i = 0; i < n; ++i) coords[i + 2] = Scalar(b.delta2 * y[i]);
  b.rho = b.basis->unflatten(coords);

  // common eps across all lifts, halved
  Rational eps_min(0);
  bool first = true;
  std::vector<ChannelLift> lifts;
  for (const auto& m : matrices) {
    ChannelLift lift = lift_matrix_family(m, nu, b.psi, b.basis);
    if (first || lift.eps_star < eps_min) eps_min = lift.eps_star;
    first = false;
    lifts.push_back(std::move(lift));
  }
  b.eps = eps_min / 2;
  for (const auto& lift : lifts) b.channels.push_back(lift.channel_at(b.eps));
  return b;
}

// Certified validity of every bundle invariant: channels CP+TP, rho a
// certified state, threshold identity for the constants.
struct BundleCheck {
  bool ok = true;
  std::vector<std::string> failures;
  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      failures.push_back(what);
    }
  }
};

inline BundleCheck verify_bundle(const GadgetBundle& b) {
  BundleCheck out;
  Rational tp_tol(1, Integer(1) << 100);
  for (size_t i = 0; i < b.channels.size(); ++i) {
    const Channel& ch = b.channels[i];
    bool tp = is_trace_preserving_exact(ch) || is_trace_preserving_certified(ch, tp_tol);
    out.expect(tp, "channel " + std::to_string(i + 1) + " not trace-preserving");
    out.expect(is_completely_positive(ch).verdict == Cert3::yes,
               "channel " + std::to_string(i + 1) + " not certified CP");
  }
  Scalar tr_gap = b.rho.trace().re - Scalar(Rational(1));
  bool tr_ok = tr_gap.is_exact() ? tr_gap.is_exact_zero()
                                 : tr_gap.to_interval().abs().hi_rational() < tp_tol;
  out.expect(tr_ok, "rho trace differs from 1");
  out.expect(psd_certify(b.rho) == Cert3::yes, "rho not certified PSD");
  // threshold identity within certified interval
  Scalar sq = Scalar::sqrt_rational(Rational(long(b.d - 1)));
  Scalar lhs = Scalar(Rational(1, long(b.d))) *
               (Scalar(Rational(1)) + b.nu * Scalar(1 - Rational(long(b.d)) * b.c) / sq);
  Interval diff = (lhs - Scalar(b.lambda)).to_interval();
  out.expect(diff.contains(Rational(0)), "threshold identity interval misses lambda");
  out.expect(b.eps > 0, "eps not positive");
  out.expect(b.delta1.certainly_positive(), "delta1 not positive");
  out.expect(b.delta2 > 0, "delta2 not positive");
  return out;
}

// <x| M_{w_1} ... M_{w_n} |y> over the bundle's source matrices (1-based word)
inline Scalar bundle_matrix_form(const GadgetBundle& b, const Word& word) {
  size_t n = b.m[0].rows();
  CMatrix prod = CMatrix::identity(n);
  for (unsigned letter : word) {
    if (letter < 1 || letter > b.m.size())
      fail(ErrorCode::LetterOutOfRange, "word letter outside 1..k");
    prod = prod * b.m[letter - 1];
  }
  Scalar acc{Rational(0)};
  for (size_t i = 0; i < n; ++i) {
    Scalar row{Rational(0)};
    for (size_t j = 0; j < n; ++j) row += prod.at(i, j).re * Scalar(b.y[j]);
    acc += Scalar(b.x[i]) * row;
  }
  return acc;
}

struct GadgetIdentity {
  Scalar lhs;          // full channel-composition path
  Scalar rhs;          // block formula lambda + delta eps^n <x|prod M|y>
  Interval difference; // certified interval of lhs - rhs
};

inline GadgetIdentity verify_gadget_identity(const GadgetBundle& b, const Word& word) {
  if (word.empty()) fail(ErrorCode::UsageError, "word must be nonempty (n >= 1)");
  CMatrix state = b.rho;
  for (size_t k = word.size(); k-- > 0;) {
    unsigned letter = word[k];
    if (letter < 1 || letter > b.channels.size())
      fail(ErrorCode::LetterOutOfRange, "word letter outside 1..k");
    state = apply(b.channels[letter - 1], state);
  }
  GadgetIdentity out;
  out.lhs = fidelity_overlap(b.phi, state);
  Scalar eps_pow{Rational(1)};
  for (size_t k = 0; k < word.size(); ++k) eps_pow = eps_pow * Scalar(b.eps);
  out.rhs = Scalar(b.lambda) + b.delta * eps_pow * bundle_matrix_form(b, word);
  out.difference = (out.lhs - out.rhs).to_interval();
  return out;
}

}  // namespace qsalg
